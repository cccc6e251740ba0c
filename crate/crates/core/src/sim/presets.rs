//! Built-in scenario suites reproducing the published operating-characteristic
//! studies, together with the published reference values the reproductions
//! are compared against.
//!
//! Six suites are provided. `T5` is the shared-truth study (n = 40 per arm,
//! 9 scenarios, truth from the two-proportion-test oracle). `T6`/`S2` are the
//! two-endpoint per-method-truth studies (n = 30, low-dose efficacy 0.23 and
//! 0.40 respectively). `T7`/`S3`/`S4` add a biomarker endpoint (low rate 0.2)
//! with the offset-built utility table and CUI weights (0.3, 0.6, 0.1).
//! Every suite runs under one or both decision regimes: regime 1 uses
//! alpha1 = 0.2 with consider-as-low, regime 2 uses alpha1 = 0.34 with
//! consider-as-high.

use crate::decision::{AdmissibilityConfig, ConsiderPolicy, DecisionConfig};
use crate::empirical::{EmpiricalConsiderPolicy, EmpiricalThresholds};
use crate::error::{Error, Result};
use crate::sim::{Correlations, MethodSetup, ScenarioSpec, TruthMode, UTILITY_TRUTH_DELTA};
use crate::utility::{
    utility3_from_offsets, CuiWeights, MarginalRates, OffsetSpec, UtilityTable2, UtilityTable3,
};

/// Identifier of a built-in scenario suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PresetId {
    T5,
    T6,
    T7,
    S2,
    S3,
    S4,
}

impl PresetId {
    pub fn all() -> [PresetId; 6] {
        [PresetId::T5, PresetId::T6, PresetId::T7, PresetId::S2, PresetId::S3, PresetId::S4]
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "T5" => Ok(PresetId::T5),
            "T6" => Ok(PresetId::T6),
            "T7" => Ok(PresetId::T7),
            "S2" => Ok(PresetId::S2),
            "S3" => Ok(PresetId::S3),
            "S4" => Ok(PresetId::S4),
            other => Err(Error::InvalidParameter(format!(
                "unknown preset '{other}'; valid presets are T5, T6, T7, S2, S3, S4"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PresetId::T5 => "T5",
            PresetId::T6 => "T6",
            PresetId::T7 => "T7",
            PresetId::S2 => "S2",
            PresetId::S3 => "S3",
            PresetId::S4 => "S4",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            PresetId::T5 => "two endpoints, n=40/arm, shared two-proportion-test truth",
            PresetId::T6 => "two endpoints, n=30/arm, low efficacy 0.23, per-method truth",
            PresetId::T7 => "three endpoints, n=30/arm, low efficacy 0.23, per-method truth",
            PresetId::S2 => "two endpoints, n=30/arm, low efficacy 0.40, per-method truth",
            PresetId::S3 => "three endpoints, n=30/arm, low efficacy 0.40, regime 1",
            PresetId::S4 => "three endpoints, n=30/arm, low efficacy 0.40, regime 2",
        }
    }

    /// Decision regimes this suite publishes results for.
    pub fn regimes(&self) -> &'static [Regime] {
        match self {
            PresetId::T5 | PresetId::T6 | PresetId::T7 | PresetId::S2 => &[Regime::R1, Regime::R2],
            PresetId::S3 => &[Regime::R1],
            PresetId::S4 => &[Regime::R2],
        }
    }
}

/// Decision regime: the sequential comparison level paired with the consider
/// disposition applied wherever a consider zone arises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// alpha1 = 0.20, consider resolves to the low dose.
    R1,
    /// alpha1 = 0.34, consider resolves to the high dose.
    R2,
}

impl Regime {
    pub fn alpha1(&self) -> f64 {
        match self {
            Regime::R1 => 0.20,
            Regime::R2 => 0.34,
        }
    }

    pub fn alpha2(&self) -> f64 {
        match self {
            Regime::R1 => 0.34,
            Regime::R2 => 0.50,
        }
    }

    pub fn consider_low(&self) -> bool {
        matches!(self, Regime::R1)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Regime::R1 => "r1",
            Regime::R2 => "r2",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "r1" | "1" => Ok(Regime::R1),
            "r2" | "2" => Ok(Regime::R2),
            other => Err(Error::InvalidParameter(format!(
                "unknown regime '{other}'; valid regimes are r1 and r2"
            ))),
        }
    }
}

/// Published reference values for one scenario of a suite under one regime.
/// Truth doses are 1-based levels; percent-correct values are on the 0-100
/// scale. CUI fields are absent for two-endpoint suites, percent fields are
/// absent where the study published only the truth column.
#[derive(Debug, Clone, Copy)]
pub struct PublishedRow {
    pub scenario: usize,
    pub truth_emp: u32,
    pub truth_umet: u32,
    pub truth_cui: Option<u32>,
    pub pct_emp: Option<f64>,
    pub pct_umet: Option<f64>,
    pub pct_cui: Option<f64>,
}

const fn row2(
    scenario: usize,
    truth_emp: u32,
    truth_umet: u32,
    pct_emp: f64,
    pct_umet: f64,
) -> PublishedRow {
    PublishedRow {
        scenario,
        truth_emp,
        truth_umet,
        truth_cui: None,
        pct_emp: Some(pct_emp),
        pct_umet: Some(pct_umet),
        pct_cui: None,
    }
}

const fn row3(
    scenario: usize,
    truth_emp: u32,
    truth_umet: u32,
    truth_cui: u32,
    pct_emp: f64,
    pct_umet: f64,
    pct_cui: f64,
) -> PublishedRow {
    PublishedRow {
        scenario,
        truth_emp,
        truth_umet,
        truth_cui: Some(truth_cui),
        pct_emp: Some(pct_emp),
        pct_umet: Some(pct_umet),
        pct_cui: Some(pct_cui),
    }
}

const fn truth_only(scenario: usize, truth: u32) -> PublishedRow {
    PublishedRow {
        scenario,
        truth_emp: truth,
        truth_umet: truth,
        truth_cui: None,
        pct_emp: None,
        pct_umet: None,
        pct_cui: None,
    }
}

// ----- raw scenario rate tables -----

struct RawPreset {
    low_eff: f64,
    low_tox: f64,
    low_bio: Option<f64>,
    n: u32,
    // High-dose (efficacy, toxicity, biomarker) vectors per scenario.
    scenarios: &'static [(&'static [f64], &'static [f64], &'static [f64])],
    shared_truth: bool,
}

const NO_BIO: &[f64] = &[];

const T5_RAW: RawPreset = RawPreset {
    low_eff: 0.40,
    low_tox: 0.13,
    low_bio: None,
    n: 40,
    scenarios: &[
        (&[0.45, 0.55, 0.75], &[0.15, 0.20, 0.28], NO_BIO),
        (&[0.45, 0.55], &[0.15, 0.20], NO_BIO),
        (&[0.45, 0.75], &[0.15, 0.28], NO_BIO),
        (&[0.55, 0.45], &[0.15, 0.20], NO_BIO),
        (&[0.55, 0.75], &[0.20, 0.28], NO_BIO),
        (&[0.45, 0.58, 0.80], &[0.17, 0.23, 0.30], NO_BIO),
        (&[0.58, 0.80], &[0.17, 0.23], NO_BIO),
        (&[0.45, 0.80], &[0.17, 0.30], NO_BIO),
        (&[0.58, 0.80], &[0.23, 0.23], NO_BIO),
    ],
    shared_truth: true,
};

const T6_RAW: RawPreset = RawPreset {
    low_eff: 0.23,
    low_tox: 0.13,
    low_bio: None,
    n: 30,
    scenarios: &[
        (&[0.47, 0.70], &[0.20, 0.28], NO_BIO),
        (&[0.27, 0.70], &[0.15, 0.28], NO_BIO),
        (&[0.27, 0.47], &[0.15, 0.20], NO_BIO),
        (&[0.47, 0.70], &[0.15, 0.20], NO_BIO),
        (&[0.47, 0.70], &[0.20, 0.20], NO_BIO),
        (&[0.47, 0.70], &[0.28, 0.28], NO_BIO),
        (&[0.27, 0.47, 0.70], &[0.15, 0.20, 0.28], NO_BIO),
        (&[0.47, 0.27], &[0.15, 0.20], NO_BIO),
        (&[0.47, 0.47], &[0.15, 0.20], NO_BIO),
    ],
    shared_truth: false,
};

const T7_RAW: RawPreset = RawPreset {
    low_eff: 0.23,
    low_tox: 0.13,
    low_bio: Some(0.2),
    n: 30,
    scenarios: &[
        (&[0.48, 0.70], &[0.20, 0.28], &[0.4, 0.5]),
        (&[0.27, 0.70], &[0.15, 0.28], &[0.3, 0.5]),
        (&[0.27, 0.48], &[0.15, 0.20], &[0.3, 0.4]),
        (&[0.48, 0.70], &[0.15, 0.20], &[0.4, 0.5]),
        (&[0.48, 0.70], &[0.20, 0.20], &[0.4, 0.5]),
        (&[0.48, 0.70], &[0.28, 0.28], &[0.4, 0.5]),
        (&[0.27, 0.48, 0.70], &[0.15, 0.20, 0.28], &[0.3, 0.4, 0.5]),
        (&[0.48, 0.27], &[0.15, 0.20], &[0.3, 0.4]),
        (&[0.48, 0.48], &[0.15, 0.20], &[0.3, 0.4]),
    ],
    shared_truth: false,
};

const S2_RAW: RawPreset = RawPreset {
    low_eff: 0.40,
    low_tox: 0.13,
    low_bio: None,
    n: 30,
    scenarios: &[
        (&[0.65, 0.85], &[0.20, 0.28], NO_BIO),
        (&[0.47, 0.85], &[0.15, 0.28], NO_BIO),
        (&[0.47, 0.65], &[0.15, 0.20], NO_BIO),
        (&[0.65, 0.85], &[0.15, 0.20], NO_BIO),
        (&[0.65, 0.85], &[0.20, 0.20], NO_BIO),
        (&[0.65, 0.85], &[0.28, 0.28], NO_BIO),
        (&[0.47, 0.65, 0.85], &[0.15, 0.20, 0.28], NO_BIO),
        (&[0.65, 0.47], &[0.15, 0.20], NO_BIO),
        (&[0.65, 0.65], &[0.15, 0.20], NO_BIO),
    ],
    shared_truth: false,
};

const S34_RAW: RawPreset = RawPreset {
    low_eff: 0.40,
    low_tox: 0.13,
    low_bio: Some(0.2),
    n: 30,
    scenarios: &[
        (&[0.65, 0.85], &[0.20, 0.28], &[0.4, 0.5]),
        (&[0.47, 0.85], &[0.15, 0.28], &[0.3, 0.5]),
        (&[0.47, 0.65], &[0.15, 0.20], &[0.3, 0.4]),
        (&[0.65, 0.85], &[0.15, 0.20], &[0.4, 0.5]),
        (&[0.65, 0.85], &[0.20, 0.20], &[0.4, 0.5]),
        (&[0.65, 0.85], &[0.28, 0.28], &[0.4, 0.5]),
        (&[0.47, 0.65, 0.85], &[0.15, 0.20, 0.28], &[0.3, 0.4, 0.5]),
        (&[0.65, 0.47], &[0.15, 0.20], &[0.3, 0.4]),
        (&[0.65, 0.65], &[0.15, 0.20], &[0.3, 0.4]),
    ],
    shared_truth: false,
};

fn raw(preset: PresetId) -> &'static RawPreset {
    match preset {
        PresetId::T5 => &T5_RAW,
        PresetId::T6 => &T6_RAW,
        PresetId::T7 => &T7_RAW,
        PresetId::S2 => &S2_RAW,
        PresetId::S3 | PresetId::S4 => &S34_RAW,
    }
}

/// Standard two-endpoint utility scores used across the simulation suites.
pub fn standard_utility2() -> UtilityTable2 {
    UtilityTable2::new(100.0, 35.0, 65.0, 0.0).expect("static scores are valid")
}

/// Three-endpoint table for the biomarker suites: base row (90, 30, 60, 0)
/// lifted by offsets (10, 5, 5, 10) with the worst biomarker-positive cell
/// pinned to zero.
pub fn standard_utility3() -> UtilityTable3 {
    let spec = OffsetSpec::new([10.0, 5.0, 5.0, 10.0])
        .expect("static offsets are valid")
        .with_override(4, 0.0);
    utility3_from_offsets([90.0, 30.0, 60.0, 0.0], &spec).expect("static table is valid")
}

/// CUI weights paired with the three-endpoint table: (toxicity, efficacy,
/// biomarker) = (0.30, 0.60, 0.10).
pub fn standard_cui3() -> CuiWeights {
    CuiWeights::new(0.30, 0.60, Some(0.10)).expect("static weights are valid")
}

/// Shared admissibility parameterization of the simulation studies.
pub fn standard_admissibility() -> AdmissibilityConfig {
    AdmissibilityConfig::new(0.35, 0.22, 0.95, 0.90).expect("static config is valid")
}

fn method_setup(preset: PresetId, regime: Regime) -> MethodSetup {
    let three_endpoint = raw(preset).low_bio.is_some();
    let mut decision = DecisionConfig::new(0.0, regime.alpha1(), regime.alpha2())
        .expect("static config is valid");
    decision.consider_policy = if regime.consider_low() {
        ConsiderPolicy::TreatAsLow
    } else {
        ConsiderPolicy::TreatAsHigh
    };
    let mut empirical = EmpiricalThresholds::new(
        0.15,
        0.35,
        1.5,
        2.0,
        three_endpoint.then_some(0.1),
    )
    .expect("static thresholds are valid");
    empirical.consider_policy = if regime.consider_low() {
        EmpiricalConsiderPolicy::Low
    } else {
        EmpiricalConsiderPolicy::High
    };
    MethodSetup {
        utility2: standard_utility2(),
        utility3: three_endpoint.then(standard_utility3),
        cui: three_endpoint.then(standard_cui3),
        admissibility: standard_admissibility(),
        decision,
        empirical,
        screen_empirical: true,
    }
}

/// Expand a preset into fully-specified scenarios for one regime.
///
/// The per-scenario seed is derived from the master seed and the scenario's
/// position so that suites are reproducible end to end.
pub fn scenarios(preset: PresetId, regime: Regime, master_seed: u64, replications: u32) -> Vec<ScenarioSpec> {
    let r = raw(preset);
    let setup = method_setup(preset, regime);
    let truth_mode = if r.shared_truth {
        TruthMode::SharedBinomialTest
    } else {
        TruthMode::PerMethod { delta: UTILITY_TRUTH_DELTA }
    };
    r.scenarios
        .iter()
        .enumerate()
        .map(|(i, (eff, tox, bio))| {
            let mut doses = vec![MarginalRates::new(r.low_tox, r.low_eff, r.low_bio)
                .expect("static rates are valid")];
            for k in 0..eff.len() {
                let b = if bio.is_empty() { None } else { Some(bio[k]) };
                doses.push(MarginalRates::new(tox[k], eff[k], b).expect("static rates are valid"));
            }
            ScenarioSpec {
                name: format!("{}-s{}-{}", preset.name(), i + 1, regime.name()),
                doses,
                correlations: Correlations::zero(),
                n_per_arm: r.n,
                replications,
                seed: crate::sim::scenario_seed(master_seed, i as u64),
                setup: setup.clone(),
                truth_mode,
            }
        })
        .collect()
}

const T5_R1: [PublishedRow; 9] = [
    row2(1, 4, 4, 9.0, 50.0),
    row2(2, 2, 2, 16.0, 29.0),
    row2(3, 3, 3, 17.0, 73.0),
    row2(4, 2, 2, 9.0, 53.0),
    row2(5, 3, 3, 17.0, 54.0),
    row2(6, 4, 4, 13.0, 62.0),
    row2(7, 3, 3, 31.0, 70.0),
    row2(8, 3, 3, 20.0, 84.0),
    row2(9, 3, 3, 40.0, 78.0),
];

// Only the truth shifts were reported for the second regime: the borderline
// scenario 2 contrast resolves high.
const T5_R2: [PublishedRow; 9] = [
    truth_only(1, 4),
    truth_only(2, 3),
    truth_only(3, 3),
    truth_only(4, 2),
    truth_only(5, 3),
    truth_only(6, 4),
    truth_only(7, 3),
    truth_only(8, 3),
    truth_only(9, 3),
];

const T6_R1: [PublishedRow; 9] = [
    row2(1, 1, 3, 54.0, 55.0),
    row2(2, 1, 3, 55.0, 89.0),
    row2(3, 1, 2, 60.0, 20.0),
    row2(4, 3, 3, 33.0, 62.0),
    row2(5, 3, 3, 42.0, 69.0),
    row2(6, 1, 3, 55.0, 66.0),
    row2(7, 1, 4, 52.0, 53.0),
    row2(8, 1, 2, 88.0, 68.0),
    row2(9, 1, 2, 60.0, 72.0),
];

const T6_R2: [PublishedRow; 9] = [
    row2(1, 3, 3, 70.0, 77.0),
    row2(2, 3, 3, 84.0, 97.0),
    row2(3, 3, 3, 55.0, 66.0),
    row2(4, 3, 3, 74.0, 82.0),
    row2(5, 3, 3, 86.0, 87.0),
    row2(6, 3, 3, 86.0, 85.0),
    row2(7, 4, 4, 66.0, 75.0),
    row2(8, 1, 2, 48.0, 85.0),
    row2(9, 3, 2, 45.0, 73.0),
];

const T7_R1: [PublishedRow; 9] = [
    row3(1, 1, 3, 3, 52.0, 54.0, 55.0),
    row3(2, 1, 3, 3, 52.0, 92.0, 94.0),
    row3(3, 1, 3, 3, 50.0, 47.0, 47.0),
    row3(4, 3, 3, 3, 38.0, 60.0, 60.0),
    row3(5, 3, 3, 3, 48.0, 68.0, 67.0),
    row3(6, 1, 3, 3, 52.0, 65.0, 66.0),
    row3(7, 1, 4, 4, 54.0, 54.0, 56.0),
    row3(8, 1, 2, 2, 61.0, 71.0, 72.0),
    row3(9, 1, 2, 2, 50.0, 77.0, 77.0),
];

const T7_R2: [PublishedRow; 9] = [
    row3(1, 3, 3, 3, 61.0, 78.0, 80.0),
    row3(2, 3, 3, 3, 76.0, 98.0, 99.0),
    row3(3, 3, 3, 3, 55.0, 75.0, 77.0),
    row3(4, 3, 3, 3, 68.0, 83.0, 84.0),
    row3(5, 3, 3, 3, 82.0, 87.0, 88.0),
    row3(6, 3, 3, 3, 83.0, 86.0, 87.0),
    row3(7, 4, 4, 4, 59.0, 77.0, 79.0),
    row3(8, 1, 2, 2, 48.0, 89.0, 90.0),
    row3(9, 3, 2, 2, 45.0, 75.0, 75.0),
];

const S2_R1: [PublishedRow; 9] = [
    row2(1, 1, 2, 58.0, 52.0),
    row2(2, 1, 3, 58.0, 87.0),
    row2(3, 1, 2, 61.0, 39.0),
    row2(4, 3, 3, 29.0, 59.0),
    row2(5, 3, 3, 37.0, 67.0),
    row2(6, 1, 3, 58.0, 65.0),
    row2(7, 1, 3, 58.0, 39.0),
    row2(8, 1, 2, 86.0, 76.0),
    row2(9, 1, 2, 61.0, 76.0),
];

const S2_R2: [PublishedRow; 9] = [
    row2(1, 3, 3, 65.0, 76.0),
    row2(2, 3, 3, 75.0, 95.0),
    row2(3, 3, 3, 55.0, 65.0),
    row2(4, 3, 3, 69.0, 81.0),
    row2(5, 3, 3, 83.0, 86.0),
    row2(6, 3, 3, 83.0, 84.0),
    row2(7, 4, 4, 58.0, 74.0),
    row2(8, 1, 2, 50.0, 88.0),
    row2(9, 3, 2, 44.0, 73.0),
];

const S3_R1: [PublishedRow; 9] = [
    row3(1, 1, 2, 2, 55.0, 45.0, 44.0),
    row3(2, 1, 3, 3, 55.0, 90.0, 91.0),
    row3(3, 1, 2, 2, 52.0, 32.0, 33.0),
    row3(4, 3, 3, 3, 36.0, 59.0, 60.0),
    row3(5, 3, 3, 3, 46.0, 67.0, 68.0),
    row3(6, 1, 3, 3, 55.0, 65.0, 66.0),
    row3(7, 1, 3, 3, 58.0, 37.0, 38.0),
    row3(8, 1, 2, 2, 64.0, 72.0, 73.0),
    row3(9, 1, 2, 2, 52.0, 74.0, 75.0),
];

const S4_R2: [PublishedRow; 9] = [
    row3(1, 3, 3, 3, 59.0, 78.0, 79.0),
    row3(2, 3, 3, 3, 69.0, 98.0, 98.0),
    row3(3, 3, 3, 3, 54.0, 69.0, 69.0),
    row3(4, 3, 3, 3, 66.0, 83.0, 83.0),
    row3(5, 3, 3, 3, 80.0, 87.0, 88.0),
    row3(6, 3, 3, 3, 80.0, 87.0, 87.0),
    row3(7, 4, 4, 4, 53.0, 78.0, 79.0),
    row3(8, 1, 2, 2, 47.0, 88.0, 89.0),
    row3(9, 3, 2, 2, 45.0, 73.0, 72.0),
];

/// Published reference rows for a preset under a regime, in scenario order.
pub fn published(preset: PresetId, regime: Regime) -> &'static [PublishedRow] {
    match (preset, regime) {
        (PresetId::T5, Regime::R1) => &T5_R1,
        (PresetId::T5, Regime::R2) => &T5_R2,
        (PresetId::T6, Regime::R1) => &T6_R1,
        (PresetId::T6, Regime::R2) => &T6_R2,
        (PresetId::T7, Regime::R1) => &T7_R1,
        (PresetId::T7, Regime::R2) => &T7_R2,
        (PresetId::S2, Regime::R1) => &S2_R1,
        (PresetId::S2, Regime::R2) => &S2_R2,
        (PresetId::S3, _) => &S3_R1,
        (PresetId::S4, _) => &S4_R2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_expand_and_validate() {
        for preset in PresetId::all() {
            for &regime in preset.regimes() {
                let specs = scenarios(preset, regime, 1, 10);
                assert_eq!(specs.len(), 9);
                for s in &specs {
                    s.validate().unwrap();
                }
                assert_eq!(published(preset, regime).len(), 9);
            }
        }
    }

    #[test]
    fn offset_table_matches_standard_scores() {
        let t = standard_utility3();
        assert_eq!(*t.rows(), [[90.0, 30.0, 60.0, 0.0], [100.0, 35.0, 65.0, 0.0]]);
    }

    #[test]
    fn preset_parse_round_trip() {
        for preset in PresetId::all() {
            assert_eq!(PresetId::parse(preset.name()).unwrap(), preset);
        }
        assert!(PresetId::parse("T99").is_err());
    }

    #[test]
    fn scenario_seeds_differ() {
        let specs = scenarios(PresetId::T6, Regime::R1, 42, 10);
        let mut seeds: Vec<u64> = specs.iter().map(|s| s.seed).collect();
        seeds.dedup();
        assert_eq!(seeds.len(), 9);
    }
}
