//! Scenario-driven Monte Carlo: correlated binary outcome generation, truth
//! oracles, and operating-characteristics aggregation for the three
//! dose-selection methods.
//!
//! Determinism contract: every replication draws from its own counter-derived
//! RNG stream, so results are identical for a fixed seed regardless of how
//! many worker threads execute the replications.

pub mod presets;
mod sampler;
mod truth;

pub use sampler::{sample_arm, Correlations};
pub use truth::{
    truth_binomial_test, truth_empirical, truth_utility, UtilityMetricKind, UTILITY_TRUTH_DELTA,
};

use crate::decision::{
    admissible_set, sequential_select, AdmissibilityConfig, DecisionConfig, Metric,
};
use crate::empirical::{
    empirical_sequential, EmpiricalArm, EmpiricalConsiderPolicy, EmpiricalThresholds,
};
use crate::error::{Error, Result};
use crate::utility::{ArmData, CuiWeights, MarginalRates, UtilityTable2, UtilityTable3};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

/// Method parameterization shared by every replication of a scenario.
#[derive(Debug, Clone)]
pub struct MethodSetup {
    pub utility2: UtilityTable2,
    /// Three-endpoint table; required when the doses carry biomarker rates.
    pub utility3: Option<UtilityTable3>,
    /// CUI weights; when absent the CUI method is skipped.
    pub cui: Option<CuiWeights>,
    pub admissibility: AdmissibilityConfig,
    pub decision: DecisionConfig,
    pub empirical: EmpiricalThresholds,
    /// Apply the admissibility screen to the empirical design as well.
    pub screen_empirical: bool,
}

/// How "% correct" is judged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TruthMode {
    /// One truth shared by all methods, from the two-proportion test oracle.
    SharedBinomialTest,
    /// Each method compared against its own plug-in truth. `delta` is the
    /// minimally important standardized difference used by the utility
    /// truth oracles.
    PerMethod { delta: f64 },
}

/// A complete simulation scenario.
#[derive(Debug, Clone)]
pub struct ScenarioSpec {
    pub name: String,
    /// True rates per dose, ascending dose level (index 0 = level 1).
    pub doses: Vec<MarginalRates>,
    pub correlations: Correlations,
    pub n_per_arm: u32,
    pub replications: u32,
    pub seed: u64,
    pub setup: MethodSetup,
    pub truth_mode: TruthMode,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if self.doses.is_empty() {
            return Err(Error::InvalidParameter("scenario has no doses".into()));
        }
        if self.replications == 0 {
            return Err(Error::InvalidParameter("replication count must be at least 1".into()));
        }
        let with_bio = self.doses.iter().filter(|d| d.biomarker.is_some()).count();
        if with_bio != 0 && with_bio != self.doses.len() {
            return Err(Error::InconsistentData(
                "either every dose or no dose may carry a biomarker rate".into(),
            ));
        }
        if with_bio > 0 && self.setup.utility3.is_none() {
            return Err(Error::InvalidParameter(
                "three-endpoint scenarios need a three-endpoint utility table".into(),
            ));
        }
        self.correlations.validate(with_bio > 0)?;
        Ok(())
    }

    pub fn has_biomarker(&self) -> bool {
        self.doses.first().is_some_and(|d| d.biomarker.is_some())
    }

    fn umet_metric(&self) -> Metric {
        match (self.has_biomarker(), &self.setup.utility3) {
            (true, Some(t)) => Metric::Utility3(*t),
            _ => Metric::Utility2(self.setup.utility2),
        }
    }
}

/// Selections of one replication, one entry per method.
#[derive(Debug, Clone, Copy)]
pub struct Replication {
    pub umet: Option<usize>,
    pub cui: Option<usize>,
    pub empirical: Option<usize>,
}

/// Identifier of a dose-selection method in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodKind {
    Umet,
    Cui,
    Empirical,
}

impl MethodKind {
    pub fn label(&self) -> &'static str {
        match self {
            MethodKind::Umet => "umet",
            MethodKind::Cui => "cui",
            MethodKind::Empirical => "empirical",
        }
    }
}

/// Aggregated selections for one method.
#[derive(Debug, Clone)]
pub struct MethodOC {
    pub method: MethodKind,
    /// The method's true dose (index into the dose list), when resolvable.
    pub truth: Option<usize>,
    /// Selection counts per dose, plus the no-dose-selected count.
    pub selections: Vec<u32>,
    pub none_selected: u32,
    /// Selection fractions per dose and for the none outcome; sums to 1.
    pub fraction: Vec<f64>,
    pub fraction_none: f64,
    /// Fraction of replications selecting the true dose.
    pub pct_correct: f64,
    /// Binomial Monte Carlo standard error of `pct_correct`.
    pub mc_se: f64,
}

/// Operating characteristics of one scenario.
#[derive(Debug, Clone)]
pub struct OCReport {
    pub scenario: String,
    pub n_per_arm: u32,
    pub replications: u32,
    pub dose_count: usize,
    pub methods: Vec<MethodOC>,
}

/// Derive the per-scenario RNG seed from a master seed and scenario index.
pub fn scenario_seed(master: u64, scenario_index: u64) -> u64 {
    splitmix64(master ^ splitmix64(scenario_index.wrapping_add(1)))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sample every arm and run all configured methods on the shared data.
pub fn run_replication(spec: &ScenarioSpec, rep_index: u64) -> Result<Replication> {
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    rng.set_stream(rep_index);

    let arms: Vec<ArmData> = spec
        .doses
        .iter()
        .enumerate()
        .map(|(i, rates)| {
            sample_arm(
                &mut rng,
                format!("dose {}", i + 1),
                (i + 1) as u32,
                spec.n_per_arm,
                rates,
                &spec.correlations,
            )
        })
        .collect::<Result<_>>()?;

    let umet = sequential_select(&arms, &spec.umet_metric(), &spec.setup.decision, &spec.setup.admissibility)?
        .selected;

    let cui = match &spec.setup.cui {
        Some(w) => {
            sequential_select(&arms, &Metric::Cui(*w), &spec.setup.decision, &spec.setup.admissibility)?
                .selected
        }
        None => None,
    };

    let empirical = run_empirical(spec, &arms)?;

    Ok(Replication { umet, cui, empirical })
}

fn run_empirical(spec: &ScenarioSpec, arms: &[ArmData]) -> Result<Option<usize>> {
    let candidates: Vec<usize> = if spec.setup.screen_empirical {
        admissible_set(arms, &spec.setup.admissibility)?.0
    } else {
        (0..arms.len()).collect()
    };
    match candidates.len() {
        0 => Ok(None),
        1 => Ok(Some(candidates[0])),
        _ => {
            let emp_arms: Vec<EmpiricalArm> = candidates
                .iter()
                .map(|&i| {
                    Ok(EmpiricalArm {
                        label: arms[i].label.clone(),
                        level: arms[i].level,
                        rates: arms[i].observed_rates()?,
                    })
                })
                .collect::<Result<_>>()?;
            let out = empirical_sequential(&emp_arms, &spec.setup.empirical)?;
            Ok(out.selected.map(|local| candidates[local]))
        }
    }
}

/// Truths for each method under the scenario's truth mode.
pub fn method_truths(spec: &ScenarioSpec) -> Result<(Option<usize>, Option<usize>, Option<usize>)> {
    match spec.truth_mode {
        TruthMode::SharedBinomialTest => {
            let t = truth_binomial_test(spec)?;
            Ok((Some(t), Some(t), Some(t)))
        }
        TruthMode::PerMethod { delta } => {
            let to = truth_empirical(spec)?;
            let tu = Some(truth_utility(spec, UtilityMetricKind::Utility, delta)?);
            let tc = if spec.setup.cui.is_some() {
                Some(truth_utility(spec, UtilityMetricKind::Cui, delta)?)
            } else {
                None
            };
            Ok((tu, tc, to))
        }
    }
}

/// Run every replication (optionally on a bounded worker pool) and aggregate.
pub fn operating_characteristics(spec: &ScenarioSpec, workers: Option<usize>) -> Result<OCReport> {
    spec.validate()?;
    let run = || -> Result<Vec<Replication>> {
        (0..spec.replications as u64)
            .into_par_iter()
            .map(|rep| run_replication(spec, rep))
            .collect()
    };
    let reps = match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?
            .install(run),
        None => run(),
    }?;

    let (truth_umet, truth_cui, truth_emp) = method_truths(spec)?;
    let d = spec.doses.len();
    let mut methods = Vec::new();
    let mut push = |kind: MethodKind, truth: Option<usize>, picks: Vec<Option<usize>>| {
        let mut counts = vec![0u32; d];
        let mut none = 0u32;
        for p in &picks {
            match p {
                Some(i) => counts[*i] += 1,
                None => none += 1,
            }
        }
        let r = spec.replications as f64;
        let correct = truth
            .map(|t| counts[t] as f64 / r)
            .unwrap_or(0.0);
        methods.push(MethodOC {
            method: kind,
            truth,
            fraction: counts.iter().map(|c| *c as f64 / r).collect(),
            fraction_none: none as f64 / r,
            selections: counts,
            none_selected: none,
            pct_correct: correct,
            mc_se: (correct * (1.0 - correct) / r).sqrt(),
        });
    };

    push(MethodKind::Umet, truth_umet, reps.iter().map(|r| r.umet).collect());
    if spec.setup.cui.is_some() {
        push(MethodKind::Cui, truth_cui, reps.iter().map(|r| r.cui).collect());
    }
    push(MethodKind::Empirical, truth_emp, reps.iter().map(|r| r.empirical).collect());

    Ok(OCReport {
        scenario: spec.name.clone(),
        n_per_arm: spec.n_per_arm,
        replications: spec.replications,
        dose_count: d,
        methods,
    })
}

/// Reject a report-policy empirical configuration for simulation use: the
/// sequential scan must be able to resolve consider cells.
pub fn validate_sim_policies(setup: &MethodSetup) -> Result<()> {
    if setup.empirical.consider_policy == EmpiricalConsiderPolicy::Report {
        return Err(Error::InvalidParameter(
            "simulation requires a resolving empirical consider policy (low or high)".into(),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decision::ConsiderPolicy;

    fn spec(doses: Vec<(f64, f64)>, n: u32, reps: u32, seed: u64) -> ScenarioSpec {
        ScenarioSpec {
            name: "test".into(),
            doses: doses
                .into_iter()
                .map(|(t, e)| MarginalRates::new(t, e, None).unwrap())
                .collect(),
            correlations: Correlations::zero(),
            n_per_arm: n,
            replications: reps,
            seed,
            setup: MethodSetup {
                utility2: UtilityTable2::new(100.0, 35.0, 65.0, 0.0).unwrap(),
                utility3: None,
                cui: Some(CuiWeights::two_endpoint(0.35, 0.65).unwrap()),
                admissibility: AdmissibilityConfig::new(0.35, 0.22, 0.95, 0.90).unwrap(),
                decision: {
                    let mut d = DecisionConfig::new(0.0, 0.2, 0.34).unwrap();
                    d.consider_policy = ConsiderPolicy::TreatAsLow;
                    d
                },
                empirical: EmpiricalThresholds::new(0.15, 0.35, 1.5, 2.0, None).unwrap(),
                screen_empirical: true,
            },
            truth_mode: TruthMode::PerMethod { delta: UTILITY_TRUTH_DELTA },
        }
    }

    #[test]
    fn degenerate_rates_select_top_dose_everywhere() {
        // Perfect top dose, hopeless lower doses: every method must find it.
        let s = spec(vec![(0.0, 0.0), (0.0, 0.0), (0.0, 1.0)], 30, 5, 9);
        for rep in 0..5 {
            let r = run_replication(&s, rep).unwrap();
            assert_eq!(r.umet, Some(2));
            assert_eq!(r.cui, Some(2));
            assert_eq!(r.empirical, Some(2));
        }
    }

    #[test]
    fn replications_are_deterministic() {
        let s = spec(vec![(0.13, 0.23), (0.2, 0.47), (0.28, 0.7)], 30, 4, 1234);
        for rep in 0..4 {
            let a = run_replication(&s, rep).unwrap();
            let b = run_replication(&s, rep).unwrap();
            assert_eq!(a.umet, b.umet);
            assert_eq!(a.cui, b.cui);
            assert_eq!(a.empirical, b.empirical);
        }
    }

    #[test]
    fn single_replication_fractions_are_indicator() {
        let s = spec(vec![(0.13, 0.23), (0.2, 0.47)], 30, 1, 77);
        let oc = operating_characteristics(&s, Some(1)).unwrap();
        for m in &oc.methods {
            for f in m.fraction.iter().chain([&m.fraction_none]) {
                assert!(*f == 0.0 || *f == 1.0);
            }
        }
    }

    #[test]
    fn fractions_sum_to_one_and_workers_agree() {
        let s = spec(vec![(0.13, 0.4), (0.15, 0.45), (0.2, 0.55)], 20, 60, 2024);
        let a = operating_characteristics(&s, Some(1)).unwrap();
        let b = operating_characteristics(&s, Some(8)).unwrap();
        for (ma, mb) in a.methods.iter().zip(b.methods.iter()) {
            assert_eq!(ma.selections, mb.selections);
            assert_eq!(ma.none_selected, mb.none_selected);
            let total: f64 = ma.fraction.iter().sum::<f64>() + ma.fraction_none;
            assert!((total - 1.0).abs() < 1e-12);
        }
    }
}
