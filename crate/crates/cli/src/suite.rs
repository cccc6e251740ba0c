//! JSON schema of simulation suites: custom scenarios and preset references.

use crate::input::{CuiSection, EmpiricalSection, UmetSection};
use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use umet_core::decision::{AdmissibilityConfig, ConsiderPolicy, DecisionConfig};
use umet_core::empirical::{EmpiricalConsiderPolicy, EmpiricalThresholds, NegEdPolicy};
use umet_core::sim::presets::{self, PresetId, Regime};
use umet_core::sim::{
    scenario_seed, Correlations, MethodSetup, ScenarioSpec, TruthMode, UTILITY_TRUTH_DELTA,
};
use umet_core::utility::{CuiWeights, MarginalRates, UtilityTable2};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSuiteDocument {
    pub scenarios: Vec<SuiteEntry>,
}

/// Either a fully-specified scenario or a reference to a built-in preset.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteEntry {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regime: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_per_arm: Option<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub doses: Vec<SuiteDose>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correlations: Option<CorrelationsRecord>,
    /// "per-method" (default) or "shared-binomial".
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truth: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub umet: Option<UmetSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cui: Option<CuiSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub empirical: Option<EmpiricalSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub admissibility: Option<crate::input::AdmissibilitySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decision: Option<SuiteDecision>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteDose {
    pub toxicity: f64,
    pub efficacy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub biomarker: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct CorrelationsRecord {
    #[serde(default)]
    pub tox_eff: f64,
    #[serde(default)]
    pub tox_bio: f64,
    #[serde(default)]
    pub eff_bio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteDecision {
    #[serde(default)]
    pub delta: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    /// "low" or "high": resolves consider zones in the empirical scan and the
    /// truth construction.
    pub consider: String,
}

impl ScenarioSuiteDocument {
    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading suite {}", path.display()))?;
        let doc: Self = serde_json::from_str(&text)
            .with_context(|| format!("parsing suite {}", path.display()))?;
        if doc.scenarios.is_empty() {
            bail!("suite names no scenarios");
        }
        Ok(doc)
    }

    /// Expand into runnable scenarios. Preset entries expand to their nine
    /// published parameterizations; custom entries are validated in place.
    pub fn expand(&self, master_seed: u64, reps: u32) -> Result<Vec<ScenarioSpec>> {
        let mut out = Vec::new();
        for (idx, entry) in self.scenarios.iter().enumerate() {
            if let Some(p) = &entry.preset {
                let preset = PresetId::parse(p)?;
                let regimes: Vec<Regime> = match entry.regime.as_deref() {
                    None | Some("all") => preset.regimes().to_vec(),
                    Some(r) => vec![Regime::parse(r)?],
                };
                for regime in regimes {
                    out.extend(presets::scenarios(preset, regime, master_seed, reps));
                }
                continue;
            }
            out.push(entry.custom_scenario(idx, master_seed, reps)?);
        }
        Ok(out)
    }
}

impl SuiteEntry {
    fn custom_scenario(&self, idx: usize, master_seed: u64, reps: u32) -> Result<ScenarioSpec> {
        if self.doses.len() < 2 {
            bail!("scenario {idx}: custom scenarios need at least two doses");
        }
        let n = self
            .n_per_arm
            .with_context(|| format!("scenario {idx}: n_per_arm is required"))?;
        let doses: Vec<MarginalRates> = self
            .doses
            .iter()
            .map(|d| MarginalRates::new(d.toxicity, d.efficacy, d.biomarker).map_err(Into::into))
            .collect::<Result<_>>()?;

        let dec = self.decision.clone().unwrap_or(SuiteDecision {
            delta: 0.0,
            alpha1: 0.2,
            alpha2: 0.34,
            consider: "low".into(),
        });
        let consider_low = match dec.consider.as_str() {
            "low" => true,
            "high" => false,
            other => bail!("scenario {idx}: decision.consider must be low or high (got '{other}')"),
        };
        let mut decision = DecisionConfig::new(dec.delta, dec.alpha1, dec.alpha2)?;
        decision.consider_policy =
            if consider_low { ConsiderPolicy::TreatAsLow } else { ConsiderPolicy::TreatAsHigh };

        let admissibility = match &self.admissibility {
            Some(a) => AdmissibilityConfig::new(a.phi_t, a.phi_e, a.c_t, a.c_e)?,
            None => AdmissibilityConfig::new(0.35, 0.22, 0.95, 0.90)?,
        };

        let three_endpoint = doses.iter().all(|d| d.biomarker.is_some());
        let utility2 = match self.umet.as_ref().and_then(|u| u.utility2.as_ref()) {
            Some(u) => UtilityTable2::new(u.u1, u.u2, u.u3, u.u4)?,
            None => presets::standard_utility2(),
        };
        let utility3 = if three_endpoint {
            Some(match self.umet.as_ref().and_then(|u| u.utility3.as_ref()) {
                Some(rec) => {
                    let doc = crate::input::TrialInputDocument {
                        doses: vec![],
                        methods: crate::input::MethodsSection {
                            umet: Some(UmetSection { utility2: None, utility3: Some(rec.clone()) }),
                            cui: None,
                            empirical: None,
                        },
                        admissibility: Default::default(),
                        decision: Default::default(),
                    };
                    doc.utility3()?.expect("record present")
                }
                None => presets::standard_utility3(),
            })
        } else {
            None
        };
        let cui = match &self.cui {
            Some(c) => Some(CuiWeights::new(c.toxicity, c.efficacy, c.biomarker)?),
            None if three_endpoint => Some(presets::standard_cui3()),
            None => None,
        };

        let (empirical, screen_empirical) = match &self.empirical {
            Some(e) => {
                let mut thr = EmpiricalThresholds::new(e.ed1, e.ed2, e.tr1, e.tr2, e.bd1)?;
                thr.consider_policy = match e.consider.as_str() {
                    "low" => EmpiricalConsiderPolicy::Low,
                    "high" => EmpiricalConsiderPolicy::High,
                    other => bail!(
                        "scenario {idx}: empirical.consider must be low or high for simulation (got '{other}')"
                    ),
                };
                thr.neg_ed_policy = match e.negative_ed.as_str() {
                    "consider" => NegEdPolicy::Consider,
                    "low" => NegEdPolicy::Low,
                    other => bail!("scenario {idx}: unknown negative_ed '{other}'"),
                };
                (thr, e.screen)
            }
            None => {
                let mut thr = EmpiricalThresholds::new(
                    0.15,
                    0.35,
                    1.5,
                    2.0,
                    three_endpoint.then_some(0.1),
                )?;
                thr.consider_policy = if consider_low {
                    EmpiricalConsiderPolicy::Low
                } else {
                    EmpiricalConsiderPolicy::High
                };
                (thr, true)
            }
        };

        let truth_mode = match self.truth.as_deref() {
            None | Some("per-method") => TruthMode::PerMethod { delta: UTILITY_TRUTH_DELTA },
            Some("shared-binomial") => TruthMode::SharedBinomialTest,
            Some(other) => bail!("scenario {idx}: unknown truth mode '{other}'"),
        };

        let corr = self.correlations.clone().unwrap_or_default();
        let spec = ScenarioSpec {
            name: self.name.clone().unwrap_or_else(|| format!("scenario-{}", idx + 1)),
            doses,
            correlations: Correlations {
                tox_eff: corr.tox_eff,
                tox_bio: corr.tox_bio,
                eff_bio: corr.eff_bio,
            },
            n_per_arm: n,
            replications: reps,
            seed: scenario_seed(master_seed, idx as u64 + 1000),
            setup: MethodSetup {
                utility2,
                utility3,
                cui,
                admissibility,
                decision,
                empirical,
                screen_empirical,
            },
            truth_mode,
        };
        spec.validate()?;
        umet_core::sim::validate_sim_policies(&spec.setup)?;
        Ok(spec)
    }
}
