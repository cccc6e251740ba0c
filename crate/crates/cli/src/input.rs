//! JSON schema of the end-of-trial decision input and its conversion into
//! core types.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use umet_core::decision::{AdmissibilityConfig, ConsiderPolicy, DecisionConfig, Strategy};
use umet_core::empirical::{EmpiricalConsiderPolicy, EmpiricalThresholds, NegEdPolicy};
use umet_core::utility::{
    utility3_from_offsets, ArmCounts, ArmData, CuiWeights, MarginalRates, OffsetSpec,
    RateConversion, UtilityTable2, UtilityTable3,
};

/// Trial input document: dose records plus method, decision, and screening
/// configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialInputDocument {
    pub doses: Vec<DoseRecord>,
    pub methods: MethodsSection,
    #[serde(default)]
    pub admissibility: AdmissibilitySection,
    #[serde(default)]
    pub decision: DecisionSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoseRecord {
    pub label: String,
    /// Dose-level order; higher level means a higher dose.
    pub level: u32,
    pub n: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rates: Option<RatesRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts: Option<CountsRecord>,
    /// Four joint efficacy-toxicity cell counts (best to worst).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cells2: Option<[f64; 4]>,
    /// Eight joint cells: biomarker-negative row then biomarker-positive row.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cells3: Option<[[f64; 4]; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesRecord {
    pub toxicity: f64,
    pub efficacy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub biomarker: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountsRecord {
    pub toxicity: f64,
    pub efficacy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub biomarker: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodsSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub umet: Option<UmetSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cui: Option<CuiSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub empirical: Option<EmpiricalSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UmetSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub utility2: Option<Utility2Record>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub utility3: Option<Utility3Record>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Utility2Record {
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
    pub u4: f64,
}

/// Three-endpoint table, either written out as two rows or built from a
/// biomarker-negative base row plus offsets (with optional cell overrides
/// like pinning the worst biomarker-positive cell).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Utility3Record {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rows: Option<[[f64; 4]; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base: Option<[f64; 4]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offsets: Option<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overrides: Vec<CellOverride>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellOverride {
    /// Outcome index 1..4 within the biomarker-positive row.
    pub cell: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CuiSection {
    pub toxicity: f64,
    pub efficacy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub biomarker: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmpiricalSection {
    pub ed1: f64,
    pub ed2: f64,
    pub tr1: f64,
    pub tr2: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bd1: Option<f64>,
    #[serde(default = "default_consider")]
    pub consider: String,
    #[serde(default = "default_neg_ed")]
    pub negative_ed: String,
    /// Apply the admissibility screen before the table walk.
    #[serde(default)]
    pub screen: bool,
}

fn default_consider() -> String {
    "low".into()
}

fn default_neg_ed() -> String {
    "consider".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdmissibilitySection {
    pub phi_t: f64,
    pub phi_e: f64,
    pub c_t: f64,
    pub c_e: f64,
}

impl Default for AdmissibilitySection {
    fn default() -> Self {
        Self { phi_t: 0.35, phi_e: 0.22, c_t: 0.95, c_e: 0.90 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecisionSection {
    #[serde(default)]
    pub delta: f64,
    #[serde(default = "default_alpha1")]
    pub alpha1: f64,
    #[serde(default = "default_alpha2")]
    pub alpha2: f64,
    /// Consider-zone disposition for pairwise recommendations:
    /// "low", "high", or "report".
    #[serde(default = "default_report")]
    pub consider: String,
}

fn default_alpha1() -> f64 {
    0.2
}

fn default_alpha2() -> f64 {
    0.34
}

fn default_report() -> String {
    "report".into()
}

impl Default for DecisionSection {
    fn default() -> Self {
        Self { delta: 0.0, alpha1: 0.2, alpha2: 0.34, consider: "report".into() }
    }
}

pub fn parse_consider_policy(s: &str) -> Result<ConsiderPolicy> {
    match s {
        "low" => Ok(ConsiderPolicy::TreatAsLow),
        "high" => Ok(ConsiderPolicy::TreatAsHigh),
        "report" => Ok(ConsiderPolicy::Report),
        other => bail!("decision.consider must be low, high, or report (got '{other}')"),
    }
}

impl TrialInputDocument {
    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading input document {}", path.display()))?;
        let doc: Self = serde_json::from_str(&text)
            .with_context(|| format!("parsing input document {}", path.display()))?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn validate(&self) -> Result<()> {
        if self.doses.is_empty() {
            bail!("input document names no doses");
        }
        let mut levels: Vec<u32> = self.doses.iter().map(|d| d.level).collect();
        let sorted = levels.windows(2).all(|w| w[0] < w[1]);
        if !sorted {
            levels.sort_unstable();
            levels.dedup();
            if levels.len() != self.doses.len() {
                bail!("dose levels must be strictly ordered and unique");
            }
            bail!("dose records must be listed in ascending level order");
        }
        for d in &self.doses {
            let forms =
                usize::from(d.rates.is_some()) + usize::from(d.counts.is_some()) + usize::from(d.cells2.is_some()) + usize::from(d.cells3.is_some());
            if forms == 0 {
                bail!("dose '{}' carries no data (rates, counts, cells2, or cells3)", d.label);
            }
            if d.rates.is_some() && forms > 1 {
                bail!("dose '{}' mixes rates with count forms; choose one", d.label);
            }
        }
        if self.methods.umet.is_none() && self.methods.cui.is_none() && self.methods.empirical.is_none() {
            bail!("methods section configures no method");
        }
        Ok(())
    }

    /// Convert dose records to arm data, applying the requested rate
    /// conversion. Returns the arms plus a note per converted arm describing
    /// the reconstruction, for trace echoing.
    pub fn arms(&self, conversion: RateConversion) -> Result<(Vec<ArmData>, Vec<String>)> {
        let mut arms = Vec::with_capacity(self.doses.len());
        let mut notes = Vec::new();
        for d in &self.doses {
            let arm = if let Some(r) = &d.rates {
                let rates = MarginalRates::new(r.toxicity, r.efficacy, r.biomarker)
                    .map_err(anyhow::Error::from)
                    .with_context(|| format!("dose '{}' rates", d.label))?;
                let arm = ArmData::from_rates(&d.label, d.level, d.n, &rates, conversion)
                    .map_err(anyhow::Error::from)
                    .with_context(|| format!("dose '{}'", d.label))?;
                notes.push(format!(
                    "dose '{}': rates (tox {}, eff {}{}) at n={} -> counts (tox {}, eff {}{}){}",
                    d.label,
                    r.toxicity,
                    r.efficacy,
                    r.biomarker.map(|b| format!(", bio {b}")).unwrap_or_default(),
                    d.n,
                    trim(arm.n_tox().unwrap_or(0.0)),
                    trim(arm.n_eff().unwrap_or(0.0)),
                    arm.n_bio().map(|b| format!(", bio {}", trim(b))).unwrap_or_default(),
                    match conversion {
                        RateConversion::Exact => " [exact]",
                        RateConversion::RoundedCounts => " [rounded, ties up]",
                    },
                ));
                arm
            } else {
                let counts = ArmCounts {
                    joint2: d.cells2,
                    joint3: d.cells3,
                    n_tox: d.counts.as_ref().map(|c| c.toxicity),
                    n_eff: d.counts.as_ref().map(|c| c.efficacy),
                    n_bio: d.counts.as_ref().and_then(|c| c.biomarker),
                };
                ArmData::new(&d.label, d.level, d.n, counts)
                    .map_err(anyhow::Error::from)
                    .with_context(|| format!("dose '{}'", d.label))?
            };
            arms.push(arm);
        }
        Ok((arms, notes))
    }

    pub fn admissibility(&self) -> Result<AdmissibilityConfig> {
        let a = &self.admissibility;
        AdmissibilityConfig::new(a.phi_t, a.phi_e, a.c_t, a.c_e).map_err(Into::into)
    }

    pub fn decision(&self, strategy: Strategy) -> Result<DecisionConfig> {
        let d = &self.decision;
        let mut cfg = DecisionConfig::new(d.delta, d.alpha1, d.alpha2)?;
        cfg.strategy = strategy;
        cfg.consider_policy = parse_consider_policy(&d.consider)?;
        Ok(cfg)
    }

    pub fn utility2(&self) -> Result<Option<UtilityTable2>> {
        let Some(u) = self.methods.umet.as_ref().and_then(|m| m.utility2.as_ref()) else {
            return Ok(None);
        };
        Ok(Some(UtilityTable2::new(u.u1, u.u2, u.u3, u.u4)?))
    }

    pub fn utility3(&self) -> Result<Option<UtilityTable3>> {
        let Some(u) = self.methods.umet.as_ref().and_then(|m| m.utility3.as_ref()) else {
            return Ok(None);
        };
        if let Some(rows) = u.rows {
            if u.base.is_some() || u.offsets.is_some() || !u.overrides.is_empty() {
                bail!("utility3 gives explicit rows; base/offsets/overrides do not apply");
            }
            return Ok(Some(UtilityTable3::new(rows[0], rows[1])?));
        }
        let (Some(base), Some(offsets)) = (u.base, u.offsets) else {
            bail!("utility3 needs either rows or base plus offsets");
        };
        let mut spec = OffsetSpec::new(offsets)?;
        for o in &u.overrides {
            if !(1..=4).contains(&o.cell) {
                bail!("utility3 override cell {} outside 1..4", o.cell);
            }
            spec = spec.with_override(o.cell, o.value);
        }
        Ok(Some(utility3_from_offsets(base, &spec)?))
    }

    pub fn cui_weights(&self) -> Result<Option<CuiWeights>> {
        let Some(c) = &self.methods.cui else { return Ok(None) };
        Ok(Some(CuiWeights::new(c.toxicity, c.efficacy, c.biomarker)?))
    }

    pub fn empirical(&self) -> Result<Option<(EmpiricalThresholds, bool)>> {
        let Some(e) = &self.methods.empirical else { return Ok(None) };
        let mut thr = EmpiricalThresholds::new(e.ed1, e.ed2, e.tr1, e.tr2, e.bd1)?;
        thr.consider_policy = match e.consider.as_str() {
            "low" => EmpiricalConsiderPolicy::Low,
            "high" => EmpiricalConsiderPolicy::High,
            "report" => EmpiricalConsiderPolicy::Report,
            other => bail!("empirical.consider must be low, high, or report (got '{other}')"),
        };
        thr.neg_ed_policy = match e.negative_ed.as_str() {
            "consider" => NegEdPolicy::Consider,
            "low" => NegEdPolicy::Low,
            other => bail!("empirical.negative_ed must be consider or low (got '{other}')"),
        };
        Ok(Some((thr, e.screen)))
    }
}

fn trim(x: f64) -> String {
    if (x - x.round()).abs() < 1e-9 {
        format!("{}", x.round() as i64)
    } else {
        format!("{x:.3}")
    }
}
