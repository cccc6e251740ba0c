//! Machine-readable decision report: the schema emitted by `decide` and
//! re-parsed by its round-trip tests.

use serde::{Deserialize, Serialize};
use umet_core::decision::{SelectionTrace, SequentialOutcome, Zone};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecisionReport {
    /// Schema tag for forward compatibility.
    pub schema: String,
    pub conversion: String,
    pub strategy: String,
    pub doses: Vec<DoseEcho>,
    pub reconstruction_notes: Vec<String>,
    pub methods: Vec<MethodReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoseEcho {
    pub label: String,
    pub level: u32,
    pub n: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_tox: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_eff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_bio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodReport {
    pub method: String,
    pub admissibility: Vec<VerdictReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub removed_from_comparison: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub arms: Vec<ArmReport>,
    pub steps: Vec<StepReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selected: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recommended: Option<String>,
    #[serde(default)]
    pub unresolved_consider: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerdictReport {
    pub label: String,
    pub admissible: bool,
    pub toxic: bool,
    pub futile: bool,
    pub p_toxic: f64,
    pub p_futile: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmReport {
    pub label: String,
    pub quasi_events: f64,
    pub posterior_alpha: f64,
    pub posterior_beta: f64,
    pub observed_scaled: f64,
    pub posterior_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepReport {
    pub high: String,
    pub low: String,
    /// Observed metric difference on the 0-100 scale.
    pub scaled_diff: f64,
    pub probability: f64,
    pub zone: String,
    pub stopped: bool,
}

pub fn zone_code(zone: Zone) -> String {
    zone.code().to_string()
}

pub fn sequential_method_report(
    method: &str,
    out: &SequentialOutcome,
    arms: &[umet_core::utility::ArmData],
) -> MethodReport {
    MethodReport {
        method: method.to_string(),
        admissibility: verdicts(&out.trace),
        removed_from_comparison: out.trace.removed.clone(),
        arms: arm_reports(&out.trace),
        steps: out
            .trace
            .steps
            .iter()
            .map(|s| StepReport {
                high: s.high_label.clone(),
                low: s.low_label.clone(),
                scaled_diff: s.scaled_diff,
                probability: s.probability,
                zone: zone_code(s.zone),
                stopped: s.stopped,
            })
            .collect(),
        selected: out.selected.map(|i| arms[i].label.clone()),
        recommended: None,
        unresolved_consider: false,
    }
}

fn verdicts(trace: &SelectionTrace) -> Vec<VerdictReport> {
    trace
        .verdicts
        .iter()
        .map(|v| VerdictReport {
            label: v.label.clone(),
            admissible: v.admissible(),
            toxic: v.toxic,
            futile: v.futile,
            p_toxic: v.p_toxic,
            p_futile: v.p_futile,
        })
        .collect()
}

fn arm_reports(trace: &SelectionTrace) -> Vec<ArmReport> {
    trace
        .arms
        .iter()
        .map(|a| ArmReport {
            label: a.label.clone(),
            quasi_events: a.quasi_events,
            posterior_alpha: a.posterior.alpha,
            posterior_beta: a.posterior.beta,
            observed_scaled: a.observed_scaled,
            posterior_mean: a.posterior_mean,
        })
        .collect()
}
