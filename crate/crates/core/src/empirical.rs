//! The empirical decision-table baseline.
//!
//! Dose pairs are classified by the observed efficacy difference (ED), the
//! toxicity ratio (TR), and optionally the biomarker difference (BD) against
//! fixed thresholds. The two-endpoint table and the biomarker-split
//! three-endpoint table are encoded verbatim; the middle bands [ED1, ED2] and
//! [TR1, TR2] are closed, the outer bands strict.

use crate::error::{Error, Result};
use crate::utility::MarginalRates;

/// Raw table cell before any policy is applied. `starred` marks the cell
/// whose footnote permits an a-priori switch to the low dose when ED < 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmpiricalCell {
    High,
    Low,
    Consider { starred: bool },
}

/// Cell after the negative-ED rule and consider policy are applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolvedCell {
    High,
    Low,
    /// Left unresolved under the report policy.
    Consider,
}

/// Disposition of consider cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmpiricalConsiderPolicy {
    Low,
    High,
    Report,
}

/// Disposition of the starred consider cell when ED < 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NegEdPolicy {
    /// Keep the consider decision.
    Consider,
    /// Select the low dose a priori.
    Low,
}

/// Threshold set for the empirical design.
#[derive(Debug, Clone, Copy)]
pub struct EmpiricalThresholds {
    pub ed1: f64,
    pub ed2: f64,
    pub tr1: f64,
    pub tr2: f64,
    /// Biomarker-difference threshold; None restricts the design to the
    /// two-endpoint table.
    pub bd1: Option<f64>,
    pub consider_policy: EmpiricalConsiderPolicy,
    pub neg_ed_policy: NegEdPolicy,
}

impl EmpiricalThresholds {
    pub fn new(ed1: f64, ed2: f64, tr1: f64, tr2: f64, bd1: Option<f64>) -> Result<Self> {
        if !(ed1 < ed2) || !ed1.is_finite() || !ed2.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "efficacy thresholds must satisfy ED1 < ED2, got ({ed1}, {ed2})"
            )));
        }
        if !(tr1 < tr2) || !tr1.is_finite() || !tr2.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "toxicity thresholds must satisfy TR1 < TR2, got ({tr1}, {tr2})"
            )));
        }
        if let Some(bd) = bd1 {
            if !bd.is_finite() {
                return Err(Error::InvalidParameter("BD1 must be finite".into()));
            }
        }
        Ok(Self {
            ed1,
            ed2,
            tr1,
            tr2,
            bd1,
            consider_policy: EmpiricalConsiderPolicy::Low,
            neg_ed_policy: NegEdPolicy::Consider,
        })
    }
}

// Column 0: ED > ED2; column 1: ED in [ED1, ED2]; column 2: ED < ED1.
// Row 0: TR < TR1; row 1: TR in [TR1, TR2]; row 2: TR > TR2.
const H: EmpiricalCell = EmpiricalCell::High;
const L: EmpiricalCell = EmpiricalCell::Low;
const C: EmpiricalCell = EmpiricalCell::Consider { starred: false };
const CS: EmpiricalCell = EmpiricalCell::Consider { starred: true };

const TABLE2: [[EmpiricalCell; 3]; 3] = [[H, H, CS], [H, C, L], [C, L, L]];
// Biomarker difference above BD1.
const TABLE3_POS: [[EmpiricalCell; 3]; 3] = [[H, H, H], [H, C, L], [C, L, L]];
// Biomarker difference at or below BD1.
const TABLE3_NEG: [[EmpiricalCell; 3]; 3] = [[H, H, CS], [H, C, L], [L, L, L]];

fn ed_column(ed: f64, thr: &EmpiricalThresholds) -> usize {
    if ed > thr.ed2 {
        0
    } else if ed >= thr.ed1 {
        1
    } else {
        2
    }
}

fn tr_row(tr: f64, thr: &EmpiricalThresholds) -> usize {
    if tr < thr.tr1 {
        0
    } else if tr <= thr.tr2 {
        1
    } else {
        2
    }
}

/// Toxicity ratio of a high/low pair. Division by a zero low-dose rate maps
/// to +infinity when the high dose shows any toxicity and to 1 when neither
/// dose does.
pub fn toxicity_ratio(tox_high: f64, tox_low: f64) -> f64 {
    if tox_low == 0.0 {
        if tox_high == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        tox_high / tox_low
    }
}

/// Two-endpoint cell lookup.
pub fn empirical_cell2(ed: f64, tr: f64, thr: &EmpiricalThresholds) -> EmpiricalCell {
    TABLE2[tr_row(tr, thr)][ed_column(ed, thr)]
}

/// Three-endpoint cell lookup; the biomarker difference picks the block.
pub fn empirical_cell3(ed: f64, tr: f64, bd: f64, thr: &EmpiricalThresholds) -> EmpiricalCell {
    let bd1 = thr.bd1.unwrap_or(0.0);
    let table = if bd > bd1 { &TABLE3_POS } else { &TABLE3_NEG };
    table[tr_row(tr, thr)][ed_column(ed, thr)]
}

/// Apply the negative-ED rule and the consider policy to a raw cell.
pub fn resolve_cell(cell: EmpiricalCell, ed: f64, thr: &EmpiricalThresholds) -> ResolvedCell {
    let after_neg_ed = match cell {
        EmpiricalCell::Consider { starred: true }
            if ed < 0.0 && thr.neg_ed_policy == NegEdPolicy::Low =>
        {
            EmpiricalCell::Low
        }
        other => other,
    };
    match after_neg_ed {
        EmpiricalCell::High => ResolvedCell::High,
        EmpiricalCell::Low => ResolvedCell::Low,
        EmpiricalCell::Consider { .. } => match thr.consider_policy {
            EmpiricalConsiderPolicy::Low => ResolvedCell::Low,
            EmpiricalConsiderPolicy::High => ResolvedCell::High,
            EmpiricalConsiderPolicy::Report => ResolvedCell::Consider,
        },
    }
}

/// One arm of an empirical comparison: a label and its observed rates.
#[derive(Debug, Clone)]
pub struct EmpiricalArm {
    pub label: String,
    pub level: u32,
    pub rates: MarginalRates,
}

/// One recorded comparison.
#[derive(Debug, Clone)]
pub struct EmpiricalStep {
    pub high_label: String,
    pub low_label: String,
    pub ed: f64,
    pub tr: f64,
    pub bd: Option<f64>,
    pub cell: EmpiricalCell,
    pub resolved: ResolvedCell,
    pub stopped: bool,
}

/// Outcome of a sequential empirical run.
#[derive(Debug, Clone)]
pub struct EmpiricalOutcome {
    /// Index into the input slice; None only under the report policy when a
    /// consider cell blocked resolution.
    pub selected: Option<usize>,
    pub steps: Vec<EmpiricalStep>,
}

/// Sequential empirical comparison: the highest dose level is the reference;
/// lower doses are compared from the bottom up. A resolved Low stops the scan
/// and selects the comparator; when every comparison resolves High the
/// reference dose is selected.
///
/// The report policy cannot drive a sequential scan; encountering a consider
/// cell under it stops with no selection so the caller can surface the
/// unresolved state rather than have it silently converted.
pub fn empirical_sequential(
    arms: &[EmpiricalArm],
    thr: &EmpiricalThresholds,
) -> Result<EmpiricalOutcome> {
    if arms.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "the sequential empirical design needs at least two arms, got {}",
            arms.len()
        )));
    }
    let mut order: Vec<usize> = (0..arms.len()).collect();
    order.sort_by_key(|&i| arms[i].level);
    let ref_idx = *order.last().unwrap();
    let reference = &arms[ref_idx];

    let mut steps = Vec::new();
    for &i in order.iter().take(order.len() - 1) {
        let low = &arms[i];
        let ed = reference.rates.efficacy - low.rates.efficacy;
        let tr = toxicity_ratio(reference.rates.toxicity, low.rates.toxicity);
        let (cell, bd) = match (reference.rates.biomarker, low.rates.biomarker, thr.bd1) {
            (Some(bh), Some(bl), Some(_)) => {
                let bd = bh - bl;
                (empirical_cell3(ed, tr, bd, thr), Some(bd))
            }
            _ => (empirical_cell2(ed, tr, thr), None),
        };
        let resolved = resolve_cell(cell, ed, thr);
        let stopped = resolved != ResolvedCell::High;
        steps.push(EmpiricalStep {
            high_label: reference.label.clone(),
            low_label: low.label.clone(),
            ed,
            tr,
            bd,
            cell,
            resolved,
            stopped,
        });
        match resolved {
            ResolvedCell::Low => return Ok(EmpiricalOutcome { selected: Some(i), steps }),
            ResolvedCell::Consider => return Ok(EmpiricalOutcome { selected: None, steps }),
            ResolvedCell::High => {}
        }
    }
    Ok(EmpiricalOutcome { selected: Some(ref_idx), steps })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn thr2() -> EmpiricalThresholds {
        EmpiricalThresholds::new(0.15, 0.35, 1.5, 2.0, None).unwrap()
    }

    fn thr3() -> EmpiricalThresholds {
        EmpiricalThresholds::new(0.15, 0.35, 1.5, 2.0, Some(0.1)).unwrap()
    }

    #[test]
    fn two_endpoint_cells() {
        let t = thr2();
        assert_eq!(empirical_cell2(0.40, 1.2, &t), EmpiricalCell::High);
        assert_eq!(empirical_cell2(0.29, 1.53, &t), EmpiricalCell::Consider { starred: false });
        assert_eq!(empirical_cell2(0.10, 2.5, &t), EmpiricalCell::Low);
        assert_eq!(empirical_cell2(0.10, 1.2, &t), EmpiricalCell::Consider { starred: true });
        assert_eq!(empirical_cell2(0.40, 2.5, &t), EmpiricalCell::Consider { starred: false });
    }

    #[test]
    fn boundary_membership_is_closed_in_the_middle() {
        let t = thr2();
        // ED exactly at ED1 / ED2 belongs to the middle column.
        assert_eq!(empirical_cell2(0.15, 1.0, &t), EmpiricalCell::High);
        assert_eq!(empirical_cell2(0.35, 1.0, &t), EmpiricalCell::High);
        assert_eq!(empirical_cell2(0.15, 1.7, &t), EmpiricalCell::Consider { starred: false });
        // TR exactly at TR1 / TR2 belongs to the middle row.
        assert_eq!(empirical_cell2(0.40, 1.5, &t), EmpiricalCell::High);
        assert_eq!(empirical_cell2(0.40, 2.0, &t), EmpiricalCell::High);
        assert_eq!(empirical_cell2(0.25, 2.0, &t), EmpiricalCell::Consider { starred: false });
    }

    #[test]
    fn three_endpoint_cells() {
        let t = thr3();
        // Biomarker lift: the low-efficacy / low-toxicity corner becomes High.
        assert_eq!(empirical_cell3(0.20, 1.4, 0.2, &t), EmpiricalCell::High);
        assert_eq!(empirical_cell3(0.10, 1.4, 0.05, &t), EmpiricalCell::Consider { starred: true });
        assert_eq!(empirical_cell3(0.40, 2.5, 0.05, &t), EmpiricalCell::Low);
        // Same corner with biomarker support stays Consider in the middle row.
        assert_eq!(empirical_cell3(0.10, 1.4, 0.2, &t), EmpiricalCell::High);
        assert_eq!(empirical_cell3(0.25, 1.7, 0.2, &t), EmpiricalCell::Consider { starred: false });
        // BD exactly at BD1 uses the right-hand block.
        assert_eq!(empirical_cell3(0.10, 1.0, 0.1, &t), EmpiricalCell::Consider { starred: true });
    }

    #[test]
    fn toxicity_ratio_zero_handling() {
        assert_eq!(toxicity_ratio(0.0, 0.0), 1.0);
        assert!(toxicity_ratio(0.1, 0.0).is_infinite());
        assert!((toxicity_ratio(0.26, 0.17) - 1.5294117647058822).abs() < 1e-12);
        // Infinite TR lands in the top-ratio band.
        assert_eq!(tr_row(f64::INFINITY, &thr2()), 2);
    }

    #[test]
    fn neg_ed_policy_applies_only_to_starred_cell() {
        let mut t = thr2();
        t.neg_ed_policy = NegEdPolicy::Low;
        let starred = empirical_cell2(-0.10, 1.0, &t);
        assert_eq!(starred, EmpiricalCell::Consider { starred: true });
        assert_eq!(resolve_cell(starred, -0.10, &t), ResolvedCell::Low);
        // Positive ED in the same cell keeps the consider disposition.
        t.consider_policy = EmpiricalConsiderPolicy::Report;
        assert_eq!(resolve_cell(starred, 0.10, &t), ResolvedCell::Consider);
        // The unstarred consider cell is untouched by the negative-ED rule.
        let unstarred = EmpiricalCell::Consider { starred: false };
        assert_eq!(resolve_cell(unstarred, -0.10, &t), ResolvedCell::Consider);
    }

    fn arm(label: &str, level: u32, tox: f64, eff: f64, bio: Option<f64>) -> EmpiricalArm {
        EmpiricalArm {
            label: label.into(),
            level,
            rates: MarginalRates::new(tox, eff, bio).unwrap(),
        }
    }

    #[test]
    fn sequential_consider_low_stops_at_first_dose() {
        // Response 47/57/76, toxicity 17/20/26: ED 0.29, TR 1.53 lands in the
        // consider cell; the low policy stops at the lowest dose.
        let arms = vec![
            arm("d1", 1, 0.17, 0.47, None),
            arm("d2", 2, 0.20, 0.57, None),
            arm("d3", 3, 0.26, 0.76, None),
        ];
        let out = empirical_sequential(&arms, &thr2()).unwrap();
        assert_eq!(out.selected, Some(0));
        assert_eq!(out.steps.len(), 1);
        assert!((out.steps[0].ed - 0.29).abs() < 1e-12);
        assert_eq!(out.steps[0].resolved, ResolvedCell::Low);
    }

    #[test]
    fn sequential_three_endpoint_tiebreak() {
        // Biomarker difference above the threshold still leaves the middle
        // cell Consider, so the low policy selects dose 1.
        let arms = vec![
            arm("d1", 1, 0.17, 0.47, Some(0.25)),
            arm("d2", 2, 0.20, 0.57, Some(0.30)),
            arm("d3", 3, 0.26, 0.76, Some(0.45)),
        ];
        let out = empirical_sequential(&arms, &thr3()).unwrap();
        assert_eq!(out.selected, Some(0));
        assert_eq!(out.steps[0].bd, Some(0.2));
        assert_eq!(out.steps[0].resolved, ResolvedCell::Low);
    }

    #[test]
    fn sequential_identical_arms_policy_resolved() {
        let arms = vec![
            arm("d1", 1, 0.1, 0.3, None),
            arm("d2", 2, 0.1, 0.3, None),
        ];
        let mut t = thr2();
        let out = empirical_sequential(&arms, &t).unwrap();
        // ED = 0 < ED1 and TR = 1 < TR1: the starred consider cell, low policy.
        assert_eq!(out.selected, Some(0));
        t.consider_policy = EmpiricalConsiderPolicy::High;
        let out = empirical_sequential(&arms, &t).unwrap();
        assert_eq!(out.selected, Some(1));
        t.consider_policy = EmpiricalConsiderPolicy::Report;
        let out = empirical_sequential(&arms, &t).unwrap();
        assert_eq!(out.selected, None);
    }

    #[test]
    fn sequential_all_high_selects_reference() {
        let arms = vec![
            arm("d1", 1, 0.10, 0.30, None),
            arm("d2", 2, 0.12, 0.55, None),
            arm("d3", 3, 0.13, 0.72, None),
        ];
        let out = empirical_sequential(&arms, &thr2()).unwrap();
        assert_eq!(out.selected, Some(2));
        assert_eq!(out.steps.len(), 2);
        assert!(out.steps.iter().all(|s| s.resolved == ResolvedCell::High));
    }

    #[test]
    fn exactly_one_cell_fires_everywhere() {
        // Dense grid over (ED, TR, BD): the classifier is total and the
        // resolved decision deterministic.
        let t = thr3();
        let mut k = 0u32;
        for i in 0..=40 {
            let ed = -1.0 + 2.0 * i as f64 / 40.0;
            for j in 0..=40 {
                let tr = 3.0 * j as f64 / 40.0;
                for b in 0..=5 {
                    let bd = -0.3 + 0.6 * b as f64 / 5.0;
                    let c1 = empirical_cell3(ed, tr, bd, &t);
                    let c2 = empirical_cell3(ed, tr, bd, &t);
                    assert_eq!(c1, c2);
                    k += 1;
                }
            }
        }
        assert!(k > 0);
    }
}
