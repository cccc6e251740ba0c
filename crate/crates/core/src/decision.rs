//! Admissibility screening and the utility-based dose-selection strategies.
//!
//! Both the joint-utility and CUI metrics flow through the same machinery:
//! each admissible arm's quasi-event count feeds a Beta posterior, the most
//! desirable dose is compared against lower doses through the exact
//! Beta-difference distribution, and every probe is recorded in an auditable
//! trace.

use crate::bayes::{beta_posterior, prob_diff_greater, tail_prob_greater, BetaParams, PosteriorPair};
use crate::error::{Error, Result};
use crate::utility::{
    cui_quasi_events, quasi_events2, quasi_events3, ArmData, CuiWeights, UtilityTable2,
    UtilityTable3,
};

/// Safety and efficacy screening rules with their probability cut-offs.
#[derive(Debug, Clone, Copy)]
pub struct AdmissibilityConfig {
    /// Toxicity upper limit.
    pub phi_t: f64,
    /// Efficacy lower limit.
    pub phi_e: f64,
    /// Posterior-probability cut-off for declaring a dose toxic.
    pub c_t: f64,
    /// Posterior-probability cut-off for declaring a dose futile.
    pub c_e: f64,
    /// Prior for the marginal toxicity and efficacy rates.
    pub prior: BetaParams,
}

impl AdmissibilityConfig {
    pub fn new(phi_t: f64, phi_e: f64, c_t: f64, c_e: f64) -> Result<Self> {
        for (name, v) in [("phi_t", phi_t), ("phi_e", phi_e), ("c_t", c_t), ("c_e", c_e)] {
            if !(0.0 < v && v < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "admissibility parameter {name}={v} outside (0, 1)"
                )));
            }
        }
        Ok(Self { phi_t, phi_e, c_t, c_e, prior: BetaParams::uniform() })
    }
}

/// Disposition of the consider zone when a downstream rule needs a binary
/// answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConsiderPolicy {
    TreatAsLow,
    TreatAsHigh,
    Report,
}

/// Dose-comparison strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Sequential,
    Pairwise,
}

/// Which metric drives the comparison.
#[derive(Debug, Clone)]
pub enum Metric {
    Utility2(UtilityTable2),
    Utility3(UtilityTable3),
    Cui(CuiWeights),
}

impl Metric {
    pub fn quasi_events(&self, arm: &ArmData) -> Result<f64> {
        match self {
            Metric::Utility2(u) => quasi_events2(arm, u),
            Metric::Utility3(u) => quasi_events3(arm, u),
            Metric::Cui(w) => cui_quasi_events(arm, w),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Metric::Utility2(_) | Metric::Utility3(_) => "utility",
            Metric::Cui(_) => "cui",
        }
    }
}

/// Tuning constants of the Bayesian comparison rule.
#[derive(Debug, Clone, Copy)]
pub struct DecisionConfig {
    /// Minimally important standardized-metric difference.
    pub delta: f64,
    /// Upper zone boundary is C1 = 1 - alpha1.
    pub alpha1: f64,
    /// Lower zone boundary is C2 = 1 - alpha2.
    pub alpha2: f64,
    pub strategy: Strategy,
    pub consider_policy: ConsiderPolicy,
    /// Prior for the standardized metric posteriors.
    pub prior: BetaParams,
}

impl DecisionConfig {
    pub fn new(delta: f64, alpha1: f64, alpha2: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&delta) {
            return Err(Error::InvalidParameter(format!("delta={delta} outside [-1, 1]")));
        }
        for (name, a) in [("alpha1", alpha1), ("alpha2", alpha2)] {
            if !(0.0 < a && a < 1.0) {
                return Err(Error::InvalidParameter(format!("{name}={a} outside (0, 1)")));
            }
        }
        if alpha2 <= alpha1 {
            // C2 = 1 - alpha2 must sit strictly below C1 = 1 - alpha1.
            return Err(Error::InvalidParameter(format!(
                "alpha2 ({alpha2}) must exceed alpha1 ({alpha1}) so that C2 < C1"
            )));
        }
        Ok(Self {
            delta,
            alpha1,
            alpha2,
            strategy: Strategy::Sequential,
            consider_policy: ConsiderPolicy::Report,
            prior: BetaParams::uniform(),
        })
    }

    pub fn c1(&self) -> f64 {
        1.0 - self.alpha1
    }

    pub fn c2(&self) -> f64 {
        1.0 - self.alpha2
    }
}

/// Zone of a pairwise comparison under the three-zone rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Zone {
    SelectHigh,
    SelectLow,
    ConsiderHigh,
}

impl Zone {
    pub fn code(&self) -> &'static str {
        match self {
            Zone::SelectHigh => "H",
            Zone::SelectLow => "L",
            Zone::ConsiderHigh => "C",
        }
    }
}

/// Outcome of one pairwise comparison.
#[derive(Debug, Clone, Copy)]
pub struct Decision {
    pub zone: Zone,
    pub probability: f64,
}

/// Admissibility verdict for one arm.
#[derive(Debug, Clone)]
pub struct AdmissibilityVerdict {
    pub label: String,
    pub level: u32,
    pub toxic: bool,
    pub futile: bool,
    /// Pr(toxicity rate > phi_t | data).
    pub p_toxic: f64,
    /// Pr(efficacy rate < phi_e | data).
    pub p_futile: f64,
}

impl AdmissibilityVerdict {
    pub fn admissible(&self) -> bool {
        !self.toxic && !self.futile
    }
}

/// Per-arm posterior summary used for ranking and reporting.
#[derive(Debug, Clone)]
pub struct ArmPosterior {
    pub index: usize,
    pub label: String,
    pub level: u32,
    pub n: u32,
    pub quasi_events: f64,
    pub posterior: BetaParams,
    /// Observed standardized metric on the 0-100 scale (100 * x / n).
    pub observed_scaled: f64,
    /// Posterior mean of the standardized metric; the desirability ranking key.
    pub posterior_mean: f64,
}

/// One recorded comparison in a selection run.
#[derive(Debug, Clone)]
pub struct ComparisonStep {
    pub high_label: String,
    pub low_label: String,
    /// Observed metric difference on the 0-100 scale.
    pub scaled_diff: f64,
    pub probability: f64,
    pub zone: Zone,
    /// True when this step ended the sequential scan.
    pub stopped: bool,
}

/// Auditable record of a selection run.
#[derive(Debug, Clone)]
pub struct SelectionTrace {
    pub metric: &'static str,
    pub verdicts: Vec<AdmissibilityVerdict>,
    /// Arms excluded because they sit above the most desirable dose but rank
    /// below it, with the posterior summaries backing the ranking.
    pub removed: Vec<String>,
    /// Inadmissible arms skipped during the comparison scan.
    pub skipped_inadmissible: Vec<String>,
    pub arms: Vec<ArmPosterior>,
    pub steps: Vec<ComparisonStep>,
    pub selected: Option<usize>,
}

/// Result of a sequential selection.
#[derive(Debug, Clone)]
pub struct SequentialOutcome {
    /// Index into the input arm slice, or None when no dose is selectable.
    pub selected: Option<usize>,
    pub trace: SelectionTrace,
}

/// One cell of the pairwise comparison matrix.
#[derive(Debug, Clone)]
pub struct PairwiseCell {
    pub high_index: usize,
    pub low_index: usize,
    pub scaled_diff: f64,
    pub probability: f64,
    pub zone: Zone,
    /// The nominal high dose ranks below the low dose in desirability.
    pub rank_inverted: bool,
}

/// Result of evaluating all admissible ordered pairs.
#[derive(Debug, Clone)]
pub struct PairwiseOutcome {
    pub cells: Vec<PairwiseCell>,
    pub verdicts: Vec<AdmissibilityVerdict>,
    pub arms: Vec<ArmPosterior>,
    /// Highest-level dose preferred over every admissible lower dose once the
    /// consider policy is applied; None under the report policy when a
    /// consider zone blocks resolution, or when no dose qualifies.
    pub recommended: Option<usize>,
    /// True when the recommendation could not be resolved because a consider
    /// zone was left unresolved under the report policy.
    pub unresolved_consider: bool,
}

/// Safety rule: the dose is toxic when the posterior probability that its
/// toxicity rate exceeds `phi_t` passes `c_t`.
pub fn is_toxic(arm: &ArmData, cfg: &AdmissibilityConfig) -> Result<bool> {
    Ok(toxicity_tail(arm, cfg)? > cfg.c_t)
}

fn toxicity_tail(arm: &ArmData, cfg: &AdmissibilityConfig) -> Result<f64> {
    let nt = arm.n_tox().ok_or_else(|| Error::MissingData {
        arm: arm.label.clone(),
        what: "toxicity count for the safety rule".into(),
    })?;
    let post = beta_posterior(cfg.prior, nt, arm.n as f64)?;
    tail_prob_greater(post, cfg.phi_t)
}

/// Efficacy rule: the dose is futile when the posterior probability that its
/// response rate falls below `phi_e` passes `c_e`.
pub fn is_futile(arm: &ArmData, cfg: &AdmissibilityConfig) -> Result<bool> {
    Ok(futility_tail(arm, cfg)? > cfg.c_e)
}

fn futility_tail(arm: &ArmData, cfg: &AdmissibilityConfig) -> Result<f64> {
    let ne = arm.n_eff().ok_or_else(|| Error::MissingData {
        arm: arm.label.clone(),
        what: "efficacy count for the futility rule".into(),
    })?;
    let post = beta_posterior(cfg.prior, ne, arm.n as f64)?;
    post.cdf(cfg.phi_e)
}

/// Screen every arm, returning the admissible indices and per-arm verdicts.
pub fn admissible_set(
    arms: &[ArmData],
    cfg: &AdmissibilityConfig,
) -> Result<(Vec<usize>, Vec<AdmissibilityVerdict>)> {
    let mut keep = Vec::new();
    let mut verdicts = Vec::with_capacity(arms.len());
    for (i, arm) in arms.iter().enumerate() {
        let p_toxic = toxicity_tail(arm, cfg)?;
        let p_futile = futility_tail(arm, cfg)?;
        let v = AdmissibilityVerdict {
            label: arm.label.clone(),
            level: arm.level,
            toxic: p_toxic > cfg.c_t,
            futile: p_futile > cfg.c_e,
            p_toxic,
            p_futile,
        };
        if v.admissible() {
            keep.push(i);
        }
        verdicts.push(v);
    }
    Ok((keep, verdicts))
}

fn summarize(arms: &[ArmData], indices: &[usize], metric: &Metric, prior: BetaParams) -> Result<Vec<ArmPosterior>> {
    indices
        .iter()
        .map(|&i| {
            let arm = &arms[i];
            let x = metric.quasi_events(arm)?;
            let n = arm.n as f64;
            let posterior = beta_posterior(prior, x, n)?;
            Ok(ArmPosterior {
                index: i,
                label: arm.label.clone(),
                level: arm.level,
                n: arm.n,
                quasi_events: x,
                posterior,
                observed_scaled: if arm.n == 0 { 0.0 } else { 100.0 * x / n },
                posterior_mean: posterior.mean(),
            })
        })
        .collect()
}

/// Order arm indices by posterior-mean desirability, descending; ties break
/// toward the lower dose level.
pub fn rank_by_desirability(
    arms: &[ArmData],
    indices: &[usize],
    metric: &Metric,
    prior: BetaParams,
) -> Result<Vec<usize>> {
    let summaries = summarize(arms, indices, metric, prior)?;
    let mut order: Vec<&ArmPosterior> = summaries.iter().collect();
    order.sort_by(|a, b| {
        b.posterior_mean
            .partial_cmp(&a.posterior_mean)
            .unwrap()
            .then(a.level.cmp(&b.level))
    });
    Ok(order.into_iter().map(|s| s.index).collect())
}

/// Three-zone comparison of an admissible high/low dose pair.
pub fn pairwise_decision(
    high: &ArmData,
    low: &ArmData,
    metric: &Metric,
    cfg: &DecisionConfig,
) -> Result<Decision> {
    let xh = metric.quasi_events(high)?;
    let xl = metric.quasi_events(low)?;
    let pair = PosteriorPair {
        high: beta_posterior(cfg.prior, xh, high.n as f64)?,
        low: beta_posterior(cfg.prior, xl, low.n as f64)?,
    };
    let p = prob_diff_greater(&pair, cfg.delta)?;
    Ok(Decision { zone: classify(p, cfg), probability: p })
}

fn classify(p: f64, cfg: &DecisionConfig) -> Zone {
    if p > cfg.c1() {
        Zone::SelectHigh
    } else if p < cfg.c2() {
        Zone::SelectLow
    } else {
        Zone::ConsiderHigh
    }
}

/// Sequential selection: screen, rank, drop higher doses ranked below the
/// most desirable one, then compare it to each admissible lower dose from the
/// bottom up. The first comparison not exceeding C1 selects that lower dose;
/// otherwise the most desirable dose is selected. No consider zone applies.
pub fn sequential_select(
    arms: &[ArmData],
    metric: &Metric,
    cfg: &DecisionConfig,
    adm: &AdmissibilityConfig,
) -> Result<SequentialOutcome> {
    let (admissible, verdicts) = admissible_set(arms, adm)?;
    let mut trace = SelectionTrace {
        metric: metric.name(),
        verdicts,
        removed: Vec::new(),
        skipped_inadmissible: arms
            .iter()
            .enumerate()
            .filter(|(i, _)| !admissible.contains(i))
            .map(|(_, a)| a.label.clone())
            .collect(),
        arms: Vec::new(),
        steps: Vec::new(),
        selected: None,
    };
    if admissible.is_empty() {
        return Ok(SequentialOutcome { selected: None, trace });
    }

    let summaries = summarize(arms, &admissible, metric, cfg.prior)?;
    let ranking = rank_by_desirability(arms, &admissible, metric, cfg.prior)?;
    let dstar = ranking[0];
    let dstar_level = arms[dstar].level;

    // Doses above the most desirable one rank below it; they leave the
    // comparison entirely.
    for s in &summaries {
        if s.level > dstar_level {
            trace.removed.push(s.label.clone());
        }
    }
    trace.arms = summaries;

    let mut comparators: Vec<usize> = admissible
        .iter()
        .copied()
        .filter(|&i| arms[i].level < dstar_level)
        .collect();
    comparators.sort_by_key(|&i| arms[i].level);

    let dstar_summary = trace.arms.iter().find(|s| s.index == dstar).unwrap().clone();
    let mut selected = dstar;
    for (pos, &low_idx) in comparators.iter().enumerate() {
        let d = pairwise_decision(&arms[dstar], &arms[low_idx], metric, cfg)?;
        let low_summary = trace.arms.iter().find(|s| s.index == low_idx).unwrap();
        let stop = !(d.probability > cfg.c1());
        trace.steps.push(ComparisonStep {
            high_label: dstar_summary.label.clone(),
            low_label: low_summary.label.clone(),
            scaled_diff: dstar_summary.observed_scaled - low_summary.observed_scaled,
            probability: d.probability,
            zone: if stop { Zone::SelectLow } else { Zone::SelectHigh },
            stopped: stop,
        });
        if stop {
            selected = low_idx;
            break;
        }
        let _ = pos;
    }

    trace.selected = Some(selected);
    Ok(SequentialOutcome { selected: Some(selected), trace })
}

/// Evaluate every ordered admissible pair (higher level vs lower level),
/// retaining the consider zone, and derive a recommendation: the highest dose
/// preferred over all admissible lower doses once the consider policy is
/// applied. The full matrix is always reported.
pub fn pairwise_matrix(
    arms: &[ArmData],
    metric: &Metric,
    cfg: &DecisionConfig,
    adm: &AdmissibilityConfig,
) -> Result<PairwiseOutcome> {
    let (admissible, verdicts) = admissible_set(arms, adm)?;
    if admissible.len() < 2 {
        return Err(Error::NoAdmissibleDoses(format!(
            "pairwise comparison needs at least two admissible doses, have {}",
            admissible.len()
        )));
    }
    let summaries = summarize(arms, &admissible, metric, cfg.prior)?;
    let mean_of = |idx: usize| summaries.iter().find(|s| s.index == idx).unwrap();

    let mut ordered = admissible.clone();
    ordered.sort_by_key(|&i| arms[i].level);

    let mut cells = Vec::new();
    for (hi_pos, &hi) in ordered.iter().enumerate() {
        for &lo in ordered.iter().take(hi_pos) {
            let d = pairwise_decision(&arms[hi], &arms[lo], metric, cfg)?;
            cells.push(PairwiseCell {
                high_index: hi,
                low_index: lo,
                scaled_diff: mean_of(hi).observed_scaled - mean_of(lo).observed_scaled,
                probability: d.probability,
                zone: d.zone,
                rank_inverted: mean_of(hi).posterior_mean < mean_of(lo).posterior_mean,
            });
        }
    }

    // Recommendation: walk doses from the top; a dose qualifies when every
    // comparison against an admissible lower dose resolves in its favor.
    let mut recommended = None;
    let mut unresolved = false;
    'candidates: for (hi_pos, &hi) in ordered.iter().enumerate().rev() {
        if hi_pos == 0 {
            recommended = Some(hi);
            break;
        }
        let mut all_high = true;
        for &lo in ordered.iter().take(hi_pos) {
            let cell = cells
                .iter()
                .find(|c| c.high_index == hi && c.low_index == lo)
                .unwrap();
            let favored = match cell.zone {
                Zone::SelectHigh => true,
                Zone::SelectLow => false,
                Zone::ConsiderHigh => match cfg.consider_policy {
                    ConsiderPolicy::TreatAsHigh => true,
                    ConsiderPolicy::TreatAsLow => false,
                    ConsiderPolicy::Report => {
                        unresolved = true;
                        break 'candidates;
                    }
                },
            };
            if !favored {
                all_high = false;
                break;
            }
        }
        if all_high {
            recommended = Some(hi);
            break;
        }
    }

    Ok(PairwiseOutcome {
        cells,
        verdicts,
        arms: summaries,
        recommended,
        unresolved_consider: unresolved,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::utility::ArmCounts;

    fn adm() -> AdmissibilityConfig {
        AdmissibilityConfig::new(0.35, 0.22, 0.95, 0.90).unwrap()
    }

    fn arm(label: &str, level: u32, n: u32, n_tox: f64, n_eff: f64) -> ArmData {
        ArmData::from_marginals(label, level, n, n_tox, n_eff, None).unwrap()
    }

    fn metric_3565() -> Metric {
        Metric::Utility2(UtilityTable2::new(100.0, 35.0, 65.0, 0.0).unwrap())
    }

    #[test]
    fn toxicity_rule_examples() {
        let cfg = adm();
        // Prior only: Pr(p_T > 0.35) = 0.65 under the uniform prior.
        assert!(!is_toxic(&arm("d", 1, 0, 0.0, 0.0), &cfg).unwrap());
        // 20 of 30 toxicities: clearly toxic.
        assert!(is_toxic(&arm("d", 1, 30, 20.0, 10.0), &cfg).unwrap());
        assert!(!is_toxic(&arm("d", 1, 30, 0.0, 10.0), &cfg).unwrap());
    }

    #[test]
    fn futility_rule_examples() {
        let cfg = adm();
        // Prior only: Pr(p_E < 0.22) = 0.22.
        assert!(!is_futile(&arm("d", 1, 0, 0.0, 0.0), &cfg).unwrap());
        // One responder in 30: I_0.22(2, 30) = 0.9956 > 0.90.
        assert!(is_futile(&arm("d", 1, 30, 0.0, 1.0), &cfg).unwrap());
        assert!(!is_futile(&arm("d", 1, 30, 0.0, 30.0), &cfg).unwrap());
    }

    #[test]
    fn admissible_set_screens_each_rule() {
        let cfg = adm();
        let arms = vec![
            arm("low", 1, 30, 4.0, 12.0),
            arm("toxic", 2, 30, 20.0, 18.0),
            arm("futile", 3, 30, 3.0, 1.0),
        ];
        let (keep, verdicts) = admissible_set(&arms, &cfg).unwrap();
        assert_eq!(keep, vec![0]);
        assert!(verdicts[1].toxic && !verdicts[1].futile);
        assert!(verdicts[2].futile && !verdicts[2].toxic);

        // Prior-only arms cannot trip either rule.
        let empty = vec![arm("a", 1, 0, 0.0, 0.0), arm("b", 2, 0, 0.0, 0.0)];
        let (keep, _) = admissible_set(&empty, &cfg).unwrap();
        assert_eq!(keep.len(), 2);
    }

    #[test]
    fn zones_partition_probability_space() {
        let cfg = DecisionConfig::new(0.0, 0.2, 0.34).unwrap();
        for i in 0..=1000 {
            let p = i as f64 / 1000.0;
            let z = classify(p, &cfg);
            let expected = if p > 0.8 {
                Zone::SelectHigh
            } else if p < 0.66 {
                Zone::SelectLow
            } else {
                Zone::ConsiderHigh
            };
            assert_eq!(z, expected, "p={p}");
        }
    }

    #[test]
    fn identical_arms_select_low() {
        let cfg = DecisionConfig::new(0.0, 0.2, 0.34).unwrap();
        let a = arm("lo", 1, 30, 5.0, 14.0);
        let b = arm("hi", 2, 30, 5.0, 14.0);
        let d = pairwise_decision(&b, &a, &metric_3565(), &cfg).unwrap();
        assert!((d.probability - 0.5).abs() < 1e-8);
        assert_eq!(d.zone, Zone::SelectLow);
    }

    #[test]
    fn ranking_prefers_lower_level_on_ties() {
        let arms = vec![
            arm("d1", 1, 30, 5.0, 14.0),
            arm("d2", 2, 30, 5.0, 14.0),
            arm("d3", 3, 30, 5.0, 14.0),
        ];
        let idx: Vec<usize> = (0..3).collect();
        let order = rank_by_desirability(&arms, &idx, &metric_3565(), BetaParams::uniform()).unwrap();
        assert_eq!(order, vec![0, 1, 2]);
    }

    #[test]
    fn sequential_single_arm_trivial() {
        let cfg = DecisionConfig::new(0.0, 0.2, 0.34).unwrap();
        let arms = vec![arm("only", 1, 30, 5.0, 14.0)];
        let out = sequential_select(&arms, &metric_3565(), &cfg, &adm()).unwrap();
        assert_eq!(out.selected, Some(0));
        assert!(out.trace.steps.is_empty());
    }

    #[test]
    fn sequential_no_admissible_doses() {
        let cfg = DecisionConfig::new(0.0, 0.2, 0.34).unwrap();
        let arms = vec![arm("futile", 1, 30, 3.0, 1.0)];
        let out = sequential_select(&arms, &metric_3565(), &cfg, &adm()).unwrap();
        assert_eq!(out.selected, None);
    }

    #[test]
    fn sequential_drops_higher_lower_ranked_doses() {
        // A middle dose more desirable than the top dose removes the top dose
        // from the scan entirely.
        let cfg = DecisionConfig::new(0.0, 0.2, 0.34).unwrap();
        let u = Metric::Utility2(UtilityTable2::new(100.0, 40.0, 60.0, 0.0).unwrap());
        let arms = vec![
            ArmData::from_marginals("600 mg", 1, 30, 5.1, 14.1, None).unwrap(),
            ArmData::from_marginals("1200 mg", 2, 30, 6.0, 20.1, None).unwrap(),
            ArmData::from_marginals("1800 mg", 3, 30, 7.8, 18.0, None).unwrap(),
        ];
        let out = sequential_select(&arms, &u, &cfg, &adm()).unwrap();
        assert_eq!(out.trace.removed, vec!["1800 mg".to_string()]);
        assert_eq!(out.selected, Some(1));
        assert_eq!(out.trace.steps.len(), 1);
        // Select-high zone at step 1: probability exceeds C1 = 0.8.
        assert!(out.trace.steps[0].probability > 0.8);
    }

    #[test]
    fn sequential_skips_inadmissible_intermediate() {
        let cfg = DecisionConfig::new(0.0, 0.2, 0.34).unwrap();
        let arms = vec![
            arm("d1", 1, 30, 4.0, 13.0),
            arm("d2", 2, 30, 3.0, 1.0), // futile
            arm("d3", 3, 30, 6.0, 26.0),
        ];
        let out = sequential_select(&arms, &metric_3565(), &cfg, &adm()).unwrap();
        assert_eq!(out.trace.skipped_inadmissible, vec!["d2".to_string()]);
        // Only one comparison (d3 vs d1) can occur.
        assert!(out.trace.steps.len() <= 1);
        let sel = out.selected.unwrap();
        assert_ne!(sel, 1, "an inadmissible dose must never be selected");
    }

    #[test]
    fn sequential_at_most_d_minus_1_comparisons() {
        let cfg = DecisionConfig::new(0.0, 0.2, 0.34).unwrap();
        let arms: Vec<ArmData> = (1..=4)
            .map(|lvl| arm(&format!("d{lvl}"), lvl, 30, 4.0 + lvl as f64, 10.0 + 3.0 * lvl as f64))
            .collect();
        let out = sequential_select(&arms, &metric_3565(), &cfg, &adm()).unwrap();
        assert!(out.trace.steps.len() <= arms.len() - 1);
        assert!(out.selected.is_some());
    }

    #[test]
    fn pairwise_two_identical_arms_recommend_low() {
        let mut cfg = DecisionConfig::new(0.0, 0.2, 0.34).unwrap();
        cfg.consider_policy = ConsiderPolicy::TreatAsLow;
        let arms = vec![arm("lo", 1, 30, 5.0, 14.0), arm("hi", 2, 30, 5.0, 14.0)];
        let out = pairwise_matrix(&arms, &metric_3565(), &cfg, &adm()).unwrap();
        assert_eq!(out.cells.len(), 1);
        assert_eq!(out.cells[0].zone, Zone::SelectLow);
        assert_eq!(out.recommended, Some(0));
    }

    #[test]
    fn pairwise_requires_two_admissible() {
        let cfg = DecisionConfig::new(0.0, 0.2, 0.34).unwrap();
        let arms = vec![arm("d1", 1, 30, 4.0, 13.0), arm("futile", 2, 30, 3.0, 1.0)];
        assert!(pairwise_matrix(&arms, &metric_3565(), &cfg, &adm()).is_err());
    }

    #[test]
    fn pairwise_report_policy_never_silently_resolves() {
        let cfg = DecisionConfig::new(0.0, 0.2, 0.34).unwrap(); // report policy default
        let arms = vec![
            ArmData::from_marginals("d1", 1, 30, 6.0, 17.1, None).unwrap(),
            ArmData::from_marginals("d2", 2, 30, 7.8, 22.8, None).unwrap(),
        ];
        let metric = Metric::Utility2(UtilityTable2::new(100.0, 40.0, 60.0, 0.0).unwrap());
        let out = pairwise_matrix(&arms, &metric, &cfg, &adm()).unwrap();
        assert_eq!(out.cells[0].zone, Zone::ConsiderHigh);
        assert!(out.unresolved_consider);
        assert_eq!(out.recommended, None);
    }

    #[test]
    fn consider_policy_does_not_change_sequential() {
        let mut cfg = DecisionConfig::new(0.0, 0.2, 0.34).unwrap();
        let arms = vec![
            arm("d1", 1, 30, 4.0, 12.0),
            arm("d2", 2, 30, 6.0, 17.0),
            arm("d3", 3, 30, 8.0, 23.0),
        ];
        let base = sequential_select(&arms, &metric_3565(), &cfg, &adm()).unwrap();
        for policy in [ConsiderPolicy::TreatAsLow, ConsiderPolicy::TreatAsHigh, ConsiderPolicy::Report] {
            cfg.consider_policy = policy;
            let out = sequential_select(&arms, &metric_3565(), &cfg, &adm()).unwrap();
            assert_eq!(out.selected, base.selected);
        }
    }

    #[test]
    fn utility_and_cui_selections_coincide_when_posteriors_match() {
        // Two endpoints with u2 + u3 = 100 and weights u2/100, u3/100 give
        // identical quasi-events, hence identical decisions.
        let cfg = DecisionConfig::new(0.0, 0.2, 0.34).unwrap();
        let cui = Metric::Cui(CuiWeights::two_endpoint(0.35, 0.65).unwrap());
        let arms = vec![
            arm("d1", 1, 30, 4.0, 12.0),
            arm("d2", 2, 30, 6.0, 17.0),
            arm("d3", 3, 30, 8.0, 23.0),
        ];
        let a = sequential_select(&arms, &metric_3565(), &cfg, &adm()).unwrap();
        let b = sequential_select(&arms, &cui, &cfg, &adm()).unwrap();
        assert_eq!(a.selected, b.selected);
        for (sa, sb) in a.trace.steps.iter().zip(b.trace.steps.iter()) {
            assert!((sa.probability - sb.probability).abs() < 1e-10);
        }
    }

    #[test]
    fn adding_responders_to_top_dose_keeps_selection() {
        let cfg = DecisionConfig::new(0.0, 0.2, 0.34).unwrap();
        let base = vec![arm("d1", 1, 30, 4.0, 12.0), arm("d2", 2, 30, 6.0, 24.0)];
        let out = sequential_select(&base, &metric_3565(), &cfg, &adm()).unwrap();
        assert_eq!(out.selected, Some(1));
        for extra in [25.0, 27.0, 30.0] {
            let arms = vec![base[0].clone(), arm("d2", 2, 30, 6.0, extra)];
            let out2 = sequential_select(&arms, &metric_3565(), &cfg, &adm()).unwrap();
            assert_eq!(out2.selected, Some(1));
        }
    }

    #[test]
    fn joint_counts_feed_three_endpoint_metric() {
        let cfg = DecisionConfig::new(0.0, 0.2, 0.34).unwrap();
        let table =
            UtilityTable3::new([90.0, 30.0, 60.0, 0.0], [100.0, 35.0, 65.0, 0.0]).unwrap();
        let metric = Metric::Utility3(table);
        let mk = |label: &str, level: u32, pos: [f64; 4], neg: [f64; 4]| {
            ArmData::new(
                label,
                level,
                (pos.iter().sum::<f64>() + neg.iter().sum::<f64>()) as u32,
                ArmCounts { joint3: Some([neg, pos]), ..Default::default() },
            )
            .unwrap()
        };
        let arms = vec![
            mk("d1", 1, [3.0, 4.0, 1.0, 1.0], [8.0, 9.0, 2.0, 2.0]),
            mk("d2", 2, [8.0, 3.0, 2.0, 1.0], [7.0, 6.0, 2.0, 1.0]),
        ];
        let out = sequential_select(&arms, &metric, &cfg, &adm()).unwrap();
        assert!(out.selected.is_some());
        assert_eq!(out.trace.metric, "utility");
    }
}
