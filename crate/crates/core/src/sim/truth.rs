//! Plug-in truth oracles: the dose each design "should" pick given the true
//! rates, used as the reference when scoring simulated selections.
//!
//! Three oracles mirror the three designs:
//!
//! - the empirical truth walks the decision table on the true rates;
//! - the utility/CUI truth runs the sequential Bayesian comparison on the
//!   expected (fractional) event counts at the trial sample size;
//! - the shared two-proportion-test truth classifies each pairwise contrast
//!   as a clear difference, a borderline difference, or no difference, with
//!   borderline contrasts resolved by the regime's consider policy.

use crate::bayes::{beta_posterior, prob_diff_greater, BetaParams, PosteriorPair};
use crate::empirical::{empirical_sequential, EmpiricalArm, EmpiricalConsiderPolicy};
use crate::error::{Error, Result};
use crate::sim::ScenarioSpec;
use crate::special::norm_cdf;
use crate::utility::{cui_value, mean_utility_joint2, mean_utility_joint3, OutcomeProbs};

/// Minimally important standardized difference used by the utility and CUI
/// truth oracles.
///
/// The construction behind the published truth tables is not fully specified;
/// a small positive margin on the expected-count comparison reproduces every
/// published truth cell at both decision regimes, with the feasible margin
/// band roughly (0.006, 0.008) under the uniform prior. The midpoint is
/// pinned here and exercised by the acceptance suite.
pub const UTILITY_TRUTH_DELTA: f64 = 0.007;

/// Probability bound above which a two-proportion contrast counts as a clear
/// difference.
pub const BINOMIAL_CLEAR_BOUND: f64 = 0.80;
/// Probability bound above which a contrast counts as at least borderline.
pub const BINOMIAL_BORDERLINE_BOUND: f64 = 0.66;
/// Toxicity contrasts beyond this bound disqualify the high dose outright
/// (a conventional two-sided 5% significance level).
pub const BINOMIAL_TOXICITY_GUARD: f64 = 0.975;

/// Which utility-family metric the truth oracle should evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UtilityMetricKind {
    /// Joint utility scores (two- or three-endpoint as the scenario demands).
    Utility,
    /// Marginal clinical utility index.
    Cui,
}

/// True dose under the empirical design: run the decision table on the true
/// rates. Returns None only when an unresolved consider cell blocks the scan
/// under the report policy.
pub fn truth_empirical(spec: &ScenarioSpec) -> Result<Option<usize>> {
    if spec.doses.len() == 1 {
        return Ok(Some(0));
    }
    let arms: Vec<EmpiricalArm> = spec
        .doses
        .iter()
        .enumerate()
        .map(|(i, rates)| EmpiricalArm {
            label: format!("dose {}", i + 1),
            level: (i + 1) as u32,
            rates: *rates,
        })
        .collect();
    Ok(empirical_sequential(&arms, &spec.setup.empirical)?.selected)
}

/// Expected standardized metric value per dose, in [0, 1].
fn expected_metric(spec: &ScenarioSpec, kind: UtilityMetricKind) -> Result<Vec<f64>> {
    spec.doses
        .iter()
        .map(|rates| match kind {
            UtilityMetricKind::Cui => {
                let w = spec.setup.cui.as_ref().ok_or_else(|| {
                    Error::InvalidParameter("CUI truth requested without CUI weights".into())
                })?;
                cui_value(rates, w)
            }
            UtilityMetricKind::Utility => {
                if spec.has_biomarker() {
                    let table = spec.setup.utility3.as_ref().ok_or_else(|| {
                        Error::InvalidParameter(
                            "three-endpoint truth requested without a table".into(),
                        )
                    })?;
                    let p = OutcomeProbs::joint3_independent(rates)?;
                    Ok(mean_utility_joint3(&p, table)? / 100.0)
                } else {
                    let p = OutcomeProbs::joint2_independent(rates);
                    Ok(mean_utility_joint2(&p, &spec.setup.utility2)? / 100.0)
                }
            }
        })
        .collect()
}

/// True dose under a utility-family design: the sequential comparison run on
/// the expected fractional event counts at the scenario sample size, with the
/// `delta` margin in place of the data-driven minimally important difference.
pub fn truth_utility(spec: &ScenarioSpec, kind: UtilityMetricKind, delta: f64) -> Result<usize> {
    let metric = expected_metric(spec, kind)?;
    let n = spec.n_per_arm as f64;
    let c1 = spec.setup.decision.c1();
    let prior = spec.setup.decision.prior;

    // Most desirable dose; ties prefer the lower level.
    let dstar = (0..metric.len())
        .max_by(|&a, &b| metric[a].partial_cmp(&metric[b]).unwrap().then(b.cmp(&a)))
        .expect("scenario has doses");
    let post = |i: usize| -> Result<BetaParams> { beta_posterior(prior, n * metric[i], n) };
    let high = post(dstar)?;
    for low_idx in 0..dstar {
        let pair = PosteriorPair { high, low: post(low_idx)? };
        let p = prob_diff_greater(&pair, delta)?;
        if !(p > c1) {
            return Ok(low_idx);
        }
    }
    Ok(dstar)
}

/// Pooled two-proportion z statistic with a continuity correction, mapped to
/// the normal probability scale.
fn contrast_probability(low_rate: f64, high_rate: f64, n: f64) -> f64 {
    let pooled = 0.5 * (low_rate + high_rate);
    let var = pooled * (1.0 - pooled) * 2.0 / n;
    let shifted = high_rate - low_rate - 1.0 / n;
    if var <= 0.0 {
        return if shifted > 0.0 { 1.0 } else { 0.0 };
    }
    norm_cdf(shifted / var.sqrt())
}

/// Shared truth from a two-proportion test: the most efficacious dose is
/// compared to each lower dose; the high dose survives a contrast when its
/// efficacy difference is clear (or borderline with the consider zone
/// resolved high) and its toxicity difference stays inside the guard.
pub fn truth_binomial_test(spec: &ScenarioSpec) -> Result<usize> {
    let consider_high = match spec.setup.empirical.consider_policy {
        EmpiricalConsiderPolicy::Low => false,
        EmpiricalConsiderPolicy::High => true,
        EmpiricalConsiderPolicy::Report => {
            return Err(Error::InvalidParameter(
                "the shared test truth needs a resolving consider policy".into(),
            ))
        }
    };
    let n = spec.n_per_arm as f64;
    let eff: Vec<f64> = spec.doses.iter().map(|d| d.efficacy).collect();
    let tox: Vec<f64> = spec.doses.iter().map(|d| d.toxicity).collect();

    let dstar = (0..eff.len())
        .max_by(|&a, &b| eff[a].partial_cmp(&eff[b]).unwrap().then(b.cmp(&a)))
        .expect("scenario has doses");

    for low in 0..dstar {
        let tox_p = contrast_probability(tox[low], tox[dstar], n);
        let eff_p = contrast_probability(eff[low], eff[dstar], n);
        let high_wins = if tox_p > BINOMIAL_TOXICITY_GUARD {
            false
        } else if eff_p > BINOMIAL_CLEAR_BOUND {
            true
        } else if eff_p > BINOMIAL_BORDERLINE_BOUND {
            consider_high
        } else {
            false
        };
        if !high_wins {
            return Ok(low);
        }
    }
    Ok(dstar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decision::{AdmissibilityConfig, ConsiderPolicy, DecisionConfig};
    use crate::empirical::EmpiricalThresholds;
    use crate::sim::{Correlations, MethodSetup, TruthMode};
    use crate::utility::{CuiWeights, MarginalRates, UtilityTable2};

    fn two_endpoint_spec(low: (f64, f64), highs: &[(f64, f64)], n: u32, consider_low: bool) -> ScenarioSpec {
        let alpha1 = if consider_low { 0.2 } else { 0.34 };
        let mut decision = DecisionConfig::new(0.0, alpha1, alpha1 + 0.14).unwrap();
        decision.consider_policy =
            if consider_low { ConsiderPolicy::TreatAsLow } else { ConsiderPolicy::TreatAsHigh };
        let mut empirical = EmpiricalThresholds::new(0.15, 0.35, 1.5, 2.0, None).unwrap();
        empirical.consider_policy = if consider_low {
            EmpiricalConsiderPolicy::Low
        } else {
            EmpiricalConsiderPolicy::High
        };
        let mut doses = vec![MarginalRates::new(low.0, low.1, None).unwrap()];
        doses.extend(highs.iter().map(|(t, e)| MarginalRates::new(*t, *e, None).unwrap()));
        ScenarioSpec {
            name: "truth-test".into(),
            doses,
            correlations: Correlations::zero(),
            n_per_arm: n,
            replications: 1,
            seed: 0,
            setup: MethodSetup {
                utility2: UtilityTable2::new(100.0, 35.0, 65.0, 0.0).unwrap(),
                utility3: None,
                cui: Some(CuiWeights::two_endpoint(0.35, 0.65).unwrap()),
                admissibility: AdmissibilityConfig::new(0.35, 0.22, 0.95, 0.90).unwrap(),
                decision,
                empirical,
                screen_empirical: true,
            },
            truth_mode: TruthMode::PerMethod { delta: UTILITY_TRUTH_DELTA },
        }
    }

    #[test]
    fn empirical_truth_reference_cells() {
        // High efficacy with acceptable toxicity walks High twice.
        let s = two_endpoint_spec((0.13, 0.23), &[(0.15, 0.47), (0.20, 0.70)], 30, true);
        assert_eq!(truth_empirical(&s).unwrap(), Some(2));
        // A consider cell at the first step resolves low.
        let s = two_endpoint_spec((0.13, 0.23), &[(0.20, 0.47), (0.28, 0.70)], 30, true);
        assert_eq!(truth_empirical(&s).unwrap(), Some(0));
        // Identical doses land in the starred consider cell and follow policy.
        let s = two_endpoint_spec((0.1, 0.3), &[(0.1, 0.3)], 30, true);
        assert_eq!(truth_empirical(&s).unwrap(), Some(0));
        let s = two_endpoint_spec((0.1, 0.3), &[(0.1, 0.3)], 30, false);
        assert_eq!(truth_empirical(&s).unwrap(), Some(1));
    }

    #[test]
    fn utility_truth_drops_less_desirable_top_dose() {
        // The middle dose dominates the top dose, so the top dose is removed
        // and the middle dose wins its single comparison.
        let s = two_endpoint_spec((0.13, 0.23), &[(0.15, 0.47), (0.20, 0.27)], 30, true);
        assert_eq!(truth_utility(&s, UtilityMetricKind::Utility, UTILITY_TRUTH_DELTA).unwrap(), 1);
    }

    #[test]
    fn utility_truth_equal_rates_prefer_lowest() {
        let s = two_endpoint_spec((0.13, 0.4), &[(0.13, 0.4), (0.13, 0.4)], 30, true);
        assert_eq!(truth_utility(&s, UtilityMetricKind::Utility, UTILITY_TRUTH_DELTA).unwrap(), 0);
        assert_eq!(truth_utility(&s, UtilityMetricKind::Cui, UTILITY_TRUTH_DELTA).unwrap(), 0);
    }

    #[test]
    fn binomial_truth_zero_difference_selects_lowest() {
        let s = two_endpoint_spec((0.13, 0.4), &[(0.13, 0.4), (0.13, 0.4)], 40, true);
        assert_eq!(truth_binomial_test(&s).unwrap(), 0);
    }

    #[test]
    fn binomial_truth_borderline_follows_policy() {
        // Dose 3 efficacy is clearly better than dose 1 but only borderline
        // better than dose 2: the consider policy decides between dose 2 and 3.
        let highs = [(0.15, 0.45), (0.20, 0.55)];
        let low = (0.13, 0.40);
        let s = two_endpoint_spec(low, &highs, 40, true);
        assert_eq!(truth_binomial_test(&s).unwrap(), 1);
        let s = two_endpoint_spec(low, &highs, 40, false);
        assert_eq!(truth_binomial_test(&s).unwrap(), 2);
    }
}
