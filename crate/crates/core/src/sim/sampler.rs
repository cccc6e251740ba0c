//! Correlated binary outcome generation by Gaussian-copula thresholding.
//!
//! Each subject draws a latent standard-normal vector with the configured
//! correlation matrix; endpoint m fires when its latent coordinate falls at
//! or below the normal quantile of the endpoint's marginal rate. Marginal
//! rates are exact by construction and the correlation enters only through
//! the joint cells.

use crate::error::{Error, Result};
use crate::special::inv_norm_cdf;
use crate::utility::{ArmCounts, ArmData, MarginalRates};
use rand::Rng;

/// Pairwise latent correlations between the toxicity, efficacy, and
/// biomarker endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlations {
    pub tox_eff: f64,
    pub tox_bio: f64,
    pub eff_bio: f64,
}

impl Correlations {
    pub fn zero() -> Self {
        Self { tox_eff: 0.0, tox_bio: 0.0, eff_bio: 0.0 }
    }

    pub fn validate(&self, with_biomarker: bool) -> Result<()> {
        Cholesky::new(self, with_biomarker).map(|_| ())
    }
}

impl Default for Correlations {
    fn default() -> Self {
        Self::zero()
    }
}

/// Lower-triangular Cholesky factor of the 2x2 or 3x3 latent correlation
/// matrix, in the endpoint order (toxicity, efficacy, biomarker).
struct Cholesky {
    rows: [[f64; 3]; 3],
    dim: usize,
}

impl Cholesky {
    fn new(c: &Correlations, with_biomarker: bool) -> Result<Self> {
        let dim = if with_biomarker { 3 } else { 2 };
        let m = [
            [1.0, c.tox_eff, c.tox_bio],
            [c.tox_eff, 1.0, c.eff_bio],
            [c.tox_bio, c.eff_bio, 1.0],
        ];
        for r in m.iter().take(dim) {
            for v in r.iter().take(dim) {
                if !(-1.0..=1.0).contains(v) {
                    return Err(Error::InvalidParameter(format!(
                        "correlation {v} outside [-1, 1]"
                    )));
                }
            }
        }
        let mut l = [[0.0f64; 3]; 3];
        for i in 0..dim {
            for j in 0..=i {
                let mut s = m[i][j];
                for k in 0..j {
                    s -= l[i][k] * l[j][k];
                }
                if i == j {
                    if s < -1e-12 {
                        return Err(Error::NotPositiveSemidefinite(format!(
                            "pivot {s:.3e} at row {i}"
                        )));
                    }
                    l[i][j] = s.max(0.0).sqrt();
                } else if l[j][j] == 0.0 {
                    if s.abs() > 1e-12 {
                        return Err(Error::NotPositiveSemidefinite(format!(
                            "rank-deficient row {i} is inconsistent"
                        )));
                    }
                    l[i][j] = 0.0;
                } else {
                    l[i][j] = s / l[j][j];
                }
            }
        }
        Ok(Self { rows: l, dim })
    }
}

/// Threshold Φ^{-1}(rate), with the degenerate rates mapped to sentinels so
/// a rate of 0 never fires and a rate of 1 always fires.
fn threshold(rate: f64) -> Result<f64> {
    if rate <= 0.0 {
        Ok(f64::NEG_INFINITY)
    } else if rate >= 1.0 {
        Ok(f64::INFINITY)
    } else {
        inv_norm_cdf(rate)
    }
}

fn std_normal(rng: &mut impl Rng) -> f64 {
    let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    inv_norm_cdf(u).expect("uniform draw stays inside (0, 1)")
}

/// Simulate one dose arm of `n` subjects and tally the joint outcome cells
/// and marginals consistently.
pub fn sample_arm(
    rng: &mut impl Rng,
    label: impl Into<String>,
    level: u32,
    n: u32,
    rates: &MarginalRates,
    correlations: &Correlations,
) -> Result<ArmData> {
    let with_bio = rates.biomarker.is_some();
    let chol = Cholesky::new(correlations, with_bio)?;
    let t_tox = threshold(rates.toxicity)?;
    let t_eff = threshold(rates.efficacy)?;
    let t_bio = rates.biomarker.map(threshold).transpose()?;

    let mut joint2 = [0.0f64; 4];
    let mut joint3 = [[0.0f64; 4]; 2];

    for _ in 0..n {
        let mut g = [0.0f64; 3];
        for v in g.iter_mut().take(chol.dim) {
            *v = std_normal(rng);
        }
        let mut z = [0.0f64; 3];
        for i in 0..chol.dim {
            z[i] = (0..=i).map(|k| chol.rows[i][k] * g[k]).sum();
        }
        let tox = z[0] <= t_tox;
        let eff = z[1] <= t_eff;
        // Cell order: (eff, no tox), (no eff, no tox), (eff, tox), (no eff, tox).
        let k = match (eff, tox) {
            (true, false) => 0,
            (false, false) => 1,
            (true, true) => 2,
            (false, true) => 3,
        };
        if let Some(tb) = t_bio {
            let bio = z[2] <= tb;
            joint3[usize::from(bio)][k] += 1.0;
        } else {
            joint2[k] += 1.0;
        }
    }

    let counts = if with_bio {
        ArmCounts { joint3: Some(joint3), ..Default::default() }
    } else {
        ArmCounts { joint2: Some(joint2), ..Default::default() }
    };
    ArmData::new(label, level, n, counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn degenerate_rates_are_exact() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let rates = MarginalRates::new(0.0, 1.0, None).unwrap();
        let arm = sample_arm(&mut rng, "d", 1, 50, &rates, &Correlations::zero()).unwrap();
        assert_eq!(arm.n_eff(), Some(50.0));
        assert_eq!(arm.n_tox(), Some(0.0));
    }

    #[test]
    fn independence_product_cell() {
        // P(eff, no tox) = 0.40 * 0.87 = 0.348 at zero correlation.
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let rates = MarginalRates::new(0.13, 0.40, None).unwrap();
        let mut cell1 = 0.0;
        let total = 200_000.0;
        let arm_n = 100u32;
        for _ in 0..(total as u32 / arm_n) {
            let arm = sample_arm(&mut rng, "d", 1, arm_n, &rates, &Correlations::zero()).unwrap();
            cell1 += arm.joint2().unwrap()[0];
        }
        let freq = cell1 / total;
        let target = 0.348;
        let se = (target * (1.0 - target) / total).sqrt();
        assert!(
            (freq - target).abs() < 4.0 * se,
            "joint cell frequency {freq} vs {target} (4se = {})",
            4.0 * se
        );
    }

    #[test]
    fn positive_correlation_raises_joint_probability() {
        // rho = 0.5 with both rates at one half gives P(both) = 1/3.
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        let rates = MarginalRates::new(0.5, 0.5, None).unwrap();
        let corr = Correlations { tox_eff: 0.5, ..Correlations::zero() };
        let mut both = 0.0;
        let total = 200_000.0;
        for _ in 0..2000 {
            let arm = sample_arm(&mut rng, "d", 1, 100, &rates, &corr).unwrap();
            both += arm.joint2().unwrap()[2]; // (eff, tox)
        }
        let freq = both / total;
        let target = 1.0 / 3.0;
        let se = (target * (1.0 - target) / total).sqrt();
        assert!((freq - target).abs() < 4.0 * se, "orthant frequency {freq} vs {target}");
    }

    #[test]
    fn non_psd_matrix_is_rejected() {
        let corr = Correlations { tox_eff: 0.9, tox_bio: 0.9, eff_bio: -0.9 };
        assert!(corr.validate(true).is_err());
        // The same matrix restricted to two endpoints is fine.
        assert!(corr.validate(false).is_ok());
    }

    #[test]
    fn three_endpoint_cells_sum_to_n() {
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        let rates = MarginalRates::new(0.2, 0.5, Some(0.4)).unwrap();
        let arm = sample_arm(&mut rng, "d", 1, 40, &rates, &Correlations::zero()).unwrap();
        let total: f64 = arm.joint3().unwrap().iter().flatten().sum();
        assert_eq!(total, 40.0);
        assert!(arm.n_bio().is_some());
    }
}
