//! Utility algebra: outcome tables, CUI weights, arm data, and the
//! conversions from observed outcomes to quasi-binomial event counts.
//!
//! Two-endpoint outcomes are indexed k = 1..4 in the fixed order
//! (efficacy, no toxicity), (no efficacy, no toxicity),
//! (efficacy, toxicity), (no efficacy, no toxicity with toxicity), i.e.
//! k=1 best, k=4 worst. Three-endpoint tables add a leading index
//! j in {0, 1} for the third endpoint (biomarker negative / positive).

use crate::error::{Error, Result};

const PROB_SUM_TOL: f64 = 1e-12;
const COUNT_TOL: f64 = 1e-9;

/// Utility scores for the four efficacy–toxicity outcomes, on a 0–100 scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilityTable2 {
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
    pub u4: f64,
}

impl UtilityTable2 {
    pub fn new(u1: f64, u2: f64, u3: f64, u4: f64) -> Result<Self> {
        for (name, u) in [("u1", u1), ("u2", u2), ("u3", u3), ("u4", u4)] {
            if !(0.0..=100.0).contains(&u) {
                return Err(Error::InvalidParameter(format!(
                    "utility score {name}={u} outside [0, 100]"
                )));
            }
        }
        Ok(Self { u1, u2, u3, u4 })
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.u1, self.u2, self.u3, self.u4]
    }

    /// True when u2 + u3 = 100, enabling the marginal-rate shortcut.
    pub fn marginal_ok(&self) -> bool {
        (self.u2 + self.u3 - 100.0).abs() < 1e-9
    }

    /// Deviations from the recommended reference anchoring (u1 = 100, u4 = 0).
    /// These are conventions, not validity requirements.
    pub fn convention_warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if (self.u1 - 100.0).abs() > 1e-9 {
            w.push(format!("u1 = {} departs from the recommended reference u1 = 100", self.u1));
        }
        if self.u4.abs() > 1e-9 {
            w.push(format!("u4 = {} departs from the recommended reference u4 = 0", self.u4));
        }
        w
    }
}

/// Utility scores for eight biomarker-by-efficacy-toxicity outcomes.
/// Row 0 holds the biomarker-negative scores, row 1 the positive ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilityTable3 {
    rows: [[f64; 4]; 2],
}

impl UtilityTable3 {
    pub fn new(negative_row: [f64; 4], positive_row: [f64; 4]) -> Result<Self> {
        for (j, row) in [negative_row, positive_row].iter().enumerate() {
            for (k, u) in row.iter().enumerate() {
                if !(0.0..=100.0).contains(u) {
                    return Err(Error::InvalidParameter(format!(
                        "utility score u[{j}][{}]={u} outside [0, 100]",
                        k + 1
                    )));
                }
            }
        }
        Ok(Self { rows: [negative_row, positive_row] })
    }

    /// Score for biomarker level `j` (0 or 1) and outcome `k` (1..4).
    pub fn score(&self, j: usize, k: usize) -> f64 {
        self.rows[j][k - 1]
    }

    pub fn rows(&self) -> &[[f64; 4]; 2] {
        &self.rows
    }
}

/// Additive offsets that lift the biomarker-negative utility row to the
/// positive row, with optional per-cell overrides applied afterwards.
#[derive(Debug, Clone, Default)]
pub struct OffsetSpec {
    pub offsets: [f64; 4],
    pub overrides: [Option<f64>; 4],
}

impl OffsetSpec {
    pub fn new(offsets: [f64; 4]) -> Result<Self> {
        if offsets.iter().any(|a| *a < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "offsets must be nonnegative, got {offsets:?}"
            )));
        }
        Ok(Self { offsets, overrides: [None; 4] })
    }

    pub fn with_override(mut self, k: usize, value: f64) -> Self {
        self.overrides[k - 1] = Some(value);
        self
    }
}

/// Build a three-endpoint table from a biomarker-negative base row by adding
/// per-cell offsets, then applying any overrides.
pub fn utility3_from_offsets(base_row: [f64; 4], spec: &OffsetSpec) -> Result<UtilityTable3> {
    let mut positive = [0.0; 4];
    for k in 0..4 {
        positive[k] = match spec.overrides[k] {
            Some(v) => v,
            None => base_row[k] + spec.offsets[k],
        };
        if !(0.0..=100.0).contains(&positive[k]) {
            return Err(Error::InvalidParameter(format!(
                "offset table cell u[1][{}] = {} falls outside [0, 100]",
                k + 1,
                positive[k]
            )));
        }
    }
    UtilityTable3::new(base_row, positive)
}

/// Weights combining oriented marginal endpoint probabilities into a clinical
/// utility index. Toxicity always enters through its complement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CuiWeights {
    pub toxicity: f64,
    pub efficacy: f64,
    pub biomarker: Option<f64>,
}

impl CuiWeights {
    pub fn new(toxicity: f64, efficacy: f64, biomarker: Option<f64>) -> Result<Self> {
        let wb = biomarker.unwrap_or(0.0);
        if toxicity < 0.0 || efficacy < 0.0 || wb < 0.0 {
            return Err(Error::InvalidParameter(
                "CUI weights must be nonnegative".into(),
            ));
        }
        let sum = toxicity + efficacy + wb;
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidParameter(format!(
                "CUI weights must sum to 1, got {sum}"
            )));
        }
        Ok(Self { toxicity, efficacy, biomarker })
    }

    pub fn two_endpoint(toxicity: f64, efficacy: f64) -> Result<Self> {
        Self::new(toxicity, efficacy, None)
    }
}

/// Marginal outcome rates for one dose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalRates {
    pub toxicity: f64,
    pub efficacy: f64,
    pub biomarker: Option<f64>,
}

impl MarginalRates {
    pub fn new(toxicity: f64, efficacy: f64, biomarker: Option<f64>) -> Result<Self> {
        for (name, r) in [("toxicity", Some(toxicity)), ("efficacy", Some(efficacy)), ("biomarker", biomarker)] {
            if let Some(r) = r {
                if !(0.0..=1.0).contains(&r) {
                    return Err(Error::InvalidParameter(format!(
                        "{name} rate {r} outside [0, 1]"
                    )));
                }
            }
        }
        Ok(Self { toxicity, efficacy, biomarker })
    }
}

/// Joint or marginal outcome probabilities for one dose.
#[derive(Debug, Clone, PartialEq)]
pub enum OutcomeProbs {
    /// Four efficacy–toxicity cell probabilities, in k-order.
    Joint2([f64; 4]),
    /// Eight biomarker-by-efficacy-toxicity cell probabilities.
    Joint3([[f64; 4]; 2]),
    /// Marginal rates only.
    Marginal(MarginalRates),
}

impl OutcomeProbs {
    pub fn joint2(p: [f64; 4]) -> Result<Self> {
        validate_prob_block(&p)?;
        Ok(Self::Joint2(p))
    }

    pub fn joint3(p: [[f64; 4]; 2]) -> Result<Self> {
        let flat: Vec<f64> = p.iter().flatten().copied().collect();
        validate_prob_block(&flat)?;
        Ok(Self::Joint3(p))
    }

    pub fn marginal(rates: MarginalRates) -> Self {
        Self::Marginal(rates)
    }

    /// Joint two-endpoint cells from independent marginals.
    pub fn joint2_independent(rates: &MarginalRates) -> Self {
        let (pt, pe) = (rates.toxicity, rates.efficacy);
        Self::Joint2([
            pe * (1.0 - pt),
            (1.0 - pe) * (1.0 - pt),
            pe * pt,
            (1.0 - pe) * pt,
        ])
    }

    /// Joint three-endpoint cells from independent marginals.
    pub fn joint3_independent(rates: &MarginalRates) -> Result<Self> {
        let pb = rates.biomarker.ok_or_else(|| Error::MissingData {
            arm: "<rates>".into(),
            what: "biomarker rate for a three-endpoint joint construction".into(),
        })?;
        let (pt, pe) = (rates.toxicity, rates.efficacy);
        let et = [
            pe * (1.0 - pt),
            (1.0 - pe) * (1.0 - pt),
            pe * pt,
            (1.0 - pe) * pt,
        ];
        let mut cells = [[0.0; 4]; 2];
        for k in 0..4 {
            cells[0][k] = (1.0 - pb) * et[k];
            cells[1][k] = pb * et[k];
        }
        Ok(Self::Joint3(cells))
    }
}

fn validate_prob_block(p: &[f64]) -> Result<()> {
    if p.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(Error::InvalidParameter(format!(
            "joint probabilities must lie in [0, 1], got {p:?}"
        )));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > PROB_SUM_TOL {
        return Err(Error::InconsistentData(format!(
            "joint probabilities sum to {sum}, expected 1"
        )));
    }
    Ok(())
}

/// Observed outcome data for one dose arm. Counts are stored as reals so that
/// expected counts reconstructed from rates can stay fractional.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmData {
    pub label: String,
    /// Dose-level order; higher means a higher dose.
    pub level: u32,
    pub n: u32,
    joint2: Option<[f64; 4]>,
    joint3: Option<[[f64; 4]; 2]>,
    n_tox: Option<f64>,
    n_eff: Option<f64>,
    n_bio: Option<f64>,
}

/// How observed rates with a sample size convert to counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateConversion {
    /// Keep fractional expected counts (rate times n).
    Exact,
    /// Round each marginal count to the nearest integer, ties upward.
    RoundedCounts,
}

/// Builder-style constructor inputs for [`ArmData`].
#[derive(Debug, Clone, Default)]
pub struct ArmCounts {
    pub joint2: Option<[f64; 4]>,
    pub joint3: Option<[[f64; 4]; 2]>,
    pub n_tox: Option<f64>,
    pub n_eff: Option<f64>,
    pub n_bio: Option<f64>,
}

impl ArmData {
    pub fn new(label: impl Into<String>, level: u32, n: u32, counts: ArmCounts) -> Result<Self> {
        let label = label.into();
        let nf = n as f64;
        let mut joint2 = counts.joint2;

        if let Some(cells) = &counts.joint3 {
            let flat: Vec<f64> = cells.iter().flatten().copied().collect();
            validate_count_block(&label, &flat, nf)?;
            // The eight cells imply the four efficacy-toxicity cells.
            let implied = [
                cells[0][0] + cells[1][0],
                cells[0][1] + cells[1][1],
                cells[0][2] + cells[1][2],
                cells[0][3] + cells[1][3],
            ];
            if let Some(stated) = joint2 {
                for k in 0..4 {
                    if (stated[k] - implied[k]).abs() > COUNT_TOL {
                        return Err(Error::InconsistentData(format!(
                            "arm '{label}': joint cell y{} = {} disagrees with the eight-cell total {}",
                            k + 1,
                            stated[k],
                            implied[k]
                        )));
                    }
                }
            }
            joint2 = Some(implied);
        }

        if let Some(cells) = &joint2 {
            validate_count_block(&label, cells, nf)?;
        }

        let mut arm = Self {
            label,
            level,
            n,
            joint2,
            joint3: counts.joint3,
            n_tox: counts.n_tox,
            n_eff: counts.n_eff,
            n_bio: counts.n_bio,
        };
        arm.reconcile_marginals(nf)?;
        Ok(arm)
    }

    /// Build an arm from observed marginal rates and a sample size.
    ///
    /// `Exact` keeps the implied counts fractional (rate times n), which is
    /// what the quasi-binomial machinery consumes directly. `RoundedCounts`
    /// first rounds each marginal count to the nearest integer, ties upward.
    /// Three-endpoint arms additionally receive the eight joint cells
    /// implied by endpoint independence at the converted rates, since the
    /// joint utility metric has no marginal shortcut.
    pub fn from_rates(
        label: impl Into<String>,
        level: u32,
        n: u32,
        rates: &MarginalRates,
        conversion: RateConversion,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "rate-based arms need a positive sample size".into(),
            ));
        }
        let nf = n as f64;
        let count = |r: f64| match conversion {
            RateConversion::Exact => r * nf,
            RateConversion::RoundedCounts => (r * nf + 0.5).floor(),
        };
        let n_tox = count(rates.toxicity);
        let n_eff = count(rates.efficacy);
        match rates.biomarker {
            None => Self::from_marginals(label, level, n, n_tox, n_eff, None),
            Some(pb) => {
                let n_bio = count(pb);
                let converted = MarginalRates::new(n_tox / nf, n_eff / nf, Some(n_bio / nf))?;
                let OutcomeProbs::Joint3(p) = OutcomeProbs::joint3_independent(&converted)? else {
                    unreachable!("joint3_independent returns the joint form");
                };
                let mut cells = [[0.0; 4]; 2];
                for j in 0..2 {
                    for k in 0..4 {
                        cells[j][k] = p[j][k] * nf;
                    }
                }
                Self::new(
                    label,
                    level,
                    n,
                    ArmCounts { joint3: Some(cells), ..Default::default() },
                )
            }
        }
    }

    /// An arm described only by marginal counts.
    pub fn from_marginals(
        label: impl Into<String>,
        level: u32,
        n: u32,
        n_tox: f64,
        n_eff: f64,
        n_bio: Option<f64>,
    ) -> Result<Self> {
        Self::new(
            label,
            level,
            n,
            ArmCounts { n_tox: Some(n_tox), n_eff: Some(n_eff), n_bio, ..Default::default() },
        )
    }

    fn reconcile_marginals(&mut self, nf: f64) -> Result<()> {
        // Joint counts take precedence; stated marginals must agree with them.
        if let Some(cells) = &self.joint2 {
            let implied_eff = cells[0] + cells[2];
            let implied_tox = cells[2] + cells[3];
            for (name, stated, implied) in [
                ("efficacy", self.n_eff, implied_eff),
                ("toxicity", self.n_tox, implied_tox),
            ] {
                if let Some(s) = stated {
                    if (s - implied).abs() > COUNT_TOL {
                        return Err(Error::InconsistentData(format!(
                            "arm '{}': stated {name} count {s} disagrees with joint cells ({implied})",
                            self.label
                        )));
                    }
                }
            }
            self.n_eff = Some(implied_eff);
            self.n_tox = Some(implied_tox);
        }
        if let Some(cells) = &self.joint3 {
            let implied_bio: f64 = cells[1].iter().sum();
            if let Some(s) = self.n_bio {
                if (s - implied_bio).abs() > COUNT_TOL {
                    return Err(Error::InconsistentData(format!(
                        "arm '{}': stated biomarker count {s} disagrees with joint cells ({implied_bio})",
                        self.label
                    )));
                }
            }
            self.n_bio = Some(implied_bio);
        }
        for (name, c) in [("toxicity", self.n_tox), ("efficacy", self.n_eff), ("biomarker", self.n_bio)] {
            if let Some(c) = c {
                if !(0.0..=nf + COUNT_TOL).contains(&c) {
                    return Err(Error::InconsistentData(format!(
                        "arm '{}': {name} count {c} outside [0, n]",
                        self.label
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn joint2(&self) -> Option<&[f64; 4]> {
        self.joint2.as_ref()
    }

    pub fn joint3(&self) -> Option<&[[f64; 4]; 2]> {
        self.joint3.as_ref()
    }

    pub fn n_tox(&self) -> Option<f64> {
        self.n_tox
    }

    pub fn n_eff(&self) -> Option<f64> {
        self.n_eff
    }

    pub fn n_bio(&self) -> Option<f64> {
        self.n_bio
    }

    /// Observed marginal rates, when the marginal counts are available.
    pub fn observed_rates(&self) -> Result<MarginalRates> {
        let nf = self.n as f64;
        let nt = self.n_tox.ok_or_else(|| self.missing("toxicity count"))?;
        let ne = self.n_eff.ok_or_else(|| self.missing("efficacy count"))?;
        if self.n == 0 {
            return MarginalRates::new(0.0, 0.0, self.n_bio.map(|_| 0.0));
        }
        MarginalRates::new(nt / nf, ne / nf, self.n_bio.map(|nb| nb / nf))
    }

    fn missing(&self, what: &str) -> Error {
        Error::MissingData { arm: self.label.clone(), what: what.into() }
    }
}

fn validate_count_block(label: &str, cells: &[f64], n: f64) -> Result<()> {
    if cells.iter().any(|c| *c < -COUNT_TOL || !c.is_finite()) {
        return Err(Error::InconsistentData(format!(
            "arm '{label}': negative or non-finite outcome count in {cells:?}"
        )));
    }
    let sum: f64 = cells.iter().sum();
    if (sum - n).abs() > COUNT_TOL {
        return Err(Error::InconsistentData(format!(
            "arm '{label}': outcome counts sum to {sum}, expected n = {n}"
        )));
    }
    Ok(())
}

/// Mean utility of a dose from four joint cell probabilities, on the 0–100
/// scale.
pub fn mean_utility_joint2(p: &OutcomeProbs, u: &UtilityTable2) -> Result<f64> {
    match p {
        OutcomeProbs::Joint2(cells) => {
            validate_prob_block(cells)?;
            let us = u.as_array();
            Ok(cells.iter().zip(us.iter()).map(|(p, u)| p * u).sum())
        }
        _ => Err(Error::InvalidParameter(
            "mean_utility_joint2 requires four joint cell probabilities".into(),
        )),
    }
}

/// Mean utility from marginal toxicity and efficacy rates. Requires the
/// u2 + u3 = 100 structure that makes the marginal form exact.
pub fn mean_utility_marginal2(p_tox: f64, p_eff: f64, u: &UtilityTable2) -> Result<f64> {
    if !u.marginal_ok() {
        return Err(Error::InvalidParameter(format!(
            "the marginal mean-utility form requires u2 + u3 = 100, got {}",
            u.u2 + u.u3
        )));
    }
    for (name, p) in [("toxicity", p_tox), ("efficacy", p_eff)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("{name} rate {p} outside [0, 1]")));
        }
    }
    Ok(u.u2 * (1.0 - p_tox) + u.u3 * p_eff)
}

/// Mean utility of a dose from eight joint cell probabilities, 0–100 scale.
pub fn mean_utility_joint3(p: &OutcomeProbs, u: &UtilityTable3) -> Result<f64> {
    match p {
        OutcomeProbs::Joint3(cells) => {
            let flat: Vec<f64> = cells.iter().flatten().copied().collect();
            validate_prob_block(&flat)?;
            let mut total = 0.0;
            for j in 0..2 {
                for k in 1..=4 {
                    total += cells[j][k - 1] * u.score(j, k);
                }
            }
            Ok(total)
        }
        _ => Err(Error::InvalidParameter(
            "mean_utility_joint3 requires eight joint cell probabilities".into(),
        )),
    }
}

/// Quasi-binomial event count for a two-endpoint utility metric:
/// the utility-weighted outcome counts divided by 100. Uses joint cells when
/// present, else the marginal form (which requires u2 + u3 = 100).
pub fn quasi_events2(arm: &ArmData, u: &UtilityTable2) -> Result<f64> {
    if let Some(cells) = arm.joint2() {
        let us = u.as_array();
        let x = cells.iter().zip(us.iter()).map(|(y, u)| y * u).sum::<f64>() / 100.0;
        return Ok(x.clamp(0.0, arm.n as f64));
    }
    let (nt, ne) = match (arm.n_tox(), arm.n_eff()) {
        (Some(nt), Some(ne)) => (nt, ne),
        _ => {
            return Err(Error::MissingData {
                arm: arm.label.clone(),
                what: "joint cells or both marginal counts for the utility metric".into(),
            })
        }
    };
    if !u.marginal_ok() {
        return Err(Error::InvalidParameter(format!(
            "marginal quasi-events require u2 + u3 = 100, got {} (arm '{}' has no joint cells)",
            u.u2 + u.u3,
            arm.label
        )));
    }
    let x = (u.u2 * (arm.n as f64 - nt) + u.u3 * ne) / 100.0;
    Ok(x.clamp(0.0, arm.n as f64))
}

/// Quasi-binomial event count for a three-endpoint utility metric. Requires
/// the eight-cell joint counts.
pub fn quasi_events3(arm: &ArmData, u: &UtilityTable3) -> Result<f64> {
    let cells = arm.joint3().ok_or_else(|| Error::MissingData {
        arm: arm.label.clone(),
        what: "eight-cell joint counts for the three-endpoint utility metric".into(),
    })?;
    let mut x = 0.0;
    for j in 0..2 {
        for k in 1..=4 {
            x += cells[j][k - 1] * u.score(j, k);
        }
    }
    Ok((x / 100.0).clamp(0.0, arm.n as f64))
}

/// Clinical utility index of a dose from marginal rates: a weighted average
/// of oriented endpoint probabilities, in [0, 1].
pub fn cui_value(rates: &MarginalRates, w: &CuiWeights) -> Result<f64> {
    let mut cui = (1.0 - rates.toxicity) * w.toxicity + rates.efficacy * w.efficacy;
    if let Some(wb) = w.biomarker {
        if wb > 0.0 {
            let pb = rates.biomarker.ok_or_else(|| Error::MissingData {
                arm: "<rates>".into(),
                what: "biomarker rate for a weighted biomarker endpoint".into(),
            })?;
            cui += pb * wb;
        }
    }
    Ok(cui.clamp(0.0, 1.0))
}

/// Quasi-event count for the CUI metric: n times the observed CUI.
pub fn cui_quasi_events(arm: &ArmData, w: &CuiWeights) -> Result<f64> {
    if arm.n == 0 {
        return Ok(0.0);
    }
    let rates = arm.observed_rates().map_err(|_| Error::MissingData {
        arm: arm.label.clone(),
        what: "marginal counts for every weighted endpoint".into(),
    })?;
    if w.biomarker.unwrap_or(0.0) > 0.0 && rates.biomarker.is_none() {
        return Err(Error::MissingData {
            arm: arm.label.clone(),
            what: "biomarker count for a weighted biomarker endpoint".into(),
        });
    }
    Ok(arm.n as f64 * cui_value(&rates, w)?)
}
