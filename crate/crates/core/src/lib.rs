//! Utility-based dose comparison for randomized multi-dose expansion trials.
//!
//! This crate implements two Bayesian dose-selection strategies built on
//! quasi-binomial utility modeling — a joint utility-score comparison (U-MET-m)
//! and a marginal clinical-utility-index comparison (CUI-MET) — together with
//! the empirical decision-table baseline they are benchmarked against, and a
//! deterministic Monte Carlo engine that reproduces the operating
//! characteristics of all three.
//!
//! Module layout:
//!
//! - [`utility`] — utility tables, CUI weights, arm data, and the algebra that
//!   turns observed outcomes into quasi-binomial event counts.
//! - [`bayes`] — Beta posteriors, tail probabilities, and the exact CDF of the
//!   difference of two independent Beta variables.
//! - [`decision`] — admissibility screening and the sequential / pairwise
//!   dose-selection rules with auditable traces.
//! - [`empirical`] — the rule-table baseline over efficacy differences,
//!   toxicity ratios, and biomarker differences.
//! - [`sim`] — Gaussian-copula outcome generation, truth oracles, scenario
//!   presets, and operating-characteristics aggregation.

pub mod bayes;
pub mod decision;
pub mod empirical;
mod error;
pub mod quad;
pub mod sim;
pub mod special;
pub mod utility;

pub use error::{Error, Result};
