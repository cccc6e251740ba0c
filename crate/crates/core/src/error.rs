use thiserror::Error;

/// Errors surfaced by the dose-comparison library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A utility score, probability, weight, or threshold is outside its domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Outcome probabilities or counts are internally inconsistent.
    #[error("inconsistent data: {0}")]
    InconsistentData(String),

    /// An operation needs a data form (joint cells, marginals) the arm lacks.
    #[error("arm '{arm}' is missing required data: {what}")]
    MissingData { arm: String, what: String },

    /// The adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature did not converge: achieved absolute error {achieved:.3e} > {requested:.3e}")]
    QuadratureNonConvergence { achieved: f64, requested: f64 },

    /// The continued-fraction evaluation of the incomplete beta failed.
    #[error("incomplete beta continued fraction failed to converge for a={a}, b={b}, x={x}")]
    BetaNonConvergence { a: f64, b: f64, x: f64 },

    /// A correlation matrix is not positive semidefinite.
    #[error("correlation matrix is not positive semidefinite: {0}")]
    NotPositiveSemidefinite(String),

    /// A decision procedure was invoked with no usable doses.
    #[error("no admissible doses remain: {0}")]
    NoAdmissibleDoses(String),

    /// A dose that failed admissibility screening was passed to a comparison.
    #[error("inadmissible arm '{0}' passed to a pairwise comparison")]
    InadmissibleArm(String),
}

pub type Result<T> = std::result::Result<T, Error>;
