//! Error type shared across the crate.

/// Errors produced by compositional model construction, fitting and inference.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// A dimension argument was zero, too small, or inconsistent.
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    /// Matrix dimensions of two arguments do not agree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A matrix expected to be symmetric is not, beyond tolerance.
    #[error("matrix not symmetric: max asymmetry {max_asymmetry:.3e} exceeds tolerance {tolerance:.3e}")]
    NotSymmetric { max_asymmetry: f64, tolerance: f64 },

    /// A matrix expected to be positive semidefinite has an eigenvalue
    /// below the accepted tolerance.
    #[error("matrix not positive semidefinite: min eigenvalue {min_eigenvalue:.3e}")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    /// A composition or record failed a validity check.
    #[error("invalid composition: {0}")]
    InvalidComposition(String),

    /// An operation requiring strictly positive probabilities received a
    /// zero (or negative) entry.
    #[error("degenerate probability: {0}")]
    DegenerateProbability(String),

    /// A linear predictor or derived quantity left the representable range.
    #[error("numeric overflow: {0}")]
    NumericOverflow(String),

    /// The iterative solver exhausted its iteration budget.
    #[error("solver did not converge after {iterations} iterations (final score norm {final_score_norm:.3e})")]
    NonConvergence {
        iterations: usize,
        final_score_norm: f64,
        /// Max-norm of the quasi-score after each iteration.
        trace: Vec<f64>,
    },

    /// The design matrix (or scoring matrix built from it) is rank deficient.
    #[error("rank-deficient design: collinear columns {columns:?}")]
    RankDeficient { columns: Vec<String> },

    /// The two solver routes disagreed beyond tolerance.
    #[error("solver cross-check failed: methods disagree by {max_difference:.3e}")]
    CrosscheckMismatch { max_difference: f64 },

    /// Not enough observations for the requested estimate.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Log-ratio machinery cannot handle zero-valued parts.
    #[error("zeros unsupported: {0}")]
    ZerosUnsupported(String),

    /// A Wald contrast lies in the null space of the identification constraint.
    #[error("non-identifiable contrast: {0}")]
    NonIdentifiable(String),

    /// A simulation law or scenario parameter is invalid.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A scenario file could not be parsed.
    #[error("scenario error for key `{key}`: {message}")]
    Scenario { key: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
