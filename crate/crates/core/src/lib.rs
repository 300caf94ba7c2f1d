//! Quasi-likelihood analysis of compositional data under multiplicative
//! measurement error.
//!
//! The measurement model is `Y_i = tau_i * diag(pi_i) * U_i` with unit-mean
//! relative errors `U_i`, which targets arithmetic means on the original
//! scale instead of transforming to log-ratios. Around that model the crate
//! provides:
//!
//! * the generalized Wedderburn variance-covariance function, its
//!   closed-form pseudo-inverse and the stabilizing transformation
//!   ([`variance`]);
//! * the compositional logit regression model and two cross-validated
//!   solvers for its dispersion-free quasi-likelihood equations
//!   ([`model`], [`solver`]);
//! * dispersion estimation, model-based and sandwich covariances, and Wald
//!   tests ([`inference`]);
//! * compositional covariance/distance tools and a null-correlation
//!   diagnostic that all tolerate zero-valued parts ([`multivariate`]);
//! * the log-ratio linear model as a baseline for comparison
//!   ([`logratio`]);
//! * a reproducible simulation harness for Monte Carlo studies ([`sim`]).
//!
//! Zero-valued measurements need no adjustment anywhere except in the
//! log-ratio baseline, where they are a hard error by construction.

pub mod error;
pub mod inference;
pub mod linalg;
pub mod logratio;
pub mod model;
pub mod multivariate;
pub mod sim;
pub mod solver;
pub mod variance;

pub use error::{Error, Result};
pub use inference::{CoefficientCovariance, CovarianceFlavor, WaldTest};
pub use model::{
    Composition, CoefficientMatrix, CompositionalDataset, IdentificationConstraint,
    MeasurementRecord,
};
pub use multivariate::{DistanceMatrix, MetricKind, NullCorrelationDiagnostic};
pub use sim::{ErrorLaw, SimulationScenario, TotalsLaw};
pub use solver::{FitResult, SolverConfig, SolverMethod};
pub use variance::{CenteredDispersion, DispersionProvenance, ErrorDispersion};
