//! The generalized Wedderburn variance-covariance function for multiplicative
//! measurement error, its closed-form pseudo-inverse, and the stabilizing
//! transformation.
//!
//! For a composition `pi` and relative-error dispersion `Phi`, the
//! composition-scale measurement error has covariance
//! `V(pi; Phi) = (diag(pi) - pi pi') Phi (diag(pi) - pi pi')`.
//! The multinomial factor has pseudo-inverse `C diag(pi)^-1 C`, and
//! sandwiching `V` between two copies of that pseudo-inverse recovers
//! `C Phi C` for every strictly positive `pi` — the quantity the
//! standardized residuals estimate.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{centering_matrix, check_psd, check_symmetric};
use crate::model::{multinomial_cov, Composition};

/// Covariance matrix `Phi` of the unit-mean relative errors. Symmetric and
/// positive semidefinite (within tolerance); dimensionless.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorDispersion {
    matrix: DMatrix<f64>,
}

impl ErrorDispersion {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        check_symmetric(&matrix)?;
        check_psd(&matrix)?;
        Ok(Self { matrix })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            matrix: DMatrix::identity(d, d),
        }
    }

    pub fn zero(d: usize) -> Self {
        Self {
            matrix: DMatrix::zeros(d, d),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Where a centered dispersion estimate came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DispersionProvenance {
    Assumed,
    Estimated { df: usize },
}

/// A `D x D` estimate (or assumed value) of `C Phi C`: symmetric, PSD within
/// tolerance, with zero row and column sums.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredDispersion {
    matrix: DMatrix<f64>,
    provenance: DispersionProvenance,
}

/// Tolerance on the zero row-sum property of a centered dispersion.
pub const CENTERED_ROW_SUM_TOL: f64 = 1e-9;

impl CenteredDispersion {
    pub fn new(matrix: DMatrix<f64>, provenance: DispersionProvenance) -> Result<Self> {
        check_symmetric(&matrix)?;
        check_psd(&matrix)?;
        let scale = crate::linalg::max_abs(&matrix).max(1.0);
        for k in 0..matrix.nrows() {
            let row_sum: f64 = matrix.row(k).sum();
            if row_sum.abs() > CENTERED_ROW_SUM_TOL * scale {
                return Err(Error::InvalidComposition(format!(
                    "centered dispersion row {k} sums to {row_sum:.3e}, expected 0"
                )));
            }
        }
        Ok(Self { matrix, provenance })
    }

    /// Center an arbitrary dispersion: `C Phi C`.
    pub fn from_dispersion(phi: &ErrorDispersion) -> Self {
        let c = centering_matrix(phi.dim()).expect("dimension >= 1");
        Self {
            matrix: &c * phi.matrix() * &c,
            provenance: DispersionProvenance::Assumed,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn provenance(&self) -> DispersionProvenance {
        self.provenance
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// The generalized Wedderburn variance-covariance function
/// `(diag(pi) - pi pi') Phi (diag(pi) - pi pi')`.
///
/// Zero parts in `pi` are fine here; the formula simply evaluates.
pub fn wedderburn_cov(pi: &Composition, phi: &ErrorDispersion) -> Result<DMatrix<f64>> {
    if pi.dim() != phi.dim() {
        return Err(Error::DimensionMismatch(format!(
            "composition has {} parts, dispersion is {}x{}",
            pi.dim(),
            phi.dim(),
            phi.dim()
        )));
    }
    let m = multinomial_cov(pi);
    Ok(&m * phi.matrix() * &m)
}

/// Closed-form Moore–Penrose pseudo-inverse of the multinomial covariance
/// `diag(pi) - pi pi'`, namely `C diag(pi)^-1 C`.
///
/// Requires every part strictly positive (the closed form divides by them).
pub fn multinomial_pinv(pi: &Composition) -> Result<DMatrix<f64>> {
    if !pi.is_strictly_positive() {
        return Err(Error::DegenerateProbability(
            "pseudo-inverse requires strictly positive parts".into(),
        ));
    }
    let d = pi.dim();
    let c = centering_matrix(d)?;
    let inv = DMatrix::from_diagonal(&pi.parts().map(|v| 1.0 / v));
    Ok(&c * inv * &c)
}

/// Stabilizing transformation: sandwiches `V` between two copies of
/// `C diag(pi)^-1 C`. When `V = wedderburn_cov(pi, Phi)`, the result is
/// `C Phi C` no matter what `pi` was.
pub fn stabilize(pi: &Composition, v: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if v.nrows() != pi.dim() || v.ncols() != pi.dim() {
        return Err(Error::DimensionMismatch(format!(
            "V is {}x{}, composition has {} parts",
            v.nrows(),
            v.ncols(),
            pi.dim()
        )));
    }
    let pinv = multinomial_pinv(pi)?;
    Ok(&pinv * v * &pinv)
}

/// The standardized residual `C diag(pi)^-1 (p - pi)` of an observed
/// composition against a fitted one. Sums to zero; its covariance across
/// objects estimates `C Phi C`.
pub fn standardized_residual(observed: &Composition, fitted: &Composition) -> Result<DVector<f64>> {
    if observed.dim() != fitted.dim() {
        return Err(Error::DimensionMismatch(format!(
            "observed has {} parts, fitted has {}",
            observed.dim(),
            fitted.dim()
        )));
    }
    if !fitted.is_strictly_positive() {
        return Err(Error::DegenerateProbability(
            "standardized residual requires strictly positive fitted parts".into(),
        ));
    }
    let d = observed.dim();
    let mut u = DVector::zeros(d);
    for k in 0..d {
        u[k] = observed.part(k) / fitted.part(k) - 1.0;
    }
    let mean = u.sum() / d as f64;
    Ok(u.map(|v| v - mean))
}
