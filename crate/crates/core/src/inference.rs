//! Dispersion estimation and approximate inference for fitted models.
//!
//! The asymptotic covariance of the coefficient estimates factorizes as
//! `C Phi C (x) (X'X)^-` in part-major order, with `C Phi C` estimated from
//! the standardized residuals. A sandwich estimator is available for when
//! the multiplicative-error variance assumption is in doubt.
//!
//! Covariances are projected onto the subspace selected by the
//! identification constraint, so sum-to-zero and reference-part styles share
//! one code path and any identifiable contrast gets the same z either way.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{kron, sym_pseudo_inverse, sym_rank, DEFAULT_RANK_TOL};
use crate::model::{CoefficientMatrix, CompositionalDataset, IdentificationConstraint};
use crate::solver::{quasi_information, FitResult};
use crate::variance::{standardized_residual, CenteredDispersion, DispersionProvenance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovarianceFlavor {
    ModelBased,
    Sandwich,
}

/// A `D(p+1) x D(p+1)` covariance of the part-major coefficient vector.
#[derive(Debug, Clone)]
pub struct CoefficientCovariance {
    matrix: DMatrix<f64>,
    flavor: CovarianceFlavor,
    warnings: Vec<String>,
}

impl CoefficientCovariance {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn flavor(&self) -> CovarianceFlavor {
        self.flavor
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Standard error for one part-major coefficient slot.
    pub fn std_error(&self, index: usize) -> f64 {
        self.matrix[(index, index)].max(0.0).sqrt()
    }
}

/// A linear-contrast Wald test.
#[derive(Debug, Clone)]
pub struct WaldTest {
    pub contrast: DVector<f64>,
    pub estimate: f64,
    pub std_error: f64,
    /// `estimate / std_error`; meaningful when `std_error > 0`.
    pub z_value: f64,
}

/// Standardized residuals `C diag(pi_hat)^-1 (p_i - pi_hat_i)` of a
/// converged fit. Each sums to zero.
pub fn standardized_residuals(
    fit: &FitResult,
    data: &CompositionalDataset,
) -> Result<Vec<DVector<f64>>> {
    if !fit.converged {
        return Err(Error::InvalidParameter(
            "residuals require a converged fit".into(),
        ));
    }
    if fit.fitted_compositions.len() != data.len() {
        return Err(Error::DimensionMismatch(format!(
            "fit has {} fitted compositions, data has {} records",
            fit.fitted_compositions.len(),
            data.len()
        )));
    }
    data.records()
        .iter()
        .zip(&fit.fitted_compositions)
        .map(|(rec, pi)| standardized_residual(rec.composition(), pi))
        .collect()
}

/// Empirical centered dispersion `(1/(N-q)) sum_i r_i r_i'`, an estimate of
/// `C Phi C`. `mean_params_per_part` is the divisor correction `q`, by
/// default the number of mean parameters per part (p+1).
pub fn estimate_centered_dispersion(
    residuals: &[DVector<f64>],
    mean_params_per_part: usize,
) -> Result<CenteredDispersion> {
    let n = residuals.len();
    if n <= mean_params_per_part {
        return Err(Error::InsufficientData(format!(
            "{n} residuals cannot support a divisor of N - {mean_params_per_part}"
        )));
    }
    let d = residuals[0].len();
    let mut acc = DMatrix::zeros(d, d);
    for r in residuals {
        if r.len() != d {
            return Err(Error::DimensionMismatch(
                "residual vectors have mixed lengths".into(),
            ));
        }
        acc += r * r.transpose();
    }
    let df = n - mean_params_per_part;
    acc /= df as f64;
    CenteredDispersion::new(acc, DispersionProvenance::Estimated { df })
}

/// Dispersion estimated from a fit's own residuals with the default
/// divisor `N - (p+1)`.
pub fn fitted_dispersion(fit: &FitResult, data: &CompositionalDataset) -> Result<CenteredDispersion> {
    let residuals = standardized_residuals(fit, data)?;
    estimate_centered_dispersion(&residuals, data.n_covariates() + 1)
}

/// Project a centered `D x D` factor onto the constraint subspace:
/// `(I - 1c') M (I - c1')`.
fn project_centered(m: &DMatrix<f64>, constraint: IdentificationConstraint) -> DMatrix<f64> {
    let d = m.nrows();
    let c = constraint.weights(d);
    let mut p = DMatrix::identity(d, d);
    for i in 0..d {
        for j in 0..d {
            p[(i, j)] -= c[j];
        }
    }
    &p * m * p.transpose()
}

/// Model-based covariance `C Phi C (x) (X'X)^-`, part-major, projected onto
/// the constraint subspace. A rank-deficient design falls back to the
/// pseudo-inverse with a warning.
pub fn model_vcov(
    dispersion: &CenteredDispersion,
    design: &DMatrix<f64>,
    constraint: IdentificationConstraint,
) -> Result<CoefficientCovariance> {
    let xtx = design.transpose() * design;
    let mut warnings = Vec::new();
    if sym_rank(&xtx, DEFAULT_RANK_TOL)? < xtx.nrows() {
        warnings.push("design matrix is rank deficient; using a generalized inverse".into());
    }
    let xtx_inv = sym_pseudo_inverse(&xtx, DEFAULT_RANK_TOL)?;
    let centered = project_centered(dispersion.matrix(), constraint);
    Ok(CoefficientCovariance {
        matrix: kron(&centered, &xtx_inv),
        flavor: CovarianceFlavor::ModelBased,
        warnings,
    })
}

/// Sandwich covariance `A^+ M A^+` with `A` the parameter-free
/// quasi-information and `M` the empirical outer product of per-object
/// quasi-score contributions, projected onto the constraint subspace.
pub fn sandwich_vcov(fit: &FitResult, data: &CompositionalDataset) -> Result<CoefficientCovariance> {
    if !fit.converged {
        return Err(Error::InvalidParameter(
            "sandwich covariance requires a converged fit".into(),
        ));
    }
    let residuals = standardized_residuals(fit, data)?;
    let d = data.n_parts();
    let q = data.n_covariates() + 1;
    let mut meat = DMatrix::zeros(d * q, d * q);
    for (rec, v) in data.records().iter().zip(&residuals) {
        let x = rec.design_row();
        let mut s = DVector::zeros(d * q);
        for k in 0..d {
            for r in 0..q {
                s[k * q + r] = v[k] * x[r];
            }
        }
        meat += &s * s.transpose();
    }
    let bread = sym_pseudo_inverse(&quasi_information(data), DEFAULT_RANK_TOL)?;
    let unprojected = &bread * meat * &bread;

    let constraint = fit.coefficients.constraint();
    let c = constraint.weights(d);
    let mut p = DMatrix::identity(d, d);
    for i in 0..d {
        for j in 0..d {
            p[(i, j)] -= c[j];
        }
    }
    let expand = kron(&p, &DMatrix::identity(q, q));
    let matrix = &expand * unprojected * expand.transpose();

    let mut warnings = Vec::new();
    if data.len() < d * q {
        warnings.push(format!(
            "sandwich meat has at most rank {} from {} records; treat as small-sample",
            data.len(),
            data.len()
        ));
    }
    Ok(CoefficientCovariance {
        matrix,
        flavor: CovarianceFlavor::Sandwich,
        warnings,
    })
}

/// Wald test of `contrast' vec(B)` (part-major contrast vector).
///
/// The contrast is reduced through the identification constraint; one whose
/// reduced form vanishes measures only the unidentified softmax shift and
/// is rejected.
pub fn wald(
    contrast: &DVector<f64>,
    coefficients: &CoefficientMatrix,
    vcov: &CoefficientCovariance,
) -> Result<WaldTest> {
    let d = coefficients.n_parts();
    let q = coefficients.n_covariates() + 1;
    if contrast.len() != d * q {
        return Err(Error::DimensionMismatch(format!(
            "contrast has {} entries, coefficient vector has {}",
            contrast.len(),
            d * q
        )));
    }
    if vcov.matrix().nrows() != d * q {
        return Err(Error::DimensionMismatch(
            "covariance does not match coefficient dimension".into(),
        ));
    }
    let c0 = coefficients.constraint().weights(d);
    let mut reduced = contrast.clone();
    for r in 0..q {
        let slot_sum: f64 = (0..d).map(|k| contrast[k * q + r]).sum();
        for k in 0..d {
            reduced[k * q + r] -= c0[k] * slot_sum;
        }
    }
    if reduced.norm() <= 1e-8 * contrast.norm() {
        return Err(Error::NonIdentifiable(
            "contrast lies in the null space of the identification constraint".into(),
        ));
    }
    let estimate = contrast.dot(&coefficients.vec_part_major());
    let variance = (contrast.transpose() * vcov.matrix() * contrast)[(0, 0)];
    let std_error = variance.max(0.0).sqrt();
    let z_value = estimate / std_error;
    Ok(WaldTest {
        contrast: contrast.clone(),
        estimate,
        std_error,
        z_value,
    })
}

/// Contrast vector selecting a single coefficient `(part, design slot)`.
pub fn coefficient_contrast(d: usize, q: usize, part: usize, slot: usize) -> DVector<f64> {
    let mut c = DVector::zeros(d * q);
    c[part * q + slot] = 1.0;
    c
}
