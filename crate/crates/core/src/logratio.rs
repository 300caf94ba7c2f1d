//! The log-ratio multivariate linear model, used as a baseline for
//! comparison. It regresses additive log-ratios on the covariates by
//! ordinary least squares, so it models expectations of log-ratios rather
//! than log-ratios of expectations — and it cannot handle zero-valued
//! parts at all, which is the contrast the rest of the crate draws.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{sym_pseudo_inverse, sym_rank, DEFAULT_RANK_TOL};
use crate::model::{
    design_row, softmax, Composition, CompositionalDataset, MeasurementRecord,
};

/// Multivariate OLS fit of additive log-ratios on the design matrix.
#[derive(Debug, Clone)]
pub struct LogRatioFit {
    /// Index of the reference part (denominator of every ratio).
    pub reference_part: usize,
    /// `(D-1) x (p+1)` coefficients; row order is the part order with the
    /// reference part skipped.
    pub coefficients: DMatrix<f64>,
    /// `(D-1) x (D-1)` residual covariance with divisor `N - (p+1)`.
    pub residual_covariance: DMatrix<f64>,
}

/// Additive log-ratio transform: `log(p_k / p_ref)` for `k != ref`, in part
/// order.
pub fn alr_transform(p: &Composition, reference_part: usize) -> Result<DVector<f64>> {
    if reference_part >= p.dim() {
        return Err(Error::InvalidDimension(format!(
            "reference part {reference_part} out of range for {} parts",
            p.dim()
        )));
    }
    if !p.is_strictly_positive() {
        return Err(Error::ZerosUnsupported(
            "log-ratios are undefined for zero-valued parts".into(),
        ));
    }
    let denom = p.part(reference_part);
    let out = (0..p.dim())
        .filter(|&k| k != reference_part)
        .map(|k| (p.part(k) / denom).ln())
        .collect::<Vec<_>>();
    Ok(DVector::from_vec(out))
}

/// Fit the log-ratio linear model by multivariate ordinary least squares.
///
/// Requires strictly positive compositions and more records than design
/// columns. No zero adjustment is ever applied implicitly; see
/// [`zero_adjusted`] for the explicit demonstration device.
pub fn fit_logratio_lm(data: &CompositionalDataset, reference_part: usize) -> Result<LogRatioFit> {
    let d = data.n_parts();
    let q = data.n_covariates() + 1;
    if reference_part >= d {
        return Err(Error::InvalidDimension(format!(
            "reference part {reference_part} out of range for {d} parts"
        )));
    }
    if data.len() <= q {
        return Err(Error::InsufficientData(format!(
            "{} records cannot support {q} design columns plus a residual covariance",
            data.len()
        )));
    }
    for (i, rec) in data.records().iter().enumerate() {
        if !rec.composition().is_strictly_positive() {
            return Err(Error::ZerosUnsupported(format!(
                "record {i} has a zero part; fit aborted (consider an explicit zero adjustment)"
            )));
        }
    }

    let x = data.design_matrix();
    let xtx = x.transpose() * &x;
    if sym_rank(&xtx, DEFAULT_RANK_TOL)? < q {
        return Err(Error::RankDeficient {
            columns: data.design_names(),
        });
    }
    let xtx_inv = sym_pseudo_inverse(&xtx, DEFAULT_RANK_TOL)?;

    // N x (D-1) response matrix of log-ratios
    let n = data.len();
    let mut z = DMatrix::zeros(n, d - 1);
    for (i, rec) in data.records().iter().enumerate() {
        let zi = alr_transform(rec.composition(), reference_part)?;
        for j in 0..d - 1 {
            z[(i, j)] = zi[j];
        }
    }

    let beta = &xtx_inv * x.transpose() * &z; // q x (D-1)
    let fittedz = &x * &beta;
    let resid = &z - fittedz;
    let residual_covariance = resid.transpose() * &resid / (n - q) as f64;

    Ok(LogRatioFit {
        reference_part,
        coefficients: beta.transpose(),
        residual_covariance,
    })
}

/// Inverse-alr prediction at a covariate vector: a strictly positive
/// unit-sum composition.
pub fn predict_logratio(fit: &LogRatioFit, covariates: &DVector<f64>) -> Result<Composition> {
    let q = fit.coefficients.ncols();
    if covariates.len() + 1 != q {
        return Err(Error::DimensionMismatch(format!(
            "{} covariates supplied, fit has {}",
            covariates.len(),
            q - 1
        )));
    }
    let x = design_row(covariates);
    let d = fit.coefficients.nrows() + 1;
    let mut eta = DVector::zeros(d);
    let mut row = 0;
    for k in 0..d {
        if k == fit.reference_part {
            eta[k] = 0.0;
        } else {
            eta[k] = (fit.coefficients.row(row) * &x)[(0, 0)];
            row += 1;
        }
    }
    softmax(&eta)
}

/// Add `epsilon` to every raw measurement and rebuild the dataset.
///
/// A demonstration device for the sensitivity of log-ratio analyses to
/// zero-handling constants; never applied implicitly.
pub fn zero_adjusted(data: &CompositionalDataset, epsilon: f64) -> Result<CompositionalDataset> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "zero adjustment must be a positive number, got {epsilon}"
        )));
    }
    let records = data
        .records()
        .iter()
        .map(|rec| {
            let adjusted = rec.raw().map(|v| v + epsilon);
            MeasurementRecord::from_raw(adjusted, rec.covariates().clone())
        })
        .collect::<Result<Vec<_>>>()?;
    CompositionalDataset::new(
        records,
        data.part_names().to_vec(),
        data.covariate_names().to_vec(),
    )
}
