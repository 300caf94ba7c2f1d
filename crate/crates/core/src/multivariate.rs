//! Covariance, correlation-structure and distance tools for compositions
//! on their original scale of measurement.
//!
//! Standardized residuals against the arithmetic-mean composition play the
//! role that centered log-ratios play in the log-ratio framework, but they
//! tolerate zeros. Their empirical covariance estimates `C Phi C`; when the
//! underlying error dispersion is diagonal ("null correlation") that matrix
//! has a structure determined by only the D variances, which is what the
//! diagnostic here measures departure from.

use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{centering_matrix, sym_eigen, sym_pseudo_inverse, DEFAULT_RANK_TOL};
use crate::model::CompositionalDataset;
use crate::variance::{standardized_residual, CenteredDispersion, DispersionProvenance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    /// Mahalanobis form `(r_i - r_j)' (C Phi C)^+ (r_i - r_j)`.
    MahalanobisPhi,
    /// Plain squared Euclidean distance between standardized residuals.
    Identity,
    /// Euclidean distance between centered log-ratio vectors.
    Aitchison,
}

/// Symmetric pairwise distances with zero diagonal. Entries are unsquared;
/// use [`DistanceMatrix::squared`] for the squared form.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    entries: DMatrix<f64>,
    metric_kind: MetricKind,
}

impl DistanceMatrix {
    fn from_squared(mut squared: DMatrix<f64>, metric_kind: MetricKind) -> Self {
        for v in squared.iter_mut() {
            *v = v.max(0.0).sqrt();
        }
        Self {
            entries: squared,
            metric_kind,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.nrows() == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn squared(&self, i: usize, j: usize) -> f64 {
        let d = self.entries[(i, j)];
        d * d
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn kind(&self) -> MetricKind {
        self.metric_kind
    }
}

/// Summary of how close an estimated `C Phi C` is to the structure implied
/// by a diagonal dispersion.
#[derive(Debug, Clone)]
pub struct NullCorrelationDiagnostic {
    /// Nonnegative least-squares variances of the best-fitting diagonal
    /// dispersion (minimum-norm representative where not identifiable).
    pub fitted_variances: DVector<f64>,
    /// Frobenius distance from the estimate to the fitted null structure.
    pub structure_residual: f64,
    /// Object-resampling bootstrap p-value; absent when no residuals or no
    /// replicates were supplied. Heuristic, not a calibrated test.
    pub bootstrap_p: Option<f64>,
}

/// Standardized residuals against the arithmetic-mean composition (no
/// regression model): `r_i = C diag(mean)^-1 (p_i - mean)`.
pub fn compositional_residuals(data: &CompositionalDataset) -> Result<Vec<DVector<f64>>> {
    let mean = data.mean_composition()?;
    if !mean.is_strictly_positive() {
        return Err(Error::DegenerateProbability(
            "a part is zero in every record; its mean share is degenerate".into(),
        ));
    }
    data.records()
        .iter()
        .map(|rec| standardized_residual(rec.composition(), &mean))
        .collect()
}

/// Least-squares fit of `{C diag(phi) C}` to a symmetric matrix, with
/// nonnegativity enforced by an active-set sweep. Returns the variances and
/// the fitted structure.
fn fit_null_structure(s: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let d = s.nrows();
    let c = centering_matrix(d)?;
    // gram[k][l] = <c_k c_k', c_l c_l'> = C_kl^2 ; rhs[k] = c_k' S c_k
    let gram = DMatrix::from_fn(d, d, |k, l| c[(k, l)] * c[(k, l)]);
    let rhs = DVector::from_fn(d, |k, _| (c.column(k).transpose() * s * c.column(k))[(0, 0)]);

    let solve_free = |free: &[usize]| -> DVector<f64> {
        let m = free.len();
        let g = DMatrix::from_fn(m, m, |a, b| gram[(free[a], free[b])]);
        let r = DVector::from_fn(m, |a, _| rhs[free[a]]);
        let g_pinv = sym_pseudo_inverse(&g, DEFAULT_RANK_TOL).expect("gram matrix is symmetric");
        g_pinv * r
    };

    let mut free: Vec<usize> = (0..d).collect();
    let mut phi = DVector::zeros(d);
    loop {
        let sol = solve_free(&free);
        let mut any_negative = false;
        phi.fill(0.0);
        for (a, &k) in free.iter().enumerate() {
            phi[k] = sol[a];
        }
        let keep: Vec<usize> = free
            .iter()
            .cloned()
            .filter(|&k| {
                if phi[k] < -1e-12 {
                    any_negative = true;
                    false
                } else {
                    true
                }
            })
            .collect();
        if !any_negative || keep.is_empty() {
            for v in phi.iter_mut() {
                *v = v.max(0.0);
            }
            break;
        }
        free = keep;
    }

    let fitted = &c * DMatrix::from_diagonal(&phi) * &c;
    Ok((phi, fitted))
}

fn frobenius(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Symmetric square root (and its pseudo-inverse square root) of a PSD
/// matrix, tiny negative eigenvalues clamped to zero.
fn psd_sqrt_pair(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let eigen = sym_eigen(m)?;
    let cut = DEFAULT_RANK_TOL * eigen.max_abs_value();
    let root = eigen.map_values(|v| if v > cut { v.sqrt() } else { 0.0 });
    let inv_root = eigen.map_values(|v| if v > cut { 1.0 / v.sqrt() } else { 0.0 });
    Ok((root, inv_root))
}

/// Measure departure of an estimated centered dispersion from the structure
/// implied by null correlation (a diagonal error dispersion).
///
/// When residuals and a replicate count are supplied, a heuristic bootstrap
/// p-value is attached: the residuals are linearly recolored so their
/// empirical covariance matches the fitted null structure exactly, then
/// objects are resampled with replacement and the structure residual is
/// recomputed per replicate.
pub fn null_correlation_diagnostic(
    dispersion: &CenteredDispersion,
    bootstrap_reps: usize,
    residuals: Option<&[DVector<f64>]>,
    seed: u64,
) -> Result<NullCorrelationDiagnostic> {
    let (fitted_variances, fitted) = fit_null_structure(dispersion.matrix())?;
    let structure_residual = frobenius(&(dispersion.matrix() - &fitted));

    let bootstrap_p = match (residuals, bootstrap_reps) {
        (Some(res), reps) if reps > 0 && !res.is_empty() => {
            let n = res.len();
            let d = res[0].len();
            if d != dispersion.dim() {
                return Err(Error::DimensionMismatch(format!(
                    "residuals have {d} parts, dispersion is {}x{}",
                    dispersion.dim(),
                    dispersion.dim()
                )));
            }
            let df = match dispersion.provenance() {
                DispersionProvenance::Estimated { df } => df,
                DispersionProvenance::Assumed => n,
            };
            if df == 0 {
                return Err(Error::InsufficientData(
                    "zero degrees of freedom for the bootstrap".into(),
                ));
            }
            // empirical covariance of the supplied residuals, same divisor
            let mut emp = DMatrix::zeros(d, d);
            for r in res {
                emp += r * r.transpose();
            }
            emp /= df as f64;

            // recolor so the empirical covariance equals the fitted null
            let (null_root, _) = psd_sqrt_pair(&fitted)?;
            let (_, emp_inv_root) = psd_sqrt_pair(&emp)?;
            let recolor = &null_root * emp_inv_root;
            let recolored: Vec<DVector<f64>> = res.iter().map(|r| &recolor * r).collect();

            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut exceed = 0usize;
            for _ in 0..reps {
                let mut boot = DMatrix::zeros(d, d);
                for _ in 0..n {
                    let pick = &recolored[rng.random_range(0..n)];
                    boot += pick * pick.transpose();
                }
                boot /= df as f64;
                let (_, boot_fitted) = fit_null_structure(&boot)?;
                if frobenius(&(&boot - &boot_fitted)) >= structure_residual {
                    exceed += 1;
                }
            }
            Some((1 + exceed) as f64 / (reps + 1) as f64)
        }
        _ => None,
    };

    Ok(NullCorrelationDiagnostic {
        fitted_variances,
        structure_residual,
        bootstrap_p,
    })
}

/// Pairwise distances between residual vectors.
///
/// `MahalanobisPhi` needs the dispersion estimate; `Identity` does not.
/// For the log-ratio analogue see [`aitchison_distance_matrix`].
pub fn distance_matrix(
    residuals: &[DVector<f64>],
    kind: MetricKind,
    dispersion: Option<&CenteredDispersion>,
) -> Result<DistanceMatrix> {
    let n = residuals.len();
    if n == 0 {
        return Err(Error::InsufficientData("no residuals".into()));
    }
    let weight = match kind {
        MetricKind::Identity => None,
        MetricKind::MahalanobisPhi => {
            let disp = dispersion.ok_or_else(|| {
                Error::InvalidParameter(
                    "Mahalanobis distances need a centered dispersion estimate".into(),
                )
            })?;
            Some(sym_pseudo_inverse(disp.matrix(), DEFAULT_RANK_TOL)?)
        }
        MetricKind::Aitchison => {
            return Err(Error::InvalidParameter(
                "Aitchison distances are computed from data; use aitchison_distance_matrix".into(),
            ))
        }
    };

    let mut squared = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let diff = &residuals[i] - &residuals[j];
            let d2 = match &weight {
                Some(w) => (diff.transpose() * w * &diff)[(0, 0)],
                None => diff.norm_squared(),
            };
            squared[(i, j)] = d2;
            squared[(j, i)] = d2;
        }
    }
    Ok(DistanceMatrix::from_squared(squared, kind))
}

/// Classical Aitchison distances: Euclidean distances between centered
/// log-ratio vectors, with the geometric-mean composition as reference.
///
/// Breaks down on zero-valued parts by construction, which is the point of
/// contrast with [`distance_matrix`].
pub fn aitchison_distance_matrix(data: &CompositionalDataset) -> Result<DistanceMatrix> {
    let n = data.len();
    let d = data.n_parts();
    for (i, rec) in data.records().iter().enumerate() {
        if !rec.composition().is_strictly_positive() {
            return Err(Error::ZerosUnsupported(format!(
                "record {i} has a zero part; log-ratios are undefined"
            )));
        }
    }
    // normalized exp of mean logs
    let mut mean_log = DVector::zeros(d);
    for rec in data.records() {
        for k in 0..d {
            mean_log[k] += rec.composition().part(k).ln();
        }
    }
    mean_log /= n as f64;
    let gm = mean_log.map(f64::exp);
    let gm = &gm / gm.sum();

    let c = centering_matrix(d)?;
    let clr: Vec<DVector<f64>> = data
        .records()
        .iter()
        .map(|rec| {
            let z = DVector::from_fn(d, |k, _| (rec.composition().part(k) / gm[k]).ln());
            &c * z
        })
        .collect();

    let mut squared = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let d2 = (&clr[i] - &clr[j]).norm_squared();
            squared[(i, j)] = d2;
            squared[(j, i)] = d2;
        }
    }
    Ok(DistanceMatrix::from_squared(squared, MetricKind::Aitchison))
}
