//! Compositions, datasets and the compositional logit-linear model.
//!
//! A composition is a unit-sum vector of D nonnegative parts. The logit
//! model puts `pi_k proportional to exp(x' beta_k)` for mean composition,
//! with a `D x (p+1)` coefficient matrix `B` whose rows are the per-part
//! coefficient vectors (column 0 is the intercept). The model is invariant
//! to adding the same vector to every row of `B`, so a linear constraint
//! `c'B = 0` identifies the parameters.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, kron};

/// Tolerance on the unit-sum check for compositions.
pub const UNIT_SUM_TOL: f64 = 1e-10;

/// A unit-sum vector of D >= 2 nonnegative parts. Zeros are permitted.
#[derive(Debug, Clone, PartialEq)]
pub struct Composition {
    parts: DVector<f64>,
}

impl Composition {
    pub fn new(parts: DVector<f64>) -> Result<Self> {
        if parts.len() < 2 {
            return Err(Error::InvalidComposition(format!(
                "need at least 2 parts, got {}",
                parts.len()
            )));
        }
        if parts.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidComposition(
                "parts must be finite and nonnegative".into(),
            ));
        }
        let sum: f64 = parts.sum();
        if (sum - 1.0).abs() > UNIT_SUM_TOL {
            return Err(Error::InvalidComposition(format!(
                "parts sum to {sum}, expected 1"
            )));
        }
        Ok(Self { parts })
    }

    pub fn from_slice(parts: &[f64]) -> Result<Self> {
        Self::new(DVector::from_row_slice(parts))
    }

    /// Normalize a vector of nonnegative values to unit sum.
    pub fn from_raw(raw: &DVector<f64>) -> Result<Self> {
        if raw.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidComposition(
                "raw values must be finite and nonnegative".into(),
            ));
        }
        let total = raw.sum();
        if total <= 0.0 {
            return Err(Error::InvalidComposition("total must be positive".into()));
        }
        Self::new(raw / total)
    }

    pub fn dim(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &DVector<f64> {
        &self.parts
    }

    pub fn part(&self, k: usize) -> f64 {
        self.parts[k]
    }

    pub fn has_zero(&self) -> bool {
        self.parts.iter().any(|v| *v == 0.0)
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.parts.iter().all(|v| *v > 0.0)
    }

    /// `diag(pi)` as a dense matrix.
    pub fn diagonal(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.parts)
    }
}

/// One object: raw measurements, their total, the derived composition and
/// the covariates (without the leading 1).
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    raw: DVector<f64>,
    total: f64,
    composition: Composition,
    covariates: DVector<f64>,
}

impl MeasurementRecord {
    /// Build from raw measurements; total and composition are derived.
    pub fn from_raw(raw: DVector<f64>, covariates: DVector<f64>) -> Result<Self> {
        if raw.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidComposition(
                "raw measurements must be finite and nonnegative".into(),
            ));
        }
        let total = raw.sum();
        if total <= 0.0 {
            return Err(Error::InvalidComposition(
                "record rejected: total of raw measurements must be positive".into(),
            ));
        }
        let composition = Composition::new(&raw / total)?;
        Self::from_parts(raw, total, composition, covariates)
    }

    /// Build from already-separated pieces, checking `composition = raw/total`
    /// within tolerance. Lets callers that computed the composition on a
    /// scale-free path keep it bit-exact.
    pub fn from_parts(
        raw: DVector<f64>,
        total: f64,
        composition: Composition,
        covariates: DVector<f64>,
    ) -> Result<Self> {
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidComposition(format!(
                "total must be a positive finite number, got {total}"
            )));
        }
        if raw.len() != composition.dim() {
            return Err(Error::DimensionMismatch(format!(
                "raw has {} parts, composition has {}",
                raw.len(),
                composition.dim()
            )));
        }
        let scale = total.max(1.0);
        for k in 0..raw.len() {
            if (raw[k] - total * composition.part(k)).abs() > UNIT_SUM_TOL * scale {
                return Err(Error::InvalidComposition(
                    "composition is not raw/total within tolerance".into(),
                ));
            }
        }
        if covariates.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidComposition("covariates must be finite".into()));
        }
        Ok(Self {
            raw,
            total,
            composition,
            covariates,
        })
    }

    pub fn raw(&self) -> &DVector<f64> {
        &self.raw
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn composition(&self) -> &Composition {
        &self.composition
    }

    /// Covariates without the leading 1.
    pub fn covariates(&self) -> &DVector<f64> {
        &self.covariates
    }

    /// The design row `(1, x_1, ..., x_p)`.
    pub fn design_row(&self) -> DVector<f64> {
        design_row(&self.covariates)
    }
}

pub(crate) fn design_row(covariates: &DVector<f64>) -> DVector<f64> {
    let mut x = DVector::zeros(covariates.len() + 1);
    x[0] = 1.0;
    for r in 0..covariates.len() {
        x[r + 1] = covariates[r];
    }
    x
}

/// N records with equal part and covariate dimensions, plus labels.
#[derive(Debug, Clone)]
pub struct CompositionalDataset {
    records: Vec<MeasurementRecord>,
    part_names: Vec<String>,
    covariate_names: Vec<String>,
}

impl CompositionalDataset {
    pub fn new(
        records: Vec<MeasurementRecord>,
        part_names: Vec<String>,
        covariate_names: Vec<String>,
    ) -> Result<Self> {
        let Some(first) = records.first() else {
            return Err(Error::InsufficientData("dataset needs at least 1 record".into()));
        };
        let d = first.composition.dim();
        let p = first.covariates.len();
        for (i, r) in records.iter().enumerate() {
            if r.composition.dim() != d || r.covariates.len() != p {
                return Err(Error::DimensionMismatch(format!(
                    "record {i} has {} parts / {} covariates, expected {d} / {p}",
                    r.composition.dim(),
                    r.covariates.len()
                )));
            }
        }
        if part_names.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "{} part names for {d} parts",
                part_names.len()
            )));
        }
        if covariate_names.len() != p {
            return Err(Error::DimensionMismatch(format!(
                "{} covariate names for {p} covariates",
                covariate_names.len()
            )));
        }
        Ok(Self {
            records,
            part_names,
            covariate_names,
        })
    }

    /// Convenience constructor with generated `part<k>` / `x<r>` labels.
    pub fn with_default_names(records: Vec<MeasurementRecord>) -> Result<Self> {
        let Some(first) = records.first() else {
            return Err(Error::InsufficientData("dataset needs at least 1 record".into()));
        };
        let part_names = (1..=first.composition.dim())
            .map(|k| format!("part{k}"))
            .collect();
        let covariate_names = (1..=first.covariates.len())
            .map(|r| format!("x{r}"))
            .collect();
        Self::new(records, part_names, covariate_names)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Number of parts D.
    pub fn n_parts(&self) -> usize {
        self.records[0].composition.dim()
    }

    /// Number of covariates p (excluding the intercept).
    pub fn n_covariates(&self) -> usize {
        self.records[0].covariates.len()
    }

    pub fn records(&self) -> &[MeasurementRecord] {
        &self.records
    }

    pub fn record(&self, i: usize) -> &MeasurementRecord {
        &self.records[i]
    }

    pub fn part_names(&self) -> &[String] {
        &self.part_names
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.covariate_names
    }

    /// Labels for design columns: `(intercept)` then the covariate names.
    pub fn design_names(&self) -> Vec<String> {
        let mut names = vec!["(intercept)".to_string()];
        names.extend(self.covariate_names.iter().cloned());
        names
    }

    /// The `N x (p+1)` design matrix with a leading column of ones.
    pub fn design_matrix(&self) -> DMatrix<f64> {
        let n = self.len();
        let q = self.n_covariates() + 1;
        DMatrix::from_fn(n, q, |i, j| {
            if j == 0 {
                1.0
            } else {
                self.records[i].covariates[j - 1]
            }
        })
    }

    /// Arithmetic mean of the observed compositions.
    pub fn mean_composition(&self) -> Result<Composition> {
        let d = self.n_parts();
        let mut mean = DVector::zeros(d);
        for r in &self.records {
            mean += r.composition.parts();
        }
        mean /= self.len() as f64;
        Composition::new(mean)
    }

    /// Indices of parts observed as zero in every record.
    pub fn all_zero_parts(&self) -> Vec<usize> {
        (0..self.n_parts())
            .filter(|&k| self.records.iter().all(|r| r.composition.part(k) == 0.0))
            .collect()
    }
}

/// How the over-parameterized logit coefficients are pinned down.
///
/// The constraint is `c'B = 0` applied to the columns of `B`, with weights
/// `c` summing to one: `SumToZero` uses `c = (1/D, ..., 1/D)` so each column
/// of `B` sums to zero, `ReferencePart(j)` uses `c = e_j` so row `j` is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdentificationConstraint {
    SumToZero,
    ReferencePart(usize),
}

impl IdentificationConstraint {
    /// The weight vector `c` for dimension `d`.
    pub fn weights(&self, d: usize) -> DVector<f64> {
        match self {
            Self::SumToZero => DVector::from_element(d, 1.0 / d as f64),
            Self::ReferencePart(j) => {
                let mut e = DVector::zeros(d);
                e[*j] = 1.0;
                e
            }
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if let Self::ReferencePart(j) = self {
            if *j >= d {
                return Err(Error::InvalidDimension(format!(
                    "reference part {j} out of range for {d} parts"
                )));
            }
        }
        Ok(())
    }
}

impl Default for IdentificationConstraint {
    fn default() -> Self {
        Self::SumToZero
    }
}

/// Logit coefficients `B` (`D x (p+1)`, row k = beta_k, column 0 the
/// intercept), carrying the constraint they satisfy.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    matrix: DMatrix<f64>,
    constraint: IdentificationConstraint,
}

impl CoefficientMatrix {
    pub fn new(matrix: DMatrix<f64>, constraint: IdentificationConstraint) -> Result<Self> {
        constraint.validate(matrix.nrows())?;
        if matrix.nrows() < 2 {
            return Err(Error::InvalidDimension(
                "coefficient matrix needs at least 2 part rows".into(),
            ));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidComposition(
                "coefficients must be finite".into(),
            ));
        }
        let c = constraint.weights(matrix.nrows());
        let combo = matrix.transpose() * &c;
        let tol = 1e-10 * (1.0 + linalg::max_abs(&matrix));
        if combo.amax() > tol {
            return Err(Error::InvalidComposition(format!(
                "c'B = 0 violated: max |c'B| = {:.3e}",
                combo.amax()
            )));
        }
        Ok(Self { matrix, constraint })
    }

    /// The zero matrix, which satisfies every constraint.
    pub fn zeros(d: usize, p: usize, constraint: IdentificationConstraint) -> Result<Self> {
        Self::new(DMatrix::zeros(d, p + 1), constraint)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn constraint(&self) -> IdentificationConstraint {
        self.constraint
    }

    /// Number of parts D.
    pub fn n_parts(&self) -> usize {
        self.matrix.nrows()
    }

    /// Number of covariates p (excluding the intercept).
    pub fn n_covariates(&self) -> usize {
        self.matrix.ncols() - 1
    }

    /// Part-major vectorization: part k occupies slots `k(p+1) .. (k+1)(p+1)`.
    pub fn vec_part_major(&self) -> DVector<f64> {
        let (d, q) = self.matrix.shape();
        DVector::from_fn(d * q, |idx, _| self.matrix[(idx / q, idx % q)])
    }

    /// Rebuild from a part-major coefficient vector.
    pub fn from_vec_part_major(
        v: &DVector<f64>,
        d: usize,
        constraint: IdentificationConstraint,
    ) -> Result<Self> {
        if v.len() % d != 0 {
            return Err(Error::DimensionMismatch(format!(
                "vector length {} not divisible by {d} parts",
                v.len()
            )));
        }
        let q = v.len() / d;
        let matrix = DMatrix::from_fn(d, q, |k, r| v[k * q + r]);
        Self::new(matrix, constraint)
    }
}

/// Subtract the `c`-weighted combination of rows from every row; a pure
/// softmax shift, so fitted probabilities are unchanged.
pub(crate) fn constrain_rows(
    b_raw: &DMatrix<f64>,
    constraint: IdentificationConstraint,
) -> DMatrix<f64> {
    let c = constraint.weights(b_raw.nrows());
    let combo = b_raw.transpose() * &c; // (p+1)-vector c'B
    let mut adjusted = b_raw.clone();
    for k in 0..adjusted.nrows() {
        for r in 0..adjusted.ncols() {
            adjusted[(k, r)] -= combo[r];
        }
    }
    // exact zeros on the reference row keep downstream checks tight
    if let IdentificationConstraint::ReferencePart(j) = constraint {
        for r in 0..adjusted.ncols() {
            adjusted[(j, r)] = 0.0;
        }
    }
    adjusted
}

/// Re-express an unconstrained coefficient matrix so that `c'B = 0`,
/// without changing the fitted probabilities.
pub fn apply_constraint(
    b_raw: &DMatrix<f64>,
    constraint: IdentificationConstraint,
) -> Result<CoefficientMatrix> {
    constraint.validate(b_raw.nrows())?;
    CoefficientMatrix::new(constrain_rows(b_raw, constraint), constraint)
}

/// The compositional logit (softmax) model:
/// `pi_k = exp(x' beta_k) / sum_l exp(x' beta_l)`.
///
/// Computed with max-subtraction; the output is strictly positive with
/// unit sum. `covariates` excludes the leading 1.
pub fn logit_probabilities(b: &CoefficientMatrix, covariates: &DVector<f64>) -> Result<Composition> {
    if covariates.len() != b.n_covariates() {
        return Err(Error::DimensionMismatch(format!(
            "{} covariates supplied, model has {}",
            covariates.len(),
            b.n_covariates()
        )));
    }
    let x = design_row(covariates);
    let eta = b.matrix() * &x;
    softmax(&eta)
}

pub(crate) fn softmax(eta: &DVector<f64>) -> Result<Composition> {
    if eta.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericOverflow(
            "linear predictor is not finite".into(),
        ));
    }
    let max = eta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps = eta.map(|v| (v - max).exp());
    let sum = exps.sum();
    if !sum.is_finite() || sum <= 0.0 {
        return Err(Error::NumericOverflow(
            "softmax normalization is not finite".into(),
        ));
    }
    let parts = exps / sum;
    if parts.iter().any(|v| *v == 0.0) {
        return Err(Error::NumericOverflow(
            "linear predictor spread exceeds representable range".into(),
        ));
    }
    Composition::new(parts)
}

/// Derivative of the fitted composition with respect to the part-major
/// coefficient vector: `(diag(pi) - pi pi') (I (x) x')`, a `D x D(p+1)`
/// matrix whose part-k block has width p+1.
pub fn model_jacobian(pi: &Composition, covariates: &DVector<f64>) -> Result<DMatrix<f64>> {
    if !pi.is_strictly_positive() {
        return Err(Error::DegenerateProbability(
            "jacobian requires strictly positive probabilities".into(),
        ));
    }
    let x = design_row(covariates);
    let m = multinomial_cov(pi);
    let expand = kron(
        &DMatrix::identity(pi.dim(), pi.dim()),
        &DMatrix::from_fn(1, x.len(), |_, r| x[r]),
    );
    Ok(&m * &expand)
}

/// The multinomial covariance factor `diag(pi) - pi pi'`.
pub fn multinomial_cov(pi: &Composition) -> DMatrix<f64> {
    let p = pi.parts();
    let mut m = DMatrix::from_fn(pi.dim(), pi.dim(), |k, l| -p[k] * p[l]);
    for k in 0..pi.dim() {
        m[(k, k)] += p[k];
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn coef(rows: &[&[f64]], constraint: IdentificationConstraint) -> CoefficientMatrix {
        let d = rows.len();
        let q = rows[0].len();
        let raw = DMatrix::from_fn(d, q, |i, j| rows[i][j]);
        apply_constraint(&raw, constraint).unwrap()
    }

    #[test]
    fn composition_validation() {
        assert!(Composition::from_slice(&[0.5, 0.5]).is_ok());
        assert!(Composition::from_slice(&[0.25, 0.0, 0.75]).is_ok());
        assert!(matches!(
            Composition::from_slice(&[1.0]),
            Err(Error::InvalidComposition(_))
        ));
        assert!(matches!(
            Composition::from_slice(&[0.6, 0.6]),
            Err(Error::InvalidComposition(_))
        ));
        assert!(matches!(
            Composition::from_slice(&[-0.1, 1.1]),
            Err(Error::InvalidComposition(_))
        ));
    }

    #[test]
    fn record_rejects_zero_total() {
        let r = MeasurementRecord::from_raw(
            DVector::from_row_slice(&[0.0, 0.0]),
            DVector::zeros(0),
        );
        assert!(matches!(r, Err(Error::InvalidComposition(_))));
    }

    #[test]
    fn zero_coefficients_give_uniform_composition() {
        let b = CoefficientMatrix::zeros(4, 1, IdentificationConstraint::SumToZero).unwrap();
        let pi = logit_probabilities(&b, &DVector::from_row_slice(&[2.0])).unwrap();
        for k in 0..4 {
            assert_abs_diff_eq!(pi.part(k), 0.25, epsilon = 1e-15);
        }
    }

    #[test]
    fn two_part_intercept_only_softmax() {
        // eta = (0, log 3) -> (0.25, 0.75)
        let raw = DMatrix::from_row_slice(2, 1, &[0.0, 3.0_f64.ln()]);
        let b = apply_constraint(&raw, IdentificationConstraint::ReferencePart(0)).unwrap();
        let pi = logit_probabilities(&b, &DVector::zeros(0)).unwrap();
        assert_abs_diff_eq!(pi.part(0), 0.25, epsilon = 1e-14);
        assert_abs_diff_eq!(pi.part(1), 0.75, epsilon = 1e-14);
    }

    #[test]
    fn constraint_centers_identical_rows_to_zero() {
        let raw = DMatrix::from_row_slice(3, 2, &[1.0, -2.0, 1.0, -2.0, 1.0, -2.0]);
        let b = apply_constraint(&raw, IdentificationConstraint::SumToZero).unwrap();
        assert!(linalg::max_abs(b.matrix()) < 1e-14);
    }

    #[test]
    fn reference_constraint_zeroes_reference_row() {
        let raw = DMatrix::from_row_slice(3, 2, &[1.0, -2.0, 0.5, 0.25, -1.0, 3.0]);
        let b = apply_constraint(&raw, IdentificationConstraint::ReferencePart(0)).unwrap();
        assert_eq!(b.matrix()[(0, 0)], 0.0);
        assert_eq!(b.matrix()[(0, 1)], 0.0);
    }

    #[test]
    fn constraint_preserves_probabilities() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let raw = DMatrix::from_fn(4, 3, |_, _| rng.random_range(-2.0..2.0));
            let x = DVector::from_fn(2, |_, _| rng.random_range(-1.0..1.0));
            let b_sum = apply_constraint(&raw, IdentificationConstraint::SumToZero).unwrap();
            let b_ref = apply_constraint(&raw, IdentificationConstraint::ReferencePart(2)).unwrap();
            let direct = {
                let eta = &raw * design_row(&x);
                softmax(&eta).unwrap()
            };
            let via_sum = logit_probabilities(&b_sum, &x).unwrap();
            let via_ref = logit_probabilities(&b_ref, &x).unwrap();
            for k in 0..4 {
                assert_abs_diff_eq!(via_sum.part(k), direct.part(k), epsilon = 1e-12);
                assert_abs_diff_eq!(via_ref.part(k), direct.part(k), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn log_ratio_identity() {
        let b = coef(
            &[&[0.3, -0.7], &[-0.2, 0.4], &[0.1, 0.9]],
            IdentificationConstraint::SumToZero,
        );
        let x = DVector::from_row_slice(&[0.8]);
        let pi = logit_probabilities(&b, &x).unwrap();
        let xrow = design_row(&x);
        for k in 0..3 {
            for l in 0..3 {
                let lhs = (pi.part(k) / pi.part(l)).ln();
                let rhs = (b.matrix().row(k) - b.matrix().row(l)).transpose().dot(&xrow);
                assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn jacobian_matches_hand_case() {
        // uniform pi, D=2, intercept only: jacobian is the multinomial
        // covariance itself
        let pi = Composition::from_slice(&[0.5, 0.5]).unwrap();
        let j = model_jacobian(&pi, &DVector::zeros(0)).unwrap();
        assert_eq!(j.shape(), (2, 2));
        assert_abs_diff_eq!(j[(0, 0)], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(j[(0, 1)], -0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(j[(1, 0)], -0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(j[(1, 1)], 0.25, epsilon = 1e-15);
    }

    #[test]
    fn jacobian_near_vertex_is_small() {
        let eps = 1e-9;
        let pi = Composition::from_slice(&[1.0 - eps, eps]).unwrap();
        let j = model_jacobian(&pi, &DVector::zeros(0)).unwrap();
        assert!(linalg::max_abs(&j) < 2.0 * eps);
    }

    #[test]
    fn jacobian_rejects_zero_probability() {
        let pi = Composition::from_slice(&[1.0, 0.0]).unwrap();
        assert!(matches!(
            model_jacobian(&pi, &DVector::zeros(0)),
            Err(Error::DegenerateProbability(_))
        ));
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let raw = DMatrix::from_fn(3, 2, |_, _| rng.random_range(-1.0..1.0));
        let b = apply_constraint(&raw, IdentificationConstraint::SumToZero).unwrap();
        let x = DVector::from_row_slice(&[0.6]);
        let pi = logit_probabilities(&b, &x).unwrap();
        let jac = model_jacobian(&pi, &x).unwrap();
        let h = 1e-6;
        let q = b.n_covariates() + 1;
        for l in 0..3 {
            for r in 0..q {
                let mut bumped = b.matrix().clone();
                bumped[(l, r)] += h;
                // perturbed matrix no longer satisfies the constraint; the
                // probabilities do not care
                let eta = &bumped * design_row(&x);
                let pi_h = softmax(&eta).unwrap();
                for k in 0..3 {
                    let fd = (pi_h.part(k) - pi.part(k)) / h;
                    assert_abs_diff_eq!(jac[(k, l * q + r)], fd, epsilon = 1e-5);
                }
            }
        }
    }

    #[test]
    fn jacobian_rows_sum_to_zero() {
        let b = coef(
            &[&[0.3, -0.7], &[-0.2, 0.4], &[0.1, 0.9]],
            IdentificationConstraint::SumToZero,
        );
        let x = DVector::from_row_slice(&[1.3]);
        let pi = logit_probabilities(&b, &x).unwrap();
        let jac = model_jacobian(&pi, &x).unwrap();
        for r in 0..jac.ncols() {
            let col_sum: f64 = (0..jac.nrows()).map(|k| jac[(k, r)]).sum();
            assert!(col_sum.abs() < 1e-12);
        }
    }

    #[test]
    fn dataset_requires_homogeneous_dimensions() {
        let r1 = MeasurementRecord::from_raw(
            DVector::from_row_slice(&[1.0, 2.0]),
            DVector::from_row_slice(&[0.5]),
        )
        .unwrap();
        let r2 = MeasurementRecord::from_raw(
            DVector::from_row_slice(&[1.0, 2.0, 3.0]),
            DVector::from_row_slice(&[0.5]),
        )
        .unwrap();
        assert!(matches!(
            CompositionalDataset::with_default_names(vec![r1, r2]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    proptest! {
        #[test]
        fn softmax_output_is_unit_sum_and_positive(
            entries in proptest::collection::vec(-20.0f64..20.0, 6),
            x in -3.0f64..3.0,
        ) {
            let raw = DMatrix::from_fn(3, 2, |i, j| entries[i * 2 + j]);
            let b = apply_constraint(&raw, IdentificationConstraint::SumToZero).unwrap();
            let pi = logit_probabilities(&b, &DVector::from_row_slice(&[x])).unwrap();
            let sum: f64 = pi.parts().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
            prop_assert!(pi.is_strictly_positive());
        }

        #[test]
        fn softmax_shift_invariance(
            entries in proptest::collection::vec(-5.0f64..5.0, 6),
            shift in proptest::collection::vec(-10.0f64..10.0, 2),
            x in -3.0f64..3.0,
        ) {
            let raw = DMatrix::from_fn(3, 2, |i, j| entries[i * 2 + j]);
            let mut shifted = raw.clone();
            for k in 0..3 {
                for r in 0..2 {
                    shifted[(k, r)] += shift[r];
                }
            }
            let xv = DVector::from_row_slice(&[x]);
            let p0 = softmax(&(&raw * design_row(&xv))).unwrap();
            let p1 = softmax(&(&shifted * design_row(&xv))).unwrap();
            for k in 0..3 {
                prop_assert!((p0.part(k) - p1.part(k)).abs() < 1e-12);
            }
        }
    }
}
