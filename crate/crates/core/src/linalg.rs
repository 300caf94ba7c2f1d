//! Small dense-matrix kernels shared by the whole crate: the centering
//! projection, symmetric pseudo-inverses and Kronecker products.
//!
//! Everything here targets modest dimensions (a few hundred at most).
//! Pseudo-inverses go through a symmetric eigendecomposition rather than an
//! SVD: every matrix inverted in this crate is symmetric, and the
//! eigendecomposition route keeps the output exactly symmetric.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Default relative threshold below which eigenvalues are treated as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Relative tolerance for accepting a matrix as symmetric.
pub const SYMMETRY_REL_TOL: f64 = 1e-8;

/// Relative tolerance for accepting a symmetric matrix as positive
/// semidefinite: eigenvalues down to `-PSD_REL_TOL * lambda_max` pass.
pub const PSD_REL_TOL: f64 = 1e-9;

/// The centering projection `I - J/D` that sweeps out the mean of a
/// D-vector. Symmetric, idempotent, rows and columns sum to zero.
pub fn centering_matrix(dim: usize) -> Result<DMatrix<f64>> {
    if dim == 0 {
        return Err(Error::InvalidDimension(
            "centering matrix needs dimension >= 1".into(),
        ));
    }
    let off = -1.0 / dim as f64;
    Ok(DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            1.0 + off
        } else {
            off
        }
    }))
}

/// Eigendecomposition of a symmetric matrix, eigenvalues sorted descending
/// and eigenvectors carried as orthonormal columns in matching order.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl SymEigen {
    /// Largest absolute eigenvalue.
    pub fn max_abs_value(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Rebuild `Q f(L) Q'` with the eigenvalues mapped through `f`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let q = &self.vectors;
        let scaled = DMatrix::from_fn(q.nrows(), q.ncols(), |i, j| q[(i, j)] * f(self.values[j]));
        // q * diag(f) * q', assembled so the result is symmetric to rounding
        let mut out = &scaled * q.transpose();
        symmetrize(&mut out);
        out
    }
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Max absolute entry of a matrix (0 for an empty one).
pub(crate) fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Check `M = M'` within `SYMMETRY_REL_TOL` relative to the largest entry.
pub fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "expected square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let scale = max_abs(m);
    let tolerance = SYMMETRY_REL_TOL * scale.max(f64::MIN_POSITIVE);
    let mut max_asymmetry = 0.0_f64;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            max_asymmetry = max_asymmetry.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    if max_asymmetry > tolerance {
        return Err(Error::NotSymmetric {
            max_asymmetry,
            tolerance,
        });
    }
    Ok(())
}

/// Symmetric eigendecomposition with descending eigenvalue order.
///
/// The input must be symmetric within [`SYMMETRY_REL_TOL`]; it is symmetrized
/// before factoring so tiny asymmetries cannot leak into the results.
pub fn sym_eigen(m: &DMatrix<f64>) -> Result<SymEigen> {
    check_symmetric(m)?;
    let mut work = m.clone();
    symmetrize(&mut work);
    let eig = work.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("eigenvalues are finite")
    });
    let values = DVector::from_fn(n, |i, _| eig.eigenvalues[order[i]]);
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(SymEigen { values, vectors })
}

/// Moore–Penrose pseudo-inverse of a symmetric matrix.
///
/// Eigenvalues with `|lambda| <= rank_tol * |lambda_max|` are treated as
/// zero and the remaining ones reciprocated. Asymmetric input (beyond
/// [`SYMMETRY_REL_TOL`]) is a contract violation.
pub fn sym_pseudo_inverse(m: &DMatrix<f64>, rank_tol: f64) -> Result<DMatrix<f64>> {
    let eigen = sym_eigen(m)?;
    let cut = rank_tol * eigen.max_abs_value();
    Ok(eigen.map_values(|v| if v.abs() <= cut { 0.0 } else { 1.0 / v }))
}

/// Rank of a symmetric matrix at the given relative eigenvalue threshold.
pub fn sym_rank(m: &DMatrix<f64>, rank_tol: f64) -> Result<usize> {
    let eigen = sym_eigen(m)?;
    let cut = rank_tol * eigen.max_abs_value();
    Ok(eigen.values.iter().filter(|v| v.abs() > cut).count())
}

/// Error if a symmetric matrix has an eigenvalue below `-PSD_REL_TOL * lambda_max`.
pub fn check_psd(m: &DMatrix<f64>) -> Result<()> {
    let eigen = sym_eigen(m)?;
    let cut = -PSD_REL_TOL * eigen.max_abs_value();
    let min_eigenvalue = eigen.values.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_eigenvalue < cut {
        return Err(Error::NotPositiveSemidefinite { min_eigenvalue });
    }
    Ok(())
}

/// Kronecker product `A (x) B`. Entry `((i-1)*rB + j, (k-1)*cB + l)` is
/// `A[i,k] * B[j,l]`.
pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
        let g = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let mut s = &g + g.transpose();
        s /= 2.0;
        s
    }

    #[test]
    fn centering_small_dimensions() {
        let c2 = centering_matrix(2).unwrap();
        assert_abs_diff_eq!(c2[(0, 0)], 0.5);
        assert_abs_diff_eq!(c2[(0, 1)], -0.5);
        assert_abs_diff_eq!(c2[(1, 0)], -0.5);
        assert_abs_diff_eq!(c2[(1, 1)], 0.5);

        let c3 = centering_matrix(3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 2.0 / 3.0 } else { -1.0 / 3.0 };
                assert_abs_diff_eq!(c3[(i, j)], expect, epsilon = 1e-15);
            }
        }

        let c1 = centering_matrix(1).unwrap();
        assert_eq!(c1[(0, 0)], 0.0);
    }

    #[test]
    fn centering_rejects_zero_dimension() {
        assert!(matches!(
            centering_matrix(0),
            Err(Error::InvalidDimension(_))
        ));
    }

    #[test]
    fn centering_annihilates_ones_and_is_idempotent() {
        for d in 1..=20 {
            let c = centering_matrix(d).unwrap();
            let ones = DVector::from_element(d, 1.0);
            let swept = &c * &ones;
            assert!(swept.amax() < 1e-14, "C*1 != 0 for D={d}");
            let c2 = &c * &c;
            assert!(max_abs(&(&c2 - &c)) < 1e-12, "C^2 != C for D={d}");
        }
    }

    #[test]
    fn pseudo_inverse_of_identity_and_projection() {
        let id = DMatrix::<f64>::identity(4, 4);
        let p = sym_pseudo_inverse(&id, DEFAULT_RANK_TOL).unwrap();
        assert!(max_abs(&(&p - &id)) < 1e-12);

        // symmetric idempotent matrices are their own pseudo-inverse
        let c = centering_matrix(3).unwrap();
        let pc = sym_pseudo_inverse(&c, DEFAULT_RANK_TOL).unwrap();
        assert!(max_abs(&(&pc - &c)) < 1e-12);
    }

    #[test]
    fn pseudo_inverse_reciprocates_nonzero_eigenvalues() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 0.0]));
        let p = sym_pseudo_inverse(&m, DEFAULT_RANK_TOL).unwrap();
        assert_abs_diff_eq!(p[(0, 0)], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(p[(1, 1)], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p[(0, 1)], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn pseudo_inverse_rejects_asymmetric_input() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(
            sym_pseudo_inverse(&m, DEFAULT_RANK_TOL),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn pseudo_inverse_satisfies_moore_penrose_axioms() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [2usize, 3, 5, 8] {
            for _ in 0..20 {
                let m = random_symmetric(&mut rng, n);
                let p = sym_pseudo_inverse(&m, DEFAULT_RANK_TOL).unwrap();
                // rounding in each axiom scales with the norm of its target
                let tol_m = 1e-9 * max_abs(&m).max(1.0);
                let tol_p = 1e-9 * max_abs(&p).max(1.0);
                let mp = &m * &p;
                let pm = &p * &m;
                assert!(max_abs(&(&mp * &m - &m)) < tol_m);
                assert!(max_abs(&(&pm * &p - &p)) < tol_p);
                assert!(max_abs(&(&mp - mp.transpose())) < 1e-9 * max_abs(&mp).max(1.0));
                assert!(max_abs(&(&pm - pm.transpose())) < 1e-9 * max_abs(&pm).max(1.0));
            }
        }
    }

    #[test]
    fn kron_identity_and_scalar_factors() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let id2 = DMatrix::<f64>::identity(2, 2);
        let block = kron(&id2, &m);
        assert_eq!(block.nrows(), 4);
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(block[(i, j)], m[(i, j)]);
                assert_eq!(block[(i + 2, j + 2)], m[(i, j)]);
                assert_eq!(block[(i, j + 2)], 0.0);
                assert_eq!(block[(i + 2, j)], 0.0);
            }
        }

        let scalar = DMatrix::from_element(1, 1, 2.0);
        let doubled = kron(&scalar, &m);
        assert!(max_abs(&(&doubled - &m * 2.0)) < 1e-15);
    }

    #[test]
    fn kron_matches_index_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = DMatrix::from_fn(2, 2, |_, _| rng.random_range(-1.0..1.0));
        let b = DMatrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
        let k = kron(&a, &b);
        for i in 0..2 {
            for kk in 0..2 {
                for j in 0..3 {
                    for l in 0..3 {
                        assert_abs_diff_eq!(
                            k[(i * 3 + j, kk * 3 + l)],
                            a[(i, kk)] * b[(j, l)],
                            epsilon = 1e-15
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn kron_mixed_product_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10 {
            let a = DMatrix::from_fn(2, 2, |_, _| rng.random_range(-1.0..1.0));
            let b = DMatrix::from_fn(2, 2, |_, _| rng.random_range(-1.0..1.0));
            let c = DMatrix::from_fn(2, 2, |_, _| rng.random_range(-1.0..1.0));
            let d = DMatrix::from_fn(2, 2, |_, _| rng.random_range(-1.0..1.0));
            let lhs = kron(&a, &b) * kron(&c, &d);
            let rhs = kron(&(&a * &c), &(&b * &d));
            assert!(max_abs(&(&lhs - &rhs)) < 1e-12);
        }
    }

    #[test]
    fn eigen_reconstructs_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_symmetric(&mut rng, 6);
        let e = sym_eigen(&m).unwrap();
        let rebuilt = e.map_values(|v| v);
        assert!(max_abs(&(&rebuilt - &m)) < 1e-12);
        let qtq = e.vectors.transpose() * &e.vectors;
        assert!(max_abs(&(&qtq - DMatrix::identity(6, 6))) < 1e-12);
        for i in 1..e.values.len() {
            assert!(e.values[i - 1] >= e.values[i]);
        }
    }
}
