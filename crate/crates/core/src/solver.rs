//! Quasi-likelihood estimation for the compositional logit model.
//!
//! The estimating equations are
//! `sum_i X_i' C diag(pi_i)^-1 (p_i - pi_i) = 0`,
//! with `X_i = I (x) x_i'`. They are free of the error dispersion: the
//! seemingly-unrelated-regressions structure makes the weight matrix drop
//! out of each generalized-least-squares step, so the same estimate is
//! optimal whatever the true dispersion is.
//!
//! Two solvers are provided and cross-validated against each other:
//!
//! * [`fit_gamma_trick`] mimics the loglinear route to multinomial logit
//!   fits. Offsets `alpha_i = -log sum_k exp(x_i' beta_k)` pin the fitted
//!   totals at 1, and each iteration takes one gamma-loglinear scoring step
//!   per part, which with a log link reduces to an ordinary least-squares
//!   update with unit weights.
//! * [`fit_fisher_scoring`] iterates with the quasi-information matrix,
//!   which for this model is the parameter-free `C (x) X'X`.
//!
//! Zero-valued parts in the data need no adjustment; a part that is zero in
//! every record has no finite estimate (its intercept drifts to minus
//! infinity) and is reported as a separation diagnostic while the remaining
//! parts converge normally.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{centering_matrix, kron, sym_eigen, sym_pseudo_inverse, DEFAULT_RANK_TOL};
use crate::model::{
    apply_constraint, logit_probabilities, CoefficientMatrix, Composition, CompositionalDataset,
    IdentificationConstraint, MeasurementRecord,
};
use crate::variance::{standardized_residual, ErrorDispersion};

/// Bound on the centered linear predictor inside the solver, keeping
/// arithmetic finite when a part separates.
pub const LINEAR_PREDICTOR_CAP: f64 = 30.0;

/// Tolerance for the agreement of the two solvers under
/// [`SolverMethod::BothCrosscheck`].
pub const CROSSCHECK_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMethod {
    GammaTrick,
    FisherScoring,
    /// Run both solvers and fail if they disagree beyond [`CROSSCHECK_TOL`].
    BothCrosscheck,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Max-norm threshold on the quasi-score.
    pub score_tolerance: f64,
    /// Max-norm threshold on the coefficient update.
    pub step_tolerance: f64,
    pub method: SolverMethod,
    /// Number of times a step may be halved when the score norm fails to
    /// decrease.
    pub step_halving_max: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            score_tolerance: 1e-8,
            step_tolerance: 1e-8,
            method: SolverMethod::GammaTrick,
            step_halving_max: 20,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        if self.score_tolerance <= 0.0 || self.step_tolerance <= 0.0 {
            return Err(Error::InvalidParameter(
                "solver tolerances must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// A converged quasi-likelihood fit.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub coefficients: CoefficientMatrix,
    pub fitted_compositions: Vec<Composition>,
    /// Standardized residuals `C diag(pi_hat)^-1 (p_i - pi_hat_i)`.
    pub residuals: Vec<DVector<f64>>,
    pub iterations: usize,
    /// Max-norm of the quasi-score at the solution. When parts were
    /// separated this refers to the reduced model on the surviving parts.
    pub final_score_norm: f64,
    pub converged: bool,
    pub method_used: SolverMethod,
    /// Parts observed as zero in every record; their intercepts are driven
    /// to the linear-predictor cap rather than estimated.
    pub separated_parts: Vec<usize>,
    pub warnings: Vec<String>,
}

fn check_shapes(b: &CoefficientMatrix, data: &CompositionalDataset) -> Result<()> {
    if b.n_parts() != data.n_parts() || b.n_covariates() != data.n_covariates() {
        return Err(Error::DimensionMismatch(format!(
            "coefficients are {}x{}, data has {} parts and {} covariates",
            b.n_parts(),
            b.n_covariates() + 1,
            data.n_parts(),
            data.n_covariates()
        )));
    }
    Ok(())
}

/// The quasi-score `sum_i X_i' C diag(pi_i)^-1 (p_i - pi_i)`, part-major:
/// component `k(p+1)+r` is
/// `sum_i [ (p_ik/pi_ik - 1) - mean_l (p_il/pi_il - 1) ] x_ir`.
pub fn quasi_score(b: &CoefficientMatrix, data: &CompositionalDataset) -> Result<DVector<f64>> {
    check_shapes(b, data)?;
    let d = data.n_parts();
    let q = data.n_covariates() + 1;
    let mut score = DVector::zeros(d * q);
    for rec in data.records() {
        let pi = logit_probabilities(b, rec.covariates())?;
        let x = rec.design_row();
        let v = standardized_residual(rec.composition(), &pi)?;
        for k in 0..d {
            for r in 0..q {
                score[k * q + r] += v[k] * x[r];
            }
        }
    }
    Ok(score)
}

/// The dispersion-weighted quasi-score
/// `sum_i X_i' C (C Phi C)^+ C diag(pi_i)^-1 (p_i - pi_i)`.
///
/// The estimate that zeroes [`quasi_score`] zeroes this for every `Phi`;
/// the function exists to make that claim checkable.
pub fn quasi_score_general(
    b: &CoefficientMatrix,
    data: &CompositionalDataset,
    phi: &ErrorDispersion,
) -> Result<DVector<f64>> {
    check_shapes(b, data)?;
    let d = data.n_parts();
    if phi.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "dispersion is {}x{}, data has {d} parts",
            phi.dim(),
            phi.dim()
        )));
    }
    let q = data.n_covariates() + 1;
    let c = centering_matrix(d)?;
    let centered_phi = &c * phi.matrix() * &c;
    let weight = sym_pseudo_inverse(&centered_phi, DEFAULT_RANK_TOL)?;
    let mut score = DVector::zeros(d * q);
    for rec in data.records() {
        let pi = logit_probabilities(b, rec.covariates())?;
        let x = rec.design_row();
        let v = standardized_residual(rec.composition(), &pi)?;
        let w = &weight * v;
        for k in 0..d {
            for r in 0..q {
                score[k * q + r] += w[k] * x[r];
            }
        }
    }
    Ok(score)
}

/// The quasi-information matrix `C (x) X'X` (part-major ordering).
///
/// For the compositional logit model paired with the generalized Wedderburn
/// variance function this does not depend on the coefficients at all.
pub fn quasi_information(data: &CompositionalDataset) -> DMatrix<f64> {
    let d = data.n_parts();
    let x = data.design_matrix();
    let xtx = x.transpose() * &x;
    let c = centering_matrix(d).expect("dataset has at least 2 parts");
    kron(&c, &xtx)
}

/// Entry point dispatching on `config.method`.
pub fn fit(
    data: &CompositionalDataset,
    config: &SolverConfig,
    b_init: &CoefficientMatrix,
) -> Result<FitResult> {
    match config.method {
        SolverMethod::GammaTrick => fit_gamma_trick(data, config, b_init),
        SolverMethod::FisherScoring => fit_fisher_scoring(data, config, b_init),
        SolverMethod::BothCrosscheck => {
            let gamma = fit_gamma_trick(data, config, b_init)?;
            let fisher = fit_fisher_scoring(data, config, b_init)?;
            let diff = gamma.coefficients.matrix() - fisher.coefficients.matrix();
            let max_difference = crate::linalg::max_abs(&diff);
            if max_difference > CROSSCHECK_TOL {
                return Err(Error::CrosscheckMismatch { max_difference });
            }
            let mut result = gamma;
            result.method_used = SolverMethod::BothCrosscheck;
            Ok(result)
        }
    }
}

struct Workspace<'a> {
    data: &'a CompositionalDataset,
    design_rows: Vec<DVector<f64>>,
    q: usize,
    d: usize,
}

impl<'a> Workspace<'a> {
    fn new(data: &'a CompositionalDataset) -> Self {
        let design_rows = data.records().iter().map(|r| r.design_row()).collect();
        Self {
            data,
            design_rows,
            q: data.n_covariates() + 1,
            d: data.n_parts(),
        }
    }

    /// Capped softmax probabilities for every record, as raw vectors.
    fn probabilities(&self, b: &DMatrix<f64>) -> Vec<DVector<f64>> {
        self.design_rows
            .iter()
            .map(|x| {
                let eta = b * x;
                let max = eta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let capped = eta.map(|v| (v - max).max(-LINEAR_PREDICTOR_CAP));
                let w = capped.map(f64::exp);
                let sum = w.sum();
                w / sum
            })
            .collect()
    }

    /// Relative residual factors `u_ik = p_ik / pi_ik - 1`.
    fn residual_factors(&self, pis: &[DVector<f64>]) -> Vec<DVector<f64>> {
        self.data
            .records()
            .iter()
            .zip(pis)
            .map(|(rec, pi)| {
                DVector::from_fn(self.d, |k, _| rec.composition().part(k) / pi[k] - 1.0)
            })
            .collect()
    }

    /// Part-major quasi-score assembled from centered residual factors.
    fn centered_score(&self, factors: &[DVector<f64>]) -> DVector<f64> {
        let mut score = DVector::zeros(self.d * self.q);
        for (u, x) in factors.iter().zip(&self.design_rows) {
            let mean = u.sum() / self.d as f64;
            for k in 0..self.d {
                let v = u[k] - mean;
                for r in 0..self.q {
                    score[k * self.q + r] += v * x[r];
                }
            }
        }
        score
    }
}

/// Eigendecompose `X'X`; error with the names of collinear columns if it is
/// rank deficient.
fn check_design_rank(data: &CompositionalDataset) -> Result<DMatrix<f64>> {
    let x = data.design_matrix();
    let xtx = x.transpose() * &x;
    let eigen = sym_eigen(&xtx)?;
    let cut = DEFAULT_RANK_TOL * eigen.max_abs_value().max(f64::MIN_POSITIVE);
    let names = data.design_names();
    let mut columns = Vec::new();
    for j in 0..eigen.values.len() {
        if eigen.values[j].abs() <= cut {
            // name the columns loading on the null direction
            let dir = eigen.vectors.column(j);
            let peak = dir.amax();
            for (idx, name) in names.iter().enumerate() {
                if dir[idx].abs() > 0.3 * peak && !columns.contains(name) {
                    columns.push(name.clone());
                }
            }
        }
    }
    if !columns.is_empty() {
        return Err(Error::RankDeficient { columns });
    }
    Ok(xtx)
}

enum StepRule {
    /// Per-part ordinary least squares on the uncentered residual factors.
    Gamma(Cholesky<f64, nalgebra::Dyn>),
    /// Pseudo-inverse of the assembled quasi-information times the score.
    Fisher(DMatrix<f64>),
}

fn build_rule(method: SolverMethod, data: &CompositionalDataset) -> Result<StepRule> {
    let xtx = check_design_rank(data)?;
    match method {
        SolverMethod::GammaTrick => {
            let chol = Cholesky::new(xtx).ok_or_else(|| Error::RankDeficient {
                columns: vec!["(design not positive definite)".into()],
            })?;
            Ok(StepRule::Gamma(chol))
        }
        SolverMethod::FisherScoring => {
            let info = quasi_information(data);
            Ok(StepRule::Fisher(sym_pseudo_inverse(&info, DEFAULT_RANK_TOL)?))
        }
        SolverMethod::BothCrosscheck => unreachable!("dispatched before rule construction"),
    }
}

struct CoreFit {
    b: DMatrix<f64>,
    iterations: usize,
    score_norm: f64,
}

/// The iteration loop on a dataset with no all-zero parts. Returns the
/// internally constrained coefficient matrix.
fn solve_core(
    data: &CompositionalDataset,
    config: &SolverConfig,
    b_init: &DMatrix<f64>,
    constraint: IdentificationConstraint,
    rule: &StepRule,
) -> Result<CoreFit> {
    let ws = Workspace::new(data);
    let mut b = crate::model::constrain_rows(b_init, constraint);
    let mut factors = ws.residual_factors(&ws.probabilities(&b));
    let mut score_norm = ws.centered_score(&factors).amax();
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = score_norm <= config.score_tolerance;

    while !converged && iterations < config.max_iterations {
        let full_step = match rule {
            StepRule::Gamma(chol) => {
                // one gamma-loglinear scoring step per part, offsets already
                // folded into pi
                let mut delta = DMatrix::zeros(ws.d, ws.q);
                for k in 0..ws.d {
                    let mut rhs = DVector::zeros(ws.q);
                    for (u, x) in factors.iter().zip(&ws.design_rows) {
                        for r in 0..ws.q {
                            rhs[r] += u[k] * x[r];
                        }
                    }
                    let sol = chol.solve(&rhs);
                    for r in 0..ws.q {
                        delta[(k, r)] = sol[r];
                    }
                }
                delta
            }
            StepRule::Fisher(info_pinv) => {
                let score = ws.centered_score(&factors);
                let delta_vec = info_pinv * score;
                DMatrix::from_fn(ws.d, ws.q, |k, r| delta_vec[k * ws.q + r])
            }
        };

        let mut step = full_step;
        let mut halvings = 0;
        // the raw update can carry a component along the unidentified
        // softmax shift (the freedom the per-object offsets absorb);
        // re-imposing the constraint removes it without touching the
        // fitted probabilities
        let (candidate, cand_factors, cand_norm) = loop {
            let candidate = crate::model::constrain_rows(&(&b + &step), constraint);
            let cand_factors = ws.residual_factors(&ws.probabilities(&candidate));
            let cand_norm = ws.centered_score(&cand_factors).amax();
            if cand_norm <= score_norm || halvings >= config.step_halving_max {
                break (candidate, cand_factors, cand_norm);
            }
            step *= 0.5;
            halvings += 1;
        };

        let step_norm = crate::linalg::max_abs(&(&candidate - &b));
        b = candidate;
        factors = cand_factors;
        score_norm = cand_norm;
        iterations += 1;
        trace.push(score_norm);
        converged = score_norm <= config.score_tolerance && step_norm <= config.step_tolerance;
    }

    if !converged {
        return Err(Error::NonConvergence {
            iterations,
            final_score_norm: score_norm,
            trace,
        });
    }

    Ok(CoreFit {
        b,
        iterations,
        score_norm,
    })
}

/// Drop the listed parts from every record. Observed zeros contribute
/// nothing to the remaining parts, so compositions carry over unchanged.
fn drop_parts(data: &CompositionalDataset, drop: &[usize]) -> Result<CompositionalDataset> {
    let keep: Vec<usize> = (0..data.n_parts())
        .filter(|k| drop.binary_search(k).is_err())
        .collect();
    if keep.len() < 2 {
        return Err(Error::InsufficientData(
            "fewer than 2 parts have any nonzero observation".into(),
        ));
    }
    let records = data
        .records()
        .iter()
        .map(|rec| {
            let raw = DVector::from_fn(keep.len(), |j, _| rec.raw()[keep[j]]);
            let composition = Composition::new(DVector::from_fn(keep.len(), |j, _| {
                rec.composition().part(keep[j])
            }))?;
            MeasurementRecord::from_parts(raw, rec.total(), composition, rec.covariates().clone())
        })
        .collect::<Result<Vec<_>>>()?;
    let part_names = keep
        .iter()
        .map(|&k| data.part_names()[k].clone())
        .collect();
    CompositionalDataset::new(records, part_names, data.covariate_names().to_vec())
}

fn fit_with_method(
    data: &CompositionalDataset,
    config: &SolverConfig,
    b_init: &CoefficientMatrix,
    method: SolverMethod,
) -> Result<FitResult> {
    config.validate()?;
    check_shapes(b_init, data)?;
    let d = data.n_parts();
    let q = data.n_covariates() + 1;
    let constraint = b_init.constraint();
    let separated = data.all_zero_parts();

    let mut warnings = Vec::new();
    if data.len() <= q {
        warnings.push(format!(
            "only {} records for {q} mean parameters per part",
            data.len()
        ));
    }
    for &k in &separated {
        warnings.push(format!(
            "part `{}` is zero in every record; its intercept is not estimable (separation)",
            data.part_names()[k]
        ));
    }

    let (full_b, core) = if separated.is_empty() {
        let rule = build_rule(method, data)?;
        let core = solve_core(data, config, b_init.matrix(), constraint, &rule)?;
        (core.b.clone(), core)
    } else {
        // the logit model for any subset of parts ignores the remaining
        // parts, so the surviving parts are fitted as their own model and
        // the separated ones pinned far below the cap
        let sub_data = drop_parts(data, &separated)?;
        let keep: Vec<usize> = (0..d)
            .filter(|k| separated.binary_search(k).is_err())
            .collect();
        let sub_init =
            DMatrix::from_fn(keep.len(), q, |j, r| b_init.matrix()[(keep[j], r)]);
        let rule = build_rule(method, &sub_data)?;
        let core = solve_core(
            &sub_data,
            config,
            &sub_init,
            IdentificationConstraint::SumToZero,
            &rule,
        )?;
        let mut full = DMatrix::zeros(d, q);
        for (j, &k) in keep.iter().enumerate() {
            for r in 0..q {
                full[(k, r)] = core.b[(j, r)];
            }
        }
        for &k in &separated {
            full[(k, 0)] = -2.0 * LINEAR_PREDICTOR_CAP;
        }
        (full, core)
    };

    let coefficients = apply_constraint(&full_b, constraint)?;
    let ws = Workspace::new(data);
    let fitted_compositions = ws
        .probabilities(coefficients.matrix())
        .into_iter()
        .map(Composition::new)
        .collect::<Result<Vec<_>>>()?;
    let residuals = data
        .records()
        .iter()
        .zip(&fitted_compositions)
        .map(|(rec, pi)| standardized_residual(rec.composition(), pi))
        .collect::<Result<Vec<_>>>()?;

    Ok(FitResult {
        coefficients,
        fitted_compositions,
        residuals,
        iterations: core.iterations,
        final_score_norm: core.score_norm,
        converged: true,
        method_used: method,
        separated_parts: separated,
        warnings,
    })
}

/// Solve the quasi-likelihood equations by the gamma-loglinear device.
///
/// Alternates (a) offsets that pin every fitted total at 1 with (b) one
/// gamma-loglinear scoring step per part; with the log link that step is an
/// unweighted least-squares update, so iterations only need `X'X` once.
pub fn fit_gamma_trick(
    data: &CompositionalDataset,
    config: &SolverConfig,
    b_init: &CoefficientMatrix,
) -> Result<FitResult> {
    fit_with_method(data, config, b_init, SolverMethod::GammaTrick)
}

/// Solve the quasi-likelihood equations by Fisher scoring with the
/// parameter-free quasi-information `C (x) X'X`, with step halving when the
/// score norm fails to decrease.
pub fn fit_fisher_scoring(
    data: &CompositionalDataset,
    config: &SolverConfig,
    b_init: &CoefficientMatrix,
) -> Result<FitResult> {
    fit_with_method(data, config, b_init, SolverMethod::FisherScoring)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use crate::model::IdentificationConstraint;
    use approx::assert_abs_diff_eq;
    use nalgebra::{DMatrix, DVector};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn dataset_from_compositions(
        comps: Vec<Vec<f64>>,
        covariates: Vec<Vec<f64>>,
    ) -> CompositionalDataset {
        let records = comps
            .into_iter()
            .zip(covariates)
            .map(|(c, x)| {
                crate::model::MeasurementRecord::from_raw(
                    DVector::from_vec(c),
                    DVector::from_vec(x),
                )
                .unwrap()
            })
            .collect();
        CompositionalDataset::with_default_names(records).unwrap()
    }

    fn random_dataset(
        rng: &mut impl Rng,
        n: usize,
        d: usize,
        p: usize,
        zero_prob: f64,
    ) -> CompositionalDataset {
        let raw_b = DMatrix::from_fn(d, p + 1, |_, _| rng.random_range(-0.8..0.8));
        let b = apply_constraint(&raw_b, IdentificationConstraint::SumToZero).unwrap();
        let mut comps = Vec::with_capacity(n);
        let mut covs = Vec::with_capacity(n);
        for _ in 0..n {
            let x: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
            let pi = logit_probabilities(&b, &DVector::from_vec(x.clone())).unwrap();
            let mut y: Vec<f64> = (0..d)
                .map(|k| {
                    if rng.random_range(0.0..1.0) < zero_prob {
                        0.0
                    } else {
                        pi.part(k) * rng.random_range(0.5..1.5)
                    }
                })
                .collect();
            if y.iter().all(|v| *v == 0.0) {
                y[0] = 0.5;
            }
            comps.push(y);
            covs.push(x);
        }
        dataset_from_compositions(comps, covs)
    }

    fn zero_init(data: &CompositionalDataset) -> CoefficientMatrix {
        CoefficientMatrix::zeros(
            data.n_parts(),
            data.n_covariates(),
            IdentificationConstraint::SumToZero,
        )
        .unwrap()
    }

    #[test]
    fn quasi_score_vanishes_at_perfect_fit() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let raw_b = DMatrix::from_fn(3, 2, |_, _| rng.random_range(-1.0..1.0));
        let b = apply_constraint(&raw_b, IdentificationConstraint::SumToZero).unwrap();
        let covs: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64 / 3.0 - 1.0]).collect();
        let comps: Vec<Vec<f64>> = covs
            .iter()
            .map(|x| {
                let pi = logit_probabilities(&b, &DVector::from_vec(x.clone())).unwrap();
                pi.parts().iter().cloned().collect()
            })
            .collect();
        let data = dataset_from_compositions(comps, covs);
        let score = quasi_score(&b, &data).unwrap();
        assert!(score.amax() < 1e-12);
    }

    #[test]
    fn intercept_only_fit_is_mean_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let data = random_dataset(&mut rng, 40, 3, 0, 0.1);
        let mean = data.mean_composition().unwrap();
        for method in [SolverMethod::GammaTrick, SolverMethod::FisherScoring] {
            let config = SolverConfig {
                method,
                ..SolverConfig::default()
            };
            let fit = fit(&data, &config, &zero_init(&data)).unwrap();
            assert!(fit.converged);
            let fitted = logit_probabilities(&fit.coefficients, &DVector::zeros(0)).unwrap();
            for k in 0..3 {
                assert_abs_diff_eq!(fitted.part(k), mean.part(k), epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn exact_model_data_recovers_generator() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let raw_b = DMatrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
        let truth = apply_constraint(&raw_b, IdentificationConstraint::SumToZero).unwrap();
        let covs: Vec<Vec<f64>> = (0..30)
            .map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .collect();
        let comps: Vec<Vec<f64>> = covs
            .iter()
            .map(|x| {
                let pi = logit_probabilities(&truth, &DVector::from_vec(x.clone())).unwrap();
                pi.parts().iter().cloned().collect()
            })
            .collect();
        let data = dataset_from_compositions(comps, covs);
        let fit = fit_gamma_trick(&data, &SolverConfig::default(), &zero_init(&data)).unwrap();
        assert!(max_abs(&(fit.coefficients.matrix() - truth.matrix())) < 1e-6);
    }

    #[test]
    fn solvers_agree_on_noisy_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            let data = random_dataset(&mut rng, 80, 3, 2, 0.05);
            let config = SolverConfig::default();
            let g = fit_gamma_trick(&data, &config, &zero_init(&data)).unwrap();
            let f = fit_fisher_scoring(&data, &config, &zero_init(&data)).unwrap();
            assert!(max_abs(&(g.coefficients.matrix() - f.coefficients.matrix())) < 1e-8);
        }
    }

    #[test]
    fn crosscheck_method_returns_result() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let data = random_dataset(&mut rng, 50, 3, 1, 0.0);
        let config = SolverConfig {
            method: SolverMethod::BothCrosscheck,
            ..SolverConfig::default()
        };
        let fitres = fit(&data, &config, &zero_init(&data)).unwrap();
        assert_eq!(fitres.method_used, SolverMethod::BothCrosscheck);
        assert!(fitres.converged);
    }

    #[test]
    fn zeros_in_data_converge_to_finite_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let data = random_dataset(&mut rng, 60, 3, 1, 0.25);
        assert!(data
            .records()
            .iter()
            .any(|r| r.composition().has_zero()));
        let fitres = fit_gamma_trick(&data, &SolverConfig::default(), &zero_init(&data)).unwrap();
        assert!(fitres.converged);
        assert!(fitres.coefficients.matrix().iter().all(|v| v.is_finite()));
        assert!(fitres.separated_parts.is_empty());
    }

    #[test]
    fn all_zero_part_reports_separation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut comps = Vec::new();
        let mut covs = Vec::new();
        for _ in 0..30 {
            let a = rng.random_range(0.2..0.8);
            comps.push(vec![a, 1.0 - a, 0.0]);
            covs.push(vec![rng.random_range(-1.0..1.0)]);
        }
        let data = dataset_from_compositions(comps, covs);
        let fitres = fit_gamma_trick(&data, &SolverConfig::default(), &zero_init(&data)).unwrap();
        assert_eq!(fitres.separated_parts, vec![2]);
        assert!(fitres.converged);
        assert!(fitres.coefficients.matrix().iter().all(|v| v.is_finite()));
        assert!(fitres.warnings.iter().any(|w| w.contains("separation")));
        // fitted share of the separated part is pinned near the cap
        for pi in &fitres.fitted_compositions {
            assert!(pi.part(2) > 0.0);
            assert!(pi.part(2) < 1e-10);
        }
    }

    #[test]
    fn duplicate_columns_are_rank_deficient() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let covs: Vec<Vec<f64>> = (0..20)
            .map(|_| {
                let v = rng.random_range(-1.0..1.0);
                vec![v, v]
            })
            .collect();
        let comps: Vec<Vec<f64>> = (0..20)
            .map(|_| {
                let a = rng.random_range(0.2..0.6);
                vec![a, 1.0 - a]
            })
            .collect();
        let data = dataset_from_compositions(comps, covs);
        let err = fit_fisher_scoring(&data, &SolverConfig::default(), &zero_init(&data))
            .unwrap_err();
        match err {
            Error::RankDeficient { columns } => {
                assert!(columns.iter().any(|c| c == "x1" || c == "x2"));
            }
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn non_convergence_carries_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let data = random_dataset(&mut rng, 50, 3, 1, 0.0);
        let config = SolverConfig {
            max_iterations: 1,
            ..SolverConfig::default()
        };
        let err = fit_gamma_trick(&data, &config, &zero_init(&data)).unwrap_err();
        match err {
            Error::NonConvergence { iterations, trace, .. } => {
                assert_eq!(iterations, 1);
                assert_eq!(trace.len(), 1);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn fit_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let data = random_dataset(&mut rng, 40, 3, 1, 0.1);
        let a = fit_gamma_trick(&data, &SolverConfig::default(), &zero_init(&data)).unwrap();
        let b = fit_gamma_trick(&data, &SolverConfig::default(), &zero_init(&data)).unwrap();
        assert_eq!(a.coefficients.matrix(), b.coefficients.matrix());
        assert_eq!(a.iterations, b.iterations);
    }

    #[test]
    fn general_score_with_identity_dispersion_matches_plain() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let data = random_dataset(&mut rng, 25, 4, 1, 0.0);
        let raw_b = DMatrix::from_fn(4, 2, |_, _| rng.random_range(-0.5..0.5));
        let b = apply_constraint(&raw_b, IdentificationConstraint::SumToZero).unwrap();
        let plain = quasi_score(&b, &data).unwrap();
        let general = quasi_score_general(&b, &data, &ErrorDispersion::identity(4)).unwrap();
        assert!((plain - general).amax() < 1e-12);
    }

    #[test]
    fn general_score_matches_dense_formula() {
        // assemble sum_i X_i' C (C Phi C)^+ C Pi^-1 (p - pi) from raw
        // matrix pieces and compare
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let data = random_dataset(&mut rng, 10, 3, 1, 0.0);
        let raw_b = DMatrix::from_fn(3, 2, |_, _| rng.random_range(-0.5..0.5));
        let b = apply_constraint(&raw_b, IdentificationConstraint::SumToZero).unwrap();
        let g = DMatrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
        let phi = ErrorDispersion::new(&g * g.transpose() / 3.0 + DMatrix::identity(3, 3) * 0.1)
            .unwrap();

        let d = 3;
        let q = 2;
        let c = centering_matrix(d).unwrap();
        let cpc = &c * phi.matrix() * &c;
        let w = sym_pseudo_inverse(&cpc, DEFAULT_RANK_TOL).unwrap();
        let mut dense = DVector::zeros(d * q);
        for rec in data.records() {
            let pi = logit_probabilities(&b, rec.covariates()).unwrap();
            let x = rec.design_row();
            let xi = kron(
                &DMatrix::identity(d, d),
                &DMatrix::from_fn(1, q, |_, r| x[r]),
            );
            let pinv_pi = DMatrix::from_diagonal(&pi.parts().map(|v| 1.0 / v));
            let resid = rec.composition().parts() - pi.parts();
            dense += xi.transpose() * &c * &w * &c * pinv_pi * resid;
        }
        let fast = quasi_score_general(&b, &data, &phi).unwrap();
        assert!((dense - fast).amax() < 1e-10);
    }

    #[test]
    fn fitted_point_zeroes_general_score_for_any_dispersion() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let data = random_dataset(&mut rng, 60, 3, 1, 0.0);
        let fitres = fit_gamma_trick(&data, &SolverConfig::default(), &zero_init(&data)).unwrap();
        for _ in 0..3 {
            let g = DMatrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
            let phi =
                ErrorDispersion::new(&g * g.transpose() / 3.0 + DMatrix::identity(3, 3) * 0.2)
                    .unwrap();
            let s = quasi_score_general(&fitres.coefficients, &data, &phi).unwrap();
            assert!(s.amax() < 1e-7, "general score norm {}", s.amax());
        }
    }

    fn uncentered_equations(
        fitres: &FitResult,
        data: &CompositionalDataset,
    ) -> DMatrix<f64> {
        let d = data.n_parts();
        let q = data.n_covariates() + 1;
        let mut out = DMatrix::zeros(d, q);
        for rec in data.records() {
            let pi = logit_probabilities(&fitres.coefficients, rec.covariates()).unwrap();
            let x = rec.design_row();
            for k in 0..d {
                let u = rec.composition().part(k) / pi.part(k) - 1.0;
                for r in 0..q {
                    out[(k, r)] += u * x[r];
                }
            }
        }
        out
    }

    #[test]
    fn loglinear_equations_hold_up_to_the_absorbed_shift() {
        // the loglinear-device equations use uncentered residual factors;
        // at the fitted point they hold exactly after removing the common
        // across-parts component, which is the piece the per-object offsets
        // are free to absorb
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let data = random_dataset(&mut rng, 50, 3, 1, 0.0);
        let fitres =
            fit_fisher_scoring(&data, &SolverConfig::default(), &zero_init(&data)).unwrap();
        let eqs = uncentered_equations(&fitres, &data);
        for r in 0..2 {
            let mean: f64 = (0..3).map(|k| eqs[(k, r)]).sum::<f64>() / 3.0;
            for k in 0..3 {
                assert!(
                    (eqs[(k, r)] - mean).abs() < 1e-6,
                    "slot {r} part {k}: {} vs common {mean}",
                    eqs[(k, r)]
                );
            }
        }
    }

    #[test]
    fn loglinear_equations_hold_exactly_for_intercept_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let data = random_dataset(&mut rng, 50, 3, 0, 0.0);
        let fitres =
            fit_gamma_trick(&data, &SolverConfig::default(), &zero_init(&data)).unwrap();
        let eqs = uncentered_equations(&fitres, &data);
        assert!(max_abs(&eqs) < 1e-6, "uncentered norm {}", max_abs(&eqs));
    }

    #[test]
    fn quasi_information_is_parameter_free() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let data = random_dataset(&mut rng, 20, 3, 1, 0.0);
        let assembled = quasi_information(&data);

        // brute force sum_i D_i' V(pi_i; I)^+ D_i at a given B
        let brute = |b: &CoefficientMatrix| -> DMatrix<f64> {
            let d = 3;
            let q = 2;
            let mut acc = DMatrix::zeros(d * q, d * q);
            for rec in data.records() {
                let pi = logit_probabilities(b, rec.covariates()).unwrap();
                let jac = crate::model::model_jacobian(&pi, rec.covariates()).unwrap();
                let v = crate::variance::wedderburn_cov(&pi, &ErrorDispersion::identity(d))
                    .unwrap();
                let v_pinv = sym_pseudo_inverse(&v, DEFAULT_RANK_TOL).unwrap();
                acc += jac.transpose() * v_pinv * jac;
            }
            acc
        };

        let at_zero = brute(&zero_init(&data));
        let raw_b = DMatrix::from_fn(3, 2, |_, _| rng.random_range(-1.0..1.0));
        let at_random = brute(&apply_constraint(&raw_b, IdentificationConstraint::SumToZero).unwrap());
        assert!(max_abs(&(&at_zero - &at_random)) < 1e-9);
        assert!(max_abs(&(&at_zero - &assembled)) < 1e-9);
    }
}
