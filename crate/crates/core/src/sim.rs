//! Simulation of multiplicative-error compositional data,
//! `Y_i = tau_i * diag(pi_i) * U_i` with unit-mean relative errors, and a
//! replicate driver for Monte Carlo studies of the estimators.
//!
//! Reproducibility contract: a scenario carries one 64-bit master seed, and
//! replicate `r` draws from three independent ChaCha8 streams derived by a
//! counter scheme — stream `4r` for covariates, `4r+1` for totals, `4r+2`
//! for relative errors (`4r+3` is reserved). Changing the totals law
//! therefore cannot perturb the covariates or errors of a replicate, and
//! identical scenarios reproduce datasets bit for bit.

use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, LogNormal, Normal, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::inference::{fitted_dispersion, model_vcov};
use crate::linalg::{check_psd, check_symmetric, sym_eigen, DEFAULT_RANK_TOL};
use crate::model::{
    logit_probabilities, CoefficientMatrix, Composition, CompositionalDataset, MeasurementRecord,
};
use crate::solver::{fit, SolverConfig};
use crate::variance::ErrorDispersion;

/// Distribution of the unit-mean relative error vectors.
#[derive(Debug, Clone)]
pub enum ErrorLaw {
    /// `U = exp(Z)`, `Z ~ N(-diag(Sigma)/2, Sigma)`; each component has
    /// mean exactly 1.
    Lognormal { sigma: DMatrix<f64> },
    /// Independent `Gamma(shape_k, 1/shape_k)` components (unit mean,
    /// variance `1/shape_k`).
    ScaledGamma { shapes: DVector<f64> },
    /// Each component of a base draw is zeroed with probability `zero_prob`
    /// and inflated by `1/(1-zero_prob)` otherwise, preserving unit means.
    ZeroInflated {
        base: Box<ErrorLaw>,
        zero_prob: f64,
    },
}

impl ErrorLaw {
    pub fn validate(&self, d: usize) -> Result<()> {
        match self {
            Self::Lognormal { sigma } => {
                if sigma.nrows() != d || sigma.ncols() != d {
                    return Err(Error::InvalidParameter(format!(
                        "lognormal sigma is {}x{}, expected {d}x{d}",
                        sigma.nrows(),
                        sigma.ncols()
                    )));
                }
                check_symmetric(sigma)?;
                check_psd(sigma)?;
                Ok(())
            }
            Self::ScaledGamma { shapes } => {
                if shapes.len() != d {
                    return Err(Error::InvalidParameter(format!(
                        "{} gamma shapes for {d} parts",
                        shapes.len()
                    )));
                }
                if shapes.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
                    return Err(Error::InvalidParameter(
                        "gamma shapes must be positive".into(),
                    ));
                }
                Ok(())
            }
            Self::ZeroInflated { base, zero_prob } => {
                if !(*zero_prob >= 0.0 && *zero_prob < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "zero probability must lie in [0, 1), got {zero_prob}"
                    )));
                }
                base.validate(d)
            }
        }
    }

    /// The analytic dispersion `Phi = cov(U)` of the law.
    pub fn phi(&self, d: usize) -> Result<ErrorDispersion> {
        self.validate(d)?;
        let matrix = match self {
            Self::Lognormal { sigma } => {
                DMatrix::from_fn(d, d, |k, l| sigma[(k, l)].exp_m1())
            }
            Self::ScaledGamma { shapes } => {
                DMatrix::from_diagonal(&shapes.map(|s| 1.0 / s))
            }
            Self::ZeroInflated { base, zero_prob } => {
                let base_phi = base.phi(d)?;
                let rho = *zero_prob;
                DMatrix::from_fn(d, d, |k, l| {
                    let b = base_phi.matrix()[(k, l)];
                    if k == l {
                        (b + 1.0) / (1.0 - rho) - 1.0
                    } else {
                        b
                    }
                })
            }
        };
        ErrorDispersion::new(matrix)
    }
}

/// Analytic error dispersion implied by a law.
pub fn phi_of_law(law: &ErrorLaw, d: usize) -> Result<ErrorDispersion> {
    law.phi(d)
}

/// Draw `count` i.i.d. unit-mean relative error vectors as the rows of a
/// `count x d` matrix.
pub fn draw_errors(
    law: &ErrorLaw,
    d: usize,
    count: usize,
    rng: &mut impl Rng,
) -> Result<DMatrix<f64>> {
    law.validate(d)?;
    let mut out = DMatrix::zeros(count, d);
    let mut sampler = ErrorSampler::new(law, d)?;
    let mut row = DVector::zeros(d);
    for i in 0..count {
        sampler.sample_into(&mut row, rng);
        for k in 0..d {
            out[(i, k)] = row[k];
        }
    }
    Ok(out)
}

enum ErrorSampler {
    Lognormal {
        /// Mean vector of the log scale, `-diag(Sigma)/2`.
        mean: DVector<f64>,
        /// Factor `A` with `A A' = Sigma` (eigenvalue square root).
        factor: DMatrix<f64>,
    },
    ScaledGamma {
        components: Vec<Gamma<f64>>,
    },
    ZeroInflated {
        base: Box<ErrorSampler>,
        zero_prob: f64,
    },
}

impl ErrorSampler {
    fn new(law: &ErrorLaw, d: usize) -> Result<Self> {
        Ok(match law {
            ErrorLaw::Lognormal { sigma } => {
                let eigen = sym_eigen(sigma)?;
                let cut = DEFAULT_RANK_TOL * eigen.max_abs_value();
                let q = &eigen.vectors;
                let factor = DMatrix::from_fn(d, d, |i, j| {
                    let lambda = eigen.values[j];
                    if lambda > cut {
                        q[(i, j)] * lambda.sqrt()
                    } else {
                        0.0
                    }
                });
                let mean = DVector::from_fn(d, |k, _| -0.5 * sigma[(k, k)]);
                Self::Lognormal { mean, factor }
            }
            ErrorLaw::ScaledGamma { shapes } => {
                let components = shapes
                    .iter()
                    .map(|&s| {
                        Gamma::new(s, 1.0 / s).map_err(|e| {
                            Error::InvalidParameter(format!("gamma shape {s}: {e}"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::ScaledGamma { components }
            }
            ErrorLaw::ZeroInflated { base, zero_prob } => Self::ZeroInflated {
                base: Box::new(Self::new(base, d)?),
                zero_prob: *zero_prob,
            },
        })
    }

    fn sample_into(&mut self, row: &mut DVector<f64>, rng: &mut impl Rng) {
        match self {
            Self::Lognormal { mean, factor } => {
                let d = mean.len();
                let z = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
                let log_u = mean.clone() + &*factor * z;
                for k in 0..d {
                    row[k] = log_u[k].exp();
                }
            }
            Self::ScaledGamma { components } => {
                for (k, g) in components.iter().enumerate() {
                    row[k] = g.sample(rng);
                }
            }
            Self::ZeroInflated { base, zero_prob } => {
                base.sample_into(row, rng);
                let keep = 1.0 - *zero_prob;
                for k in 0..row.len() {
                    if rng.random_range(0.0..1.0) < *zero_prob {
                        row[k] = 0.0;
                    } else {
                        row[k] /= keep;
                    }
                }
            }
        }
    }
}

/// Distribution of each covariate (applied independently to all p).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CovariateLaw {
    Uniform { lo: f64, hi: f64 },
    Normal { mean: f64, sd: f64 },
}

impl CovariateLaw {
    fn sample(&self, rng: &mut impl Rng) -> Result<f64> {
        match self {
            Self::Uniform { lo, hi } => {
                if !(lo < hi) {
                    return Err(Error::InvalidParameter(format!(
                        "uniform bounds ({lo}, {hi}) are not increasing"
                    )));
                }
                Ok(rng.random_range(*lo..*hi))
            }
            Self::Normal { mean, sd } => {
                let n = Normal::new(*mean, *sd)
                    .map_err(|e| Error::InvalidParameter(format!("normal({mean}, {sd}): {e}")))?;
                Ok(n.sample(rng))
            }
        }
    }
}

/// Distribution of the positive size parameters `tau_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TotalsLaw {
    Fixed(f64),
    Uniform { lo: f64, hi: f64 },
    LogNormal { mu: f64, sigma: f64 },
}

impl TotalsLaw {
    fn sample(&self, rng: &mut impl Rng) -> Result<f64> {
        match self {
            Self::Fixed(v) => {
                if !(*v > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "fixed total must be positive, got {v}"
                    )));
                }
                Ok(*v)
            }
            Self::Uniform { lo, hi } => {
                if !(*lo > 0.0 && lo < hi) {
                    return Err(Error::InvalidParameter(format!(
                        "uniform totals need 0 < lo < hi, got ({lo}, {hi})"
                    )));
                }
                Ok(rng.random_range(*lo..*hi))
            }
            Self::LogNormal { mu, sigma } => {
                let ln = LogNormal::new(*mu, *sigma).map_err(|e| {
                    Error::InvalidParameter(format!("lognormal totals ({mu}, {sigma}): {e}"))
                })?;
                Ok(ln.sample(rng))
            }
        }
    }
}

/// Everything needed to generate one dataset (or a stream of replicates).
#[derive(Debug, Clone)]
pub struct SimulationScenario {
    pub n: usize,
    pub true_b: CoefficientMatrix,
    pub covariate_law: CovariateLaw,
    pub error_law: ErrorLaw,
    pub tau_law: TotalsLaw,
    pub seed: u64,
}

impl SimulationScenario {
    pub fn n_parts(&self) -> usize {
        self.true_b.n_parts()
    }

    pub fn n_covariates(&self) -> usize {
        self.true_b.n_covariates()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("scenario needs n >= 1".into()));
        }
        self.error_law.validate(self.n_parts())
    }
}

/// A generated dataset plus generation diagnostics.
#[derive(Debug, Clone)]
pub struct SimulatedData {
    pub dataset: CompositionalDataset,
    /// Rows whose error vector came out all zero and were redrawn.
    pub zero_rows_resampled: usize,
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Generate the dataset for one replicate index under the documented
/// counter scheme.
pub fn simulate_replicate(scenario: &SimulationScenario, replicate: u64) -> Result<SimulatedData> {
    scenario.validate()?;
    let d = scenario.n_parts();
    let p = scenario.n_covariates();
    let mut cov_rng = stream_rng(scenario.seed, 4 * replicate);
    let mut tau_rng = stream_rng(scenario.seed, 4 * replicate + 1);
    let mut err_rng = stream_rng(scenario.seed, 4 * replicate + 2);
    let mut sampler = ErrorSampler::new(&scenario.error_law, d)?;

    let mut records = Vec::with_capacity(scenario.n);
    let mut zero_rows_resampled = 0usize;
    let mut u = DVector::zeros(d);
    for _ in 0..scenario.n {
        let x = DVector::from_fn(p, |_, _| scenario.covariate_law.sample(&mut cov_rng).unwrap());
        // covariate sampling can only fail on invalid parameters; surface that once
        for v in x.iter() {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(
                    "covariate law produced a non-finite value".into(),
                ));
            }
        }
        let tau = scenario.tau_law.sample(&mut tau_rng)?;
        let pi = logit_probabilities(&scenario.true_b, &x)?;

        // relative size of each part before scaling; tau never touches the
        // composition, so the fitted coefficients cannot depend on it
        let (weights, total_weight) = loop {
            sampler.sample_into(&mut u, &mut err_rng);
            let w = DVector::from_fn(d, |k, _| pi.part(k) * u[k]);
            let s = w.sum();
            if s > 0.0 {
                break (w, s);
            }
            zero_rows_resampled += 1;
        };

        let composition = Composition::new(&weights / total_weight)?;
        let raw = &weights * tau;
        let total = tau * total_weight;
        records.push(MeasurementRecord::from_parts(raw, total, composition, x)?);
    }

    Ok(SimulatedData {
        dataset: CompositionalDataset::with_default_names(records)?,
        zero_rows_resampled,
    })
}

/// Generate the dataset for replicate 0 of a scenario.
pub fn simulate_dataset(scenario: &SimulationScenario) -> Result<SimulatedData> {
    simulate_replicate(scenario, 0)
}

/// One fitted replicate of a Monte Carlo study.
#[derive(Debug, Clone)]
pub struct ReplicateRecord {
    pub replicate: u64,
    pub converged: bool,
    pub iterations: usize,
    /// Fitted coefficients under the scenario's constraint (NaN when the
    /// fit failed).
    pub estimate: DMatrix<f64>,
    /// Model-based standard errors per coefficient slot.
    pub se_model: DMatrix<f64>,
    /// Whether the 95% Wald interval covered the true coefficient.
    pub covered: DMatrix<bool>,
    pub zero_rows_resampled: usize,
}

/// Simulate and fit `replicates` datasets in parallel. Output order is by
/// replicate index, so aggregation is schedule-independent.
pub fn run_study(
    scenario: &SimulationScenario,
    replicates: u64,
    config: &SolverConfig,
) -> Result<Vec<ReplicateRecord>> {
    scenario.validate()?;
    (0..replicates)
        .into_par_iter()
        .map(|rep| run_replicate(scenario, rep, config))
        .collect()
}

fn run_replicate(
    scenario: &SimulationScenario,
    replicate: u64,
    config: &SolverConfig,
) -> Result<ReplicateRecord> {
    let d = scenario.n_parts();
    let q = scenario.n_covariates() + 1;
    let sim = simulate_replicate(scenario, replicate)?;
    let b_init = CoefficientMatrix::zeros(d, q - 1, scenario.true_b.constraint())?;

    match fit(&sim.dataset, config, &b_init) {
        Ok(fitres) => {
            let dispersion = fitted_dispersion(&fitres, &sim.dataset)?;
            let vcov = model_vcov(
                &dispersion,
                &sim.dataset.design_matrix(),
                fitres.coefficients.constraint(),
            )?;
            let estimate = fitres.coefficients.matrix().clone();
            let se_model = DMatrix::from_fn(d, q, |k, r| vcov.std_error(k * q + r));
            let covered = DMatrix::from_fn(d, q, |k, r| {
                let err = (estimate[(k, r)] - scenario.true_b.matrix()[(k, r)]).abs();
                err <= 1.96 * se_model[(k, r)]
            });
            Ok(ReplicateRecord {
                replicate,
                converged: true,
                iterations: fitres.iterations,
                estimate,
                se_model,
                covered,
                zero_rows_resampled: sim.zero_rows_resampled,
            })
        }
        Err(Error::NonConvergence { iterations, .. }) => Ok(ReplicateRecord {
            replicate,
            converged: false,
            iterations,
            estimate: DMatrix::from_element(d, q, f64::NAN),
            se_model: DMatrix::from_element(d, q, f64::NAN),
            covered: DMatrix::from_element(d, q, false),
            zero_rows_resampled: sim.zero_rows_resampled,
        }),
        Err(other) => Err(other),
    }
}

// ---------------------------------------------------------------------------
// Scenario files
// ---------------------------------------------------------------------------

/// A parsed scenario file: the scenario plus driver settings.
///
/// Format: `key=value` lines, `#` comments. Keys:
///
/// ```text
/// n=200                      # records per replicate
/// seed=42                    # master seed
/// reps=100                   # replicates (driver setting, default 100)
/// constraint=sum             # or ref:<1-based part index>
/// true_b=0.4,-0.8;-0.1,0.5;-0.3,0.3    # D rows of p+1 entries
/// covariate_law=uniform(-1,1)          # or normal(0,1)
/// tau_law=fixed(1)           # or uniform(50,150) or lognormal(4,0.5)
/// error_law=lognormal        # or gamma or zero_inflated
/// error_sigma=0.04           # lognormal: full rows ; separated, or one
///                            # row (diagonal), or a single value (spherical)
/// error_shapes=4,4,4         # gamma shapes
/// base_law=gamma             # zero_inflated base (with its keys above)
/// zero_prob=0.1              # zero_inflated zero probability
/// ```
#[derive(Debug, Clone)]
pub struct ScenarioFile {
    pub scenario: SimulationScenario,
    pub replicates: u64,
}

fn scenario_err(key: &str, message: impl Into<String>) -> Error {
    Error::Scenario {
        key: key.to_string(),
        message: message.into(),
    }
}

fn parse_f64(key: &str, s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| scenario_err(key, format!("`{s}` is not a number")))
}

fn parse_vector(key: &str, s: &str) -> Result<DVector<f64>> {
    let vals = s
        .split(',')
        .map(|v| parse_f64(key, v))
        .collect::<Result<Vec<_>>>()?;
    Ok(DVector::from_vec(vals))
}

fn parse_matrix(key: &str, s: &str) -> Result<DMatrix<f64>> {
    let rows: Vec<DVector<f64>> = s
        .split(';')
        .map(|row| parse_vector(key, row))
        .collect::<Result<Vec<_>>>()?;
    let ncols = rows[0].len();
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(scenario_err(key, "rows have unequal lengths"));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

/// Parse `name(arg1,arg2,...)` into the name and raw argument string.
fn parse_call<'a>(key: &str, s: &'a str) -> Result<(&'a str, &'a str)> {
    let s = s.trim();
    let open = s
        .find('(')
        .ok_or_else(|| scenario_err(key, format!("expected `name(args)`, got `{s}`")))?;
    if !s.ends_with(')') {
        return Err(scenario_err(key, format!("missing closing parenthesis in `{s}`")));
    }
    Ok((&s[..open], &s[open + 1..s.len() - 1]))
}

fn parse_error_law(
    kind_key: &str,
    kind: &str,
    fields: &std::collections::HashMap<String, String>,
    d: usize,
) -> Result<ErrorLaw> {
    match kind {
        "lognormal" => {
            let raw = fields
                .get("error_sigma")
                .ok_or_else(|| scenario_err("error_sigma", "required for lognormal errors"))?;
            let m = parse_matrix("error_sigma", raw)?;
            let sigma = if m.nrows() == 1 && m.ncols() == 1 {
                DMatrix::from_diagonal(&DVector::from_element(d, m[(0, 0)]))
            } else if m.nrows() == 1 {
                if m.ncols() != d {
                    return Err(scenario_err(
                        "error_sigma",
                        format!("diagonal has {} entries for {d} parts", m.ncols()),
                    ));
                }
                DMatrix::from_diagonal(&DVector::from_fn(d, |k, _| m[(0, k)]))
            } else {
                m
            };
            Ok(ErrorLaw::Lognormal { sigma })
        }
        "gamma" => {
            let raw = fields
                .get("error_shapes")
                .ok_or_else(|| scenario_err("error_shapes", "required for gamma errors"))?;
            let v = parse_vector("error_shapes", raw)?;
            let shapes = if v.len() == 1 {
                DVector::from_element(d, v[0])
            } else {
                v
            };
            Ok(ErrorLaw::ScaledGamma { shapes })
        }
        "zero_inflated" => {
            let base_kind = fields
                .get("base_law")
                .ok_or_else(|| scenario_err("base_law", "required for zero_inflated errors"))?;
            if base_kind.trim() == "zero_inflated" {
                return Err(scenario_err("base_law", "cannot nest zero_inflated"));
            }
            let base = parse_error_law("base_law", base_kind.trim(), fields, d)?;
            let zero_prob = parse_f64(
                "zero_prob",
                fields
                    .get("zero_prob")
                    .ok_or_else(|| scenario_err("zero_prob", "required for zero_inflated errors"))?,
            )?;
            Ok(ErrorLaw::ZeroInflated {
                base: Box::new(base),
                zero_prob,
            })
        }
        other => Err(scenario_err(
            kind_key,
            format!("unknown error law `{other}` (expected lognormal, gamma or zero_inflated)"),
        )),
    }
}

/// Parse a scenario file from its text contents.
pub fn parse_scenario(text: &str) -> Result<ScenarioFile> {
    use std::collections::HashMap;
    let mut fields: HashMap<String, String> = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = match line.find('#') {
            Some(pos) => &line[..pos],
            None => line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(scenario_err(
                &format!("line {}", lineno + 1),
                format!("expected `key=value`, got `{line}`"),
            ));
        };
        fields.insert(key.trim().to_string(), value.trim().to_string());
    }

    let known = [
        "n", "seed", "reps", "constraint", "true_b", "covariate_law", "tau_law", "error_law",
        "error_sigma", "error_shapes", "base_law", "zero_prob",
    ];
    for key in fields.keys() {
        if !known.contains(&key.as_str()) {
            return Err(scenario_err(key, "unknown key"));
        }
    }

    let get = |key: &str| -> Result<&String> {
        fields.get(key).ok_or_else(|| scenario_err(key, "missing"))
    };

    let n = get("n")?
        .parse::<usize>()
        .map_err(|_| scenario_err("n", "must be a positive integer"))?;
    let seed = get("seed")?
        .parse::<u64>()
        .map_err(|_| scenario_err("seed", "must be a 64-bit unsigned integer"))?;
    let replicates = match fields.get("reps") {
        Some(v) => v
            .parse::<u64>()
            .map_err(|_| scenario_err("reps", "must be a positive integer"))?,
        None => 100,
    };

    let b_raw = parse_matrix("true_b", get("true_b")?)?;
    let d = b_raw.nrows();
    let constraint = match fields.get("constraint").map(|s| s.as_str()).unwrap_or("sum") {
        "sum" => crate::model::IdentificationConstraint::SumToZero,
        other => {
            let Some(part) = other.strip_prefix("ref:") else {
                return Err(scenario_err(
                    "constraint",
                    format!("expected `sum` or `ref:<part index>`, got `{other}`"),
                ));
            };
            let idx = part
                .trim()
                .parse::<usize>()
                .map_err(|_| scenario_err("constraint", "reference part must be an integer"))?;
            if idx == 0 || idx > d {
                return Err(scenario_err(
                    "constraint",
                    format!("reference part {idx} out of range 1..={d}"),
                ));
            }
            crate::model::IdentificationConstraint::ReferencePart(idx - 1)
        }
    };
    let true_b = crate::model::apply_constraint(&b_raw, constraint)?;

    let covariate_law = {
        let (name, args) = parse_call("covariate_law", get("covariate_law")?)?;
        let v = parse_vector("covariate_law", args)?;
        match (name, v.len()) {
            ("uniform", 2) => CovariateLaw::Uniform { lo: v[0], hi: v[1] },
            ("normal", 2) => CovariateLaw::Normal { mean: v[0], sd: v[1] },
            _ => {
                return Err(scenario_err(
                    "covariate_law",
                    "expected uniform(lo,hi) or normal(mean,sd)",
                ))
            }
        }
    };

    let tau_law = {
        let (name, args) = parse_call("tau_law", get("tau_law")?)?;
        let v = parse_vector("tau_law", args)?;
        match (name, v.len()) {
            ("fixed", 1) => TotalsLaw::Fixed(v[0]),
            ("uniform", 2) => TotalsLaw::Uniform { lo: v[0], hi: v[1] },
            ("lognormal", 2) => TotalsLaw::LogNormal { mu: v[0], sigma: v[1] },
            _ => {
                return Err(scenario_err(
                    "tau_law",
                    "expected fixed(v), uniform(lo,hi) or lognormal(mu,sigma)",
                ))
            }
        }
    };

    let error_law = parse_error_law("error_law", get("error_law")?.trim(), &fields, d)?;

    let scenario = SimulationScenario {
        n,
        true_b,
        covariate_law,
        error_law,
        tau_law,
        seed,
    };
    scenario.validate()?;
    Ok(ScenarioFile {
        scenario,
        replicates,
    })
}
