//! Maximum-likelihood training of the CRF weights.
//!
//! Positivity of the weights is enforced by reparameterization: the
//! optimizer walks the vector `u = [log alpha_1, .., log alpha_K, log w]`
//! and only ever exponentiates, so every iterate is strictly positive.
//! Ascent steps use the analytic gradient with a halving line search that
//! never accepts a step decreasing the objective, which makes the recorded
//! trajectory non-decreasing by construction.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gcrf::{edge_matrix, linear_term, BaselineOutputs, EdgeSpec, GcrfParams};

/// Optimizer settings. `learning_rate` is the step tried first each
/// iteration; halving backs it off until the objective improves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub max_iters: usize,
    pub rel_tol: f64,
    pub init_alpha: f64,
    pub init_edge_weight: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.1,
            max_iters: 500,
            rel_tol: 1e-6,
            init_alpha: 1.0,
            init_edge_weight: 0.01,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "{name} = {v} must be finite and positive"
                )))
            }
        };
        positive("learning_rate", self.learning_rate)?;
        positive("rel_tol", self.rel_tol)?;
        positive("init_alpha", self.init_alpha)?;
        positive("init_edge_weight", self.init_edge_weight)?;
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter(
                "max_iters must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of one fit.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub params: GcrfParams,
    pub log_likelihood: f64,
    /// Objective after the initial evaluation and after every accepted step.
    pub trajectory: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Log-likelihood of the training targets and its gradient with respect to
/// the *log* parameters `[log alpha_1, .., log alpha_K, log w]`.
///
/// With precision `P = 2 (sum_k alpha_k I + w C0)`, mean `mu = P^-1 tau` and
/// residual `r = y - mu`, the raw-parameter derivatives are
///
/// * `dL/d alpha_k = -||r||^2 + 2 r'(f_k - mu) + tr(P^-1)`
/// * `dL/d w      = -r' C0 r - 2 r' C0 mu + tr(P^-1 C0)`
///
/// and the chain rule multiplies each by its (positive) parameter.
pub fn log_likelihood_and_grad(
    targets: &DVector<f64>,
    baselines: &BaselineOutputs,
    log_params: &[f64],
    edge: EdgeSpec,
) -> Result<(f64, Vec<f64>)> {
    let params = GcrfParams::from_log(log_params)?;
    let n = targets.len();
    if n != baselines.len() {
        return Err(Error::DimensionMismatch(format!(
            "{n} targets but {} baseline rows",
            baselines.len()
        )));
    }
    if params.num_baselines() != baselines.num_baselines() {
        return Err(Error::DimensionMismatch(format!(
            "{} alpha weights for {} baselines",
            params.num_baselines(),
            baselines.num_baselines()
        )));
    }

    let unit_edge = edge_matrix(edge, 1.0, n)?;
    let alpha_sum: f64 = params.alpha.iter().sum();
    let mut precision = &unit_edge * (2.0 * params.edge_weight);
    for i in 0..n {
        precision[(i, i)] += 2.0 * alpha_sum;
    }
    let chol = nalgebra::Cholesky::new(precision.clone()).ok_or(Error::NotPositiveDefinite)?;
    let tau = linear_term(&params.alpha, baselines)?;
    let mean = chol.solve(&tau);
    let residual = targets - &mean;

    let ll = -0.5 * (&precision * &residual).dot(&residual)
        - n as f64 / 2.0 * (2.0 * std::f64::consts::PI).ln()
        + chol.ln_determinant() / 2.0;
    if !ll.is_finite() {
        return Err(Error::NonFiniteObjective(format!(
            "log-likelihood = {ll} at alpha = {:?}, edge_weight = {}",
            params.alpha, params.edge_weight
        )));
    }

    let cov = chol.inverse();
    let tr_cov = cov.trace();
    let r_sq = residual.norm_squared();

    let mut grad = Vec::with_capacity(params.num_baselines() + 1);
    for (k, &a) in params.alpha.iter().enumerate() {
        let f_k = baselines.column(k);
        let raw = -r_sq + 2.0 * residual.dot(&(f_k - &mean)) + tr_cov;
        grad.push(a * raw);
    }
    let edge_r = &unit_edge * &residual;
    let edge_mean = &unit_edge * &mean;
    let tr_cov_edge = trace_product(&cov, &unit_edge);
    let raw_w = -residual.dot(&edge_r) - 2.0 * residual.dot(&edge_mean) + tr_cov_edge;
    grad.push(params.edge_weight * raw_w);

    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFiniteObjective("gradient is non-finite".into()));
    }
    Ok((ll, grad))
}

/// `tr(A B)` for symmetric `A` and `B`.
fn trace_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

const MIN_STEP: f64 = 1e-18;

/// Fits CRF weights to one training sequence by gradient ascent on the
/// log-likelihood in log-parameter space.
///
/// `converged` is set only when the last accepted step both improved the
/// objective by at most `rel_tol` (relative) and left a gradient small
/// enough to be a plausible stationary point; hitting `max_iters` or
/// stalling with no improving step leaves it false.
pub fn fit(
    targets: &DVector<f64>,
    baselines: &BaselineOutputs,
    edge: EdgeSpec,
    config: &TrainConfig,
) -> Result<FitResult> {
    config.validate()?;
    let n = targets.len();
    if n < 2 {
        return Err(Error::SequenceTooShort(format!(
            "training needs at least 2 nodes, got {n}"
        )));
    }
    let k1 = baselines.num_baselines();
    let mut u = vec![config.init_alpha.ln(); k1];
    u.push(config.init_edge_weight.ln());

    let (mut ll, mut grad) = log_likelihood_and_grad(targets, baselines, &u, edge)?;
    let mut trajectory = vec![ll];
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=config.max_iters {
        iterations = iter;
        let mut step = config.learning_rate;
        let mut accepted = None;
        while step >= MIN_STEP {
            let trial_u: Vec<f64> = u.iter().zip(&grad).map(|(ui, gi)| ui + step * gi).collect();
            match log_likelihood_and_grad(targets, baselines, &trial_u, edge) {
                Ok((trial_ll, trial_grad)) if trial_ll >= ll => {
                    accepted = Some((trial_u, trial_ll, trial_grad));
                    break;
                }
                // Overflowing or indefinite trials just shorten the step.
                _ => step *= 0.5,
            }
        }
        let Some((new_u, new_ll, new_grad)) = accepted else {
            break;
        };
        let improvement = (new_ll - ll) / ll.abs().max(1.0);
        let grad_scale = new_grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        u = new_u;
        ll = new_ll;
        grad = new_grad;
        trajectory.push(ll);
        if improvement <= config.rel_tol && grad_scale <= 10.0 * config.rel_tol * ll.abs().max(1.0)
        {
            converged = true;
            break;
        }
    }

    Ok(FitResult {
        params: GcrfParams::from_log(&u)?,
        log_likelihood: ll,
        trajectory,
        iterations,
        converged,
    })
}
