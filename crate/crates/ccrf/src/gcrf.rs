//! Gaussian conditional random field over a single time series.
//!
//! The model couples per-node squared losses against baseline predictions
//! (weights `alpha`, one per baseline) with one quadratic edge penalty.
//! Two edge penalties are supported:
//!
//! * [`EdgeSpec::ChainAdjacency`]: sum of squared differences between
//!   consecutive outputs.
//! * [`EdgeSpec::DistanceToMean`]: each output is pulled toward the running
//!   mean of all earlier outputs; the first node has no history and
//!   contributes nothing.
//!
//! Because every term is quadratic in the outputs, the conditional density
//! `p(y | X) ∝ exp(energy)` is a multivariate Gaussian. The convention here
//! is that `energy` carries no 1/2 factor, so the canonical precision matrix
//! is *twice* the assembled quadratic form.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Which quadratic edge penalty ties the output sequence together.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeSpec {
    ChainAdjacency,
    DistanceToMean,
}

impl EdgeSpec {
    pub fn label(self) -> &'static str {
        match self {
            EdgeSpec::ChainAdjacency => "chain",
            EdgeSpec::DistanceToMean => "dm",
        }
    }
}

impl std::str::FromStr for EdgeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chain" => Ok(EdgeSpec::ChainAdjacency),
            "dm" => Ok(EdgeSpec::DistanceToMean),
            other => Err(Error::InvalidParameter(format!(
                "unknown edge variant {other:?}, expected \"chain\" or \"dm\""
            ))),
        }
    }
}

/// Feature weights of a fitted (or candidate) CRF.
///
/// `alpha[k]` scales the squared loss against baseline `k`; `edge_weight`
/// scales the edge penalty. Weights must be finite and non-negative; zero is
/// allowed so that individual terms can be switched off when probing the
/// energy, but assembling a density requires the total to be positive.
#[derive(Debug, Clone, PartialEq)]
pub struct GcrfParams {
    pub alpha: Vec<f64>,
    pub edge_weight: f64,
}

impl GcrfParams {
    pub fn new(alpha: Vec<f64>, edge_weight: f64) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::InvalidParameter("alpha must not be empty".into()));
        }
        for (k, &a) in alpha.iter().enumerate() {
            if !a.is_finite() || a < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "alpha[{k}] = {a} must be finite and non-negative"
                )));
            }
        }
        if !edge_weight.is_finite() || edge_weight < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "edge_weight = {edge_weight} must be finite and non-negative"
            )));
        }
        Ok(GcrfParams { alpha, edge_weight })
    }

    /// Exponentiates a log-parameter vector laid out as
    /// `[log alpha_1, .., log alpha_K, log edge_weight]`.
    pub fn from_log(log_params: &[f64]) -> Result<Self> {
        if log_params.len() < 2 {
            return Err(Error::InvalidParameter(
                "log-parameter vector needs at least one alpha and the edge weight".into(),
            ));
        }
        let exp: Vec<f64> = log_params.iter().map(|&u| u.exp()).collect();
        if exp.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteObjective(
                "exponentiated parameter overflowed".into(),
            ));
        }
        let (weight, alpha) = exp.split_last().expect("checked non-empty");
        GcrfParams::new(alpha.to_vec(), *weight)
    }

    pub fn num_baselines(&self) -> usize {
        self.alpha.len()
    }
}

/// Baseline predictions for one sequence, one column per baseline model.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineOutputs {
    predictions: DMatrix<f64>,
}

impl BaselineOutputs {
    pub fn new(predictions: DMatrix<f64>) -> Result<Self> {
        if predictions.nrows() == 0 || predictions.ncols() == 0 {
            return Err(Error::EmptyInput("baseline prediction matrix".into()));
        }
        if predictions.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "baseline predictions must be finite".into(),
            ));
        }
        Ok(BaselineOutputs { predictions })
    }

    pub fn from_column(column: DVector<f64>) -> Result<Self> {
        let n = column.len();
        Self::new(DMatrix::from_column_slice(n, 1, column.as_slice()))
    }

    /// Sequence length N.
    pub fn len(&self) -> usize {
        self.predictions.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.predictions.nrows() == 0
    }

    /// Number of baseline models K.
    pub fn num_baselines(&self) -> usize {
        self.predictions.ncols()
    }

    pub fn column(&self, k: usize) -> DVector<f64> {
        self.predictions.column(k).into_owned()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.predictions
    }
}

/// Running means of all *earlier* outputs: entry `i` (0-based, `i >= 1` in
/// the sequence) is `mean(y[0..i])`. The result has length `N - 1` because
/// the first node has no history.
pub fn running_means(y: &DVector<f64>) -> Result<DVector<f64>> {
    let n = y.len();
    if n < 2 {
        return Err(Error::SequenceTooShort(format!(
            "running means need at least 2 nodes, got {n}"
        )));
    }
    let mut means = DVector::zeros(n - 1);
    let mut sum = 0.0;
    for i in 1..n {
        sum += y[i - 1];
        means[i - 1] = sum / i as f64;
    }
    Ok(means)
}

/// Diagonal matrix of the node penalty: every diagonal entry is the sum of
/// the alpha weights.
pub fn node_matrix(alpha: &[f64], n: usize) -> DMatrix<f64> {
    let total: f64 = alpha.iter().sum();
    DMatrix::from_diagonal_element(n, n, total)
}

/// Symmetric PSD matrix `C` of the weighted edge penalty: `y' C y` equals the
/// penalty exactly. The chain form is tridiagonal; the distance-to-mean form
/// accumulates `weight * v_i v_i'` with `v_i = e_i - mean(e_0..e_{i-1})`,
/// folded into a closed form using the tail sums `S(m) = sum_{i=m}^{N-1} 1/i^2`.
pub fn edge_matrix(edge: EdgeSpec, edge_weight: f64, n: usize) -> Result<DMatrix<f64>> {
    if n < 2 {
        return Err(Error::SequenceTooShort(format!(
            "edge penalties need at least 2 nodes, got {n}"
        )));
    }
    if !edge_weight.is_finite() || edge_weight < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "edge_weight = {edge_weight} must be finite and non-negative"
        )));
    }
    let mut c = DMatrix::zeros(n, n);
    match edge {
        EdgeSpec::ChainAdjacency => {
            for i in 0..n.saturating_sub(1) {
                c[(i, i)] += edge_weight;
                c[(i + 1, i + 1)] += edge_weight;
                c[(i, i + 1)] -= edge_weight;
                c[(i + 1, i)] -= edge_weight;
            }
        }
        EdgeSpec::DistanceToMean => {
            // tail[m] = sum_{i=m}^{n-1} 1/i^2, with tail[n] = 0.
            let mut tail = vec![0.0; n + 1];
            for i in (1..n).rev() {
                tail[i] = tail[i + 1] + 1.0 / (i as f64 * i as f64);
            }
            for j in 0..n {
                let diag = if j >= 1 { 1.0 } else { 0.0 };
                c[(j, j)] = edge_weight * (diag + tail[j + 1]);
                for k in (j + 1)..n {
                    let off = edge_weight * (-1.0 / k as f64 + tail[k + 1]);
                    c[(j, k)] = off;
                    c[(k, j)] = off;
                }
            }
        }
    }
    Ok(c)
}

/// Unnormalized log-density of an output sequence: minus the weighted node
/// losses, minus the weighted edge penalty. Computed term by term; parameter
/// values of zero drop the corresponding term.
pub fn energy(
    y: &DVector<f64>,
    baselines: &BaselineOutputs,
    params: &GcrfParams,
    edge: EdgeSpec,
) -> Result<f64> {
    let n = y.len();
    if n != baselines.len() {
        return Err(Error::DimensionMismatch(format!(
            "sequence has {n} nodes but baselines have {}",
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

    let mut node = 0.0;
    for (k, &a) in params.alpha.iter().enumerate() {
        for i in 0..n {
            let d = y[i] - baselines.matrix()[(i, k)];
            node += a * d * d;
        }
    }

    let w = params.edge_weight;
    let mut pair = 0.0;
    match edge {
        EdgeSpec::ChainAdjacency => {
            for i in 0..n.saturating_sub(1) {
                let d = y[i] - y[i + 1];
                pair += w * d * d;
            }
        }
        EdgeSpec::DistanceToMean => {
            let mut sum = 0.0;
            for i in 1..n {
                sum += y[i - 1];
                let d = y[i] - sum / i as f64;
                pair += w * d * d;
            }
        }
    }
    Ok(-(node + pair))
}

/// Linear coefficient of the energy: `tau_i = 2 * sum_k alpha_k * f_k(i)`.
pub fn linear_term(alpha: &[f64], baselines: &BaselineOutputs) -> Result<DVector<f64>> {
    if alpha.len() != baselines.num_baselines() {
        return Err(Error::DimensionMismatch(format!(
            "{} alpha weights for {} baselines",
            alpha.len(),
            baselines.num_baselines()
        )));
    }
    let n = baselines.len();
    let mut tau = DVector::zeros(n);
    for (k, &a) in alpha.iter().enumerate() {
        for i in 0..n {
            tau[i] += 2.0 * a * baselines.matrix()[(i, k)];
        }
    }
    Ok(tau)
}

/// The CRF density in canonical Gaussian form.
///
/// `precision * mean = linear` and
/// `log p(y) = -1/2 (y-mean)' precision (y-mean) - log_norm`, where
/// `log_norm = N/2 log(2 pi) - 1/2 log det(precision)`.
#[derive(Debug, Clone)]
pub struct CanonicalGaussian {
    pub precision: DMatrix<f64>,
    pub linear: DVector<f64>,
    pub mean: DVector<f64>,
    pub log_norm: f64,
}

impl CanonicalGaussian {
    /// Builds the canonical form from baselines and weights. The energy has
    /// no 1/2 factor, so `precision = 2 (sum_k alpha_k I + C)`.
    pub fn assemble(
        baselines: &BaselineOutputs,
        params: &GcrfParams,
        edge: EdgeSpec,
    ) -> Result<Self> {
        if params.num_baselines() != baselines.num_baselines() {
            return Err(Error::DimensionMismatch(format!(
                "{} alpha weights for {} baselines",
                params.num_baselines(),
                baselines.num_baselines()
            )));
        }
        let n = baselines.len();
        let mut precision = edge_matrix(edge, params.edge_weight, n)?;
        precision += node_matrix(&params.alpha, n);
        precision *= 2.0;

        let chol = nalgebra::Cholesky::new(precision.clone()).ok_or(Error::NotPositiveDefinite)?;
        let linear = linear_term(&params.alpha, baselines)?;
        let mean = chol.solve(&linear);
        let log_norm =
            n as f64 / 2.0 * (2.0 * std::f64::consts::PI).ln() - chol.ln_determinant() / 2.0;
        if !log_norm.is_finite() || mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteObjective(
                "canonical form has non-finite mean or normalizer".into(),
            ));
        }
        Ok(CanonicalGaussian {
            precision,
            linear,
            mean,
            log_norm,
        })
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.len() == 0
    }

    /// Normalized log-density at `y`.
    pub fn log_density(&self, y: &DVector<f64>) -> Result<f64> {
        if y.len() != self.mean.len() {
            return Err(Error::DimensionMismatch(format!(
                "point has {} entries, distribution has {}",
                y.len(),
                self.mean.len()
            )));
        }
        let r = y - &self.mean;
        Ok(-0.5 * (&self.precision * &r).dot(&r) - self.log_norm)
    }

    /// Marginal variances, the diagonal of the covariance matrix.
    pub fn marginal_variances(&self) -> Result<DVector<f64>> {
        let chol =
            nalgebra::Cholesky::new(self.precision.clone()).ok_or(Error::NotPositiveDefinite)?;
        let cov = chol.inverse();
        Ok(cov.diagonal())
    }
}
