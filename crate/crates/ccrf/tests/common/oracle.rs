//! Brute-force quadrature reference for tiny sequences.
//!
//! The oracle never touches the canonical Gaussian assembly: it integrates
//! `exp(energy)` on a tensor-product trapezoid grid, computing the
//! normalizer and the first two moments directly from the term-by-term
//! energy. Every integral runs twice, once at the requested resolution and
//! once with doubled points per axis; if the normalizer moves by more than
//! a relative 1e-6 the grid was too coarse and the result is rejected.

use ccrf::gcrf::{energy, BaselineOutputs, EdgeSpec, GcrfParams};
use nalgebra::{DMatrix, DVector};

/// Most nodes the tensor grid can afford.
pub const MAX_NODES: usize = 3;

const DOUBLING_TOL: f64 = 1e-6;

#[derive(Debug)]
pub enum OracleError {
    /// The doubled grid changed the normalizer by this relative amount.
    GridTooCoarse {
        relative_change: f64,
    },
    TooManyNodes(usize),
    Model(ccrf::Error),
}

impl std::fmt::Display for OracleError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OracleError::GridTooCoarse { relative_change } => {
                write!(
                    f,
                    "grid too coarse: normalizer moved by {relative_change:e}"
                )
            }
            OracleError::TooManyNodes(n) => write!(f, "{n} nodes exceed the oracle limit"),
            OracleError::Model(e) => write!(f, "{e}"),
        }
    }
}

/// Normalizer and first two moments of `exp(energy)` over the grid box.
pub struct QuadratureMoments {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
    pub log_normalizer: f64,
}

struct GridPass {
    log_normalizer: f64,
    mean: DVector<f64>,
    second: DMatrix<f64>,
}

fn grid_pass(
    baselines: &BaselineOutputs,
    params: &GcrfParams,
    edge: EdgeSpec,
    center: &DVector<f64>,
    halfwidth: f64,
    points_per_axis: usize,
) -> Result<GridPass, OracleError> {
    let n = center.len();
    let step = 2.0 * halfwidth / (points_per_axis - 1) as f64;
    // The center sits at the density mode, so shifting by its energy keeps
    // every exponential in [0, 1].
    let shift = energy(center, baselines, params, edge).map_err(OracleError::Model)?;

    let total = points_per_axis.pow(n as u32);
    let mut z = 0.0;
    let mut first = DVector::zeros(n);
    let mut second = DMatrix::zeros(n, n);
    let mut y = DVector::zeros(n);
    for flat in 0..total {
        let mut rest = flat;
        let mut weight = 1.0;
        for axis in 0..n {
            let idx = rest % points_per_axis;
            rest /= points_per_axis;
            y[axis] = center[axis] - halfwidth + idx as f64 * step;
            if idx == 0 || idx == points_per_axis - 1 {
                weight *= 0.5;
            }
        }
        let e = energy(&y, baselines, params, edge).map_err(OracleError::Model)?;
        let density = weight * (e - shift).exp();
        z += density;
        for i in 0..n {
            first[i] += density * y[i];
            for j in i..n {
                second[(i, j)] += density * y[i] * y[j];
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            second[(j, i)] = second[(i, j)];
        }
    }
    Ok(GridPass {
        log_normalizer: shift + z.ln() + n as f64 * step.ln(),
        mean: first / z,
        second: second / z,
    })
}

/// Mean, covariance and log-normalizer by quadrature. The grid spans
/// `center ± halfwidth` on every axis; callers should center on the density
/// mode with a halfwidth of at least six posterior standard deviations and
/// use at least 200 points per axis.
pub fn quadrature_moments(
    baselines: &BaselineOutputs,
    params: &GcrfParams,
    edge: EdgeSpec,
    center: &DVector<f64>,
    halfwidth: f64,
    points_per_axis: usize,
) -> Result<QuadratureMoments, OracleError> {
    let n = center.len();
    if n > MAX_NODES {
        return Err(OracleError::TooManyNodes(n));
    }
    assert!(points_per_axis >= 2, "need at least two points per axis");
    assert!(halfwidth > 0.0, "halfwidth must be positive");

    let coarse = grid_pass(baselines, params, edge, center, halfwidth, points_per_axis)?;
    let fine = grid_pass(
        baselines,
        params,
        edge,
        center,
        halfwidth,
        2 * points_per_axis,
    )?;
    let relative_change = (coarse.log_normalizer - fine.log_normalizer).exp_m1().abs();
    if relative_change > DOUBLING_TOL {
        return Err(OracleError::GridTooCoarse { relative_change });
    }
    let covariance = DMatrix::from_fn(n, n, |i, j| {
        fine.second[(i, j)] - fine.mean[i] * fine.mean[j]
    });
    Ok(QuadratureMoments {
        mean: fine.mean,
        covariance,
        log_normalizer: fine.log_normalizer,
    })
}

/// Normalized log-density at `y` by quadrature: `energy(y) - log integral`.
pub fn quadrature_loglik(
    y: &DVector<f64>,
    baselines: &BaselineOutputs,
    params: &GcrfParams,
    edge: EdgeSpec,
    center: &DVector<f64>,
    halfwidth: f64,
    points_per_axis: usize,
) -> Result<f64, OracleError> {
    let moments = quadrature_moments(baselines, params, edge, center, halfwidth, points_per_axis)?;
    let e = energy(y, baselines, params, edge).map_err(OracleError::Model)?;
    Ok(e - moments.log_normalizer)
}
