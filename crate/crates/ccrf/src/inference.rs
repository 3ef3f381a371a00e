//! Prediction from a fitted CRF.
//!
//! Inference is exact: the conditional density is Gaussian, so the point
//! prediction is the mean of the canonical form assembled over the *test*
//! baselines, and uncertainty comes from the marginal variances.

use nalgebra::DVector;

use crate::error::Result;
use crate::gcrf::{BaselineOutputs, CanonicalGaussian, EdgeSpec, GcrfParams};

/// Most probable output sequence given baseline predictions.
pub fn predict(
    baselines: &BaselineOutputs,
    params: &GcrfParams,
    edge: EdgeSpec,
) -> Result<DVector<f64>> {
    Ok(CanonicalGaussian::assemble(baselines, params, edge)?.mean)
}

/// Per-node predictive variances (diagonal of the covariance matrix).
pub fn predictive_variance(
    baselines: &BaselineOutputs,
    params: &GcrfParams,
    edge: EdgeSpec,
) -> Result<DVector<f64>> {
    CanonicalGaussian::assemble(baselines, params, edge)?.marginal_variances()
}
