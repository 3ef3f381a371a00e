//! Shared fixtures for the integration suites.
//!
//! Each integration target compiles this module separately and none of them
//! uses every helper, so the dead-code lint stays off.
#![allow(dead_code)]

pub mod oracle;

use ccrf::gcrf::{BaselineOutputs, GcrfParams};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Baseline predictions bounded away from zero so that relative comparisons
/// of posterior means stay well conditioned.
pub fn random_baselines(rng: &mut ChaCha8Rng, n: usize, k1: usize) -> BaselineOutputs {
    let m = DMatrix::from_fn(n, k1, |_, _| rng.random_range(0.5..1.5));
    BaselineOutputs::new(m).expect("finite non-empty baselines")
}

/// Moderate random weights, away from both degeneracy and overflow.
pub fn random_params(rng: &mut ChaCha8Rng, k1: usize) -> GcrfParams {
    let alpha = (0..k1).map(|_| rng.random_range(0.5..2.0)).collect();
    let edge_weight = rng.random_range(0.1..1.0);
    GcrfParams::new(alpha, edge_weight).expect("positive weights")
}

pub fn random_point(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-1.0..2.0))
}
