//! Structured regression over multivariate time series with continuous
//! conditional random fields.
//!
//! A kernel extreme learning machine ([`elm`]) produces unstructured
//! per-node predictions; a Gaussian CRF ([`gcrf`]) then couples the output
//! sequence through one of two quadratic edge penalties (consecutive
//! smoothness or pull toward the running mean of the past). Weights are
//! fitted by exact maximum likelihood ([`training`]), prediction is the
//! closed-form Gaussian mean ([`inference`]), and [`evaluation`] reproduces
//! a multi-scenario MAPE comparison of the three predictors.

pub mod cli;
pub mod dataset;
pub mod elm;
pub mod error;
pub mod evaluation;
pub mod gcrf;
pub mod inference;
pub mod model;
pub mod synthetic;
pub mod training;

pub use error::{Error, Result};
