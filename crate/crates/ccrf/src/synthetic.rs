//! Deterministic synthetic fixtures: a mean-reverting AR(1) target with
//! lagged, smoothed and pure-noise feature columns.
//!
//! Everything is driven by one ChaCha stream keyed on `seed`, so a given
//! configuration always produces the same dataset on every platform.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::{CsvSchema, TimeSeriesDataset};
use crate::error::{Error, Result};

/// Knobs of the AR(1) fixture.
///
/// The target follows `y_t = level + ar_coeff (y_{t-1} - level) + e_t` with
/// `e_t ~ N(0, noise_sd^2)`, started from its stationary distribution.
/// Features are noisy lags and trailing means of the target plus three
/// uninformative noise columns; `feature_noise_sd` controls how much the
/// informative columns are corrupted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ar1Config {
    pub len: usize,
    pub seed: u64,
    pub level: f64,
    pub ar_coeff: f64,
    pub noise_sd: f64,
    pub feature_noise_sd: f64,
}

impl Default for Ar1Config {
    fn default() -> Self {
        Ar1Config {
            len: 160,
            seed: 1,
            level: 50.0,
            ar_coeff: 0.8,
            noise_sd: 4.0,
            feature_noise_sd: 2.0,
        }
    }
}

/// Column names matching the layout of [`ar1_dataset`].
pub fn ar1_schema() -> CsvSchema {
    CsvSchema {
        timestamp: "t".into(),
        features: vec![
            "lag1".into(),
            "lag2".into(),
            "lag3".into(),
            "ma2".into(),
            "ma3".into(),
            "ma4".into(),
            "noise1".into(),
            "noise2".into(),
            "noise3".into(),
        ],
        target: "value".into(),
    }
}

/// Simulates the series and assembles the feature matrix. The first four
/// simulated steps are kept as history only, so every emitted row has all
/// its lags defined.
pub fn ar1_dataset(config: &Ar1Config) -> Result<TimeSeriesDataset> {
    if config.len < 10 {
        return Err(Error::InvalidParameter(format!(
            "fixture length {} is too short to be useful",
            config.len
        )));
    }
    if config.ar_coeff.is_nan() || config.ar_coeff.abs() >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "ar_coeff = {} must lie in (-1, 1) for stationarity",
            config.ar_coeff
        )));
    }
    for (name, v) in [
        ("level", config.level),
        ("noise_sd", config.noise_sd),
        ("feature_noise_sd", config.feature_noise_sd),
    ] {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "{name} = {v} must be finite and positive"
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let standard = Normal::new(0.0, 1.0).expect("unit normal");
    let mut draw = move || standard.sample(&mut rng);

    const HISTORY: usize = 4;
    let total = config.len + HISTORY;
    let stationary_sd = config.noise_sd / (1.0 - config.ar_coeff * config.ar_coeff).sqrt();
    let mut series = Vec::with_capacity(total);
    series.push(config.level + stationary_sd * draw());
    for _ in 1..total {
        let prev = *series.last().expect("non-empty");
        series.push(
            config.level + config.ar_coeff * (prev - config.level) + config.noise_sd * draw(),
        );
    }

    let trailing_mean = |t: usize, window: usize| -> f64 {
        series[t - window..t].iter().sum::<f64>() / window as f64
    };

    let n = config.len;
    let mut features = DMatrix::zeros(n, 9);
    let mut targets = DVector::zeros(n);
    let mut timestamps = Vec::with_capacity(n);
    for i in 0..n {
        let t = i + HISTORY;
        timestamps.push(format!("t{:04}", i + 1));
        targets[i] = series[t];
        let fs = config.feature_noise_sd;
        features[(i, 0)] = series[t - 1] + fs * draw();
        features[(i, 1)] = series[t - 2] + fs * draw();
        features[(i, 2)] = series[t - 3] + fs * draw();
        features[(i, 3)] = trailing_mean(t, 2) + fs * draw();
        features[(i, 4)] = trailing_mean(t, 3) + fs * draw();
        features[(i, 5)] = trailing_mean(t, 4) + fs * draw();
        features[(i, 6)] = config.level + 3.0 * config.noise_sd * draw();
        features[(i, 7)] = config.level + 3.0 * config.noise_sd * draw();
        features[(i, 8)] = config.level + 3.0 * config.noise_sd * draw();
    }
    TimeSeriesDataset::new(timestamps, features, targets)
}
