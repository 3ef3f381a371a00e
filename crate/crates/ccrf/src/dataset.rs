//! Time-series loading, chronological splitting and min-max scaling.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Names the roles of CSV columns: one timestamp column, one or more feature
/// columns and a single regression target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub timestamp: String,
    pub features: Vec<String>,
    pub target: String,
}

/// One evenly ordered multivariate series: `N` rows, `d` feature columns and
/// a scalar target per row. Rows keep their on-disk order; the order *is* the
/// time axis.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesDataset {
    timestamps: Vec<String>,
    features: DMatrix<f64>,
    targets: DVector<f64>,
}

impl TimeSeriesDataset {
    pub fn new(
        timestamps: Vec<String>,
        features: DMatrix<f64>,
        targets: DVector<f64>,
    ) -> Result<Self> {
        let n = timestamps.len();
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        if features.nrows() != n || targets.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} timestamps, {} feature rows, {} targets",
                n,
                features.nrows(),
                targets.len()
            )));
        }
        if features.ncols() == 0 {
            return Err(Error::EmptyInput("feature matrix has no columns".into()));
        }
        Ok(TimeSeriesDataset {
            timestamps,
            features,
            targets,
        })
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn num_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn timestamps(&self) -> &[String] {
        &self.timestamps
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn targets(&self) -> &DVector<f64> {
        &self.targets
    }

    /// Copies rows `[start, end)` into a new dataset.
    fn slice_rows(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.len() {
            return Err(Error::DegenerateSplit(format!(
                "rows [{start}, {end}) of {}",
                self.len()
            )));
        }
        let timestamps = self.timestamps[start..end].to_vec();
        let features = self.features.rows(start, end - start).into_owned();
        let targets = self.targets.rows(start, end - start).into_owned();
        TimeSeriesDataset::new(timestamps, features, targets)
    }
}

/// Reads a CSV file, picking columns by the roles in `schema`. Rows are kept
/// in file order. Row numbers in errors are 1-based and count data rows, not
/// the header.
pub fn load_csv(path: &Path, schema: &CsvSchema) -> Result<TimeSeriesDataset> {
    if schema.features.is_empty() {
        return Err(Error::EmptyInput("schema has no feature columns".into()));
    }
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let ts_idx = find(&schema.timestamp)?;
    let feat_idx: Vec<usize> = schema
        .features
        .iter()
        .map(|f| find(f))
        .collect::<Result<_>>()?;
    let target_idx = find(&schema.target)?;

    let mut timestamps = Vec::new();
    let mut feature_rows: Vec<f64> = Vec::new();
    let mut targets = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let parse = |idx: usize, column: &str| -> Result<f64> {
            let raw = record.get(idx).unwrap_or("");
            raw.trim().parse::<f64>().map_err(|_| Error::ParseError {
                row: row + 1,
                column: column.to_string(),
                value: raw.to_string(),
            })
        };
        timestamps.push(record.get(ts_idx).unwrap_or("").to_string());
        for (&idx, name) in feat_idx.iter().zip(&schema.features) {
            feature_rows.push(parse(idx, name)?);
        }
        targets.push(parse(target_idx, &schema.target)?);
    }
    if timestamps.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = timestamps.len();
    let d = feat_idx.len();
    let features = DMatrix::from_row_slice(n, d, &feature_rows);
    TimeSeriesDataset::new(timestamps, features, DVector::from_vec(targets))
}

/// Reads only the timestamp and feature columns of a CSV, for applying a
/// trained model to rows whose targets are unknown. Returns timestamps and
/// the `N x d` feature matrix.
pub fn load_features_csv(path: &Path, schema: &CsvSchema) -> Result<(Vec<String>, DMatrix<f64>)> {
    if schema.features.is_empty() {
        return Err(Error::EmptyInput("schema has no feature columns".into()));
    }
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let ts_idx = find(&schema.timestamp)?;
    let feat_idx: Vec<usize> = schema
        .features
        .iter()
        .map(|f| find(f))
        .collect::<Result<_>>()?;

    let mut timestamps = Vec::new();
    let mut feature_rows: Vec<f64> = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        timestamps.push(record.get(ts_idx).unwrap_or("").to_string());
        for (&idx, name) in feat_idx.iter().zip(&schema.features) {
            let raw = record.get(idx).unwrap_or("");
            let parsed = raw.trim().parse::<f64>().map_err(|_| Error::ParseError {
                row: row + 1,
                column: name.clone(),
                value: raw.to_string(),
            })?;
            feature_rows.push(parsed);
        }
    }
    if timestamps.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = timestamps.len();
    let features = DMatrix::from_row_slice(n, feat_idx.len(), &feature_rows);
    Ok((timestamps, features))
}

/// Writes a dataset back out with the column names from `schema`.
pub fn write_csv(data: &TimeSeriesDataset, schema: &CsvSchema, path: &Path) -> Result<()> {
    if schema.features.len() != data.num_features() {
        return Err(Error::DimensionMismatch(format!(
            "schema names {} features, dataset has {}",
            schema.features.len(),
            data.num_features()
        )));
    }
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = vec![schema.timestamp.clone()];
    header.extend(schema.features.iter().cloned());
    header.push(schema.target.clone());
    writer.write_record(&header)?;
    for i in 0..data.len() {
        let mut row = vec![data.timestamps()[i].clone()];
        for j in 0..data.num_features() {
            row.push(data.features()[(i, j)].to_string());
        }
        row.push(data.targets()[i].to_string());
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Splits chronologically: the first `ceil(train_fraction * N)` rows train,
/// the rest test. Both sides must end up non-empty.
pub fn chronological_split(
    data: &TimeSeriesDataset,
    train_fraction: f64,
) -> Result<(TimeSeriesDataset, TimeSeriesDataset)> {
    let n = data.len();
    // The slack keeps binary rounding in the product from bumping an exact
    // integer boundary up to the next one.
    let train_len = ((train_fraction * n as f64) - 1e-9).ceil().max(0.0) as usize;
    if train_len == 0 || train_len >= n {
        return Err(Error::DegenerateSplit(format!(
            "{n} rows with train_fraction {train_fraction} leaves an empty side; \
             the fraction must lie strictly between 0 and 1 with enough rows for both sides"
        )));
    }
    Ok((
        data.slice_rows(0, train_len)?,
        data.slice_rows(train_len, n)?,
    ))
}

/// Min and max of one column, observed on the training split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnRange {
    pub min: f64,
    pub max: f64,
}

impl ColumnRange {
    fn of(values: impl Iterator<Item = f64>) -> ColumnRange {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for v in values {
            min = min.min(v);
            max = max.max(v);
        }
        ColumnRange { min, max }
    }

    /// Maps `min` to 0 and `max` to 1, clamping values outside the observed
    /// range. A constant column maps to 0.
    pub fn scale(&self, v: f64) -> f64 {
        if self.max == self.min {
            0.0
        } else {
            ((v - self.min) / (self.max - self.min)).clamp(0.0, 1.0)
        }
    }

    /// Inverse of [`ColumnRange::scale`] on the unclamped interior.
    pub fn unscale(&self, v: f64) -> f64 {
        v * (self.max - self.min) + self.min
    }

    /// Rescales a standard deviation (a difference, so no offset).
    pub fn unscale_spread(&self, sd: f64) -> f64 {
        sd * (self.max - self.min)
    }
}

/// Per-column ranges fitted on a training split, later applied to any split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub feature_ranges: Vec<ColumnRange>,
    pub target_range: ColumnRange,
}

/// Observes per-column min/max of features and target on `train` only.
pub fn scale_fit(train: &TimeSeriesDataset) -> ScalingParams {
    let feature_ranges = (0..train.num_features())
        .map(|j| ColumnRange::of(train.features().column(j).iter().copied()))
        .collect();
    let target_range = ColumnRange::of(train.targets().iter().copied());
    ScalingParams {
        feature_ranges,
        target_range,
    }
}

/// Applies fitted ranges to features and target of `data`.
pub fn scale_apply(data: &TimeSeriesDataset, params: &ScalingParams) -> Result<TimeSeriesDataset> {
    if params.feature_ranges.len() != data.num_features() {
        return Err(Error::DimensionMismatch(format!(
            "{} fitted feature ranges for {} feature columns",
            params.feature_ranges.len(),
            data.num_features()
        )));
    }
    let mut features = data.features().clone();
    for (j, range) in params.feature_ranges.iter().enumerate() {
        for i in 0..features.nrows() {
            features[(i, j)] = range.scale(features[(i, j)]);
        }
    }
    let targets = data.targets().map(|t| params.target_range.scale(t));
    TimeSeriesDataset::new(data.timestamps().to_vec(), features, targets)
}
