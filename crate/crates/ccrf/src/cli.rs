//! Command implementations behind the `ccrf` binary.
//!
//! All three commands are driven by a TOML run configuration; see the crate
//! README for the full format. Failures carry the pipeline stage they
//! occurred in, and the binary maps them to exit code 1 (exit code 2 is left
//! to argument parsing).

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::dataset::{
    chronological_split, load_csv, load_features_csv, scale_apply, scale_fit, CsvSchema,
};
use crate::elm::{predict_kernel_elm, scenario_grid, train_kernel_elm, ElmConfig};
use crate::error::{Error, Result};
use crate::evaluation::run_scenarios;
use crate::gcrf::{BaselineOutputs, EdgeSpec};
use crate::inference::{predict, predictive_variance};
use crate::model::TrainedModel;
use crate::training::{fit, TrainConfig};

/// An [`Error`] tagged with the pipeline stage that raised it.
#[derive(Debug)]
pub struct StageError {
    pub stage: &'static str,
    pub source: Error,
}

impl std::fmt::Display for StageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} stage: {}", self.stage, self.source)
    }
}

impl std::error::Error for StageError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.source)
    }
}

trait Stage<T> {
    fn stage(self, stage: &'static str) -> std::result::Result<T, StageError>;
}

impl<T> Stage<T> for Result<T> {
    fn stage(self, stage: &'static str) -> std::result::Result<T, StageError> {
        self.map_err(|source| StageError { stage, source })
    }
}

/// Run configuration, deserialized from TOML. Only `[data]` is mandatory.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataSection,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub baseline: BaselineSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub benchmark: BenchmarkSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub csv: PathBuf,
    pub timestamp: String,
    pub features: Vec<String>,
    pub target: String,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
}

fn default_train_fraction() -> f64 {
    0.7
}

impl DataSection {
    pub fn schema(&self) -> CsvSchema {
        CsvSchema {
            timestamp: self.timestamp.clone(),
            features: self.features.clone(),
            target: self.target.clone(),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub learning_rate: Option<f64>,
    pub max_iters: Option<usize>,
    pub rel_tol: Option<f64>,
    pub init_alpha: Option<f64>,
    pub init_edge_weight: Option<f64>,
}

impl TrainSection {
    pub fn resolve(&self) -> TrainConfig {
        let d = TrainConfig::default();
        TrainConfig {
            learning_rate: self.learning_rate.unwrap_or(d.learning_rate),
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            rel_tol: self.rel_tol.unwrap_or(d.rel_tol),
            init_alpha: self.init_alpha.unwrap_or(d.init_alpha),
            init_edge_weight: self.init_edge_weight.unwrap_or(d.init_edge_weight),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineSection {
    pub kernel_param: Option<f64>,
    pub reg_coeff: Option<f64>,
}

impl BaselineSection {
    pub fn resolve(&self) -> Result<ElmConfig> {
        ElmConfig::new(
            self.kernel_param.unwrap_or(1.0),
            self.reg_coeff.unwrap_or(100.0),
        )
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub model_prefix: Option<PathBuf>,
    pub report_text: Option<PathBuf>,
    pub report_csv: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkSection {
    #[serde(default)]
    pub scenario: Vec<ScenarioSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub kernel_param: f64,
    pub reg_coeff: f64,
}

pub fn read_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))
}

fn model_path(prefix: &Path, edge: EdgeSpec) -> PathBuf {
    PathBuf::from(format!("{}-{}.toml", prefix.display(), edge.label()))
}

/// Fits the full pipeline on the training split and writes one model file
/// per requested edge variant, named `<prefix>-chain.toml` / `<prefix>-dm.toml`.
pub fn cmd_train(config_path: &Path, edges: &[EdgeSpec]) -> std::result::Result<(), StageError> {
    let config = read_config(config_path).stage("config")?;
    let schema = config.data.schema();
    let data = load_csv(&config.data.csv, &schema).stage("data")?;
    let (train, _) = chronological_split(&data, config.data.train_fraction).stage("split")?;
    let scaling = scale_fit(&train);
    let scaled = scale_apply(&train, &scaling).stage("scale")?;

    let elm_config = config.baseline.resolve().stage("config")?;
    let baseline = train_kernel_elm(&scaled, &elm_config).stage("baseline")?;
    let train_preds = predict_kernel_elm(&baseline, scaled.features()).stage("baseline")?;
    let outputs = BaselineOutputs::from_column(train_preds).stage("baseline")?;

    let train_config = config.train.resolve();
    let prefix = config
        .output
        .model_prefix
        .clone()
        .unwrap_or_else(|| PathBuf::from("model"));
    for &edge in edges {
        let fitted = fit(scaled.targets(), &outputs, edge, &train_config).stage("fit")?;
        let model = TrainedModel::new(
            schema.clone(),
            scaling.clone(),
            edge,
            fitted.params.clone(),
            baseline.clone(),
        )
        .stage("fit")?;
        let path = model_path(&prefix, edge);
        model.save(&path).stage("write")?;
        println!(
            "{}: log-likelihood {:.6} after {} iterations (converged: {}), alpha {:.6}, edge_weight {:.6}, wrote {}",
            edge.label(),
            fitted.log_likelihood,
            fitted.iterations,
            fitted.converged,
            fitted.params.alpha[0],
            fitted.params.edge_weight,
            path.display()
        );
    }
    Ok(())
}

/// Applies a saved model to a feature CSV. The output has one row per input
/// row: timestamp, unscaled baseline prediction, unscaled CRF prediction and
/// the predictive standard deviation in target units.
pub fn cmd_predict(
    model_file: &Path,
    input: &Path,
    output: &Path,
) -> std::result::Result<(), StageError> {
    let model = TrainedModel::load(model_file).stage("model")?;
    let (timestamps, mut features) = load_features_csv(input, &model.schema).stage("data")?;
    for (j, range) in model.scaling.feature_ranges.iter().enumerate() {
        for i in 0..features.nrows() {
            features[(i, j)] = range.scale(features[(i, j)]);
        }
    }
    let baseline_scaled = predict_kernel_elm(&model.baseline, &features).stage("baseline")?;
    let outputs = BaselineOutputs::from_column(baseline_scaled.clone()).stage("baseline")?;
    let mean = predict(&outputs, &model.params, model.edge).stage("predict")?;
    let std = predictive_variance(&outputs, &model.params, model.edge)
        .stage("predict")?
        .map(f64::sqrt);

    let target = &model.scaling.target_range;
    let write = || -> Result<()> {
        let mut writer = csv::Writer::from_path(output)?;
        writer.write_record(["timestamp", "baseline", "prediction", "predictive_std"])?;
        for i in 0..timestamps.len() {
            writer.write_record([
                timestamps[i].clone(),
                target.unscale(baseline_scaled[i]).to_string(),
                target.unscale(mean[i]).to_string(),
                target.unscale_spread(std[i]).to_string(),
            ])?;
        }
        writer.flush()?;
        Ok(())
    };
    write().stage("write")?;
    println!(
        "wrote {} predictions to {}",
        timestamps.len(),
        output.display()
    );
    Ok(())
}

/// Runs the scenario sweep on the configured dataset and writes the text and
/// CSV reports. `jobs` caps the worker threads; `dump_grid` additionally
/// writes the scenario grid as CSV.
pub fn cmd_benchmark(
    config_path: &Path,
    jobs: Option<usize>,
    dump_grid: Option<&Path>,
) -> std::result::Result<(), StageError> {
    let config = read_config(config_path).stage("config")?;
    let schema = config.data.schema();
    let data = load_csv(&config.data.csv, &schema).stage("data")?;
    let (train, test) = chronological_split(&data, config.data.train_fraction).stage("split")?;

    let grid: Vec<ElmConfig> = if config.benchmark.scenario.is_empty() {
        scenario_grid()
    } else {
        config
            .benchmark
            .scenario
            .iter()
            .map(|s| ElmConfig::new(s.kernel_param, s.reg_coeff))
            .collect::<Result<_>>()
            .stage("config")?
    };
    if let Some(path) = dump_grid {
        let mut text = String::from("scenario,kernel_param,reg_coeff\n");
        for (i, c) in grid.iter().enumerate() {
            text.push_str(&format!(
                "{},{},{}\n",
                i + 1,
                c.kernel_param(),
                c.reg_coeff()
            ));
        }
        std::fs::write(path, text)
            .map_err(Error::from)
            .stage("write")?;
    }

    let train_config = config.train.resolve();
    let report = match jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot build a {n}-thread pool: {e}")))
                .stage("benchmark")?;
            pool.install(|| run_scenarios(&train, &test, &grid, &train_config))
                .stage("benchmark")?
        }
        None => run_scenarios(&train, &test, &grid, &train_config).stage("benchmark")?,
    };

    let text_path = config
        .output
        .report_text
        .clone()
        .unwrap_or_else(|| PathBuf::from("report.txt"));
    let csv_path = config
        .output
        .report_csv
        .clone()
        .unwrap_or_else(|| PathBuf::from("report.csv"));
    let text = report.to_text();
    std::fs::write(&text_path, &text)
        .map_err(Error::from)
        .stage("write")?;
    std::fs::write(&csv_path, report.to_csv())
        .map_err(Error::from)
        .stage("write")?;
    print!("{text}");
    println!("wrote {} and {}", text_path.display(), csv_path.display());
    Ok(())
}
