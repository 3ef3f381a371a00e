//! Saving and loading trained pipelines.
//!
//! A model file is self-contained: it embeds the CSV schema, the fitted
//! scaling ranges, the CRF weights and the complete kernel baseline (its
//! training inputs and dual coefficients), so prediction needs nothing but
//! the file and a feature CSV. The format is TOML with floats written in
//! shortest round-trip form, making save/load lossless.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dataset::{CsvSchema, ScalingParams};
use crate::elm::{BaselineModel, ElmConfig};
use crate::error::{Error, Result};
use crate::gcrf::{EdgeSpec, GcrfParams};

const FORMAT_TAG: &str = "ccrf-model/1";

/// Everything needed to turn raw feature rows into predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub schema: CsvSchema,
    pub scaling: ScalingParams,
    pub edge: EdgeSpec,
    pub params: GcrfParams,
    pub baseline: BaselineModel,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    edge: String,
    schema: CsvSchema,
    scaling: ScalingParams,
    crf: CrfSection,
    baseline: BaselineSection,
}

#[derive(Serialize, Deserialize)]
struct CrfSection {
    alpha: Vec<f64>,
    edge_weight: f64,
}

#[derive(Serialize, Deserialize)]
struct BaselineSection {
    kernel_param: f64,
    reg_coeff: f64,
    dual_coeffs: Vec<f64>,
    train_inputs: Vec<Vec<f64>>,
}

impl TrainedModel {
    pub fn new(
        schema: CsvSchema,
        scaling: ScalingParams,
        edge: EdgeSpec,
        params: GcrfParams,
        baseline: BaselineModel,
    ) -> Result<Self> {
        if params.num_baselines() != 1 {
            return Err(Error::Model(format!(
                "a saved pipeline has exactly one baseline, got {} alpha weights",
                params.num_baselines()
            )));
        }
        if schema.features.len() != baseline.train_inputs().ncols() {
            return Err(Error::Model(format!(
                "schema names {} features, baseline was trained on {}",
                schema.features.len(),
                baseline.train_inputs().ncols()
            )));
        }
        if scaling.feature_ranges.len() != schema.features.len() {
            return Err(Error::Model(format!(
                "{} scaling ranges for {} feature columns",
                scaling.feature_ranges.len(),
                schema.features.len()
            )));
        }
        Ok(TrainedModel {
            schema,
            scaling,
            edge,
            params,
            baseline,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let inputs = self.baseline.train_inputs();
        let train_inputs: Vec<Vec<f64>> = (0..inputs.nrows())
            .map(|i| inputs.row(i).iter().copied().collect())
            .collect();
        let file = ModelFile {
            format: FORMAT_TAG.to_string(),
            edge: self.edge.label().to_string(),
            schema: self.schema.clone(),
            scaling: self.scaling.clone(),
            crf: CrfSection {
                alpha: self.params.alpha.clone(),
                edge_weight: self.params.edge_weight,
            },
            baseline: BaselineSection {
                kernel_param: self.baseline.config().kernel_param(),
                reg_coeff: self.baseline.config().reg_coeff(),
                dual_coeffs: self.baseline.dual_coeffs().iter().copied().collect(),
                train_inputs,
            },
        };
        let text = toml::to_string(&file).map_err(|e| Error::Model(e.to_string()))?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: ModelFile = toml::from_str(&text).map_err(|e| Error::Model(e.to_string()))?;
        if file.format != FORMAT_TAG {
            return Err(Error::Model(format!(
                "unsupported format {:?}, expected {FORMAT_TAG:?}",
                file.format
            )));
        }
        let edge: EdgeSpec = file.edge.parse()?;
        let params = GcrfParams::new(file.crf.alpha, file.crf.edge_weight)?;
        let config = ElmConfig::new(file.baseline.kernel_param, file.baseline.reg_coeff)?;
        let rows = file.baseline.train_inputs.len();
        if rows == 0 {
            return Err(Error::Model("baseline has no training inputs".into()));
        }
        let cols = file.baseline.train_inputs[0].len();
        if file.baseline.train_inputs.iter().any(|r| r.len() != cols) {
            return Err(Error::Model("ragged baseline training inputs".into()));
        }
        let flat: Vec<f64> = file.baseline.train_inputs.into_iter().flatten().collect();
        let train_inputs = DMatrix::from_row_slice(rows, cols, &flat);
        let baseline = BaselineModel::from_parts(
            config,
            train_inputs,
            DVector::from_vec(file.baseline.dual_coeffs),
        )?;
        TrainedModel::new(file.schema, file.scaling, edge, params, baseline)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{scale_apply, scale_fit, TimeSeriesDataset};
    use crate::elm::train_kernel_elm;
    use crate::gcrf::BaselineOutputs;
    use crate::inference::predict;
    use crate::synthetic::{ar1_dataset, ar1_schema, Ar1Config};
    use crate::training::{fit, TrainConfig};

    fn trained_on_fixture() -> (TrainedModel, TimeSeriesDataset) {
        let data = ar1_dataset(&Ar1Config {
            len: 40,
            ..Ar1Config::default()
        })
        .unwrap();
        let scaling = scale_fit(&data);
        let scaled = scale_apply(&data, &scaling).unwrap();
        let config = ElmConfig::new(1.0, 100.0).unwrap();
        let baseline = train_kernel_elm(&scaled, &config).unwrap();
        let preds = crate::elm::predict_kernel_elm(&baseline, scaled.features()).unwrap();
        let outputs = BaselineOutputs::from_column(preds).unwrap();
        let fitted = fit(
            scaled.targets(),
            &outputs,
            EdgeSpec::DistanceToMean,
            &TrainConfig::default(),
        )
        .unwrap();
        let model = TrainedModel::new(
            ar1_schema(),
            scaling,
            EdgeSpec::DistanceToMean,
            fitted.params,
            baseline,
        )
        .unwrap();
        (model, scaled)
    }

    #[test]
    fn save_load_round_trip_is_lossless() {
        let (model, scaled) = trained_on_fixture();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.toml");
        model.save(&path).unwrap();
        let back = TrainedModel::load(&path).unwrap();
        assert_eq!(back, model);

        // Identical models must predict identically.
        let preds = crate::elm::predict_kernel_elm(&model.baseline, scaled.features()).unwrap();
        let outputs = BaselineOutputs::from_column(preds).unwrap();
        let a = predict(&outputs, &model.params, model.edge).unwrap();
        let b = predict(&outputs, &back.params, back.edge).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn format_tag_is_checked() {
        let (model, _) = trained_on_fixture();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.toml");
        model.save(&path).unwrap();
        let mangled = std::fs::read_to_string(&path)
            .unwrap()
            .replace(FORMAT_TAG, "something-else/9");
        std::fs::write(&path, mangled).unwrap();
        assert!(matches!(TrainedModel::load(&path), Err(Error::Model(_))));
    }

    #[test]
    fn multi_baseline_params_are_rejected() {
        let (model, _) = trained_on_fixture();
        let params = GcrfParams::new(vec![1.0, 2.0], 0.5).unwrap();
        assert!(matches!(
            TrainedModel::new(
                model.schema.clone(),
                model.scaling.clone(),
                model.edge,
                params,
                model.baseline.clone()
            ),
            Err(Error::Model(_))
        ));
    }
}
