//! Kernel extreme learning machine, the unstructured baseline regressor.
//!
//! The kernelized form never materializes a random hidden layer: with an RBF
//! kernel `k(u, v) = exp(-||u - v||^2 / kernel_param)` and Gram matrix
//! `K` over the training inputs, training solves
//! `(K + I / reg_coeff) c = y` and prediction is `sum_m k(x, x_m) c_m`.
//! Larger `reg_coeff` means *less* ridge shrinkage.

use nalgebra::{DMatrix, DVector};

use crate::dataset::TimeSeriesDataset;
use crate::error::{Error, Result};

/// Kernel width and regularization strength of one ELM configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElmConfig {
    kernel_param: f64,
    reg_coeff: f64,
}

impl ElmConfig {
    pub fn new(kernel_param: f64, reg_coeff: f64) -> Result<Self> {
        if !(kernel_param.is_finite() && kernel_param > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "kernel_param = {kernel_param} must be finite and positive"
            )));
        }
        if !(reg_coeff.is_finite() && reg_coeff > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "reg_coeff = {reg_coeff} must be finite and positive"
            )));
        }
        Ok(ElmConfig {
            kernel_param,
            reg_coeff,
        })
    }

    pub fn kernel_param(&self) -> f64 {
        self.kernel_param
    }

    pub fn reg_coeff(&self) -> f64 {
        self.reg_coeff
    }
}

/// A trained kernel ELM: the training inputs plus their dual coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineModel {
    config: ElmConfig,
    train_inputs: DMatrix<f64>,
    dual_coeffs: DVector<f64>,
}

impl BaselineModel {
    /// Reassembles a model from stored parts, revalidating shapes.
    pub fn from_parts(
        config: ElmConfig,
        train_inputs: DMatrix<f64>,
        dual_coeffs: DVector<f64>,
    ) -> Result<Self> {
        if train_inputs.nrows() == 0 || train_inputs.ncols() == 0 {
            return Err(Error::EmptyInput("baseline training inputs".into()));
        }
        if dual_coeffs.len() != train_inputs.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "{} dual coefficients for {} training rows",
                dual_coeffs.len(),
                train_inputs.nrows()
            )));
        }
        Ok(BaselineModel {
            config,
            train_inputs,
            dual_coeffs,
        })
    }

    pub fn config(&self) -> &ElmConfig {
        &self.config
    }

    pub fn train_inputs(&self) -> &DMatrix<f64> {
        &self.train_inputs
    }

    pub fn dual_coeffs(&self) -> &DVector<f64> {
        &self.dual_coeffs
    }
}

/// Gaussian RBF kernel `exp(-||u - v||^2 / kernel_param)`.
pub fn rbf_kernel(u: &[f64], v: &[f64], kernel_param: f64) -> Result<f64> {
    if u.is_empty() {
        return Err(Error::EmptyInput("kernel arguments".into()));
    }
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch(format!(
            "kernel arguments of length {} and {}",
            u.len(),
            v.len()
        )));
    }
    if !(kernel_param.is_finite() && kernel_param > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "kernel_param = {kernel_param} must be finite and positive"
        )));
    }
    let sq: f64 = u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((-sq / kernel_param).exp())
}

fn row(m: &DMatrix<f64>, i: usize) -> Vec<f64> {
    m.row(i).iter().copied().collect()
}

/// Solves the regularized kernel system for the dual coefficients.
pub fn train_kernel_elm(train: &TimeSeriesDataset, config: &ElmConfig) -> Result<BaselineModel> {
    let n = train.len();
    let rows: Vec<Vec<f64>> = (0..n).map(|i| row(train.features(), i)).collect();
    let mut gram = DMatrix::zeros(n, n);
    for i in 0..n {
        gram[(i, i)] = 1.0 + 1.0 / config.reg_coeff;
        for j in (i + 1)..n {
            let k = rbf_kernel(&rows[i], &rows[j], config.kernel_param)?;
            gram[(i, j)] = k;
            gram[(j, i)] = k;
        }
    }
    let chol = nalgebra::Cholesky::new(gram).ok_or_else(|| {
        Error::SolveFailure("regularized kernel Gram matrix is not positive definite".into())
    })?;
    let dual_coeffs = chol.solve(train.targets());
    if dual_coeffs.iter().any(|v| !v.is_finite()) {
        return Err(Error::SolveFailure(
            "dual coefficients are non-finite".into(),
        ));
    }
    BaselineModel::from_parts(*config, train.features().clone(), dual_coeffs)
}

/// Predicts one value per query row: `sum_m k(x, x_m) c_m`.
pub fn predict_kernel_elm(model: &BaselineModel, query: &DMatrix<f64>) -> Result<DVector<f64>> {
    if query.nrows() == 0 {
        return Err(Error::EmptyInput("query matrix".into()));
    }
    if query.ncols() != model.train_inputs.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "query has {} features, model was trained on {}",
            query.ncols(),
            model.train_inputs.ncols()
        )));
    }
    let m = model.train_inputs.nrows();
    let train_rows: Vec<Vec<f64>> = (0..m).map(|i| row(&model.train_inputs, i)).collect();
    let mut out = DVector::zeros(query.nrows());
    for q in 0..query.nrows() {
        let x = row(query, q);
        let mut acc = 0.0;
        for (i, t) in train_rows.iter().enumerate() {
            acc += rbf_kernel(&x, t, model.config.kernel_param)? * model.dual_coeffs[i];
        }
        out[q] = acc;
    }
    Ok(out)
}

/// The fixed 15-configuration sweep used by the benchmark harness: a narrow
/// kernel with regularization loosening from strong to negligible, then a
/// very wide kernel over a shorter regularization ramp.
pub fn scenario_grid() -> Vec<ElmConfig> {
    let narrow = [
        1.0, 5.0, 10.0, 50.0, 100.0, 500.0, 1000.0, 10000.0, 1000000.0,
    ];
    let wide = [5.0, 10.0, 50.0, 100.0, 1000.0, 10000.0];
    narrow
        .iter()
        .map(|&c| (1.0, c))
        .chain(wide.iter().map(|&c| (1000000.0, c)))
        .map(|(kp, c)| ElmConfig::new(kp, c).expect("grid constants are valid"))
        .collect()
}
