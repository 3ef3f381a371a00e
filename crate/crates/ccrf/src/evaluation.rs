//! Benchmark harness: MAPE scoring and the multi-scenario comparison of the
//! raw ELM baseline against both CRF variants.

use nalgebra::DVector;
use rayon::prelude::*;

use crate::dataset::{scale_apply, scale_fit, ScalingParams, TimeSeriesDataset};
use crate::elm::{predict_kernel_elm, train_kernel_elm, ElmConfig};
use crate::error::{Error, Result};
use crate::gcrf::{BaselineOutputs, EdgeSpec};
use crate::inference::predict;
use crate::training::{fit, TrainConfig};

/// The three methods compared per scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Elm,
    Ccrf,
    DmCcrf,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Elm => "ELM",
            Method::Ccrf => "CCRF",
            Method::DmCcrf => "DM-CCRF",
        })
    }
}

/// Mean absolute percentage error, `100/N * sum |y - yhat| / |y|`, in the
/// units of its inputs. A zero target makes the measure undefined.
pub fn mape(y_true: &DVector<f64>, y_pred: &DVector<f64>) -> Result<f64> {
    if y_true.is_empty() {
        return Err(Error::EmptyInput("MAPE of an empty vector".into()));
    }
    if y_true.len() != y_pred.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} targets but {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    let mut sum = 0.0;
    for i in 0..y_true.len() {
        if y_true[i] == 0.0 {
            return Err(Error::ZeroTarget(i));
        }
        sum += ((y_true[i] - y_pred[i]) / y_true[i]).abs();
    }
    Ok(100.0 * sum / y_true.len() as f64)
}

/// Picks the per-scenario winner by lowest MAPE; exact ties go to the more
/// structured model (DM-CCRF over CCRF over ELM).
pub fn winner(elm: f64, ccrf: f64, dm_ccrf: f64) -> Method {
    if dm_ccrf <= ccrf && dm_ccrf <= elm {
        Method::DmCcrf
    } else if ccrf <= elm {
        Method::Ccrf
    } else {
        Method::Elm
    }
}

/// MAPE triple of one benchmark scenario plus derived comparison columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutcome {
    /// 1-based position in the scenario grid.
    pub scenario: usize,
    pub elm_mape: f64,
    pub ccrf_mape: f64,
    pub dm_ccrf_mape: f64,
    pub winner: Method,
    /// Positive when the chain CRF beats the raw baseline.
    pub elm_minus_ccrf: f64,
    /// Positive when the distance-to-mean CRF beats the raw baseline.
    pub elm_minus_dm: f64,
}

/// Full benchmark comparison: per-scenario rows, column averages (ELM,
/// CCRF, DM-CCRF order) and the head-to-head win counts.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<ScenarioOutcome>,
    pub averages: [f64; 3],
    pub wins: [usize; 3],
}

impl EvalReport {
    pub fn from_triples(triples: &[(f64, f64, f64)]) -> Result<Self> {
        if triples.is_empty() {
            return Err(Error::EmptyInput("no scenario outcomes".into()));
        }
        for (i, t) in triples.iter().enumerate() {
            if !(t.0.is_finite() && t.1.is_finite() && t.2.is_finite()) {
                return Err(Error::Scenario {
                    index: i + 1,
                    source: Box::new(Error::NonFiniteObjective(format!("MAPE triple {t:?}"))),
                });
            }
        }
        let rows: Vec<ScenarioOutcome> = triples
            .iter()
            .enumerate()
            .map(|(i, &(elm, ccrf, dm))| ScenarioOutcome {
                scenario: i + 1,
                elm_mape: elm,
                ccrf_mape: ccrf,
                dm_ccrf_mape: dm,
                winner: winner(elm, ccrf, dm),
                elm_minus_ccrf: elm - ccrf,
                elm_minus_dm: elm - dm,
            })
            .collect();
        let n = rows.len() as f64;
        let averages = [
            rows.iter().map(|r| r.elm_mape).sum::<f64>() / n,
            rows.iter().map(|r| r.ccrf_mape).sum::<f64>() / n,
            rows.iter().map(|r| r.dm_ccrf_mape).sum::<f64>() / n,
        ];
        let mut wins = [0usize; 3];
        for r in &rows {
            match r.winner {
                Method::Elm => wins[0] += 1,
                Method::Ccrf => wins[1] += 1,
                Method::DmCcrf => wins[2] += 1,
            }
        }
        Ok(EvalReport {
            rows,
            averages,
            wins,
        })
    }

    /// Human-readable comparison table.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("scenario       ELM      CCRF   DM-CCRF   winner\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{:>8}  {:>8.3}  {:>8.3}  {:>8.3}   {}\n",
                r.scenario, r.elm_mape, r.ccrf_mape, r.dm_ccrf_mape, r.winner
            ));
        }
        out.push_str(&format!(
            "{:>8}  {:>8.3}  {:>8.3}  {:>8.3}\n",
            "average", self.averages[0], self.averages[1], self.averages[2]
        ));
        out.push_str(&format!(
            "{:>8}  {:>8}  {:>8}  {:>8}\n",
            "wins", self.wins[0], self.wins[1], self.wins[2]
        ));
        out
    }

    /// Machine-readable form. Floats use Rust's shortest round-trip
    /// formatting, so identical results serialize identically.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "scenario,elm_mape,ccrf_mape,dm_ccrf_mape,winner,elm_minus_ccrf,elm_minus_dm\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.scenario,
                r.elm_mape,
                r.ccrf_mape,
                r.dm_ccrf_mape,
                r.winner,
                r.elm_minus_ccrf,
                r.elm_minus_dm
            ));
        }
        out.push_str(&format!(
            "average,{},{},{},,,\n",
            self.averages[0], self.averages[1], self.averages[2]
        ));
        out.push_str(&format!(
            "wins,{},{},{},,,\n",
            self.wins[0], self.wins[1], self.wins[2]
        ));
        out
    }
}

/// Runs the full comparison over a scenario grid.
///
/// Per scenario: train the kernel ELM on the scaled training split, fit both
/// CRF variants on the scaled training targets with the ELM's training
/// predictions as baseline, predict the test split, undo the target scaling
/// and score MAPE in original units. Scaling is fitted on the training split
/// only. Scenarios run in parallel; results keep grid order, so repeated
/// runs on the same inputs are bit-identical.
pub fn run_scenarios(
    train: &TimeSeriesDataset,
    test: &TimeSeriesDataset,
    grid: &[ElmConfig],
    train_config: &TrainConfig,
) -> Result<EvalReport> {
    if grid.is_empty() {
        return Err(Error::EmptyInput("scenario grid".into()));
    }
    let scaling = scale_fit(train);
    let scaled_train = scale_apply(train, &scaling)?;
    let scaled_test = scale_apply(test, &scaling)?;

    let triples: Vec<(f64, f64, f64)> = grid
        .par_iter()
        .enumerate()
        .map(|(i, config)| {
            run_one(
                &scaled_train,
                &scaled_test,
                test,
                &scaling,
                config,
                train_config,
            )
            .map_err(|e| Error::Scenario {
                index: i + 1,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    EvalReport::from_triples(&triples)
}

fn run_one(
    scaled_train: &TimeSeriesDataset,
    scaled_test: &TimeSeriesDataset,
    test: &TimeSeriesDataset,
    scaling: &ScalingParams,
    config: &ElmConfig,
    train_config: &TrainConfig,
) -> Result<(f64, f64, f64)> {
    let model = train_kernel_elm(scaled_train, config)?;
    let elm_train = predict_kernel_elm(&model, scaled_train.features())?;
    let elm_test = predict_kernel_elm(&model, scaled_test.features())?;
    let train_baseline = BaselineOutputs::from_column(elm_train)?;
    let test_baseline = BaselineOutputs::from_column(elm_test.clone())?;

    let unscale = |v: &DVector<f64>| v.map(|x| scaling.target_range.unscale(x));
    let elm_mape = mape(test.targets(), &unscale(&elm_test))?;

    let mut crf_mapes = [0.0f64; 2];
    for (slot, edge) in [EdgeSpec::ChainAdjacency, EdgeSpec::DistanceToMean]
        .into_iter()
        .enumerate()
    {
        let fitted = fit(scaled_train.targets(), &train_baseline, edge, train_config)?;
        let mean = predict(&test_baseline, &fitted.params, edge)?;
        crf_mapes[slot] = mape(test.targets(), &unscale(&mean))?;
    }
    Ok((elm_mape, crf_mapes[0], crf_mapes[1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::chronological_split;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    #[test]
    fn mape_of_exact_predictions_is_zero() {
        let y = DVector::from_column_slice(&[1.0, -2.0, 3.5]);
        assert_eq!(mape(&y, &y).unwrap(), 0.0);
    }

    #[test]
    fn mape_small_example_is_exact() {
        let y = DVector::from_column_slice(&[1.0, 2.0]);
        let p = DVector::from_column_slice(&[2.0, 1.0]);
        assert_eq!(mape(&y, &p).unwrap(), 75.0);
    }

    #[test]
    fn mape_rejects_zero_targets() {
        let y = DVector::from_column_slice(&[1.0, 0.0]);
        let p = DVector::from_column_slice(&[1.0, 1.0]);
        assert!(matches!(mape(&y, &p), Err(Error::ZeroTarget(1))));
    }

    #[test]
    fn ties_go_to_the_more_structured_model() {
        assert_eq!(winner(1.0, 1.0, 1.0), Method::DmCcrf);
        assert_eq!(winner(2.0, 1.0, 1.0), Method::DmCcrf);
        assert_eq!(winner(1.0, 1.0, 2.0), Method::Ccrf);
        assert_eq!(winner(1.0, 2.0, 3.0), Method::Elm);
    }

    #[test]
    fn report_aggregates_rows() {
        let report =
            EvalReport::from_triples(&[(10.0, 8.0, 6.0), (4.0, 2.0, 3.0), (5.0, 6.0, 7.0)])
                .unwrap();
        assert_eq!(report.rows.len(), 3);
        assert_relative_eq!(report.averages[0], 19.0 / 3.0, epsilon = 1e-15);
        assert_eq!(report.wins, [1, 1, 1]);
        assert_eq!(report.rows[0].winner, Method::DmCcrf);
        assert_relative_eq!(report.rows[0].elm_minus_dm, 4.0, epsilon = 1e-15);

        let csv = report.to_csv();
        assert!(csv.starts_with(
            "scenario,elm_mape,ccrf_mape,dm_ccrf_mape,winner,elm_minus_ccrf,elm_minus_dm\n"
        ));
        assert!(csv.contains("1,10,8,6,DM-CCRF,2,4\n"));
        assert!(csv.contains("wins,1,1,1,,,\n"));
        let text = report.to_text();
        assert!(text.contains("average"));
    }

    #[test]
    fn single_all_tied_row_gives_one_win_to_the_most_structured() {
        let report = EvalReport::from_triples(&[(10.0, 10.0, 10.0)]).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.wins, [0, 0, 1]);
        assert_eq!(report.averages, [10.0, 10.0, 10.0]);
    }

    #[test]
    fn symmetric_rows_split_the_wins() {
        let report = EvalReport::from_triples(&[(1.0, 2.0, 3.0), (3.0, 2.0, 1.0)]).unwrap();
        assert_eq!(report.wins, [1, 0, 1]);
        assert_eq!(report.averages, [2.0, 2.0, 2.0]);
    }

    fn toy_series(n: usize) -> TimeSeriesDataset {
        let timestamps = (0..n).map(|i| format!("t{i:03}")).collect();
        let xs: Vec<f64> = (0..n).map(|i| i as f64 * 0.25).collect();
        let features =
            DMatrix::from_fn(n, 2, |i, j| if j == 0 { xs[i].sin() } else { xs[i].cos() });
        let targets = DVector::from_fn(n, |i, _| 10.0 + 3.0 * xs[i].sin());
        TimeSeriesDataset::new(timestamps, features, targets).unwrap()
    }

    #[test]
    fn run_scenarios_produces_finite_report() {
        let data = toy_series(40);
        let (train, test) = chronological_split(&data, 0.7).unwrap();
        let grid = [
            ElmConfig::new(1.0, 100.0).unwrap(),
            ElmConfig::new(1e6, 10.0).unwrap(),
        ];
        let report = run_scenarios(&train, &test, &grid, &TrainConfig::default()).unwrap();
        assert_eq!(report.rows.len(), 2);
        for r in &report.rows {
            assert!(r.elm_mape.is_finite() && r.elm_mape >= 0.0);
            assert!(r.ccrf_mape.is_finite() && r.dm_ccrf_mape.is_finite());
        }
        // Same inputs, same report: the harness is deterministic.
        let again = run_scenarios(&train, &test, &grid, &TrainConfig::default()).unwrap();
        assert_eq!(report, again);
    }
}
