//! Regression pin for the full benchmark sweep.
//!
//! Runs the complete pipeline (scaling, kernel baseline, both CRF variants,
//! MAPE scoring) on the default synthetic fixture over the full scenario
//! grid and compares every report entry against frozen values. Any change
//! in numerics, scenario ordering or aggregation shows up here first. The
//! tolerance of 1e-9 relative leaves room for platform math differences
//! while still catching real regressions.

use approx::assert_relative_eq;
use ccrf::dataset::chronological_split;
use ccrf::elm::scenario_grid;
use ccrf::evaluation::run_scenarios;
use ccrf::synthetic::{ar1_dataset, Ar1Config};
use ccrf::training::TrainConfig;

const FROZEN_TRIPLES: [(f64, f64, f64); 15] = [
    (
        6.638_409_997_217_447_5,
        6.637_315_521_553_965,
        6.638_706_788_334_454,
    ),
    (
        6.355_366_259_609_575,
        6.354_293_044_363_199_5,
        6.355_461_261_456_166,
    ),
    (
        6.462_797_508_022_585,
        6.461_730_923_842_505,
        6.462_863_742_444_916,
    ),
    (
        7.062_433_642_378_156,
        7.061_355_912_146_912_5,
        7.062_482_158_065_960_5,
    ),
    (
        7.413_725_365_587_453,
        7.412_818_421_361_46,
        7.413_736_944_647_916,
    ),
    (
        8.223_274_321_068_041,
        8.222_685_976_628_847,
        8.223_168_643_577_102,
    ),
    (
        8.937_637_249_326_958,
        8.937_222_879_952_72,
        8.937_469_538_686_027,
    ),
    (
        15.711_588_707_495_183,
        15.711_472_350_990_83,
        15.711_530_866_495_858,
    ),
    (
        21.160_557_164_128_86,
        21.160_557_124_694_698,
        21.160_557_139_037_08,
    ),
    (
        12.112_537_914_183_584,
        12.113_335_852_905_031,
        12.112_539_210_851_606,
    ),
    (
        12.116_994_027_023_564,
        12.118_589_542_604_122,
        12.116_996_621_095_877,
    ),
    (
        12.107_944_194_460_018,
        12.115_892_525_944_828,
        12.107_957_123_726_216,
    ),
    (
        12.091_100_093_476_323,
        12.106_910_373_852_64,
        12.091_125_832_150_903,
    ),
    (
        11.789_706_392_485_046,
        11.933_998_339_761_77,
        11.789_935_741_096_341,
    ),
    (
        9.735_906_975_710_096,
        9.736_079_732_830_712,
        9.736_816_109_309_336,
    ),
];

const FROZEN_AVERAGES: [f64; 3] = [
    10.527_998_654_144_86,
    10.538_950_568_228_95,
    10.528_089_848_065_052,
];

const FROZEN_WINS: [usize; 3] = [6, 9, 0];

#[test]
fn full_benchmark_sweep_matches_frozen_report() {
    let data = ar1_dataset(&Ar1Config::default()).unwrap();
    let (train, test) = chronological_split(&data, 0.7).unwrap();
    let report = run_scenarios(&train, &test, &scenario_grid(), &TrainConfig::default()).unwrap();

    assert_eq!(report.rows.len(), FROZEN_TRIPLES.len());
    for (row, &(elm, ccrf, dm)) in report.rows.iter().zip(FROZEN_TRIPLES.iter()) {
        assert_relative_eq!(row.elm_mape, elm, max_relative = 1e-9);
        assert_relative_eq!(row.ccrf_mape, ccrf, max_relative = 1e-9);
        assert_relative_eq!(row.dm_ccrf_mape, dm, max_relative = 1e-9);
        assert_eq!(row.elm_minus_ccrf, row.elm_mape - row.ccrf_mape);
        assert_eq!(row.elm_minus_dm, row.elm_mape - row.dm_ccrf_mape);
    }
    for (got, want) in report.averages.iter().zip(FROZEN_AVERAGES) {
        assert_relative_eq!(*got, want, max_relative = 1e-9);
    }
    assert_eq!(report.wins, FROZEN_WINS);
}
