//! End-to-end runs of the public API: generate a stream, run regimes,
//! aggregate metrics, round-trip through CSV.

use fairstream::data::{generate, index_schema, ingest_csv, write_csv, DriftSpec, TrajectorySpec};
use fairstream::metrics::{mean_present, TemporalReport};
use fairstream::regimes::{run_regime, sweep_alpha, ExperimentConfig, RegimeId};
use fairstream::DriftSpec64;

fn fair_stationary_stream() -> Vec<fairstream::Batch64> {
    // Group and label are independent, so there is no bias to correct and
    // every regime should behave fairly.
    let spec = DriftSpec64 {
        n_batches: 6,
        batch_size: 2000,
        dim: 3,
        trajectory: TrajectorySpec::Stationary { table: [[0.25, 0.25], [0.25, 0.25]] },
        class_separation: 2.0,
        seed: 21,
    };
    generate(&spec).unwrap()
}

#[test]
fn all_regimes_stay_fair_on_an_unbiased_stationary_stream() {
    let stream = fair_stationary_stream();
    for regime in RegimeId::ALL {
        let series = run_regime(&stream, &ExperimentConfig::new(regime)).unwrap();
        assert_eq!(series.per_step().len(), stream.len() - 1, "{regime}");
        for step in series.per_step() {
            let gap = step.delta_sp.expect("both groups present in every batch");
            assert!(gap <= 0.05, "{regime} at t={}: delta_sp = {gap}", step.time_index);
            let auc = step.auc.expect("both labels present in every batch");
            assert!(auc > 0.8, "{regime} at t={}: auc = {auc}", step.time_index);
        }
    }
}

#[test]
fn temporal_report_summarizes_a_generated_run() {
    let stream = fair_stationary_stream();
    let series = run_regime(&stream, &ExperimentConfig::new(RegimeId::Dynamic)).unwrap();
    let deltas = series.delta_series(Default::default());
    let report = TemporalReport::from_deltas(&deltas).unwrap();
    assert_eq!(report.n_steps, 5);
    assert_eq!(report.n_missing, 0);
    assert!(report.mb <= 0.05);
    assert!(report.mbd <= 2.0 * report.mb + 1e-15);
    assert!(report.ts <= report.mbd * 4.0 / 5.0 + 1e-15);
}

#[test]
fn sweep_endpoint_reproduces_dynamic_on_a_drifting_stream() {
    let mut spec: DriftSpec<f64> = DriftSpec::default_linear_drift();
    spec.n_batches = 5;
    spec.batch_size = 120;
    let stream = generate(&spec).unwrap();

    let rows = sweep_alpha(&stream, &ExperimentConfig::new(RegimeId::Abc), &[0.0, 1.0]).unwrap();
    let dynamic = run_regime(&stream, &ExperimentConfig::new(RegimeId::Dynamic)).unwrap();
    let steps = dynamic.per_step();
    assert_eq!(rows[1].mean_delta_sp, mean_present(steps.iter().map(|s| s.delta_sp)));
    assert_eq!(rows[1].mean_auc, mean_present(steps.iter().map(|s| s.auc)));
    // The fully forward-looking endpoint is a different experiment.
    assert_ne!(rows[0].mean_delta_sp, rows[1].mean_delta_sp);
}

#[test]
fn csv_round_trip_preserves_regime_output_bit_for_bit() {
    let mut spec: DriftSpec<f64> = DriftSpec::default_linear_drift();
    spec.n_batches = 4;
    spec.batch_size = 100;
    let stream = generate(&spec).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("stream.csv");
    write_csv(&path, &stream).unwrap();
    let report = ingest_csv::<f64>(&path, &index_schema(spec.dim)).unwrap();
    assert_eq!(report.rows_read, 400);
    assert_eq!(report.rows_dropped, 0);

    let config = ExperimentConfig::new(RegimeId::Abc);
    let original = run_regime(&stream, &config).unwrap();
    let reloaded = run_regime(&report.batches, &config).unwrap();
    assert_eq!(original.per_step(), reloaded.per_step());
}
