//! Writers for the machine-readable result files.
//!
//! Everything here is deterministic: float cells use the shortest
//! round-trippable representation, map keys are sorted, and row order is
//! fixed by the input. Two runs of the same config produce byte-identical
//! files.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use fairstream::metrics::{mean_present, DeltaMetric, TemporalReport};
use fairstream::regimes::AlphaRow;
use fairstream::stream::{MetricSeries, StepMetrics};
use fairstream::{Error, Result};

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.display().to_string(), source }
}

fn float_cell(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

/// One row per regime per evaluated step, missing metrics flagged by name.
pub fn write_per_step(path: &Path, runs: &[MetricSeries<f64>]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => io_error(path, io),
        other => Error::Serde(format!("{other:?}")),
    })?;
    writer
        .write_record(["regime", "t", "auc", "delta_sp", "delta_tpr", "delta_fpr", "missing_flags"])
        .map_err(|e| Error::Serde(e.to_string()))?;
    for series in runs {
        for step in series.per_step() {
            writer
                .write_record([
                    series.regime().name().to_string(),
                    step.time_index.to_string(),
                    float_cell(step.auc),
                    float_cell(step.delta_sp),
                    float_cell(step.delta_tpr),
                    float_cell(step.delta_fpr),
                    step.missing_names().join(";"),
                ])
                .map_err(|e| Error::Serde(e.to_string()))?;
        }
    }
    writer.flush().map_err(|e| io_error(path, e))
}

/// Across-step means for one regime, with explicit exclusion counts and the
/// temporal aggregation of the configured gap metric.
#[derive(Debug, Clone, Serialize)]
pub struct RegimeSummary {
    pub n_steps: usize,
    pub mean_auc: Option<f64>,
    pub mean_delta_sp: Option<f64>,
    pub mean_delta_tpr: Option<f64>,
    pub mean_delta_fpr: Option<f64>,
    /// Steps excluded from each mean because the metric was undefined.
    pub missing: BTreeMap<String, usize>,
    /// `None` when fewer than two steps carried the gap metric.
    pub temporal: Option<TemporalReport<f64>>,
}

impl RegimeSummary {
    pub fn from_series(series: &MetricSeries<f64>, metric: DeltaMetric) -> Self {
        let steps = series.per_step();
        let count_missing = |get: fn(&StepMetrics<f64>) -> Option<f64>| {
            steps.iter().filter(|s| get(s).is_none()).count()
        };
        let mut missing = BTreeMap::new();
        missing.insert("auc".to_string(), count_missing(|s| s.auc));
        missing.insert("delta_sp".to_string(), count_missing(|s| s.delta_sp));
        missing.insert("delta_tpr".to_string(), count_missing(|s| s.delta_tpr));
        missing.insert("delta_fpr".to_string(), count_missing(|s| s.delta_fpr));
        RegimeSummary {
            n_steps: steps.len(),
            mean_auc: mean_present(steps.iter().map(|s| s.auc)),
            mean_delta_sp: mean_present(steps.iter().map(|s| s.delta_sp)),
            mean_delta_tpr: mean_present(steps.iter().map(|s| s.delta_tpr)),
            mean_delta_fpr: mean_present(steps.iter().map(|s| s.delta_fpr)),
            missing,
            temporal: TemporalReport::from_deltas(&series.delta_series(metric)).ok(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub config_hash: String,
    pub delta_metric: DeltaMetric,
    pub regimes: BTreeMap<String, RegimeSummary>,
}

impl Summary {
    pub fn build(config_hash: &str, metric: DeltaMetric, runs: &[MetricSeries<f64>]) -> Self {
        let regimes = runs
            .iter()
            .map(|s| (s.regime().name().to_string(), RegimeSummary::from_series(s, metric)))
            .collect();
        Summary { config_hash: config_hash.to_string(), delta_metric: metric, regimes }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Serde(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| io_error(path, e))
}

/// One row per swept blend coefficient.
pub fn write_sweep(path: &Path, rows: &[AlphaRow<f64>]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => io_error(path, io),
        other => Error::Serde(format!("{other:?}")),
    })?;
    writer
        .write_record(["alpha", "mean_auc", "mean_delta_sp", "mean_delta_tpr", "mean_delta_fpr"])
        .map_err(|e| Error::Serde(e.to_string()))?;
    for row in rows {
        writer
            .write_record([
                row.alpha.to_string(),
                float_cell(row.mean_auc),
                float_cell(row.mean_delta_sp),
                float_cell(row.mean_delta_tpr),
                float_cell(row.mean_delta_fpr),
            ])
            .map_err(|e| Error::Serde(e.to_string()))?;
    }
    writer.flush().map_err(|e| io_error(path, e))
}

#[derive(Debug, Serialize)]
pub struct SweepSummary {
    pub config_hash: String,
    pub delta_metric: DeltaMetric,
    pub n_alphas: usize,
    /// The row minimizing the configured gap metric's mean; ties go to the
    /// smaller alpha.
    pub best: AlphaRow<f64>,
    pub rows: Vec<AlphaRow<f64>>,
}

impl SweepSummary {
    pub fn build(config_hash: &str, metric: DeltaMetric, rows: &[AlphaRow<f64>]) -> Self {
        let key = |row: &AlphaRow<f64>| match metric {
            DeltaMetric::StatisticalParity => row.mean_delta_sp,
            DeltaMetric::EqualOpportunity => row.mean_delta_tpr,
            DeltaMetric::PredictiveEquality => row.mean_delta_fpr,
        };
        let best = *rows
            .iter()
            .filter(|r| key(r).is_some())
            .min_by(|a, b| {
                key(a).partial_cmp(&key(b)).unwrap().then(a.alpha.partial_cmp(&b.alpha).unwrap())
            })
            .unwrap_or(&rows[0]);
        SweepSummary {
            config_hash: config_hash.to_string(),
            delta_metric: metric,
            n_alphas: rows.len(),
            best,
            rows: rows.to_vec(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use fairstream::regimes::RegimeId;

    fn step(t: usize, sp: Option<f64>) -> StepMetrics<f64> {
        StepMetrics {
            time_index: t,
            auc: Some(0.9),
            delta_sp: sp,
            delta_tpr: None,
            delta_fpr: Some(0.1),
        }
    }

    #[test]
    fn per_step_file_encodes_missing_metrics_as_flags() {
        let series =
            MetricSeries::new(RegimeId::Dynamic, vec![step(2, Some(0.25)), step(3, None)]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("per_step.csv");
        write_per_step(&path, &[series]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "regime,t,auc,delta_sp,delta_tpr,delta_fpr,missing_flags");
        assert_eq!(lines[1], "dynamic,2,0.9,0.25,,0.1,delta_tpr");
        assert_eq!(lines[2], "dynamic,3,0.9,,,0.1,delta_sp;delta_tpr");
    }

    #[test]
    fn summary_counts_exclusions_per_metric() {
        let series = MetricSeries::new(
            RegimeId::Dynamic,
            vec![step(2, Some(0.3)), step(3, None), step(4, Some(0.1))],
        )
        .unwrap();
        let summary = RegimeSummary::from_series(&series, DeltaMetric::StatisticalParity);
        assert_eq!(summary.n_steps, 3);
        assert_eq!(summary.mean_delta_sp, Some(0.2));
        assert_eq!(summary.mean_delta_tpr, None);
        assert_eq!(summary.missing["delta_sp"], 1);
        assert_eq!(summary.missing["delta_tpr"], 3);
        assert_eq!(summary.missing["auc"], 0);
        let temporal = summary.temporal.unwrap();
        assert_eq!(temporal.n_missing, 1);
        assert_eq!(temporal.mb, 0.3);
    }

    #[test]
    fn summary_temporal_is_null_when_underdetermined() {
        let series =
            MetricSeries::new(RegimeId::Vanilla, vec![step(2, None), step(3, None)]).unwrap();
        let summary = RegimeSummary::from_series(&series, DeltaMetric::StatisticalParity);
        assert!(summary.temporal.is_none());
        assert_eq!(summary.mean_delta_sp, None);
    }

    #[test]
    fn sweep_best_breaks_ties_toward_smaller_alpha() {
        let row = |alpha: f64, sp: f64| AlphaRow {
            alpha,
            mean_auc: Some(0.9),
            mean_delta_sp: Some(sp),
            mean_delta_tpr: Some(0.2),
            mean_delta_fpr: Some(0.2),
        };
        let rows = vec![row(0.0, 0.3), row(0.5, 0.2), row(1.0, 0.2)];
        let summary = SweepSummary::build("h", DeltaMetric::StatisticalParity, &rows);
        assert_eq!(summary.best.alpha, 0.5);
        assert_eq!(summary.n_alphas, 3);
    }
}
