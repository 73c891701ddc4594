//! `fairstream` - run fairness-over-time experiments from the command line.
//!
//! Three subcommands: `run` executes the configured training regimes over a
//! stream and writes per-step and summary metric tables; `sweep` re-runs the
//! anticipatory regime across a grid of blend coefficients; `gen` renders a
//! synthetic drift spec to CSV for later ingestion.
//!
//! Exit codes: 0 on success, 1 for usage or configuration problems, 2 for
//! data problems, 3 for numeric failure.

mod config;
mod manifest;
mod output;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use fairstream::data::{generate, index_schema, write_csv, DriftSpec};
use fairstream::regimes::{run_regime, sweep_alpha, ExperimentConfig, RegimeId};
use fairstream::{Error, ErrorCategory, Result};

use config::RunConfig;
use manifest::{now_rfc3339, RunManifest};
use output::{write_json, write_per_step, write_sweep, RegimeSummary, Summary, SweepSummary};

#[derive(Parser)]
#[command(name = "fairstream", version, about = "Fairness-over-time experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured regime over the stream and write metric tables.
    Run {
        /// Experiment configuration (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Override the configured output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the generator and trainer seeds.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Rerun the anticipatory regime across a grid of blend coefficients.
    Sweep {
        /// Experiment configuration (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated coefficients, e.g. "0.0,0.5,1.0".
        /// Defaults to 0.0 through 1.0 in steps of 0.1.
        #[arg(long)]
        alphas: Option<String>,
        /// Override the configured output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the generator and trainer seeds.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Generate a synthetic stream from a drift spec and write it as CSV.
    Gen {
        /// Drift spec (JSON).
        #[arg(long)]
        spec: PathBuf,
        /// Output directory (default: current directory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the spec's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = dispatch(cli) {
        eprintln!("error: {e}");
        let code = match e.category() {
            ErrorCategory::Config => 1,
            ErrorCategory::Data => 2,
            ErrorCategory::Numeric => 3,
        };
        std::process::exit(code);
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, out, seed } => cmd_run(&config, out, seed),
        Command::Sweep { config, alphas, out, seed } => {
            cmd_sweep(&config, alphas.as_deref(), out, seed)
        }
        Command::Gen { spec, out, seed } => cmd_gen(&spec, out, seed),
    }
}

fn create_output_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::Io { path: dir.display().to_string(), source: e })
}

fn fmt_opt(value: Option<f64>) -> String {
    value.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".to_string())
}

fn cmd_run(config_path: &Path, out: Option<PathBuf>, seed: Option<u64>) -> Result<()> {
    let started = now_rfc3339();
    let mut config = RunConfig::load(config_path)?;
    config.apply_overrides(seed, out);
    config.validate()?;
    let hash = config.hash();
    let stream = config.load_stream()?;

    let mut runs = Vec::with_capacity(config.regimes.len());
    for &regime in &config.regimes {
        runs.push(run_regime(&stream, &config.experiment(regime))?);
    }

    let dir = &config.output.dir;
    create_output_dir(dir)?;
    let per_step_path = dir.join("per_step.csv");
    let summary_path = dir.join("summary.json");
    write_per_step(&per_step_path, &runs)?;
    let summary = Summary::build(&hash, config.delta_metric, &runs);
    write_json(&summary_path, &summary)?;
    let manifest = RunManifest::new(
        hash,
        per_step_path.display().to_string(),
        summary_path.display().to_string(),
        started,
    );
    write_json(&dir.join("manifest.json"), &manifest)?;

    let column = config.delta_metric.column();
    for series in &runs {
        let regime_summary = RegimeSummary::from_series(series, config.delta_metric);
        let mean_delta = match config.delta_metric {
            fairstream::metrics::DeltaMetric::StatisticalParity => regime_summary.mean_delta_sp,
            fairstream::metrics::DeltaMetric::EqualOpportunity => regime_summary.mean_delta_tpr,
            fairstream::metrics::DeltaMetric::PredictiveEquality => regime_summary.mean_delta_fpr,
        };
        println!(
            "{:>8}: mean {column} = {}, mean auc = {}",
            series.regime().name(),
            fmt_opt(mean_delta),
            fmt_opt(regime_summary.mean_auc),
        );
    }
    println!("wrote {} and {}", per_step_path.display(), summary_path.display());
    Ok(())
}

/// Parses "0.0,0.5,1.0" into a list; range checking happens downstream.
fn parse_alphas(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>().map_err(|_| Error::InvalidConfig(format!("bad alpha value: {s:?}")))
        })
        .collect()
}

fn default_alpha_grid() -> Vec<f64> {
    (0..=10).map(|i| f64::from(i) / 10.0).collect()
}

fn cmd_sweep(
    config_path: &Path,
    alphas: Option<&str>,
    out: Option<PathBuf>,
    seed: Option<u64>,
) -> Result<()> {
    let started = now_rfc3339();
    let mut config = RunConfig::load(config_path)?;
    config.apply_overrides(seed, out);
    config.validate_for_sweep()?;
    let hash = config.hash();
    let alphas = match alphas {
        Some(text) => parse_alphas(text)?,
        None => default_alpha_grid(),
    };
    let stream = config.load_stream()?;

    let base = ExperimentConfig {
        regime: RegimeId::Abc,
        train: config.train,
        anticipation: config.anticipation,
        growing_window: config.growing_window,
        delta_metric: config.delta_metric,
    };
    let rows = sweep_alpha(&stream, &base, &alphas)?;

    let dir = &config.output.dir;
    create_output_dir(dir)?;
    let sweep_path = dir.join("sweep.csv");
    let summary_path = dir.join("sweep_summary.json");
    write_sweep(&sweep_path, &rows)?;
    let summary = SweepSummary::build(&hash, config.delta_metric, &rows);
    write_json(&summary_path, &summary)?;
    let manifest = RunManifest::new(
        hash,
        sweep_path.display().to_string(),
        summary_path.display().to_string(),
        started,
    );
    write_json(&dir.join("manifest.json"), &manifest)?;

    println!(
        "best alpha = {} (mean {} = {}) over {} grid points",
        summary.best.alpha,
        config.delta_metric.column(),
        fmt_opt(match config.delta_metric {
            fairstream::metrics::DeltaMetric::StatisticalParity => summary.best.mean_delta_sp,
            fairstream::metrics::DeltaMetric::EqualOpportunity => summary.best.mean_delta_tpr,
            fairstream::metrics::DeltaMetric::PredictiveEquality => summary.best.mean_delta_fpr,
        }),
        rows.len(),
    );
    println!("wrote {} and {}", sweep_path.display(), summary_path.display());
    Ok(())
}

fn cmd_gen(spec_path: &Path, out: Option<PathBuf>, seed: Option<u64>) -> Result<()> {
    let text = std::fs::read_to_string(spec_path)
        .map_err(|e| Error::InvalidConfig(format!("{}: {e}", spec_path.display())))?;
    let mut spec: DriftSpec<f64> = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidSpec(format!("{}: {e}", spec_path.display())))?;
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    let stream = generate(&spec)?;

    let dir = out.unwrap_or_else(|| PathBuf::from("."));
    create_output_dir(&dir)?;
    let csv_path = dir.join("stream.csv");
    let schema_path = dir.join("stream.schema.json");
    write_csv(&csv_path, &stream)?;
    write_json(&schema_path, &index_schema(spec.dim))?;

    let rows: usize = stream.iter().map(|b| b.len()).sum();
    println!(
        "wrote {} ({} rows, {} batches) and {}",
        csv_path.display(),
        rows,
        stream.len(),
        schema_path.display()
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_lists_parse_leniently_but_fail_loudly() {
        assert_eq!(parse_alphas("0.0,0.5,1.0").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_alphas(" 0.3 , 0.7 ").unwrap(), vec![0.3, 0.7]);
        assert_eq!(parse_alphas("1.0,").unwrap(), vec![1.0]);
        assert!(parse_alphas("0.5,x").is_err());
    }

    #[test]
    fn default_grid_matches_the_eleven_point_convention() {
        let grid = default_alpha_grid();
        assert_eq!(grid.len(), 11);
        assert_eq!(grid[0], 0.0);
        assert_eq!(grid[10], 1.0);
        assert!(grid.windows(2).all(|w| (w[1] - w[0] - 0.1).abs() < 1e-12));
    }
}
