//! Run configuration: one JSON document describing the data source, the
//! regimes to compare, training and anticipation settings, and where output
//! goes.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use fairstream::anticipate::AnticipationConfig;
use fairstream::data::{generate, ingest_csv, CsvSchema, DriftSpec};
use fairstream::learner::TrainConfig;
use fairstream::metrics::DeltaMetric;
use fairstream::regimes::{ExperimentConfig, RegimeId};
use fairstream::{Batch64, Error, Result};

/// Where the stream comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataConfig {
    /// Generate a stream from a drift spec.
    Synthetic(DriftSpec<f64>),
    /// Ingest a CSV file through a schema, given inline or as a file path.
    Csv { path: PathBuf, schema: SchemaRef },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SchemaRef {
    Path(PathBuf),
    Inline(Box<CsvSchema>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

/// The whole experiment in one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataConfig,
    pub regimes: Vec<RegimeId>,
    #[serde(default)]
    pub train: TrainConfig<f64>,
    /// Required when `regimes` includes `abc`, forbidden otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anticipation: Option<AnticipationConfig<f64>>,
    #[serde(default = "default_true")]
    pub growing_window: bool,
    #[serde(default)]
    pub delta_metric: DeltaMetric,
    pub output: OutputConfig,
}

fn default_true() -> bool {
    true
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
    }

    fn validate_data_and_train(&self) -> Result<()> {
        self.train.validate()?;
        if let DataConfig::Synthetic(spec) = &self.data {
            spec.validate()?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.regimes.is_empty() {
            return Err(Error::InvalidConfig("regimes must not be empty".into()));
        }
        for (i, regime) in self.regimes.iter().enumerate() {
            if self.regimes[..i].contains(regime) {
                return Err(Error::InvalidConfig(format!("regime {regime} listed twice")));
            }
        }
        let wants_abc = self.regimes.contains(&RegimeId::Abc);
        match (&self.anticipation, wants_abc) {
            (Some(a), true) => a.validate()?,
            (None, true) => {
                return Err(Error::InvalidConfig(
                    "the abc regime requires an anticipation section".into(),
                ))
            }
            (Some(_), false) => {
                return Err(Error::InvalidConfig(
                    "anticipation is configured but no regime uses it".into(),
                ))
            }
            (None, false) => {}
        }
        self.validate_data_and_train()
    }

    /// Sweeps always run the anticipatory regime, whatever `regimes` says,
    /// so the anticipation section is required unconditionally.
    pub fn validate_for_sweep(&self) -> Result<()> {
        match &self.anticipation {
            Some(a) => a.validate()?,
            None => {
                return Err(Error::InvalidConfig(
                    "sweeping requires an anticipation section".into(),
                ))
            }
        }
        self.validate_data_and_train()
    }

    /// Applies command-line overrides. The seed reaches both the generator
    /// and the trainer so one flag re-seeds the whole experiment.
    pub fn apply_overrides(&mut self, seed: Option<u64>, out: Option<PathBuf>) {
        if let Some(seed) = seed {
            self.train.seed = seed;
            if let DataConfig::Synthetic(spec) = &mut self.data {
                spec.seed = seed;
            }
        }
        if let Some(dir) = out {
            self.output.dir = dir;
        }
    }

    /// SHA-256 over the resolved config's canonical JSON form; stable across
    /// re-serialization because field order is fixed by the type.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&bytes);
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            use std::fmt::Write as _;
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    /// The per-regime view the engine consumes.
    pub fn experiment(&self, regime: RegimeId) -> ExperimentConfig<f64> {
        ExperimentConfig {
            regime,
            train: self.train,
            anticipation: (regime == RegimeId::Abc).then(|| self.anticipation.expect("validated")),
            growing_window: self.growing_window,
            delta_metric: self.delta_metric,
        }
    }

    /// Materializes the stream this config points at.
    pub fn load_stream(&self) -> Result<Vec<Batch64>> {
        match &self.data {
            DataConfig::Synthetic(spec) => generate(spec),
            DataConfig::Csv { path, schema } => {
                let schema = match schema {
                    SchemaRef::Inline(schema) => (**schema).clone(),
                    SchemaRef::Path(schema_path) => {
                        let text = std::fs::read_to_string(schema_path).map_err(|e| Error::Io {
                            path: schema_path.display().to_string(),
                            source: e,
                        })?;
                        serde_json::from_str(&text)
                            .map_err(|e| Error::Serde(format!("{}: {e}", schema_path.display())))?
                    }
                };
                let report = ingest_csv(path, &schema)?;
                if report.rows_dropped > 0 {
                    eprintln!(
                        "note: dropped {} of {} rows (unmapped or empty values)",
                        report.rows_dropped, report.rows_read
                    );
                }
                Ok(report.batches)
            }
        }
    }
}
