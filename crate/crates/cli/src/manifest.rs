//! Reproducibility bookkeeping written alongside every run.

use chrono::{SecondsFormat, Utc};
use serde::Serialize;

/// Records what produced the output files. The config hash plus the tool
/// version is enough to reproduce the metric files byte for byte; only the
/// two timestamps vary between identical runs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub per_step_path: String,
    pub summary_path: String,
    pub started: String,
    pub finished: String,
    pub tool_version: String,
}

pub fn now_rfc3339() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

impl RunManifest {
    pub fn new(
        config_hash: String,
        per_step_path: String,
        summary_path: String,
        started: String,
    ) -> Self {
        RunManifest {
            config_hash,
            per_step_path,
            summary_path,
            started,
            finished: now_rfc3339(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}
