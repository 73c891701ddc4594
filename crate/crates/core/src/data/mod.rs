//! Stream acquisition: synthetic generation and CSV ingestion.

mod csv;
mod synthetic;

pub use self::csv::{index_schema, ingest_csv, write_csv, CsvSchema, IngestReport, TimeBucket};
pub use self::synthetic::{
    generate, largest_remainder, DriftSpec, TrajectorySpec, GROUP_OFFSET_FACTOR,
};
