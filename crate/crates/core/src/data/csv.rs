//! CSV ingestion and export.
//!
//! Real-world tables rarely arrive as clean binary columns, so ingestion is
//! schema-driven: the caller says which columns hold time, group, and label,
//! and how raw strings map onto {0, 1}. Rows whose group or label value is
//! empty or unmapped are dropped and counted rather than failing the whole
//! file; rows that are outright malformed (unparseable numbers or time
//! values) abort with the offending row number, since silently skipping them
//! would hide data corruption.
//!
//! Time values become consecutive 1-based batch indices by sorting the
//! distinct observed buckets, so gaps in the calendar do not produce gaps in
//! the stream.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::stream::{Batch, Instance};

/// Granularity at which raw time values are grouped into batches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeBucket {
    /// Year and month (the first two digit runs in the value, in that
    /// order): "2014-05", "2014/5/30", and "2014 May 05" all land in the
    /// same bucket.
    Monthly,
    /// Year only: the first digit run in the value.
    Yearly,
    /// The value itself is already an integer batch index.
    Index,
}

/// Describes how to read a CSV file into a stream of batches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub time_column: String,
    pub time_bucket: TimeBucket,
    pub sensitive_column: String,
    /// Raw cell text to group bit, e.g. {"female": 0, "male": 1}.
    pub sensitive_map: BTreeMap<String, u8>,
    pub label_column: String,
    pub label_map: BTreeMap<String, u8>,
    pub feature_columns: Vec<String>,
}

impl CsvSchema {
    pub fn validate(&self) -> Result<()> {
        if self.feature_columns.is_empty() {
            return Err(Error::InvalidSpec("schema needs at least one feature column".into()));
        }
        for (name, map) in [("sensitive_map", &self.sensitive_map), ("label_map", &self.label_map)]
        {
            if map.is_empty() {
                return Err(Error::InvalidSpec(format!("{name} must not be empty")));
            }
            if let Some((k, v)) = map.iter().find(|(_, v)| **v > 1) {
                return Err(Error::InvalidSpec(format!("{name}[{k:?}] = {v}, must be 0 or 1")));
            }
        }
        Ok(())
    }
}

/// The outcome of one ingestion pass.
#[derive(Debug, Clone, PartialEq)]
pub struct IngestReport<F: Scalar> {
    pub batches: Vec<Batch<F>>,
    /// Data rows inspected (header excluded).
    pub rows_read: usize,
    /// Rows skipped because group or label was empty or unmapped.
    pub rows_dropped: usize,
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.display().to_string(), source }
}

/// Extracts runs of consecutive ASCII digits, in order of appearance.
fn digit_runs(text: &str) -> Vec<u64> {
    let mut runs = Vec::new();
    let mut current: Option<u64> = None;
    for c in text.chars() {
        match (c.to_digit(10), current) {
            (Some(d), Some(v)) => current = Some(v * 10 + d as u64),
            (Some(d), None) => current = Some(d as u64),
            (None, Some(v)) => {
                runs.push(v);
                current = None;
            }
            (None, None) => {}
        }
    }
    if let Some(v) = current {
        runs.push(v);
    }
    runs
}

/// Maps a raw time value to an orderable bucket key.
fn bucket_key(raw: &str, bucket: TimeBucket, row: usize) -> Result<u64> {
    let malformed = |message: String| Error::MalformedRow { row, message };
    match bucket {
        TimeBucket::Index => raw
            .trim()
            .parse::<u64>()
            .map_err(|_| malformed(format!("time value {raw:?} is not an integer index"))),
        TimeBucket::Yearly => digit_runs(raw)
            .first()
            .copied()
            .ok_or_else(|| malformed(format!("time value {raw:?} contains no year"))),
        TimeBucket::Monthly => {
            let runs = digit_runs(raw);
            let (year, month) = match runs.as_slice() {
                [y, m, ..] => (*y, *m),
                _ => return Err(malformed(format!("time value {raw:?} needs a year and a month"))),
            };
            if !(1..=12).contains(&month) {
                return Err(malformed(format!("month {month} out of range in {raw:?}")));
            }
            Ok(year * 12 + (month - 1))
        }
    }
}

fn column_index(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers.iter().position(|h| h == name).ok_or_else(|| Error::MissingColumn(name.to_string()))
}

/// Reads `path` according to `schema`. See the module docs for the
/// drop-versus-fail policy.
pub fn ingest_csv<F: Scalar>(path: &Path, schema: &CsvSchema) -> Result<IngestReport<F>> {
    schema.validate()?;
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => io_error(path, io),
        other => Error::Serde(format!("{other:?}")),
    })?;
    let headers = reader.headers().map_err(|e| Error::Serde(e.to_string()))?.clone();
    let time_idx = column_index(&headers, &schema.time_column)?;
    let sensitive_idx = column_index(&headers, &schema.sensitive_column)?;
    let label_idx = column_index(&headers, &schema.label_column)?;
    let feature_idx: Vec<usize> = schema
        .feature_columns
        .iter()
        .map(|name| column_index(&headers, name))
        .collect::<Result<_>>()?;

    let mut rows_read = 0usize;
    let mut rows_dropped = 0usize;
    // Bucket key -> rows, ordered by key so batch indices follow time.
    let mut grouped: BTreeMap<u64, Vec<(Vec<F>, u8, u8)>> = BTreeMap::new();

    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        rows_read += 1;
        let record = record.map_err(|e| Error::MalformedRow { row, message: e.to_string() })?;
        let field = |idx: usize| -> Result<&str> {
            record.get(idx).ok_or_else(|| Error::MalformedRow {
                row,
                message: format!("row has only {} fields", record.len()),
            })
        };

        let sensitive_raw = field(sensitive_idx)?.trim();
        let label_raw = field(label_idx)?.trim();
        let (sensitive, label) =
            match (schema.sensitive_map.get(sensitive_raw), schema.label_map.get(label_raw)) {
                (Some(&a), Some(&y)) => (a, y),
                _ => {
                    rows_dropped += 1;
                    continue;
                }
            };

        let time_raw = field(time_idx)?;
        if time_raw.trim().is_empty() {
            rows_dropped += 1;
            continue;
        }
        let key = bucket_key(time_raw, schema.time_bucket, row)?;

        let mut features = Vec::with_capacity(feature_idx.len());
        let mut dropped = false;
        for &idx in &feature_idx {
            let raw = field(idx)?.trim();
            if raw.is_empty() {
                dropped = true;
                break;
            }
            let value = raw.parse::<f64>().map_err(|_| Error::MalformedRow {
                row,
                message: format!("feature value {raw:?} is not a number"),
            })?;
            features.push(F::from_f64(value).ok_or_else(|| Error::MalformedRow {
                row,
                message: format!("feature value {raw:?} does not fit the scalar type"),
            })?);
        }
        if dropped {
            rows_dropped += 1;
            continue;
        }
        grouped.entry(key).or_default().push((features, sensitive, label));
    }

    if grouped.is_empty() {
        return Err(Error::EmptyData);
    }

    let mut batches = Vec::with_capacity(grouped.len());
    for (t, (_, rows)) in grouped.into_iter().enumerate() {
        let instances = rows
            .into_iter()
            .map(|(features, a, y)| Instance::new(features, a, y, t + 1))
            .collect::<Result<Vec<_>>>()?;
        batches.push(Batch::new(instances)?);
    }
    Ok(IngestReport { batches, rows_read, rows_dropped })
}

/// Writes batches as CSV with columns `t,a,y,f0..f{dim-1}` — the inverse of
/// ingesting with [`index_schema`].
pub fn write_csv<F: Scalar>(path: &Path, batches: &[Batch<F>]) -> Result<()> {
    let Some(first) = batches.first() else {
        return Err(Error::EmptyData);
    };
    let mut writer = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => io_error(path, io),
        other => Error::Serde(format!("{other:?}")),
    })?;
    let mut header = vec!["t".to_string(), "a".to_string(), "y".to_string()];
    header.extend((0..first.dim()).map(|d| format!("f{d}")));
    writer.write_record(&header).map_err(|e| Error::Serde(e.to_string()))?;
    for batch in batches {
        for inst in batch.instances() {
            let mut record = vec![
                inst.time_index().to_string(),
                inst.sensitive().to_string(),
                inst.label().to_string(),
            ];
            record.extend(inst.features().iter().map(|x| format!("{x}")));
            writer.write_record(&record).map_err(|e| Error::Serde(e.to_string()))?;
        }
    }
    writer.flush().map_err(|e| io_error(path, e))
}

/// The schema matching [`write_csv`] output: integer time indices and
/// literal "0"/"1" group and label columns.
pub fn index_schema(dim: usize) -> CsvSchema {
    let binary_map = BTreeMap::from([("0".to_string(), 0u8), ("1".to_string(), 1u8)]);
    CsvSchema {
        time_column: "t".into(),
        time_bucket: TimeBucket::Index,
        sensitive_column: "a".into(),
        sensitive_map: binary_map.clone(),
        label_column: "y".into(),
        label_map: binary_map,
        feature_columns: (0..dim).map(|d| format!("f{d}")).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(content.as_bytes()).unwrap();
        file.flush().unwrap();
        file
    }

    fn people_schema() -> CsvSchema {
        CsvSchema {
            time_column: "date".into(),
            time_bucket: TimeBucket::Monthly,
            sensitive_column: "race".into(),
            sensitive_map: BTreeMap::from([("black".into(), 0), ("white".into(), 1)]),
            label_column: "outcome".into(),
            label_map: BTreeMap::from([("bad".into(), 0), ("good".into(), 1)]),
            feature_columns: vec!["age".into(), "score".into()],
        }
    }

    #[test]
    fn digit_runs_split_on_any_separator() {
        assert_eq!(digit_runs("2014-05-30"), vec![2014, 5, 30]);
        assert_eq!(digit_runs("May 2014, day 5"), vec![2014, 5]);
        assert_eq!(digit_runs("no digits"), Vec::<u64>::new());
        assert_eq!(digit_runs("42"), vec![42]);
    }

    #[test]
    fn monthly_buckets_become_consecutive_indices() {
        // Three distinct months with a gap; four usable rows.
        let file = write_temp(
            "date,race,outcome,age,score\n\
             2014-01-15,black,good,30,1.5\n\
             2014-01-20,white,bad,40,2.5\n\
             2014-03-01,white,good,50,3.5\n\
             2014-06-09,black,bad,60,4.5\n",
        );
        let report = ingest_csv::<f64>(file.path(), &people_schema()).unwrap();
        assert_eq!(report.rows_read, 4);
        assert_eq!(report.rows_dropped, 0);
        let ts: Vec<usize> = report.batches.iter().map(|b| b.time_index()).collect();
        assert_eq!(ts, vec![1, 2, 3]);
        assert_eq!(report.batches[0].len(), 2);
        assert_eq!(report.batches[0].instances()[0].features(), &[30.0, 1.5]);
        assert_eq!(report.batches[0].instances()[0].sensitive(), 0);
        assert_eq!(report.batches[0].instances()[0].label(), 1);
    }

    #[test]
    fn yearly_bucketing_collapses_months() {
        let mut schema = people_schema();
        schema.time_bucket = TimeBucket::Yearly;
        let file = write_temp(
            "date,race,outcome,age,score\n\
             2014-01-15,black,good,30,1.5\n\
             2014-12-20,white,bad,40,2.5\n\
             2016-03-01,white,good,50,3.5\n",
        );
        let report = ingest_csv::<f64>(file.path(), &schema).unwrap();
        assert_eq!(report.batches.len(), 2);
        assert_eq!(report.batches[0].len(), 2);
    }

    #[test]
    fn index_bucketing_sorts_numerically() {
        let mut schema = people_schema();
        schema.time_bucket = TimeBucket::Index;
        let file = write_temp(
            "date,race,outcome,age,score\n\
             10,black,good,30,1.5\n\
             2,white,bad,40,2.5\n",
        );
        let report = ingest_csv::<f64>(file.path(), &schema).unwrap();
        // Raw index 2 sorts before 10, then both renumber to 1, 2.
        assert_eq!(report.batches[0].instances()[0].features()[0], 40.0);
        assert_eq!(report.batches[1].instances()[0].features()[0], 30.0);
    }

    #[test]
    fn unmapped_and_empty_values_drop_the_row() {
        let file = write_temp(
            "date,race,outcome,age,score\n\
             2014-01-15,black,good,30,1.5\n\
             2014-01-16,hispanic,good,31,1.6\n\
             2014-01-17,white,,32,1.7\n\
             2014-01-18,white,bad,,1.8\n\
             ,white,bad,33,1.9\n\
             2014-02-01,white,bad,34,2.0\n",
        );
        let report = ingest_csv::<f64>(file.path(), &people_schema()).unwrap();
        assert_eq!(report.rows_read, 6);
        assert_eq!(report.rows_dropped, 4);
        assert_eq!(report.batches.len(), 2);
        assert_eq!(report.batches[0].len(), 1);
        assert_eq!(report.batches[1].len(), 1);
    }

    #[test]
    fn malformed_values_fail_with_the_row_number() {
        let file = write_temp(
            "date,race,outcome,age,score\n\
             2014-01-15,black,good,30,1.5\n\
             2014-01-16,white,bad,not_a_number,1.6\n",
        );
        let err = ingest_csv::<f64>(file.path(), &people_schema()).unwrap_err();
        match err {
            Error::MalformedRow { row, message } => {
                assert_eq!(row, 2);
                assert!(message.contains("not_a_number"), "{message}");
            }
            other => panic!("expected MalformedRow, got {other:?}"),
        }

        let file = write_temp(
            "date,race,outcome,age,score\n\
             only-words,black,good,30,1.5\n",
        );
        assert!(matches!(
            ingest_csv::<f64>(file.path(), &people_schema()),
            Err(Error::MalformedRow { row: 1, .. })
        ));
    }

    #[test]
    fn month_thirteen_is_rejected() {
        let file = write_temp(
            "date,race,outcome,age,score\n\
             2014-13-01,black,good,30,1.5\n",
        );
        assert!(matches!(
            ingest_csv::<f64>(file.path(), &people_schema()),
            Err(Error::MalformedRow { row: 1, .. })
        ));
    }

    #[test]
    fn missing_column_and_missing_file_are_reported() {
        let file = write_temp("date,race,outcome,age\n2014-01-15,black,good,30\n");
        let err = ingest_csv::<f64>(file.path(), &people_schema()).unwrap_err();
        assert!(matches!(err, Error::MissingColumn(ref c) if c == "score"));

        let err =
            ingest_csv::<f64>(Path::new("/nonexistent/stream.csv"), &people_schema()).unwrap_err();
        match err {
            Error::Io { path, .. } => assert!(path.contains("nonexistent")),
            other => panic!("expected Io, got {other:?}"),
        }
    }

    #[test]
    fn all_rows_dropped_is_empty_data() {
        let file = write_temp("date,race,outcome,age,score\n2014-01-15,other,good,30,1.5\n");
        assert!(matches!(ingest_csv::<f64>(file.path(), &people_schema()), Err(Error::EmptyData)));
    }

    #[test]
    fn schema_validation_rejects_nonsense() {
        let mut schema = people_schema();
        schema.feature_columns.clear();
        assert!(schema.validate().is_err());

        let mut schema = people_schema();
        schema.label_map.insert("maybe".into(), 2);
        assert!(schema.validate().is_err());

        let mut schema = people_schema();
        schema.sensitive_map.clear();
        assert!(schema.validate().is_err());
    }

    #[test]
    fn write_then_ingest_reproduces_the_stream() {
        let spec = crate::data::DriftSpec::<f64> {
            n_batches: 3,
            batch_size: 20,
            dim: 3,
            trajectory: crate::data::TrajectorySpec::Stationary {
                table: [[0.25, 0.25], [0.25, 0.25]],
            },
            class_separation: 2.0,
            seed: 17,
        };
        let batches = crate::data::generate(&spec).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("stream.csv");
        write_csv(&path, &batches).unwrap();
        let report = ingest_csv::<f64>(&path, &index_schema(3)).unwrap();
        assert_eq!(report.rows_dropped, 0);
        // Shortest-roundtrip float formatting makes this exact, not
        // approximate.
        assert_eq!(report.batches, batches);
    }
}
