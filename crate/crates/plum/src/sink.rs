//! Append-only results CSV with a completion index.
//!
//! The CSV is the source of truth. The sidecar index (`<file>.index`) lists
//! the SHA-256 of each completed key's canonical form, one per line, and is
//! rebuilt from the CSV whenever a sink is opened. On resume, error rows and
//! a torn trailing row are compacted away so their keys can be retried; each
//! key therefore appears at most once in the CSV.

use std::collections::HashSet;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use plum_core::harness::{TrialKey, TrialRecord, TrialStatus};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Column order of the results file.
pub const RESULT_COLUMNS: [&str; 13] = [
    "run_id",
    "model",
    "language",
    "condition",
    "category",
    "ordinal",
    "replicate_slot",
    "day",
    "timestamp_utc",
    "latency_ms",
    "status",
    "prompt_text",
    "response_text",
];

#[derive(Debug, Error)]
pub enum SinkError {
    #[error("results sink {} is not writable: {source}", path.display())]
    SinkUnwritable { path: PathBuf, source: io::Error },
    #[error("{} already holds results; resume to continue it", path.display())]
    AlreadyExists { path: PathBuf },
    #[error("{}: row {row}: {message}", path.display())]
    Malformed { path: PathBuf, row: usize, message: String },
    #[error("{}: {source}", path.display())]
    Read { path: PathBuf, source: io::Error },
}

/// One results row as serialized.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultRow {
    pub run_id: String,
    pub model: String,
    pub language: String,
    pub condition: String,
    pub category: String,
    pub ordinal: u32,
    pub replicate_slot: String,
    pub day: String,
    pub timestamp_utc: String,
    pub latency_ms: u64,
    pub status: String,
    pub prompt_text: String,
    pub response_text: String,
}

impl ResultRow {
    /// Field values in [`RESULT_COLUMNS`] order.
    pub fn to_fields(&self) -> Vec<String> {
        vec![
            self.run_id.clone(),
            self.model.clone(),
            self.language.clone(),
            self.condition.clone(),
            self.category.clone(),
            self.ordinal.to_string(),
            self.replicate_slot.clone(),
            self.day.clone(),
            self.timestamp_utc.clone(),
            self.latency_ms.to_string(),
            self.status.clone(),
            self.prompt_text.clone(),
            self.response_text.clone(),
        ]
    }
}

impl From<&TrialRecord> for ResultRow {
    fn from(r: &TrialRecord) -> Self {
        ResultRow {
            run_id: r.run_id.clone(),
            model: r.key.model.clone(),
            language: r.key.language.name().into(),
            condition: r.key.condition.label().into(),
            category: r.key.category.label().into(),
            ordinal: r.key.ordinal,
            replicate_slot: r.key.replicate_slot.label().into(),
            day: r.key.day.to_string(),
            timestamp_utc: r.timestamp_utc.clone(),
            latency_ms: r.latency_ms,
            status: r.status.to_string(),
            prompt_text: r.prompt_text.clone(),
            response_text: r.response_text.clone(),
        }
    }
}

impl TryFrom<ResultRow> for TrialRecord {
    type Error = String;

    fn try_from(r: ResultRow) -> Result<Self, String> {
        let key = TrialKey {
            model: r.model,
            language: r.language.parse().map_err(|e| format!("{e}"))?,
            condition: r.condition.parse().map_err(|e| format!("{e}"))?,
            category: r.category.parse().map_err(|e| format!("{e}"))?,
            ordinal: r.ordinal,
            replicate_slot: r.replicate_slot.parse().map_err(|e| format!("{e}"))?,
            day: r.day.parse().map_err(|e| format!("{e}"))?,
        };
        Ok(TrialRecord {
            run_id: r.run_id,
            key,
            timestamp_utc: r.timestamp_utc,
            latency_ms: r.latency_ms,
            status: r.status.parse::<TrialStatus>()?,
            prompt_text: r.prompt_text,
            response_text: r.response_text,
        })
    }
}

/// Hex SHA-256 of a key's canonical form.
pub fn key_digest(key: &TrialKey) -> String {
    hex::encode(Sha256::digest(key.canonical().as_bytes()))
}

pub fn index_path(results: &Path) -> PathBuf {
    let mut name = results.file_name().unwrap_or_default().to_os_string();
    name.push(".index");
    results.with_file_name(name)
}

/// Reads every well-formed row. A torn final row is ignored and reported as
/// `true` in the second field.
pub fn read_rows(path: &Path) -> Result<(Vec<TrialRecord>, bool), SinkError> {
    let file = File::open(path).map_err(|source| SinkError::Read { path: path.into(), source })?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let mut out = Vec::new();
    let mut rows = reader.deserialize::<ResultRow>().enumerate().peekable();
    while let Some((i, row)) = rows.next() {
        let last = rows.peek().is_none();
        match row {
            Ok(row) => match TrialRecord::try_from(row) {
                Ok(rec) => out.push(rec),
                Err(message) if last => {
                    let _ = message;
                    return Ok((out, true));
                }
                Err(message) => return Err(SinkError::Malformed { path: path.into(), row: i + 1, message }),
            },
            Err(_) if last => return Ok((out, true)),
            Err(e) => {
                return Err(SinkError::Malformed { path: path.into(), row: i + 1, message: e.to_string() })
            }
        }
    }
    Ok((out, false))
}

/// Reads a results file.
pub fn read_results(path: &Path) -> Result<Vec<TrialRecord>, SinkError> {
    read_rows(path).map(|(r, _)| r)
}

fn writer_for(path: &Path, append: bool) -> Result<csv::Writer<BufWriter<File>>, SinkError> {
    let file = OpenOptions::new()
        .create(true)
        .append(append)
        .write(true)
        .truncate(!append)
        .open(path)
        .map_err(|source| SinkError::SinkUnwritable { path: path.into(), source })?;
    Ok(csv::WriterBuilder::new().has_headers(false).from_writer(BufWriter::new(file)))
}

/// Single-writer results sink.
pub struct ResultsSink {
    path: PathBuf,
    csv: csv::Writer<BufWriter<File>>,
    index: BufWriter<File>,
    completed: HashSet<TrialKey>,
    compacted_rows: usize,
}

impl ResultsSink {
    /// Creates a fresh sink, refusing to overwrite an existing non-empty file.
    pub fn create(path: &Path) -> Result<ResultsSink, SinkError> {
        if fs::metadata(path).map(|m| m.len() > 0).unwrap_or(false) {
            return Err(SinkError::AlreadyExists { path: path.into() });
        }
        Self::rewrite(path, &[], 0)
    }

    /// Opens a sink for resumption, creating it when absent.
    pub fn resume(path: &Path) -> Result<ResultsSink, SinkError> {
        if !fs::metadata(path).map(|m| m.len() > 0).unwrap_or(false) {
            return Self::rewrite(path, &[], 0);
        }
        let (rows, torn) = read_rows(path)?;
        let mut seen = HashSet::new();
        let keep: Vec<TrialRecord> = rows
            .iter()
            .filter(|r| r.status.is_ok() && seen.insert(r.key.clone()))
            .cloned()
            .collect();
        let dropped = rows.len() - keep.len() + usize::from(torn);
        if dropped == 0 {
            let mut sink = Self::open_append(path)?;
            sink.rebuild_index(&keep)?;
            return Ok(sink);
        }
        Self::rewrite(path, &keep, dropped)
    }

    fn open_append(path: &Path) -> Result<ResultsSink, SinkError> {
        let index = OpenOptions::new()
            .create(true)
            .write(true)
            .truncate(true)
            .open(index_path(path))
            .map_err(|source| SinkError::SinkUnwritable { path: index_path(path), source })?;
        Ok(ResultsSink {
            path: path.into(),
            csv: writer_for(path, true)?,
            index: BufWriter::new(index),
            completed: HashSet::new(),
            compacted_rows: 0,
        })
    }

    /// Writes `keep` to a temporary file and renames it over `path`.
    fn rewrite(path: &Path, keep: &[TrialRecord], dropped: usize) -> Result<ResultsSink, SinkError> {
        let unwritable = |source| SinkError::SinkUnwritable { path: path.into(), source };
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(unwritable)?;
        }
        let tmp = path.with_extension("csv.tmp");
        {
            let mut w = csv::WriterBuilder::new()
                .has_headers(false)
                .from_path(&tmp)
                .map_err(|e| unwritable(io::Error::other(e)))?;
            w.write_record(RESULT_COLUMNS).map_err(|e| unwritable(io::Error::other(e)))?;
            for r in keep {
                w.serialize(ResultRow::from(r)).map_err(|e| unwritable(io::Error::other(e)))?;
            }
            w.flush().map_err(unwritable)?;
        }
        fs::rename(&tmp, path).map_err(unwritable)?;
        let mut sink = Self::open_append(path)?;
        sink.rebuild_index(keep)?;
        sink.compacted_rows = dropped;
        Ok(sink)
    }

    fn rebuild_index(&mut self, keep: &[TrialRecord]) -> Result<(), SinkError> {
        for r in keep {
            self.mark_done(&r.key)?;
        }
        self.index.flush().map_err(|source| SinkError::SinkUnwritable { path: index_path(&self.path), source })
    }

    fn mark_done(&mut self, key: &TrialKey) -> Result<(), SinkError> {
        writeln!(self.index, "{}", key_digest(key))
            .map_err(|source| SinkError::SinkUnwritable { path: index_path(&self.path), source })?;
        self.completed.insert(key.clone());
        Ok(())
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Keys already persisted with ok status.
    pub fn is_complete(&self, key: &TrialKey) -> bool {
        self.completed.contains(key)
    }

    pub fn completed_len(&self) -> usize {
        self.completed.len()
    }

    /// Rows removed by compaction when the sink was opened.
    pub fn compacted_rows(&self) -> usize {
        self.compacted_rows
    }

    /// Appends one record and flushes it.
    pub fn append(&mut self, record: &TrialRecord) -> Result<(), SinkError> {
        let unwritable = |source| SinkError::SinkUnwritable { path: self.path.clone(), source };
        self.csv
            .serialize(ResultRow::from(record))
            .map_err(|e| unwritable(io::Error::other(e)))?;
        self.csv.flush().map_err(unwritable)?;
        if record.status.is_ok() {
            self.mark_done(&record.key)?;
            self.index
                .flush()
                .map_err(|source| SinkError::SinkUnwritable { path: index_path(&self.path), source })?;
        }
        Ok(())
    }
}
