//! Readers for the transcribed fixture tables.

use std::path::{Path, PathBuf};

use plum_core::metrics::PrintedParameterRow;
use plum_core::report::{MatrixKind, PrintedCell};
use plum_core::stats::{CellKey, FactorialDataset, StatsError};
use plum_core::{HistoryCondition, Language, PolitenessCategory};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: line {line}: {message}", path.display())]
    Parse { path: PathBuf, line: u64, message: String },
    #[error("{}: {source}", path.display())]
    UnbalancedDesign { path: PathBuf, source: StatsError },
}

#[derive(Deserialize)]
struct CqsRow {
    language: String,
    model: String,
    condition: String,
    category: String,
    cqs: f64,
}

#[derive(Deserialize)]
struct ParameterCsvRow {
    language: String,
    model: String,
    condition: String,
    category: String,
    s1: f64,
    s2: f64,
    s3: f64,
    s4: f64,
    s5: f64,
    s6: f64,
    s7: f64,
    s8: f64,
    cqs: f64,
}

#[derive(Deserialize)]
struct PrintedCsvRow {
    language: String,
    table: String,
    model: String,
    level: String,
    value: f64,
}

fn rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<(u64, T)>, FixtureError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(source) => FixtureError::Io { path: path.into(), source },
        other => FixtureError::Parse { path: path.into(), line: 0, message: format!("{other:?}") },
    })?;
    let mut out = Vec::new();
    for (i, r) in reader.deserialize::<T>().enumerate() {
        // Line 1 is the header.
        let line = i as u64 + 2;
        let row = r.map_err(|e| FixtureError::Parse { path: path.into(), line, message: e.to_string() })?;
        out.push((line, row));
    }
    Ok(out)
}

fn field<T: std::str::FromStr>(path: &Path, line: u64, s: &str) -> Result<T, FixtureError>
where
    T::Err: std::fmt::Display,
{
    s.trim()
        .parse()
        .map_err(|e: T::Err| FixtureError::Parse { path: path.into(), line, message: e.to_string() })
}

fn cell_key(path: &Path, line: u64, l: &str, m: &str, h: &str, c: &str) -> Result<CellKey, FixtureError> {
    let model = m.trim();
    if model.is_empty() {
        return Err(FixtureError::Parse { path: path.into(), line, message: "empty model".into() });
    }
    Ok(CellKey {
        language: field::<Language>(path, line, l)?,
        model: model.into(),
        condition: field::<HistoryCondition>(path, line, h)?,
        category: field::<PolitenessCategory>(path, line, c)?,
    })
}

/// Loads a CQS fixture and checks each language forms a balanced design.
pub fn load_cqs_fixture(path: &Path) -> Result<FactorialDataset, FixtureError> {
    let mut d = FactorialDataset::new();
    for (line, r) in rows::<CqsRow>(path)? {
        let key = cell_key(path, line, &r.language, &r.model, &r.condition, &r.category)?;
        if !r.cqs.is_finite() {
            return Err(FixtureError::Parse { path: path.into(), line, message: "non-finite cqs".into() });
        }
        d.insert(key, r.cqs)
            .map_err(|e| FixtureError::Parse { path: path.into(), line, message: e.to_string() })?;
    }
    for l in d.languages() {
        d.design(l).map_err(|source| FixtureError::UnbalancedDesign { path: path.into(), source })?;
    }
    Ok(d)
}

/// Loads printed per-parameter rows (S1..S8 plus printed CQS).
pub fn load_parameter_rows(path: &Path) -> Result<Vec<PrintedParameterRow>, FixtureError> {
    rows::<ParameterCsvRow>(path)?
        .into_iter()
        .map(|(line, r)| {
            let key = cell_key(path, line, &r.language, &r.model, &r.condition, &r.category)?;
            Ok(PrintedParameterRow {
                language: key.language,
                model: key.model,
                condition: key.condition,
                category: key.category,
                parameters: [r.s1, r.s2, r.s3, r.s4, r.s5, r.s6, r.s7, r.s8],
                printed_cqs: r.cqs,
            })
        })
        .collect()
}

/// The CQS column of a per-parameter file, as a dataset.
pub fn dataset_from_parameter_rows(rows: &[PrintedParameterRow]) -> Result<FactorialDataset, StatsError> {
    FactorialDataset::from_entries(rows.iter().map(|r| {
        (
            CellKey { language: r.language, model: r.model.clone(), condition: r.condition, category: r.category },
            r.printed_cqs,
        )
    }))
}

/// Loads printed marginal matrices for deviation reporting.
pub fn load_printed_tables(path: &Path) -> Result<Vec<PrintedCell>, FixtureError> {
    rows::<PrintedCsvRow>(path)?
        .into_iter()
        .map(|(line, r)| {
            let kind = match r.table.trim() {
                "politeness" => MatrixKind::Politeness,
                "history" => MatrixKind::History,
                other => {
                    return Err(FixtureError::Parse { path: path.into(), line, message: format!("unknown table `{other}`") })
                }
            };
            Ok(PrintedCell {
                language: field(path, line, &r.language)?,
                kind,
                model: r.model.trim().into(),
                level: r.level.trim().into(),
                value: r.value,
            })
        })
        .collect()
}
