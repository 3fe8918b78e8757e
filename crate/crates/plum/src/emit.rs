//! Report bundle emission.
//!
//! Output is byte-deterministic: file names derive from table names, the
//! manifest carries no clock readings, and maps serialize in key order.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use plum_core::report::{Cell, Table};
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum EmitError {
    #[error("output {} is not writable: {source}", path.display())]
    OutputUnwritable { path: PathBuf, source: std::io::Error },
    #[error("duplicate table name `{0}`")]
    DuplicateTable(String),
    #[error("unknown format `{0}`; expected csv or text")]
    UnknownFormat(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Format {
    Csv,
    Text,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Text => "txt",
        }
    }

    /// Parses a comma list such as `csv,text`.
    pub fn parse_list(s: &str) -> Result<Vec<Format>, EmitError> {
        let mut v = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let f = match part {
                "csv" => Format::Csv,
                "text" | "txt" => Format::Text,
                other => return Err(EmitError::UnknownFormat(other.into())),
            };
            if !v.contains(&f) {
                v.push(f);
            }
        }
        v.sort();
        Ok(v)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    /// Input path (as given) to SHA-256 of its bytes.
    pub inputs: BTreeMap<String, String>,
    pub parameters: BTreeMap<String, String>,
}

impl Provenance {
    pub fn new() -> Self {
        Provenance {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            ..Default::default()
        }
    }

    pub fn with_input(mut self, path: &Path) -> std::io::Result<Self> {
        let bytes = fs::read(path)?;
        self.inputs.insert(path.display().to_string(), sha256_hex(&bytes));
        Ok(self)
    }

    pub fn with_parameter(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.into(), value.to_string());
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReportBundle {
    pub tables: Vec<Table>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableEntry {
    pub name: String,
    pub title: String,
    pub rows: usize,
    pub columns: Vec<String>,
    /// Source of every cell: `computed`, `fixture`, or `null` when not numeric.
    pub cell_sources: Vec<Vec<Option<&'static str>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub provenance: Provenance,
    pub tables: Vec<TableEntry>,
    pub files: Vec<FileEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn table_csv(table: &Table) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(table.header()).expect("in-memory write");
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::raw)).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv of utf-8 cells is utf-8")
}

fn cell_source(c: &Cell) -> Option<&'static str> {
    match c {
        Cell::Number { source, .. } => Some(source.as_str()),
        _ => None,
    }
}

/// Writes every table in every format, then the manifest. Returns it.
pub fn emit_bundle(bundle: &ReportBundle, out_dir: &Path, formats: &[Format]) -> Result<Manifest, EmitError> {
    let unwritable = |path: &Path| {
        let path = path.to_path_buf();
        move |source| EmitError::OutputUnwritable { path, source }
    };
    let mut names: Vec<&str> = bundle.tables.iter().map(|t| t.name.as_str()).collect();
    names.sort();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(EmitError::DuplicateTable(w[0].into()));
    }
    fs::create_dir_all(out_dir).map_err(unwritable(out_dir))?;

    let mut formats = formats.to_vec();
    formats.sort();
    formats.dedup();
    let mut files = Vec::new();
    let mut tables = Vec::new();
    for table in &bundle.tables {
        for &f in &formats {
            let body = match f {
                Format::Csv => table_csv(table),
                Format::Text => table.render_text(),
            };
            let name = format!("{}.{}", table.name, f.extension());
            let path = out_dir.join(&name);
            fs::write(&path, &body).map_err(unwritable(&path))?;
            files.push(FileEntry { name, sha256: sha256_hex(body.as_bytes()), bytes: body.len() as u64 });
        }
        tables.push(TableEntry {
            name: table.name.clone(),
            title: table.title.clone(),
            rows: table.rows.len(),
            columns: table.header().into_iter().map(String::from).collect(),
            cell_sources: table.rows.iter().map(|r| r.iter().map(cell_source).collect()).collect(),
        });
    }
    files.sort_by(|a, b| a.name.cmp(&b.name));
    let manifest = Manifest { provenance: bundle.provenance.clone(), tables, files };
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    let path = out_dir.join(MANIFEST_NAME);
    fs::write(&path, json).map_err(unwritable(&path))?;
    Ok(manifest)
}
