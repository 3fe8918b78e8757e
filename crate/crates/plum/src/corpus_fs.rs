//! Reading and writing the on-disk prompt tree:
//! `<root>/<Language> Prompts/Category{1..5}.txt`.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use plum_core::corpus::{self, Corpus, CorpusError, Prompt};
use plum_core::{Language, PolitenessCategory};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusFsError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: not valid UTF-8", path.display())]
    Encoding { path: PathBuf },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

impl CorpusFsError {
    /// The underlying corpus error, if this is one.
    pub fn corpus_error(&self) -> Option<&CorpusError> {
        match self {
            CorpusFsError::Corpus(e) => Some(e),
            _ => None,
        }
    }
}

pub fn category_path(root: &Path, language: Language, category: PolitenessCategory) -> PathBuf {
    root.join(language.directory()).join(category.file_name())
}

fn read_utf8(path: &Path) -> Result<Option<String>, CorpusFsError> {
    match fs::read(path) {
        Ok(bytes) => String::from_utf8(bytes)
            .map(Some)
            .map_err(|_| CorpusFsError::Encoding { path: path.into() }),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(source) => Err(CorpusFsError::Io { path: path.into(), source }),
    }
}

/// Parses the prompt tree under `root`.
///
/// Strict mode requires all fifteen files with exactly 100 prompts each.
/// Otherwise absent files are skipped, but at least one must exist.
pub fn parse_corpus(root: &Path, strict: bool) -> Result<Corpus, CorpusFsError> {
    let mut prompts = Vec::new();
    let mut first_missing = None;
    let mut found_any = false;
    for language in Language::ALL {
        for category in PolitenessCategory::ALL {
            let path = category_path(root, language, category);
            match read_utf8(&path)? {
                Some(text) => {
                    found_any = true;
                    prompts.extend(corpus::parse_category_text(language, category, &text)?);
                }
                None => {
                    if strict {
                        return Err(CorpusError::MissingCategoryFile { language, category }.into());
                    }
                    first_missing.get_or_insert(CorpusError::MissingCategoryFile { language, category });
                }
            }
        }
    }
    if !found_any {
        if let Some(e) = first_missing {
            return Err(e.into());
        }
    }
    let corpus = Corpus::from_prompts(prompts)?;
    if strict {
        corpus.validate_strict()?;
    }
    Ok(corpus)
}

/// Writes every group of `corpus` in the numbered line format.
pub fn write_corpus(root: &Path, corpus: &Corpus) -> Result<(), CorpusFsError> {
    for ((language, category), group) in corpus.groups() {
        let path = category_path(root, language, category);
        let dir = path.parent().expect("category path has a parent");
        fs::create_dir_all(dir).map_err(|source| CorpusFsError::Io { path: dir.into(), source })?;
        fs::write(&path, corpus::render_category_text(group.iter()))
            .map_err(|source| CorpusFsError::Io { path: path.clone(), source })?;
    }
    Ok(())
}

/// Outcome for one expected file.
#[derive(Debug)]
pub struct FileReport {
    pub language: Language,
    pub category: PolitenessCategory,
    pub path: PathBuf,
    pub result: Result<usize, CorpusFsError>,
}

/// Checks each expected file independently so that every problem is reported.
pub fn validate_tree(root: &Path, strict: bool) -> Vec<FileReport> {
    let mut out = Vec::new();
    for language in Language::ALL {
        for category in PolitenessCategory::ALL {
            let path = category_path(root, language, category);
            let result = match read_utf8(&path) {
                Ok(None) => Err(CorpusError::MissingCategoryFile { language, category }.into()),
                Ok(Some(text)) => check_file(language, category, &text, strict),
                Err(e) => Err(e),
            };
            out.push(FileReport { language, category, path, result });
        }
    }
    out
}

fn check_file(language: Language, category: PolitenessCategory, text: &str, strict: bool) -> Result<usize, CorpusFsError> {
    let prompts: Vec<Prompt> = corpus::parse_category_text(language, category, text)?;
    let n = prompts.len();
    Corpus::from_prompts(prompts)?;
    if strict && n != corpus::PROMPTS_PER_FILE {
        return Err(CorpusError::CountMismatch {
            language,
            category,
            expected: corpus::PROMPTS_PER_FILE,
            found: n,
        }
        .into());
    }
    Ok(n)
}
