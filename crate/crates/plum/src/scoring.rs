//! Scoring of a results file.
//!
//! Depth normalization runs per batch, one batch per (model, language,
//! condition); the batch label is written to `depth_norm_scope`. Records
//! without ok status are not scored. A response whose sub-metric fails is
//! reported, never imputed.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use plum_core::backend::ScorerBackend;
use plum_core::harness::{TrialKey, TrialRecord};
use plum_core::metrics::{self, MetricError, ScoredResponse, ScoringInput, ScoringOptions};
use plum_core::stats::{CellKey, FactorialDataset, StatsError};
use plum_core::text::SyllableCounter;
use plum_core::{HistoryCondition, Language};

use crate::scripts::ScriptSet;
use crate::sink::ResultRow;

/// One scores-file row: the results columns plus scores and metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub result: ResultRow,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub s4: f64,
    pub s5: f64,
    pub s6: f64,
    pub s7: f64,
    pub s8: f64,
    pub cqs: f64,
    pub raw_s4: f64,
    pub depth_norm_scope: String,
    pub syllable_mode: String,
}

pub const SCORE_EXTRA_COLUMNS: [&str; 12] =
    ["s1", "s2", "s3", "s4", "s5", "s6", "s7", "s8", "cqs", "raw_s4", "depth_norm_scope", "syllable_mode"];

#[derive(Debug, Default)]
pub struct ScoreOutput {
    pub rows: Vec<ScoreRow>,
    pub failures: Vec<(TrialKey, MetricError)>,
    /// Records skipped because their status was not ok.
    pub not_ok: usize,
}

fn scope_label(model: &str, language: Language, condition: HistoryCondition) -> String {
    format!("batch:{model}|{}|{}", language.name(), condition.label())
}

fn row(record: &TrialRecord, scored: &ScoredResponse, scope: &str) -> ScoreRow {
    let s = scored.scores.parameters();
    ScoreRow {
        result: ResultRow::from(record),
        s1: s[0],
        s2: s[1],
        s3: s[2],
        s4: s[3],
        s5: s[4],
        s6: s[5],
        s7: s[6],
        s8: s[7],
        cqs: scored.scores.cqs,
        raw_s4: scored.raw_responsiveness,
        depth_norm_scope: scope.into(),
        syllable_mode: scored.syllable_mode.as_str().into(),
    }
}

/// Scores every ok record, batch by batch, in input order within a batch.
pub fn score_records(
    records: &[TrialRecord],
    scripts: &ScriptSet,
    backend: &dyn ScorerBackend,
    counter: &dyn SyllableCounter,
    options: &ScoringOptions,
) -> ScoreOutput {
    let mut out = ScoreOutput::default();
    let mut batches: BTreeMap<(String, Language, HistoryCondition), Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        if r.status.is_ok() {
            batches.entry((r.key.model.clone(), r.key.language, r.key.condition)).or_default().push(r);
        } else {
            out.not_ok += 1;
        }
    }
    for ((model, language, condition), batch) in batches {
        let scope = scope_label(&model, language, condition);
        let inputs: Vec<ScoringInput> = batch
            .iter()
            .map(|r| ScoringInput {
                language,
                prompt_text: r.prompt_text.clone(),
                response_text: r.response_text.clone(),
                context_texts: scripts.context_texts(condition, language, &r.prompt_text),
            })
            .collect();
        for (r, result) in batch.iter().zip(metrics::score_batch(&inputs, backend, counter, options)) {
            match result {
                Ok(scored) => out.rows.push(row(r, &scored, &scope)),
                Err(e) => out.failures.push((r.key.clone(), e)),
            }
        }
    }
    out
}

pub fn write_scores(path: &Path, rows: &[ScoreRow]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(File::create(path)?);
    w.write_record(crate::sink::RESULT_COLUMNS.iter().chain(&SCORE_EXTRA_COLUMNS))?;
    for r in rows {
        let mut fields = r.result.to_fields();
        fields.extend([r.s1, r.s2, r.s3, r.s4, r.s5, r.s6, r.s7, r.s8, r.cqs, r.raw_s4].map(|x| x.to_string()));
        fields.push(r.depth_norm_scope.clone());
        fields.push(r.syllable_mode.clone());
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}

/// Mean CQS per (language, model, condition, category).
///
/// Replicates of one prompt (slots and days) are averaged first, then
/// prompts are averaged within the cell.
pub fn dataset_from_scores(rows: &[ScoreRow]) -> Result<FactorialDataset, anyhow::Error> {
    let mut per_prompt: BTreeMap<(CellKey, u32), Vec<f64>> = BTreeMap::new();
    for r in rows {
        let key = CellKey {
            language: r.result.language.parse().map_err(|e| anyhow::anyhow!("{e}"))?,
            model: r.result.model.clone(),
            condition: r.result.condition.parse().map_err(|e| anyhow::anyhow!("{e}"))?,
            category: r.result.category.parse().map_err(|e| anyhow::anyhow!("{e}"))?,
        };
        per_prompt.entry((key, r.result.ordinal)).or_default().push(r.cqs);
    }
    let mut cells: BTreeMap<CellKey, Vec<f64>> = BTreeMap::new();
    for ((key, _), v) in per_prompt {
        cells.entry(key).or_default().push(mean(&v));
    }
    FactorialDataset::from_entries(cells.into_iter().map(|(k, v)| (k, mean(&v))))
        .map_err(|e: StatsError| anyhow::anyhow!(e))
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}
