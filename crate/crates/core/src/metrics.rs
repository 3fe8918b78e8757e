//! The eight response-quality parameters and the Composite Quality Score.
//!
//! Closed-form quantities (readability, conciseness, the CQS mean) are
//! computed here directly; embeddings, acceptability, entailment and toxicity
//! come from a [`ScorerBackend`]. Depth needs a batch-wide maximum, so
//! scoring is two-pass: [`analyze_response`] then [`finalize`].

use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::backend::{BackendError, EmbeddingVector, ScorerBackend};
use crate::harness::TrialRecord;
use crate::kmeans;
use crate::taxonomy::{HistoryCondition, Language, PolitenessCategory};
use crate::text::{self, SentenceSplit, SyllableCounter, SyllableMode, TextError};

/// Tolerance for the CQS-equals-mean invariant.
pub const CQS_TOLERANCE: f64 = 1e-9;

/// Printed-vs-recomputed CQS gap above which a parameter row is flagged.
pub const RECONCILIATION_TOLERANCE: f64 = 0.005;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error(transparent)]
    Text(#[from] TextError),
    #[error("text contains no words")]
    NoWords,
    #[error("{tokens} tokens cannot form {k} clusters")]
    TooFewTokens { tokens: usize, k: usize },
    #[error("conciseness needs at least one token")]
    ZeroLength,
    #[error("batch maximum variance must be positive and finite, got {0}")]
    InvalidBatchVariance(f64),
    #[error("no context texts supplied")]
    EmptyContext,
    #[error("parameter {index} = {value} lies outside [0, 1]")]
    OutOfRange { index: usize, value: f64 },
    #[error("cell has no scores")]
    EmptyCell,
    #[error("trial did not complete successfully")]
    ResponseNotOk,
    #[error("backend returned {got} outputs for {expected} inputs")]
    CountMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Backend(#[from] BackendError),
}

/// S1..S8 and their mean for one response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterScores {
    pub s1_coherence: f64,
    pub s2_clarity: f64,
    pub s3_depth: f64,
    pub s4_responsiveness: f64,
    pub s5_context_retention: f64,
    pub s6_nontoxicity: f64,
    pub s7_conciseness: f64,
    pub s8_readability: f64,
    pub cqs: f64,
}

impl ParameterScores {
    pub const NAMES: [&'static str; 8] = ["s1", "s2", "s3", "s4", "s5", "s6", "s7", "s8"];

    /// Builds scores from S1..S8; the CQS is their arithmetic mean.
    pub fn from_parameters(p: [f64; 8]) -> Result<Self, MetricError> {
        if let Some((index, &value)) = p
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(MetricError::OutOfRange { index: index + 1, value });
        }
        Ok(ParameterScores {
            s1_coherence: p[0],
            s2_clarity: p[1],
            s3_depth: p[2],
            s4_responsiveness: p[3],
            s5_context_retention: p[4],
            s6_nontoxicity: p[5],
            s7_conciseness: p[6],
            s8_readability: p[7],
            cqs: composite_quality(&p),
        })
    }

    pub fn parameters(&self) -> [f64; 8] {
        [
            self.s1_coherence,
            self.s2_clarity,
            self.s3_depth,
            self.s4_responsiveness,
            self.s5_context_retention,
            self.s6_nontoxicity,
            self.s7_conciseness,
            self.s8_readability,
        ]
    }
}

/// Uniform mean of the eight parameters.
pub fn composite_quality(parameters: &[f64; 8]) -> f64 {
    parameters.iter().sum::<f64>() / 8.0
}

fn check_count<T>(out: &[T], expected: usize) -> Result<(), MetricError> {
    if out.len() == expected {
        Ok(())
    } else {
        Err(MetricError::CountMismatch {
            expected,
            got: out.len(),
        })
    }
}

fn embed(backend: &dyn ScorerBackend, texts: &[&str]) -> Result<Vec<EmbeddingVector>, MetricError> {
    let v = backend.embed(texts)?;
    check_count(&v, texts.len())?;
    Ok(v)
}

/// S1: mean cosine of adjacent sentence embeddings, negatives clamped to 0.
/// A single sentence scores 1.
pub fn coherence(split: &SentenceSplit, backend: &dyn ScorerBackend) -> Result<f64, MetricError> {
    if split.len() < 2 {
        return Ok(1.0);
    }
    let sentences: Vec<&str> = split.iter().collect();
    let v = embed(backend, &sentences)?;
    let sum: f64 = v.windows(2).map(|w| w[0].cosine(&w[1])).sum();
    Ok((sum / (v.len() - 1) as f64).clamp(0.0, 1.0))
}

/// S2: fraction of sentences the backend judges acceptable.
pub fn clarity(split: &SentenceSplit, backend: &dyn ScorerBackend) -> Result<f64, MetricError> {
    let sentences: Vec<&str> = split.iter().collect();
    let flags = backend.grammaticality(&sentences)?;
    check_count(&flags, sentences.len())?;
    Ok(flags.iter().filter(|&&ok| ok).count() as f64 / flags.len() as f64)
}

/// Default cluster count: `max(1, min(5, ⌊n/10⌋, n))`.
pub fn default_k(token_count: usize) -> usize {
    5.min(token_count / 10).min(token_count).max(1)
}

/// Topic spread of one response: intra-cluster variance and cluster count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopicDispersion {
    pub sigma_topic: f64,
    pub unique_clusters: usize,
    pub token_count: usize,
}

/// Clusters token embeddings and measures their mean intra-cluster variance.
pub fn topic_dispersion(
    tokens: &[&str],
    backend: &dyn ScorerBackend,
    k: usize,
    seed: u64,
) -> Result<TopicDispersion, MetricError> {
    if k == 0 || tokens.len() < k {
        return Err(MetricError::TooFewTokens {
            tokens: tokens.len(),
            k,
        });
    }
    let v = embed(backend, tokens)?;
    let points: Vec<&[f64]> = v.iter().map(EmbeddingVector::components).collect();
    let clustering = kmeans::kmeans(&points, k, seed);
    Ok(TopicDispersion {
        sigma_topic: clustering.mean_intra_cluster_variance(&points),
        unique_clusters: clustering.occupied(),
        token_count: tokens.len(),
    })
}

/// S3 from a variance and the batch maximum: `min(σ / max, 1)`.
pub fn normalize_depth(sigma_topic: f64, batch_max_variance: f64) -> Result<f64, MetricError> {
    if !(batch_max_variance.is_finite() && batch_max_variance > 0.0) {
        return Err(MetricError::InvalidBatchVariance(batch_max_variance));
    }
    Ok((sigma_topic / batch_max_variance).clamp(0.0, 1.0))
}

/// S3 for a single response given a known batch maximum.
pub fn depth(
    tokens: &[&str],
    backend: &dyn ScorerBackend,
    k: usize,
    batch_max_variance: f64,
) -> Result<f64, MetricError> {
    if !(batch_max_variance.is_finite() && batch_max_variance > 0.0) {
        return Err(MetricError::InvalidBatchVariance(batch_max_variance));
    }
    let d = topic_dispersion(tokens, backend, k, 0)?;
    normalize_depth(d.sigma_topic, batch_max_variance)
}

/// S4 with the unclamped entailment margin kept for auditing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Responsiveness {
    /// `p_entail − p_contradiction`, in `[−1, 1]`.
    pub raw: f64,
    /// `raw` clamped to `[0, 1]`.
    pub score: f64,
}

/// S4: entailment of the response by the prompt.
pub fn responsiveness(
    prompt_text: &str,
    response_text: &str,
    backend: &dyn ScorerBackend,
) -> Result<Responsiveness, MetricError> {
    let p = backend.nli(&[(prompt_text, response_text)])?;
    check_count(&p, 1)?;
    let raw = p[0].entail - p[0].contradiction;
    Ok(Responsiveness {
        raw,
        score: raw.clamp(0.0, 1.0),
    })
}

/// S5: cosine between the joined context and the response, clamped to `[0, 1]`.
pub fn context_retention(
    context_texts: &[&str],
    response_text: &str,
    backend: &dyn ScorerBackend,
) -> Result<f64, MetricError> {
    if context_texts.is_empty() {
        return Err(MetricError::EmptyContext);
    }
    let joined = context_texts.join(" ");
    let v = embed(backend, &[&joined, response_text])?;
    Ok(v[0].cosine(&v[1]).clamp(0.0, 1.0))
}

/// S6: `1 − toxicity`.
pub fn nontoxicity(response_text: &str, backend: &dyn ScorerBackend) -> Result<f64, MetricError> {
    let t = backend.toxicity(&[response_text])?;
    check_count(&t, 1)?;
    Ok((1.0 - t[0]).clamp(0.0, 1.0))
}

/// S7: unique semantic clusters per token, capped at 1.
pub fn conciseness(unique_clusters: usize, total_tokens: usize) -> Result<f64, MetricError> {
    if total_tokens == 0 {
        return Err(MetricError::ZeroLength);
    }
    Ok((unique_clusters as f64 / total_tokens as f64).min(1.0))
}

/// Flesch Reading Ease from raw counts.
pub fn flesch_reading_ease(words: usize, sentences: usize, syllables: usize) -> f64 {
    let asl = words as f64 / sentences as f64;
    let asw = syllables as f64 / words as f64;
    206.835 - 1.015 * asl - 84.6 * asw
}

/// S8 from a Flesch score: `clamp(FRE / 100, 0, 1)`.
pub fn normalize_fre(fre: f64) -> f64 {
    (fre / 100.0).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Readability {
    pub words: usize,
    pub sentences: usize,
    pub syllables: usize,
    pub fre: f64,
    pub score: f64,
    pub mode: SyllableMode,
}

/// S8 for a text. The same formula is used for every language.
pub fn readability(
    text: &str,
    language: Language,
    counter: &dyn SyllableCounter,
) -> Result<Readability, MetricError> {
    let split = text::split_sentences(text, language).map_err(|_| MetricError::NoWords)?;
    let words = text::tokenize(text);
    if words.is_empty() {
        return Err(MetricError::NoWords);
    }
    let syllables: usize = words.iter().map(|w| counter.count(w, language)).sum();
    let fre = flesch_reading_ease(words.len(), split.len(), syllables);
    Ok(Readability {
        words: words.len(),
        sentences: split.len(),
        syllables,
        fre,
        score: normalize_fre(fre),
        mode: counter.mode(language),
    })
}

/// Everything needed to score one response.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoringInput {
    pub language: Language,
    pub prompt_text: String,
    pub response_text: String,
    /// Prior user turns followed by the current prompt; the prompt alone for RAW.
    pub context_texts: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScoringOptions {
    /// Fixed cluster count; `None` uses [`default_k`].
    pub k: Option<usize>,
    pub kmeans_seed: u64,
}

impl Default for ScoringOptions {
    fn default() -> Self {
        ScoringOptions {
            k: None,
            kmeans_seed: 0,
        }
    }
}

/// First-pass result: every parameter except the batch-normalised depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseAnalysis {
    pub coherence: f64,
    pub clarity: f64,
    pub responsiveness: Responsiveness,
    pub context_retention: f64,
    pub nontoxicity: f64,
    pub conciseness: f64,
    pub readability: Readability,
    pub dispersion: TopicDispersion,
}

/// Final scores plus the audit fields written next to them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredResponse {
    pub scores: ParameterScores,
    pub raw_responsiveness: f64,
    pub sigma_topic: f64,
    pub syllable_mode: SyllableMode,
}

/// Pass one. Any failing sub-metric fails the whole response.
pub fn analyze_response(
    input: &ScoringInput,
    backend: &dyn ScorerBackend,
    counter: &dyn SyllableCounter,
    options: &ScoringOptions,
) -> Result<ResponseAnalysis, MetricError> {
    let split = text::split_sentences(&input.response_text, input.language)?;
    let tokens = text::tokenize(&input.response_text);
    if tokens.is_empty() {
        return Err(MetricError::NoWords);
    }
    let k = options.k.unwrap_or_else(|| default_k(tokens.len()));
    let dispersion = topic_dispersion(&tokens, backend, k, options.kmeans_seed)?;
    let context: Vec<&str> = input.context_texts.iter().map(String::as_str).collect();
    Ok(ResponseAnalysis {
        coherence: coherence(&split, backend)?,
        clarity: clarity(&split, backend)?,
        responsiveness: responsiveness(&input.prompt_text, &input.response_text, backend)?,
        context_retention: context_retention(&context, &input.response_text, backend)?,
        nontoxicity: nontoxicity(&input.response_text, backend)?,
        conciseness: conciseness(dispersion.unique_clusters, dispersion.token_count)?,
        readability: readability(&input.response_text, input.language, counter)?,
        dispersion,
    })
}

/// Largest topic variance in a batch; the depth normaliser.
pub fn batch_max_variance<'a, I>(analyses: I) -> f64
where
    I: IntoIterator<Item = &'a ResponseAnalysis>,
{
    analyses
        .into_iter()
        .map(|a| a.dispersion.sigma_topic)
        .fold(0.0, f64::max)
}

/// Pass two. A batch whose maximum variance is zero gives depth 0 throughout.
pub fn finalize(analysis: &ResponseAnalysis, batch_max_variance: f64) -> Result<ScoredResponse, MetricError> {
    let depth = if batch_max_variance == 0.0 {
        0.0
    } else {
        normalize_depth(analysis.dispersion.sigma_topic, batch_max_variance)?
    };
    let scores = ParameterScores::from_parameters([
        analysis.coherence,
        analysis.clarity,
        depth,
        analysis.responsiveness.score,
        analysis.context_retention,
        analysis.nontoxicity,
        analysis.conciseness,
        analysis.readability.score,
    ])?;
    Ok(ScoredResponse {
        scores,
        raw_responsiveness: analysis.responsiveness.raw,
        sigma_topic: analysis.dispersion.sigma_topic,
        syllable_mode: analysis.readability.mode,
    })
}

/// Scores one normalisation batch with the two-pass barrier.
///
/// Failed responses are reported individually and excluded from the batch
/// maximum.
pub fn score_batch(
    inputs: &[ScoringInput],
    backend: &dyn ScorerBackend,
    counter: &dyn SyllableCounter,
    options: &ScoringOptions,
) -> Vec<Result<ScoredResponse, MetricError>> {
    let analyses: Vec<Result<ResponseAnalysis, MetricError>> = inputs
        .iter()
        .map(|i| analyze_response(i, backend, counter, options))
        .collect();
    let max = batch_max_variance(analyses.iter().filter_map(|a| a.as_ref().ok()));
    analyses
        .into_iter()
        .map(|a| a.and_then(|a| finalize(&a, max)))
        .collect()
}

/// Scores a persisted trial against a known batch maximum.
pub fn score_response(
    record: &TrialRecord,
    context_texts: &[String],
    backend: &dyn ScorerBackend,
    counter: &dyn SyllableCounter,
    options: &ScoringOptions,
    batch_max_variance: f64,
) -> Result<ScoredResponse, MetricError> {
    if !record.status.is_ok() {
        return Err(MetricError::ResponseNotOk);
    }
    let input = ScoringInput {
        language: record.key.language,
        prompt_text: record.prompt_text.clone(),
        response_text: record.response_text.clone(),
        context_texts: context_texts.to_vec(),
    };
    let analysis = analyze_response(&input, backend, counter, options)?;
    finalize(&analysis, batch_max_variance)
}

/// Mean CQS of one (model, category, condition, language) cell.
pub fn aggregate_cell(scores: &[ParameterScores]) -> Result<f64, MetricError> {
    if scores.is_empty() {
        return Err(MetricError::EmptyCell);
    }
    Ok(scores.iter().map(|s| s.cqs).sum::<f64>() / scores.len() as f64)
}

/// One printed per-parameter table row.
#[derive(Debug, Clone, PartialEq)]
pub struct PrintedParameterRow {
    pub language: Language,
    pub model: String,
    pub condition: HistoryCondition,
    pub category: PolitenessCategory,
    pub parameters: [f64; 8],
    pub printed_cqs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconciliationEntry {
    pub row: PrintedParameterRow,
    pub recomputed_cqs: f64,
    pub deviation: f64,
    pub flagged: bool,
}

/// Compares each printed CQS with the mean of its printed parameters.
///
/// Rows are flagged, never corrected.
pub fn reconcile(rows: &[PrintedParameterRow], tolerance: f64) -> Vec<ReconciliationEntry> {
    rows.iter()
        .map(|row| {
            let recomputed_cqs = composite_quality(&row.parameters);
            let deviation = (row.printed_cqs - recomputed_cqs).abs();
            ReconciliationEntry {
                row: row.clone(),
                recomputed_cqs,
                deviation,
                flagged: deviation > tolerance,
            }
        })
        .collect()
}
