//! Scorer backends supply the neural quantities behind four of the metrics.

use alloc::string::String;
use alloc::vec::Vec;
use core::hash::Hasher;

use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Capability {
    Embed,
    Grammaticality,
    Nli,
    Toxicity,
}

impl Capability {
    pub const ALL: [Capability; 4] = [
        Capability::Embed,
        Capability::Grammaticality,
        Capability::Nli,
        Capability::Toxicity,
    ];

    pub const fn as_str(self) -> &'static str {
        match self {
            Capability::Embed => "embed",
            Capability::Grammaticality => "grammaticality",
            Capability::Nli => "nli",
            Capability::Toxicity => "toxicity",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BackendError {
    #[error("backend does not provide `{}`", .0.as_str())]
    Unavailable(Capability),
    #[error("backend request failed: {0}")]
    Transport(String),
    #[error("backend returned malformed output: {0}")]
    Malformed(String),
}

/// A non-zero embedding with its cached Euclidean norm.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector {
    components: Vec<f64>,
    norm: f64,
}

impl EmbeddingVector {
    /// Returns `None` for empty, non-finite or all-zero input.
    pub fn new(components: Vec<f64>) -> Option<Self> {
        if components.is_empty() || components.iter().any(|x| !x.is_finite()) {
            return None;
        }
        let norm = libm::sqrt(components.iter().map(|x| x * x).sum());
        (norm > 0.0).then_some(EmbeddingVector { components, norm })
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Cosine similarity; panics on a dimension mismatch.
    pub fn cosine(&self, other: &EmbeddingVector) -> f64 {
        assert_eq!(self.dim(), other.dim(), "embedding dimension mismatch");
        let dot: f64 = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a * b)
            .sum();
        (dot / (self.norm * other.norm)).clamp(-1.0, 1.0)
    }
}

/// Zero-shot entailment output for one (premise, hypothesis) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NliProbabilities {
    pub entail: f64,
    pub neutral: f64,
    pub contradiction: f64,
}

impl NliProbabilities {
    pub const SIMPLEX_TOLERANCE: f64 = 1e-3;

    /// Validates the probability simplex within [`Self::SIMPLEX_TOLERANCE`].
    pub fn new(entail: f64, neutral: f64, contradiction: f64) -> Option<Self> {
        let parts = [entail, neutral, contradiction];
        let in_range = parts.iter().all(|p| (0.0..=1.0).contains(p));
        let sum: f64 = parts.iter().sum();
        (in_range && (sum - 1.0).abs() <= Self::SIMPLEX_TOLERANCE).then_some(NliProbabilities {
            entail,
            neutral,
            contradiction,
        })
    }
}

/// Source of sentence embeddings, grammaticality, entailment and toxicity.
///
/// Implementations must be deterministic: the same inputs give the same
/// outputs for the lifetime of the handle. Outputs preserve input order.
pub trait ScorerBackend: Send + Sync {
    /// Backend name plus model identifiers.
    fn identity(&self) -> String;

    fn supports(&self, capability: Capability) -> bool;

    fn embed(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, BackendError> {
        let _ = texts;
        Err(BackendError::Unavailable(Capability::Embed))
    }

    /// Binary acceptability per sentence.
    fn grammaticality(&self, sentences: &[&str]) -> Result<Vec<bool>, BackendError> {
        let _ = sentences;
        Err(BackendError::Unavailable(Capability::Grammaticality))
    }

    /// Pairs are `(premise, hypothesis)`; scoring uses prompt → response.
    fn nli(&self, pairs: &[(&str, &str)]) -> Result<Vec<NliProbabilities>, BackendError> {
        let _ = pairs;
        Err(BackendError::Unavailable(Capability::Nli))
    }

    /// Toxicity in `[0, 1]` per text.
    fn toxicity(&self, texts: &[&str]) -> Result<Vec<f64>, BackendError> {
        let _ = texts;
        Err(BackendError::Unavailable(Capability::Toxicity))
    }
}

fn fnv(parts: &[&str]) -> u64 {
    let mut h = fnv::FnvHasher::default();
    for p in parts {
        h.write(p.as_bytes());
        h.write_u8(0xff);
    }
    h.finish()
}

const MOCK_NLI: [(f64, f64, f64); 4] = [
    (0.80, 0.15, 0.05),
    (0.60, 0.30, 0.10),
    (0.45, 0.40, 0.15),
    (0.20, 0.50, 0.30),
];

const MOCK_TOXICITY: [f64; 4] = [0.002, 0.013, 0.040, 0.120];

/// Deterministic stand-in for the neural scorers.
///
/// * embed: each string hashes (with the seed) to a pseudo-random unit vector;
/// * grammaticality: a sentence is acceptable when its word count is odd;
/// * nli / toxicity: a hash-selected entry of a fixed table.
#[derive(Debug, Clone)]
pub struct MockBackend {
    seed: u64,
    dim: usize,
}

impl MockBackend {
    pub const DEFAULT_DIM: usize = 32;

    pub fn new(seed: u64) -> Self {
        Self::with_dim(seed, Self::DEFAULT_DIM)
    }

    pub fn with_dim(seed: u64, dim: usize) -> Self {
        assert!(dim > 0);
        MockBackend { seed, dim }
    }

    fn vector(&self, text: &str) -> EmbeddingVector {
        let mut rng = ChaCha8Rng::seed_from_u64(fnv(&[text]) ^ self.seed);
        loop {
            let comps: Vec<f64> = (0..self.dim)
                .map(|_| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0)
                .collect();
            if let Some(v) = EmbeddingVector::new(comps) {
                let n = v.norm();
                return EmbeddingVector::new(v.components().iter().map(|x| x / n).collect())
                    .expect("normalised vector is non-zero");
            }
        }
    }
}

impl ScorerBackend for MockBackend {
    fn identity(&self) -> String {
        alloc::format!("mock(seed={},dim={})", self.seed, self.dim)
    }

    fn supports(&self, _capability: Capability) -> bool {
        true
    }

    fn embed(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, BackendError> {
        Ok(texts.iter().map(|t| self.vector(t)).collect())
    }

    fn grammaticality(&self, sentences: &[&str]) -> Result<Vec<bool>, BackendError> {
        Ok(sentences
            .iter()
            .map(|s| s.split_whitespace().count() % 2 == 1)
            .collect())
    }

    fn nli(&self, pairs: &[(&str, &str)]) -> Result<Vec<NliProbabilities>, BackendError> {
        Ok(pairs
            .iter()
            .map(|(p, h)| {
                let (e, n, c) = MOCK_NLI[(fnv(&[p, h]) ^ self.seed) as usize % MOCK_NLI.len()];
                NliProbabilities::new(e, n, c).expect("table rows are valid")
            })
            .collect())
    }

    fn toxicity(&self, texts: &[&str]) -> Result<Vec<f64>, BackendError> {
        Ok(texts
            .iter()
            .map(|t| MOCK_TOXICITY[(fnv(&[t]) ^ self.seed) as usize % MOCK_TOXICITY.len()])
            .collect())
    }
}
