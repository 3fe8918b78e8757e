//! Client for the scorer sidecar.
//!
//! Wire format: `POST /score` with `{capability, inputs, batch_id}` answered
//! by `{capability, outputs, model_identity}`, or `{error: {code, message}}`
//! on failure; `GET /health` answers `{status, capabilities}`. Requests are
//! chunked to the sidecar's batch cap and outputs concatenated in order.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Duration;

use plum_core::backend::{BackendError, Capability, EmbeddingVector, NliProbabilities, ScorerBackend};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// Largest batch the sidecar accepts by default.
pub const MAX_BATCH: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct Health {
    pub status: String,
    pub capabilities: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct ScoreResponse<T> {
    capability: String,
    outputs: Vec<T>,
    model_identity: String,
}

#[derive(Debug, Deserialize)]
struct ErrorBody {
    error: ErrorDetail,
}

#[derive(Debug, Deserialize)]
struct ErrorDetail {
    code: String,
    message: String,
}

#[derive(Debug, Serialize)]
struct NliPair<'a> {
    premise: &'a str,
    hypothesis: &'a str,
}

#[derive(Debug, Deserialize)]
struct NliWire {
    p_entail: f64,
    p_neutral: f64,
    p_contradiction: f64,
}

pub struct HttpBackend {
    base_url: String,
    client: reqwest::blocking::Client,
    capabilities: Vec<Capability>,
    batch: usize,
    counter: AtomicU64,
}

impl HttpBackend {
    /// Connects and checks `/health`.
    pub fn connect(base_url: &str) -> Result<Self, BackendError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(300))
            .build()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        let base_url = base_url.trim_end_matches('/').to_string();
        let health = health(&client, &base_url)?;
        if health.status != "ok" {
            return Err(BackendError::Transport(format!("sidecar status `{}`", health.status)));
        }
        let capabilities = Capability::ALL
            .into_iter()
            .filter(|c| health.capabilities.iter().any(|h| h == c.as_str()))
            .collect();
        Ok(HttpBackend { base_url, client, capabilities, batch: MAX_BATCH, counter: AtomicU64::new(0) })
    }

    /// Overrides the chunk size; clamped to at least 1.
    pub fn with_batch_size(mut self, batch: usize) -> Self {
        self.batch = batch.max(1);
        self
    }

    pub fn health(&self) -> Result<Health, BackendError> {
        health(&self.client, &self.base_url)
    }

    fn score<I: Serialize, T: DeserializeOwned>(&self, capability: Capability, inputs: &[I]) -> Result<Vec<T>, BackendError> {
        if !self.supports(capability) {
            return Err(BackendError::Unavailable(capability));
        }
        let mut out = Vec::with_capacity(inputs.len());
        for chunk in inputs.chunks(self.batch) {
            let batch_id = format!("plum-{}", self.counter.fetch_add(1, Ordering::Relaxed));
            let body = json!({ "capability": capability.as_str(), "inputs": chunk, "batch_id": batch_id });
            let resp = self
                .client
                .post(format!("{}/score", self.base_url))
                .json(&body)
                .send()
                .map_err(|e| BackendError::Transport(e.to_string()))?;
            let status = resp.status();
            let text = resp.text().map_err(|e| BackendError::Transport(e.to_string()))?;
            if !status.is_success() {
                return Err(match serde_json::from_str::<ErrorBody>(&text) {
                    Ok(b) => BackendError::Transport(format!("{} {}: {}", status.as_u16(), b.error.code, b.error.message)),
                    Err(_) => BackendError::Transport(format!("HTTP {}", status.as_u16())),
                });
            }
            let parsed: ScoreResponse<T> =
                serde_json::from_str(&text).map_err(|e| BackendError::Malformed(e.to_string()))?;
            if parsed.capability != capability.as_str() {
                return Err(BackendError::Malformed(format!("capability echo `{}`", parsed.capability)));
            }
            if parsed.outputs.len() != chunk.len() {
                return Err(BackendError::Malformed(format!(
                    "{} outputs for {} inputs",
                    parsed.outputs.len(),
                    chunk.len()
                )));
            }
            let _ = parsed.model_identity;
            out.extend(parsed.outputs);
        }
        Ok(out)
    }
}

fn health(client: &reqwest::blocking::Client, base_url: &str) -> Result<Health, BackendError> {
    client
        .get(format!("{base_url}/health"))
        .send()
        .and_then(|r| r.error_for_status())
        .map_err(|e| BackendError::Transport(e.to_string()))?
        .json::<Health>()
        .map_err(|e| BackendError::Malformed(e.to_string()))
}

impl ScorerBackend for HttpBackend {
    fn identity(&self) -> String {
        format!("sidecar {}", self.base_url)
    }

    fn supports(&self, capability: Capability) -> bool {
        self.capabilities.contains(&capability)
    }

    fn embed(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, BackendError> {
        self.score::<_, Vec<f64>>(Capability::Embed, texts)?
            .into_iter()
            .map(|v| EmbeddingVector::new(v).ok_or_else(|| BackendError::Malformed("degenerate embedding".into())))
            .collect()
    }

    fn grammaticality(&self, sentences: &[&str]) -> Result<Vec<bool>, BackendError> {
        self.score::<_, Value>(Capability::Grammaticality, sentences)?
            .into_iter()
            .map(|v| match v.as_f64() {
                Some(x) if x == 0.0 => Ok(false),
                Some(x) if x == 1.0 => Ok(true),
                _ => v.as_bool().ok_or_else(|| BackendError::Malformed(format!("grammaticality `{v}`"))),
            })
            .collect()
    }

    fn nli(&self, pairs: &[(&str, &str)]) -> Result<Vec<NliProbabilities>, BackendError> {
        let wire: Vec<NliPair> = pairs.iter().map(|&(premise, hypothesis)| NliPair { premise, hypothesis }).collect();
        self.score::<_, NliWire>(Capability::Nli, &wire)?
            .into_iter()
            .map(|p| {
                NliProbabilities::new(p.p_entail, p.p_neutral, p.p_contradiction)
                    .ok_or_else(|| BackendError::Malformed("nli probabilities off the simplex".into()))
            })
            .collect()
    }

    fn toxicity(&self, texts: &[&str]) -> Result<Vec<f64>, BackendError> {
        let v = self.score::<_, f64>(Capability::Toxicity, texts)?;
        match v.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            Some(x) => Err(BackendError::Malformed(format!("toxicity {x} outside [0, 1]"))),
            None => Ok(v),
        }
    }
}
