//! HTTP dispatch to OpenAI-compatible chat endpoints.
//!
//! Every HTTP attempt, retries and live priming calls included, first takes
//! a slot from the endpoint's rate window, so the request log of one
//! endpoint never exceeds its limit in any window.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use plum_core::harness::{Message, PrimingScript, RateWindow, RetryPolicy, TrialStatus};
use serde::Deserialize;
use serde_json::json;
use thiserror::Error;

use crate::config::EndpointConfig;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DispatchError {
    #[error("credential variable `{0}` is not set")]
    AuthMissing(String),
    #[error("rate limited after {attempts} attempts")]
    RateLimited { attempts: u32 },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("HTTP status {status}")]
    Http { status: u16 },
}

impl DispatchError {
    /// Short code written to the results `status` column.
    pub fn code(&self) -> String {
        match self {
            DispatchError::AuthMissing(_) => "auth_missing".into(),
            DispatchError::RateLimited { .. } => "rate_limited".into(),
            DispatchError::Transport(_) => "transport".into(),
            DispatchError::MalformedResponse(_) => "malformed_response".into(),
            DispatchError::Http { status } => format!("http_{status}"),
        }
    }

    fn is_transient(&self) -> bool {
        match self {
            DispatchError::RateLimited { .. } | DispatchError::Transport(_) => true,
            DispatchError::Http { status } => *status >= 500,
            _ => false,
        }
    }
}

/// Outcome of one trial as written to the results file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DispatchOutcome {
    pub response_text: String,
    pub latency_ms: u64,
    pub status: TrialStatus,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    content: Option<String>,
}

/// Client for one endpoint. Shared by that endpoint's workers.
pub struct Dispatcher {
    endpoint: EndpointConfig,
    token: String,
    client: reqwest::blocking::Client,
    retry: RetryPolicy,
    window: Mutex<RateWindow>,
    origin: Instant,
    log: Mutex<Vec<Duration>>,
}

impl Dispatcher {
    /// Reads the credential before anything touches the network.
    pub fn new(endpoint: EndpointConfig, retry: RetryPolicy, origin: Instant) -> Result<Self, DispatchError> {
        let token = std::env::var(&endpoint.auth_env_var)
            .ok()
            .filter(|t| !t.is_empty())
            .ok_or_else(|| DispatchError::AuthMissing(endpoint.auth_env_var.clone()))?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(endpoint.timeout_secs))
            .build()
            .map_err(|e| DispatchError::Transport(e.to_string()))?;
        let window = RateWindow::new(endpoint.max_requests_per_minute, endpoint.rate_window());
        Ok(Dispatcher {
            endpoint,
            token,
            client,
            retry,
            window: Mutex::new(window),
            origin,
            log: Mutex::new(Vec::new()),
        })
    }

    pub fn endpoint(&self) -> &EndpointConfig {
        &self.endpoint
    }

    pub fn name(&self) -> &str {
        &self.endpoint.name
    }

    /// Send times of every HTTP attempt, as offsets from the shared origin.
    pub fn request_log(&self) -> Vec<Duration> {
        self.log.lock().expect("request log poisoned").clone()
    }

    /// Blocks until the rate window admits a request, then records it.
    fn acquire(&self) {
        loop {
            let wait = {
                let mut w = self.window.lock().expect("rate window poisoned");
                let now = self.origin.elapsed();
                match w.try_acquire(now) {
                    Ok(()) => {
                        self.log.lock().expect("request log poisoned").push(now);
                        return;
                    }
                    Err(wait) => wait,
                }
            };
            std::thread::sleep(wait);
        }
    }

    fn attempt(&self, messages: &[Message]) -> Result<String, DispatchError> {
        self.acquire();
        let body = json!({
            "model": self.endpoint.model_id(),
            "messages": messages
                .iter()
                .map(|m| json!({"role": m.role.as_str(), "content": m.content}))
                .collect::<Vec<_>>(),
            "temperature": self.endpoint.temperature,
            "max_tokens": self.endpoint.max_tokens,
        });
        let url = format!("{}/chat/completions", self.endpoint.base_url.trim_end_matches('/'));
        let resp = self
            .client
            .post(url)
            .bearer_auth(&self.token)
            .json(&body)
            .send()
            .map_err(|e| DispatchError::Transport(e.to_string()))?;
        let status = resp.status();
        if status.as_u16() == 429 {
            return Err(DispatchError::RateLimited { attempts: 1 });
        }
        if !status.is_success() {
            return Err(DispatchError::Http { status: status.as_u16() });
        }
        let text = resp.text().map_err(|e| DispatchError::Transport(e.to_string()))?;
        let parsed: ChatResponse =
            serde_json::from_str(&text).map_err(|e| DispatchError::MalformedResponse(e.to_string()))?;
        let content = parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| DispatchError::MalformedResponse("no choices[0].message.content".into()))?;
        if content.trim().is_empty() {
            return Err(DispatchError::MalformedResponse("empty content".into()));
        }
        Ok(content)
    }

    /// One completion with retry on 429, 5xx and transport failures.
    pub fn complete(&self, messages: &[Message]) -> Result<String, DispatchError> {
        let mut attempts = 0;
        loop {
            attempts += 1;
            match self.attempt(messages) {
                Ok(text) => return Ok(text),
                Err(e) if e.is_transient() => match self.retry.delay_before(attempts) {
                    Some(pause) => std::thread::sleep(pause),
                    None => {
                        return Err(match e {
                            DispatchError::RateLimited { .. } => DispatchError::RateLimited { attempts },
                            other => other,
                        })
                    }
                },
                Err(e) => return Err(e),
            }
        }
    }

    /// Replays the priming script with live replies, then sends the prompt.
    ///
    /// Returns the full message list that produced the final reply.
    fn live_session(&self, script: &PrimingScript, prompt: &str) -> Result<Vec<Message>, DispatchError> {
        let mut messages = Vec::new();
        for turn in &script.turns {
            messages.push(Message::user(turn.user_text.clone()));
            let reply = self.complete(&messages)?;
            messages.push(Message::assistant(reply));
        }
        messages.push(Message::user(prompt));
        Ok(messages)
    }

    /// Runs one trial. Latency covers the final request only.
    ///
    /// With `live` set, every priming reply comes from the model and canned
    /// replies are ignored; otherwise `session` is sent as built.
    pub fn run_trial(&self, session: &[Message], script: Option<&PrimingScript>, prompt: &str, live: bool) -> DispatchOutcome {
        let messages = match (live, script) {
            (true, Some(s)) => match self.live_session(s, prompt) {
                Ok(m) => m,
                Err(e) => return failure(&e, 0),
            },
            _ => session.to_vec(),
        };
        let start = Instant::now();
        let result = self.complete(&messages);
        let latency_ms = start.elapsed().as_millis() as u64;
        match result {
            Ok(response_text) => DispatchOutcome { response_text, latency_ms, status: TrialStatus::Ok },
            Err(e) => failure(&e, latency_ms),
        }
    }
}

fn failure(e: &DispatchError, latency_ms: u64) -> DispatchOutcome {
    DispatchOutcome { response_text: String::new(), latency_ms, status: TrialStatus::Error(e.code()) }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn endpoint(var: &str) -> EndpointConfig {
        EndpointConfig {
            name: "GPT".into(),
            base_url: "http://127.0.0.1:9".into(),
            model: None,
            auth_env_var: var.into(),
            max_requests_per_minute: 60,
            temperature: 0.0,
            max_tokens: 16,
            rate_window_ms: 60_000,
            max_concurrency: None,
            timeout_secs: 5,
        }
    }

    #[test]
    fn missing_credential_is_reported_by_name() {
        let var = "PLUM_DISPATCH_UNIT_UNSET";
        let err = Dispatcher::new(endpoint(var), RetryPolicy::default(), Instant::now()).err().unwrap();
        assert_eq!(err, DispatchError::AuthMissing(var.into()));
        assert_eq!(err.code(), "auth_missing");
    }

    #[test]
    fn transient_classification() {
        assert!(DispatchError::Http { status: 503 }.is_transient());
        assert!(!DispatchError::Http { status: 401 }.is_transient());
        assert!(!DispatchError::MalformedResponse(String::new()).is_transient());
        assert_eq!(DispatchError::Http { status: 404 }.code(), "http_404");
    }
}
