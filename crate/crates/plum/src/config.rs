//! Run configuration, read from TOML.
//!
//! ```toml
//! [run]
//! replicate_slots = ["morning"]
//! days = ["2026-10-15"]
//! live_priming = false
//!
//! [retry]
//! max_attempts = 5
//! base_delay_ms = 500
//! max_delay_ms = 30000
//!
//! [[endpoint]]
//! name = "GPT"
//! base_url = "https://api.example.com/v1"
//! model = "gpt-4o"
//! auth_env_var = "OPENAI_API_KEY"
//! max_requests_per_minute = 60
//!
//! [[script]]
//! condition = "POL"
//! language = "en"
//! path = "scripts/pol_en.txt"
//! ```
//!
//! Credentials never appear here; each endpoint names the environment
//! variable that holds its token.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use plum_core::harness::RetryPolicy;
use plum_core::{CalendarDay, HistoryCondition, Language, ReplicateSlot};
use serde::Deserialize;
use thiserror::Error;

use crate::scripts::{self, ScriptError, ScriptSet};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("script {}: {source}", path.display())]
    Script { path: PathBuf, source: ScriptError },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointConfig {
    /// Model label written to results, e.g. `GPT`.
    pub name: String,
    /// Base of an OpenAI-compatible API; `/chat/completions` is appended.
    pub base_url: String,
    /// Model identifier sent in the request body; defaults to `name`.
    #[serde(default)]
    pub model: Option<String>,
    pub auth_env_var: String,
    pub max_requests_per_minute: usize,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    /// Length of the rate window; one minute unless overridden.
    #[serde(default = "default_window_ms")]
    pub rate_window_ms: u64,
    /// Worker bound; derived from the rate limit when absent.
    #[serde(default)]
    pub max_concurrency: Option<usize>,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
}

fn default_max_tokens() -> u32 {
    1024
}

fn default_window_ms() -> u64 {
    60_000
}

fn default_timeout_secs() -> u64 {
    120
}

impl EndpointConfig {
    pub fn model_id(&self) -> &str {
        self.model.as_deref().unwrap_or(&self.name)
    }

    pub fn rate_window(&self) -> Duration {
        Duration::from_millis(self.rate_window_ms)
    }

    /// Parallel workers: the explicit bound, else one per 30 requests per
    /// window, clamped to 1..=16.
    pub fn concurrency(&self) -> usize {
        self.max_concurrency
            .unwrap_or(self.max_requests_per_minute / 30)
            .clamp(1, 16)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetryConfig {
    #[serde(default = "default_attempts")]
    pub max_attempts: u32,
    #[serde(default = "default_base_ms")]
    pub base_delay_ms: u64,
    #[serde(default = "default_max_ms")]
    pub max_delay_ms: u64,
    #[serde(default = "default_multiplier")]
    pub multiplier: f64,
}

fn default_attempts() -> u32 {
    5
}
fn default_base_ms() -> u64 {
    500
}
fn default_max_ms() -> u64 {
    30_000
}
fn default_multiplier() -> f64 {
    2.0
}

impl Default for RetryConfig {
    fn default() -> Self {
        RetryConfig {
            max_attempts: default_attempts(),
            base_delay_ms: default_base_ms(),
            max_delay_ms: default_max_ms(),
            multiplier: default_multiplier(),
        }
    }
}

impl RetryConfig {
    pub fn policy(&self) -> RetryPolicy {
        RetryPolicy {
            max_attempts: self.max_attempts,
            base_delay: Duration::from_millis(self.base_delay_ms),
            max_delay: Duration::from_millis(self.max_delay_ms),
            multiplier: self.multiplier,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default)]
    pub replicate_slots: Vec<String>,
    #[serde(default)]
    pub days: Vec<String>,
    /// Generate every priming reply live instead of using canned replies.
    #[serde(default)]
    pub live_priming: bool,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptEntry {
    pub condition: String,
    pub language: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    run: RunSection,
    #[serde(default)]
    retry: RetryConfig,
    #[serde(default)]
    endpoint: Vec<EndpointConfig>,
    #[serde(default)]
    script: Vec<ScriptEntry>,
}

/// Validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub endpoints: Vec<EndpointConfig>,
    pub retry: RetryPolicy,
    pub replicate_slots: Vec<ReplicateSlot>,
    pub days: Vec<CalendarDay>,
    pub live_priming: bool,
    pub scripts: ScriptSet,
}

impl Config {
    /// Parses TOML; relative script paths resolve against `base_dir`.
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Config, ConfigError> {
        let raw: RawConfig = toml::from_str(text)?;
        let mut names = BTreeSet::new();
        for e in &raw.endpoint {
            if e.name.trim().is_empty() {
                return Err(ConfigError::Invalid("endpoint name is empty".into()));
            }
            if !names.insert(e.name.as_str()) {
                return Err(ConfigError::Invalid(format!("duplicate endpoint `{}`", e.name)));
            }
            if e.max_requests_per_minute == 0 {
                return Err(ConfigError::Invalid(format!("endpoint `{}`: rate limit must be positive", e.name)));
            }
            if e.rate_window_ms == 0 {
                return Err(ConfigError::Invalid(format!("endpoint `{}`: rate window must be positive", e.name)));
            }
        }
        if raw.retry.max_attempts == 0 {
            return Err(ConfigError::Invalid("retry.max_attempts must be at least 1".into()));
        }
        let replicate_slots = if raw.run.replicate_slots.is_empty() {
            vec![ReplicateSlot::Morning]
        } else {
            raw.run
                .replicate_slots
                .iter()
                .map(|s| s.parse().map_err(|e| ConfigError::Invalid(format!("{e}"))))
                .collect::<Result<_, _>>()?
        };
        let days = if raw.run.days.is_empty() {
            vec![today()]
        } else {
            raw.run
                .days
                .iter()
                .map(|s| s.parse().map_err(|e| ConfigError::Invalid(format!("{e}"))))
                .collect::<Result<_, _>>()?
        };
        let mut scripts = ScriptSet::defaults();
        for entry in &raw.script {
            let condition: HistoryCondition =
                entry.condition.parse().map_err(|e| ConfigError::Invalid(format!("{e}")))?;
            let language: Language = entry.language.parse().map_err(|e| ConfigError::Invalid(format!("{e}")))?;
            let path = base_dir.join(&entry.path);
            let script = scripts::load_script(condition, &path)
                .map_err(|source| ConfigError::Script { path: path.clone(), source })?;
            scripts.insert(language, script);
        }
        Ok(Config {
            endpoints: raw.endpoint,
            retry: raw.retry.policy(),
            replicate_slots,
            days,
            live_priming: raw.run.live_priming,
            scripts,
        })
    }

    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        Config::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn endpoint(&self, name: &str) -> Option<&EndpointConfig> {
        self.endpoints.iter().find(|e| e.name == name)
    }
}

/// Current UTC date.
pub fn today() -> CalendarDay {
    use chrono::Datelike;
    let d = chrono::Utc::now().date_naive();
    CalendarDay::new(d.year() as u16, d.month() as u8, d.day() as u8).expect("chrono yields valid dates")
}
