//! Trial planning, session construction and rate-control bookkeeping.
//!
//! The network side of the harness lives in the `plum` crate; what is here is
//! deterministic and clock-agnostic so it can be tested exhaustively.

use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::time::Duration;

use thiserror::Error;

use crate::corpus::{Corpus, Prompt};
use crate::taxonomy::{CalendarDay, HistoryCondition, Language, PolitenessCategory, ReplicateSlot};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("no model endpoints configured")]
    EmptyEndpointList,
    #[error("no history conditions selected")]
    EmptyConditionList,
    #[error("no replicate slots or days selected")]
    EmptySchedule,
    #[error("condition {0} needs a priming script")]
    MissingScript(HistoryCondition),
    #[error("RAW sessions take no priming script")]
    UnexpectedScript,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    User,
    Assistant,
}

impl Role {
    pub const fn as_str(self) -> &'static str {
        match self {
            Role::User => "user",
            Role::Assistant => "assistant",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn user(content: impl Into<String>) -> Self {
        Message {
            role: Role::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Message {
            role: Role::Assistant,
            content: content.into(),
        }
    }
}

/// One priming exchange. Without a canned reply the live model answers it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimingTurn {
    pub user_text: String,
    pub canned_assistant_text: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimingScript {
    pub condition: HistoryCondition,
    pub turns: Vec<PrimingTurn>,
}

impl PrimingScript {
    /// The user side of the script, in order.
    pub fn user_texts(&self) -> impl Iterator<Item = &str> {
        self.turns.iter().map(|t| t.user_text.as_str())
    }

    /// True when every turn carries a canned reply.
    pub fn is_fully_canned(&self) -> bool {
        self.turns.iter().all(|t| t.canned_assistant_text.is_some())
    }
}

/// Builds the message list for one trial.
///
/// RAW yields the prompt alone. POL/IMP replay the script, then the prompt.
/// Turns without a canned reply contribute only their user message; the
/// dispatcher fills in live replies for those.
pub fn build_session(
    condition: HistoryCondition,
    script: Option<&PrimingScript>,
    prompt: &Prompt,
) -> Result<Vec<Message>, PlanError> {
    let mut messages = Vec::new();
    match (condition, script) {
        (HistoryCondition::Raw, None) => {}
        (HistoryCondition::Raw, Some(_)) => return Err(PlanError::UnexpectedScript),
        (c, None) => return Err(PlanError::MissingScript(c)),
        (c, Some(s)) if s.turns.is_empty() => return Err(PlanError::MissingScript(c)),
        (_, Some(s)) => {
            for turn in &s.turns {
                messages.push(Message::user(turn.user_text.clone()));
                if let Some(reply) = &turn.canned_assistant_text {
                    messages.push(Message::assistant(reply.clone()));
                }
            }
        }
    }
    messages.push(Message::user(prompt.text.clone()));
    Ok(messages)
}

/// Full factorial coordinates of one dispatched prompt.
///
/// Field order defines the plan order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TrialKey {
    pub model: String,
    pub language: Language,
    pub condition: HistoryCondition,
    pub category: PolitenessCategory,
    pub ordinal: u32,
    pub replicate_slot: ReplicateSlot,
    pub day: CalendarDay,
}

impl TrialKey {
    /// Stable textual form used for hashing and logs.
    pub fn canonical(&self) -> String {
        alloc::format!(
            "{}|{}|{}|{}|{}|{}|{}",
            self.model,
            self.language,
            self.condition,
            self.category,
            self.ordinal,
            self.replicate_slot,
            self.day
        )
    }
}

impl fmt::Display for TrialKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

/// Enumerates every trial in sorted, duplicate-free order.
///
/// The plan size is `models × conditions × prompts × slots × days`.
pub fn enumerate_plan<S: AsRef<str>>(
    corpus: &Corpus,
    models: &[S],
    conditions: &[HistoryCondition],
    slots: &[ReplicateSlot],
    days: &[CalendarDay],
) -> Result<Vec<TrialKey>, PlanError> {
    if models.is_empty() {
        return Err(PlanError::EmptyEndpointList);
    }
    if conditions.is_empty() {
        return Err(PlanError::EmptyConditionList);
    }
    if slots.is_empty() || days.is_empty() {
        return Err(PlanError::EmptySchedule);
    }
    let mut plan = Vec::with_capacity(models.len() * conditions.len() * corpus.len() * slots.len() * days.len());
    for model in models {
        for &condition in conditions {
            for prompt in corpus.iter() {
                for &replicate_slot in slots {
                    for &day in days {
                        plan.push(TrialKey {
                            model: model.as_ref().into(),
                            language: prompt.language,
                            condition,
                            category: prompt.category,
                            ordinal: prompt.ordinal,
                            replicate_slot,
                            day,
                        });
                    }
                }
            }
        }
    }
    plan.sort();
    plan.dedup();
    Ok(plan)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TrialStatus {
    Ok,
    Error(String),
}

impl TrialStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, TrialStatus::Ok)
    }
}

impl fmt::Display for TrialStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrialStatus::Ok => f.write_str("ok"),
            TrialStatus::Error(code) => write!(f, "error:{code}"),
        }
    }
}

impl core::str::FromStr for TrialStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "ok" => Ok(TrialStatus::Ok),
            other => other
                .strip_prefix("error:")
                .map(|c| TrialStatus::Error(c.into()))
                .ok_or_else(|| alloc::format!("bad status `{other}`")),
        }
    }
}

/// A dispatched prompt and its outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialRecord {
    pub run_id: String,
    pub key: TrialKey,
    /// RFC 3339 UTC timestamp of the request.
    pub timestamp_utc: String,
    pub latency_ms: u64,
    pub status: TrialStatus,
    pub prompt_text: String,
    pub response_text: String,
}

impl TrialRecord {
    /// A record is well formed when an ok status carries a non-empty response.
    pub fn is_well_formed(&self) -> bool {
        !self.status.is_ok() || !self.response_text.trim().is_empty()
    }
}

/// Sliding-window admission control for one endpoint.
///
/// Times are offsets from any fixed origin chosen by the caller.
#[derive(Debug, Clone)]
pub struct RateWindow {
    max_requests: usize,
    window: Duration,
    sent: VecDeque<Duration>,
}

impl RateWindow {
    pub fn new(max_requests: usize, window: Duration) -> Self {
        assert!(max_requests > 0, "rate limit must be positive");
        RateWindow {
            max_requests,
            window,
            sent: VecDeque::with_capacity(max_requests),
        }
    }

    pub fn per_minute(max_requests: usize) -> Self {
        Self::new(max_requests, Duration::from_secs(60))
    }

    /// Zero when a request may go out at `now`; otherwise how long to wait.
    pub fn delay_at(&mut self, now: Duration) -> Duration {
        while let Some(&oldest) = self.sent.front() {
            if now >= oldest + self.window {
                self.sent.pop_front();
            } else {
                break;
            }
        }
        if self.sent.len() < self.max_requests {
            Duration::ZERO
        } else {
            self.sent[0] + self.window - now
        }
    }

    /// Admits a request at `now` if the window allows it.
    pub fn try_acquire(&mut self, now: Duration) -> Result<(), Duration> {
        match self.delay_at(now) {
            Duration::ZERO => {
                self.sent.push_back(now);
                Ok(())
            }
            wait => Err(wait),
        }
    }
}

/// Largest number of requests in any half-open window `[t, t + window)`.
pub fn peak_window_count(log: &[Duration], window: Duration) -> usize {
    let mut sorted = log.to_vec();
    sorted.sort();
    let mut best = 0;
    let mut lo = 0;
    for hi in 0..sorted.len() {
        while sorted[hi] >= sorted[lo] + window {
            lo += 1;
        }
        best = best.max(hi - lo + 1);
    }
    best
}

/// Exponential backoff schedule with an attempt cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    /// Total attempts including the first.
    pub max_attempts: u32,
    pub base_delay: Duration,
    pub max_delay: Duration,
    pub multiplier: f64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 5,
            base_delay: Duration::from_millis(500),
            max_delay: Duration::from_secs(30),
            multiplier: 2.0,
        }
    }
}

impl RetryPolicy {
    /// Pause before retry number `retry` (1-based), or `None` once exhausted.
    pub fn delay_before(&self, retry: u32) -> Option<Duration> {
        if retry == 0 || retry >= self.max_attempts {
            return None;
        }
        let factor = libm::pow(self.multiplier, f64::from(retry - 1));
        let secs = (self.base_delay.as_secs_f64() * factor).min(self.max_delay.as_secs_f64());
        Some(Duration::from_secs_f64(secs))
    }
}
