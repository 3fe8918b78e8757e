//! Plan execution: workers per endpoint, one writer.
//!
//! Each endpoint gets `concurrency()` worker threads pulling keys from a
//! shared queue. Completed records travel over a channel to the calling
//! thread, which alone writes the sink. Keys already persisted with ok
//! status are skipped, so repeated runs converge on one row per key.

use std::collections::{BTreeMap, VecDeque};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{mpsc, Arc, Mutex};
use std::time::Duration;

use plum_core::corpus::Corpus;
use plum_core::harness::{build_session, PlanError, TrialKey, TrialRecord};
use thiserror::Error;

use crate::dispatch::Dispatcher;
use crate::scripts::ScriptSet;
use crate::sink::{ResultsSink, SinkError};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Sink(#[from] SinkError),
    #[error("no endpoint configured for model `{0}`")]
    UnknownModel(String),
    #[error("corpus has no prompt for {0}")]
    UnknownPrompt(TrialKey),
    #[error(transparent)]
    Plan(#[from] PlanError),
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub run_id: String,
    /// Generate priming replies live instead of replaying canned ones.
    pub live_priming: bool,
    /// Stop persisting after this many records, as if the process died.
    pub stop_after: Option<usize>,
    /// External cancellation; checked before each key is taken.
    pub cancel: Option<Arc<AtomicBool>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunSummary {
    /// Records persisted by this run.
    pub attempted: usize,
    pub succeeded: usize,
    pub failed: usize,
    /// Plan keys already complete in the sink when the run began.
    pub skipped_existing: usize,
    /// Per-endpoint HTTP send times, offsets from the dispatchers' origin.
    pub request_log: BTreeMap<String, Vec<Duration>>,
}

struct Job {
    key: TrialKey,
    prompt_text: String,
    session: Vec<plum_core::harness::Message>,
    script: Option<plum_core::harness::PrimingScript>,
}

pub fn run_plan(
    plan: &[TrialKey],
    corpus: &Corpus,
    scripts: &ScriptSet,
    dispatchers: &[Dispatcher],
    sink: &mut ResultsSink,
    options: &RunOptions,
) -> Result<RunSummary, RunError> {
    let mut summary = RunSummary::default();
    let mut queues: BTreeMap<&str, VecDeque<Job>> =
        dispatchers.iter().map(|d| (d.name(), VecDeque::new())).collect();
    for key in plan {
        if sink.is_complete(key) {
            summary.skipped_existing += 1;
            continue;
        }
        let queue = queues
            .get_mut(key.model.as_str())
            .ok_or_else(|| RunError::UnknownModel(key.model.clone()))?;
        let prompt = corpus
            .get(key.language, key.category, key.ordinal)
            .ok_or_else(|| RunError::UnknownPrompt(key.clone()))?;
        let script = scripts.get(key.condition, key.language);
        let session = build_session(key.condition, script.as_ref(), prompt)?;
        queue.push_back(Job { key: key.clone(), prompt_text: prompt.text.clone(), session, script });
    }

    let stop = options.cancel.clone().unwrap_or_default();
    let (tx, rx) = mpsc::channel::<TrialRecord>();
    let mut sink_result = Ok(());
    std::thread::scope(|scope| {
        for d in dispatchers {
            let queue = Arc::new(Mutex::new(queues.remove(d.name()).unwrap_or_default()));
            for _ in 0..d.endpoint().concurrency() {
                let (queue, tx, stop) = (Arc::clone(&queue), tx.clone(), Arc::clone(&stop));
                scope.spawn(move || loop {
                    if stop.load(Ordering::SeqCst) {
                        return;
                    }
                    let Some(job) = queue.lock().expect("queue poisoned").pop_front() else {
                        return;
                    };
                    let timestamp_utc = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true);
                    let out = d.run_trial(&job.session, job.script.as_ref(), &job.prompt_text, options.live_priming);
                    let record = TrialRecord {
                        run_id: options.run_id.clone(),
                        key: job.key,
                        timestamp_utc,
                        latency_ms: out.latency_ms,
                        status: out.status,
                        prompt_text: job.prompt_text,
                        response_text: out.response_text,
                    };
                    if tx.send(record).is_err() {
                        return;
                    }
                });
            }
        }
        drop(tx);

        for record in rx.iter() {
            if options.stop_after.is_some_and(|n| summary.attempted >= n) {
                stop.store(true, Ordering::SeqCst);
                continue;
            }
            if let Err(e) = sink.append(&record) {
                stop.store(true, Ordering::SeqCst);
                sink_result = Err(e);
                break;
            }
            summary.attempted += 1;
            if record.status.is_ok() {
                summary.succeeded += 1;
            } else {
                summary.failed += 1;
            }
            if options.stop_after.is_some_and(|n| summary.attempted >= n) {
                stop.store(true, Ordering::SeqCst);
            }
        }
        // Dropping the receiver on a sink error unblocks senders.
        drop(rx);
    });
    sink_result?;
    summary.request_log = dispatchers.iter().map(|d| (d.name().to_string(), d.request_log())).collect();
    Ok(summary)
}
