//! Shared helpers: a synthetic prompt tree and local stub servers.

#![allow(dead_code)]

use std::net::SocketAddr;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use axum::extract::State;
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use plum::corpus_fs::write_corpus;
use plum_core::corpus::{Corpus, Prompt};
use plum_core::{Language, PolitenessCategory};
use serde_json::{json, Value};

pub const TOKEN_VAR: &str = "PLUM_TEST_TOKEN";
pub const TOKEN: &str = "test-token";

fn prompt_text(language: Language, category: PolitenessCategory, n: u32) -> String {
    match language {
        Language::English => format!("Could you explain topic {n} for the {} set, please?", category.label()),
        Language::Spanish => format!("¿Podría explicar el tema {n} del grupo {}, por favor?", category.label()),
        Language::Hindi => format!("कृपया विषय {n} को समझाइए, समूह {}।", category.label()),
    }
}

/// A full 3 × 5 × 100 corpus.
pub fn synthetic_corpus() -> Corpus {
    let mut prompts = Vec::new();
    for language in Language::ALL {
        for category in PolitenessCategory::ALL {
            for ordinal in 1..=100 {
                prompts.push(Prompt { language, category, ordinal, text: prompt_text(language, category, ordinal) });
            }
        }
    }
    Corpus::from_prompts(prompts).expect("synthetic corpus is valid")
}

pub fn write_synthetic_tree(root: &Path) -> Corpus {
    let c = synthetic_corpus();
    write_corpus(root, &c).expect("tree written");
    c
}

/// Serves `router` on an ephemeral port from a dedicated runtime thread.
pub fn serve(router: Router) -> SocketAddr {
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_multi_thread().worker_threads(4).enable_all().build().unwrap();
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            tx.send(listener.local_addr().unwrap()).unwrap();
            axum::serve(listener, router).await.unwrap();
        });
    });
    rx.recv().expect("stub server started")
}

/// Chat-completions stub. The `model` field selects behaviour:
/// `echo` answers with the last user message; `always429` is rate limited
/// forever; `flaky` returns 503 on the first call for each distinct prompt;
/// any model rejects prompts containing `FAIL-ME` with HTTP 400.
#[derive(Clone, Default)]
pub struct ChatStub {
    pub calls: Arc<AtomicUsize>,
    pub bodies: Arc<Mutex<Vec<Value>>>,
    pub record_bodies: bool,
    pub seen: Arc<Mutex<std::collections::HashSet<String>>>,
}

async fn chat(State(stub): State<ChatStub>, headers: HeaderMap, Json(body): Json<Value>) -> Response {
    stub.calls.fetch_add(1, Ordering::SeqCst);
    if stub.record_bodies {
        stub.bodies.lock().unwrap().push(body.clone());
    }
    let auth = headers.get("authorization").and_then(|v| v.to_str().ok());
    if auth != Some(&format!("Bearer {TOKEN}")) {
        return (StatusCode::UNAUTHORIZED, "bad token").into_response();
    }
    let last_user = body["messages"]
        .as_array()
        .and_then(|m| m.iter().rev().find(|m| m["role"] == "user"))
        .and_then(|m| m["content"].as_str())
        .unwrap_or_default()
        .to_string();
    if last_user.contains("FAIL-ME") {
        return (StatusCode::BAD_REQUEST, "rejected").into_response();
    }
    match body["model"].as_str().unwrap_or_default() {
        "always429" => return (StatusCode::TOO_MANY_REQUESTS, "slow down").into_response(),
        "flaky" => {
            if stub.seen.lock().unwrap().insert(last_user.clone()) {
                return (StatusCode::SERVICE_UNAVAILABLE, "try again").into_response();
            }
        }
        "malformed" => return Json(json!({"choices": []})).into_response(),
        _ => {}
    }
    let turns = body["messages"].as_array().map_or(0, Vec::len);
    Json(json!({
        "choices": [{"message": {"role": "assistant", "content": format!("echo[{turns}]: {last_user}")}}]
    }))
    .into_response()
}

pub fn chat_stub(stub: ChatStub) -> String {
    let router = Router::new().route("/v1/chat/completions", post(chat)).with_state(stub);
    format!("http://{}/v1", serve(router))
}

/// Sidecar stub backed by the mock backend, with the wire error shape.
#[derive(Clone)]
pub struct SidecarStub {
    pub requests: Arc<Mutex<Vec<(String, usize)>>>,
    pub max_batch: usize,
}

impl Default for SidecarStub {
    fn default() -> Self {
        SidecarStub { requests: Arc::default(), max_batch: 64 }
    }
}

fn wire_error(status: StatusCode, code: &str, message: &str) -> Response {
    (status, Json(json!({"error": {"code": code, "message": message}}))).into_response()
}

async fn score(State(stub): State<SidecarStub>, Json(body): Json<Value>) -> Response {
    use plum_core::backend::{MockBackend, ScorerBackend};
    let mock = MockBackend::new(7);
    let capability = body["capability"].as_str().unwrap_or_default().to_string();
    let Some(inputs) = body["inputs"].as_array().filter(|a| !a.is_empty()) else {
        return wire_error(StatusCode::BAD_REQUEST, "bad_request", "inputs must be a non-empty list");
    };
    if inputs.len() > stub.max_batch {
        return wire_error(StatusCode::PAYLOAD_TOO_LARGE, "batch_too_large", "too many inputs");
    }
    stub.requests.lock().unwrap().push((capability.clone(), inputs.len()));
    let texts: Vec<&str> = inputs.iter().filter_map(Value::as_str).collect();
    let outputs: Value = match capability.as_str() {
        "embed" => json!(mock
            .embed(&texts)
            .unwrap()
            .iter()
            .map(|e| e.components().iter().map(|x| x / e.norm()).collect::<Vec<f64>>())
            .collect::<Vec<_>>()),
        "grammaticality" => json!(mock.grammaticality(&texts).unwrap().iter().map(|&b| u8::from(b)).collect::<Vec<_>>()),
        "toxicity" => json!(mock.toxicity(&texts).unwrap()),
        "nli" => {
            let pairs: Vec<(&str, &str)> = inputs
                .iter()
                .map(|p| (p["premise"].as_str().unwrap_or(""), p["hypothesis"].as_str().unwrap_or("")))
                .collect();
            json!(mock
                .nli(&pairs)
                .unwrap()
                .iter()
                .map(|p| json!({"p_entail": p.entail, "p_neutral": p.neutral, "p_contradiction": p.contradiction}))
                .collect::<Vec<_>>())
        }
        _ => return wire_error(StatusCode::BAD_REQUEST, "unknown_capability", "no such capability"),
    };
    Json(json!({"capability": capability, "outputs": outputs, "model_identity": "stub/mock-7"})).into_response()
}

async fn health() -> Json<Value> {
    Json(json!({"status": "ok", "capabilities": ["embed", "grammaticality", "nli", "toxicity"]}))
}

pub fn sidecar_stub(stub: SidecarStub) -> String {
    let router = Router::new().route("/score", post(score)).route("/health", get(health)).with_state(stub);
    format!("http://{}", serve(router))
}
