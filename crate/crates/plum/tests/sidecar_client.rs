mod common;

use common::{sidecar_stub, SidecarStub};
use plum::http_backend::HttpBackend;
use plum::scripts::ScriptSet;
use plum::syllables::HyphenationCounter;
use plum::scoring::score_records;
use plum_core::backend::{BackendError, Capability, MockBackend, ScorerBackend};
use plum_core::harness::{TrialKey, TrialRecord, TrialStatus};
use plum_core::metrics::ScoringOptions;
use plum_core::{CalendarDay, HistoryCondition, Language, PolitenessCategory, ReplicateSlot};

#[test]
fn health_and_capabilities() {
    let url = sidecar_stub(SidecarStub::default());
    let b = HttpBackend::connect(&url).unwrap();
    let h = b.health().unwrap();
    assert_eq!(h.status, "ok");
    assert_eq!(h.capabilities.len(), 4);
    assert!(Capability::ALL.iter().all(|&c| b.supports(c)));
    assert!(HttpBackend::connect("http://127.0.0.1:9").is_err());
}

#[test]
fn large_inputs_are_chunked_in_order() {
    let stub = SidecarStub::default();
    let url = sidecar_stub(stub.clone());
    let b = HttpBackend::connect(&url).unwrap();
    let texts: Vec<String> = (0..150).map(|i| format!("sentence number {i}")).collect();
    let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
    let remote = b.toxicity(&refs).unwrap();
    let local = MockBackend::new(7).toxicity(&refs).unwrap();
    assert_eq!(remote, local);
    let sizes: Vec<usize> = stub.requests.lock().unwrap().iter().map(|r| r.1).collect();
    assert_eq!(sizes, [64, 64, 22]);
}

#[test]
fn outputs_match_the_wrapped_backend() {
    let url = sidecar_stub(SidecarStub::default());
    let b = HttpBackend::connect(&url).unwrap();
    let mock = MockBackend::new(7);
    let texts = ["One two three.", "Four five.", "Six seven eight nine ten."];
    assert_eq!(b.grammaticality(&texts).unwrap(), mock.grammaticality(&texts).unwrap());
    for (r, m) in b.embed(&texts).unwrap().iter().zip(mock.embed(&texts).unwrap()) {
        assert!((r.norm() - 1.0).abs() < 1e-4);
        assert!((r.cosine(&m) - 1.0).abs() < 1e-9);
    }
    let pairs = [("a prompt", "a reply"), ("same", "same")];
    for p in b.nli(&pairs).unwrap() {
        assert!((p.entail + p.neutral + p.contradiction - 1.0).abs() < 1e-3);
    }
    // Two identical calls agree exactly.
    assert_eq!(b.toxicity(&texts).unwrap(), b.toxicity(&texts).unwrap());
}

#[test]
fn wire_errors_surface_code_and_message() {
    let url = sidecar_stub(SidecarStub { max_batch: 2, ..SidecarStub::default() });
    let b = HttpBackend::connect(&url).unwrap().with_batch_size(3);
    match b.toxicity(&["a", "b", "c"]) {
        Err(BackendError::Transport(m)) => assert!(m.contains("413") && m.contains("batch_too_large"), "{m}"),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn five_stub_responses_score_end_to_end() {
    let url = sidecar_stub(SidecarStub::default());
    let b = HttpBackend::connect(&url).unwrap();
    let responses = [
        "Quantum entanglement links two particles. Measuring one tells you about the other instantly.",
        "Sure. Photosynthesis turns light, water and carbon dioxide into sugar and oxygen inside leaves.",
        "Rainbows form when sunlight refracts inside raindrops. Each colour bends by a different angle.",
        "The heart pumps blood through arteries. Veins carry it back, and the lungs refresh its oxygen.",
        "Tides follow the moon. Its gravity pulls the oceans, and the earth turns beneath that bulge.",
    ];
    let records: Vec<TrialRecord> = responses
        .iter()
        .enumerate()
        .map(|(i, r)| TrialRecord {
            run_id: "e2e".into(),
            key: TrialKey {
                model: "GPT".into(),
                language: Language::English,
                condition: HistoryCondition::Pol,
                category: PolitenessCategory::Pop,
                ordinal: i as u32 + 1,
                replicate_slot: ReplicateSlot::Morning,
                day: CalendarDay::new(2025, 1, 1).unwrap(),
            },
            timestamp_utc: "2025-01-01T00:00:00.000Z".into(),
            latency_ms: 5,
            status: TrialStatus::Ok,
            prompt_text: "Could you please explain this?".into(),
            response_text: (*r).into(),
        })
        .collect();
    let out = score_records(&records, &ScriptSet::defaults(), &b, &HyphenationCounter::new(), &ScoringOptions::default());
    assert!(out.failures.is_empty(), "{:?}", out.failures);
    assert_eq!(out.rows.len(), 5);
    for r in &out.rows {
        for s in [r.s1, r.s2, r.s3, r.s4, r.s5, r.s6, r.s7, r.s8, r.cqs] {
            assert!((0.0..=1.0).contains(&s));
        }
        assert_eq!(r.syllable_mode, "hyphenation");
    }
}
