//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs as a plain binary so every line prints regardless of outcome. The
//! process exits non-zero when any criterion fails. Tolerances are pinned
//! below and never widened to make a criterion pass.

#[path = "../../plum/tests/common/mod.rs"]
mod common;

#[path = "../../core/tests/support/oracles.rs"]
mod oracles;

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use plum::config::EndpointConfig;
use plum::corpus_fs::{category_path, parse_corpus};
use plum::dispatch::Dispatcher;
use plum::fixtures::{load_cqs_fixture, load_parameter_rows};
use plum::runner::{run_plan, RunOptions};
use plum::scripts::ScriptSet;
use plum::sink::{read_results, ResultsSink};
use plum_core::corpus::CorpusError;
use plum_core::harness::{enumerate_plan, peak_window_count, RetryPolicy};
use plum_core::hypotheses::{evaluate_all, evaluate_h2, HypothesisId, Variant, Verdict};
use plum_core::metrics::{
    flesch_reading_ease, normalize_fre, readability, reconcile, ParameterScores, RECONCILIATION_TOLERANCE,
};
use plum_core::stats::{
    anova, f_survival, studentized_range_survival, two_way_anova, tukey_hsd, BalancedDesign, Factor, FactorialDataset,
    Source, TukeyResult, ALPHA,
};
use plum_core::text::{SyllableCounter, SyllableMode};
use plum_core::{CalendarDay, HistoryCondition, Language, PolitenessCategory, ReplicateSlot};
use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL_F: f64 = 0.05;
const TOL_P: f64 = 0.005;
const TOL_ETA: f64 = 0.005;
const TOL_Q: f64 = 0.05;
const TOL_ORACLE_TAIL: f64 = 1e-4;
const TOL_ORACLE_SS: f64 = 1e-9;
const TOL_READABILITY: f64 = 1e-6;
const TOL_CQS_MEAN: f64 = 1e-9;
const TOL_VERIFIED_ROW: f64 = 0.001;
const STATS_BUDGET: Duration = Duration::from_secs(1);
const HARNESS_BUDGET: Duration = Duration::from_secs(120);

struct Check {
    label: String,
    pass: bool,
}

#[derive(Default)]
struct Checks(Vec<Check>);

impl Checks {
    fn check(&mut self, pass: bool, label: impl Into<String>) {
        self.0.push(Check { label: label.into(), pass });
    }

    fn near(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        self.check((got - want).abs() <= tol, format!("{what} = {got:.4} (want {want} ± {tol})"));
    }
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn cqs_fixture() -> FactorialDataset {
    load_cqs_fixture(&fixture("cell_cqs.csv")).expect("shipped fixture loads")
}

fn pair<'a>(results: &'a [TukeyResult], a: &str, b: &str) -> &'a TukeyResult {
    results
        .iter()
        .find(|r| (r.pair.0 == a && r.pair.1 == b) || (r.pair.0 == b && r.pair.1 == a))
        .expect("pair present")
}

fn anova_english(c: &mut Checks) {
    let start = Instant::now();
    let d = cqs_fixture();
    let t = two_way_anova(&d, Language::English).unwrap();
    let h = t.row(Source::HistoryB);
    let a = t.row(Source::CategoryA);
    c.near("English History F(2,60)", h.f.unwrap_or(f64::NAN), 4.268, TOL_F);
    c.near("English History p", h.p.unwrap_or(f64::NAN), 0.0185, TOL_P);
    c.near("English History eta2", h.eta2.unwrap_or(f64::NAN), 0.1106, TOL_ETA);
    c.near("English Category F(4,60)", a.f.unwrap_or(f64::NAN), 1.510, TOL_F);
    c.check(start.elapsed() < STATS_BUDGET, format!("runtime {:?} < {STATS_BUDGET:?}", start.elapsed()));
}

fn anova_spanish_hindi(c: &mut Checks) {
    let start = Instant::now();
    let d = cqs_fixture();
    let es = two_way_anova(&d, Language::Spanish).unwrap();
    let cat = es.row(Source::CategoryA);
    c.near("Spanish Category F(4,60)", cat.f.unwrap_or(f64::NAN), 5.866, TOL_F);
    let p = cat.p.unwrap_or(f64::NAN);
    c.check(p <= 0.001, format!("Spanish Category p = {p:.5} (want <= 0.001)"));
    c.near("Spanish Category eta2", cat.eta2.unwrap_or(f64::NAN), 0.2448, TOL_ETA);
    let hi = two_way_anova(&d, Language::Hindi).unwrap();
    for src in [Source::CategoryA, Source::HistoryB, Source::Interaction] {
        let p = hi.row(src).p.unwrap_or(f64::NAN);
        c.check(p >= ALPHA, format!("Hindi {} p = {p:.4} non-significant at {ALPHA}", src.label()));
    }
    let eta = hi.row(Source::CategoryA).eta2.unwrap_or(f64::NAN);
    c.check(eta <= 0.06, format!("Hindi Category eta2 = {eta:.4} (want <= 0.06)"));
    c.check(start.elapsed() < STATS_BUDGET, format!("runtime {:?} < {STATS_BUDGET:?}", start.elapsed()));
}

fn tukey(c: &mut Checks) {
    let start = Instant::now();
    let d = cqs_fixture();
    let en = tukey_hsd(&d, Language::English, Factor::History).unwrap();
    let r = pair(&en, "IMP", "POL");
    c.near("English IMP vs POL q", r.q, 3.935, TOL_Q);
    c.check(r.significant, format!("English IMP vs POL significant (p = {:.4})", r.p));
    let es = tukey_hsd(&d, Language::Spanish, Factor::Category).unwrap();
    for (other, want) in [("POI", 6.669), ("NEI", 4.401)] {
        let r = pair(&es, other, "POP");
        c.near(&format!("Spanish {other} vs POP q"), r.q, want, TOL_Q);
        c.check(r.significant, format!("Spanish {other} vs POP significant (p = {:.4})", r.p));
    }
    for factor in [Factor::Category, Factor::History] {
        let hi = tukey_hsd(&d, Language::Hindi, factor).unwrap();
        let sig: Vec<_> = hi.iter().filter(|r| r.significant).map(|r| format!("{}-{}", r.pair.0, r.pair.1)).collect();
        c.check(sig.is_empty(), format!("Hindi {factor:?} pairs all non-significant (significant: {sig:?})"));
    }
    c.check(start.elapsed() < STATS_BUDGET, format!("runtime {:?} < {STATS_BUDGET:?}", start.elapsed()));
}

fn distribution_oracles(c: &mut Checks) {
    let mut worst_f: f64 = 0.0;
    let mut n_f = 0;
    for (d1, d2) in [(2u32, 10u32), (2, 60), (4, 60), (8, 20), (4, 8)] {
        for i in 0..10 {
            let x = 0.2 + 0.8 * i as f64;
            let got = f_survival(x, d1, d2).unwrap();
            worst_f = worst_f.max((got - oracles::f_tail_oracle(x, d1 as f64, d2 as f64)).abs());
            n_f += 1;
        }
    }
    c.check(n_f == 50 && worst_f <= TOL_ORACLE_TAIL, format!("f_survival: {n_f} points, worst |error| {worst_f:.2e}"));

    let mut worst_q: f64 = 0.0;
    let mut n_q = 0;
    for k in [2u32, 3, 5, 8, 10] {
        for df in [10u32, 60] {
            for q in [0.5, 1.5, 2.5, 3.5, 5.0] {
                let got = studentized_range_survival(q, k, df).unwrap();
                worst_q = worst_q.max((got - oracles::q_tail_oracle(q, k, df)).abs());
                n_q += 1;
            }
        }
    }
    c.check(
        n_q == 50 && worst_q <= TOL_ORACLE_TAIL,
        format!("studentized_range_survival: {n_q} points, worst |error| {worst_q:.2e}"),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(7_100);
    let mut worst_ss: f64 = 0.0;
    for _ in 0..100 {
        let (a, b, n) = (2 + (rng.next_u64() % 3) as usize, 2 + (rng.next_u64() % 3) as usize, 2 + (rng.next_u64() % 3) as usize);
        let cells = oracles::random_cells(&mut rng, a, b, n);
        let o = oracles::brute_force(&cells);
        let t = anova(&BalancedDesign::new(oracles::labels("a", a), oracles::labels("b", b), cells).unwrap());
        for (src, want) in [
            (Source::CategoryA, o.ss_a),
            (Source::HistoryB, o.ss_b),
            (Source::Interaction, o.ss_ab),
            (Source::Error, o.ss_e),
            (Source::Total, o.ss_t),
        ] {
            worst_ss = worst_ss.max((t.row(src).ss - want).abs());
        }
    }
    c.check(worst_ss <= TOL_ORACLE_SS, format!("ANOVA on 100 random designs, worst |SS error| {worst_ss:.2e}"));
}

fn hypotheses(c: &mut Checks) {
    let d = cqs_fixture();
    let report = evaluate_all(&d);
    for (id, want) in [
        (HypothesisId::H1, Verdict::Refuted),
        (HypothesisId::H2, Verdict::Supported),
        (HypothesisId::H3, Verdict::Supported),
        (HypothesisId::H4, Verdict::Supported),
        (HypothesisId::H5, Verdict::PartiallySupported),
        (HypothesisId::H6, Verdict::Supported),
    ] {
        let got = report.verdict(id);
        c.check(got == Some(want), format!("{} = {:?} (want {})", id.code(), got.map(|v| v.as_str()), want.as_str()));
    }
    c.check(
        report.h4.get(&Language::English).map(|o| o.verdict) == Some(Verdict::Supported),
        "H4 English slice supported",
    );
    let strict = evaluate_h2(&d, Variant::StrictUniversal);
    c.check(strict.verdict == Verdict::Refuted, format!("strict H2 = {}", strict.verdict.as_str()));
    let witness: Vec<&str> = strict.violations().map(|e| e.predicate.as_str()).collect();
    c.check(
        witness.iter().any(|p| p.contains("Gemini/Hindi")),
        format!("strict H2 violations include Gemini/Hindi: {witness:?}"),
    );
}

/// Fixed syllables per word, so hand evaluation is exact.
struct Fixed(usize);

impl SyllableCounter for Fixed {
    fn count(&self, _: &str, _: Language) -> usize {
        self.0
    }

    fn mode(&self, _: Language) -> SyllableMode {
        SyllableMode::VowelGroup
    }
}

fn metric_formulas(c: &mut Checks) {
    // 206.835 - 1.015 * ASL - 84.6 * ASW, evaluated by hand.
    for (w, s, y, want_fre, want) in [
        (100usize, 5usize, 150usize, 59.635, 0.59635),
        (10, 10, 10, 121.22, 1.0),
        (10, 1, 40, -141.715, 0.0),
        (12, 2, 18, 73.845, 0.73845),
    ] {
        let fre = flesch_reading_ease(w, s, y);
        c.check(
            (fre - want_fre).abs() <= TOL_READABILITY && (normalize_fre(fre) - want).abs() <= TOL_READABILITY,
            format!("FRE({w} words, {s} sentences, {y} syllables) = {fre:.6} -> {:.6}", normalize_fre(fre)),
        );
    }
    // Text path: 4 words, 1 sentence, 2 syllables each: 206.835 - 4.06 - 169.2.
    let r = readability("Alpha beta gamma delta.", Language::English, &Fixed(2)).unwrap();
    c.check((r.score - 0.33575).abs() <= TOL_READABILITY, format!("readability(text) = {:.6} (want 0.33575)", r.score));
    let top = readability("Go. Run. Sit.", Language::English, &Fixed(1)).unwrap();
    c.check(top.score == 1.0, format!("upper clamp on text = {}", top.score));
    let low = readability("Extraordinarily incomprehensible multidimensional terminology.", Language::English, &Fixed(7)).unwrap();
    c.check(low.score == 0.0, format!("lower clamp on text = {}", low.score));

    let mut rng = ChaCha8Rng::seed_from_u64(1_000);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let p: [f64; 8] = std::array::from_fn(|_| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64);
        let s = ParameterScores::from_parameters(p).unwrap();
        let mut sum = 0.0;
        for x in p {
            sum += x;
        }
        worst = worst.max((s.cqs - sum / 8.0).abs());
    }
    c.check(worst <= TOL_CQS_MEAN, format!("cqs mean law on 1,000 fuzzed vectors, worst {worst:.1e}"));

    let rows = load_parameter_rows(&fixture("cell_parameters.csv")).unwrap();
    for (cond, want) in [(HistoryCondition::Pol, 0.635), (HistoryCondition::Imp, 0.561)] {
        let row = rows
            .iter()
            .find(|r| {
                r.language == Language::English
                    && r.model == "Gemini"
                    && r.condition == cond
                    && r.category == PolitenessCategory::Pop
            })
            .unwrap();
        let got = ParameterScores::from_parameters(row.parameters).unwrap().cqs;
        c.near(&format!("Gemini/EN/{}/POP cqs from S columns", cond.label()), got, want, TOL_VERIFIED_ROW);
    }
}

fn reconciliation(c: &mut Checks) {
    let rows = load_parameter_rows(&fixture("cell_parameters.csv")).unwrap();
    c.check(rows.len() == 225, format!("{} printed rows", rows.len()));
    let entries = reconcile(&rows, RECONCILIATION_TOLERANCE);
    let flagged: HashSet<usize> = entries.iter().enumerate().filter(|(_, e)| e.flagged).map(|(i, _)| i).collect();
    let expected: HashSet<usize> = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| (r.parameters.iter().sum::<f64>() / 8.0 - r.printed_cqs).abs() > 0.005)
        .map(|(i, _)| i)
        .collect();
    c.check(flagged == expected, format!("flagged set matches independent pass ({} rows)", flagged.len()));
    c.check(!flagged.is_empty(), "flagged set non-empty");
    let gemini_raw_pop = entries.iter().any(|e| {
        e.flagged
            && e.row.language == Language::English
            && e.row.model == "Gemini"
            && e.row.condition == HistoryCondition::Raw
            && e.row.category == PolitenessCategory::Pop
    });
    c.check(gemini_raw_pop, "English Gemini RAW POP flagged");
}

fn endpoint(name: &str, url: &str, rpm: usize, window_ms: u64, concurrency: Option<usize>) -> EndpointConfig {
    EndpointConfig {
        name: name.into(),
        base_url: url.into(),
        model: Some("echo".into()),
        auth_env_var: common::TOKEN_VAR.into(),
        max_requests_per_minute: rpm,
        temperature: 0.0,
        max_tokens: 64,
        rate_window_ms: window_ms,
        max_concurrency: concurrency,
        timeout_secs: 10,
    }
}

fn harness(c: &mut Checks) {
    let start = Instant::now();
    std::env::set_var(common::TOKEN_VAR, common::TOKEN);
    let url = common::chat_stub(common::ChatStub::default());
    let corpus = common::synthetic_corpus();
    let models = ["Gemini", "GPT", "Claude", "DeepSeek", "Llama"];
    let day = CalendarDay::new(2025, 5, 1).unwrap();
    let plan = enumerate_plan(&corpus, &models, &HistoryCondition::ALL, &[ReplicateSlot::Morning], &[day]).unwrap();
    c.check(plan.len() == 22_500, format!("plan has {} trials", plan.len()));

    let origin = Instant::now();
    let retry = RetryPolicy { max_attempts: 3, base_delay: Duration::from_millis(1), ..RetryPolicy::default() };
    let endpoints: Vec<EndpointConfig> = models.iter().map(|m| endpoint(m, &url, 20_000, 60_000, None)).collect();
    let dispatchers: Vec<Dispatcher> =
        endpoints.iter().map(|e| Dispatcher::new(e.clone(), retry, origin).unwrap()).collect();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("results.csv");
    let scripts = ScriptSet::defaults();

    let mut sink = ResultsSink::create(&path).unwrap();
    let interrupted = RunOptions { run_id: "first".into(), stop_after: Some(9_000), ..RunOptions::default() };
    let first = run_plan(&plan, &corpus, &scripts, &dispatchers, &mut sink, &interrupted).unwrap();
    drop(sink);
    let mut sink = ResultsSink::resume(&path).unwrap();
    let resumed = RunOptions { run_id: "second".into(), ..RunOptions::default() };
    let second = run_plan(&plan, &corpus, &scripts, &dispatchers, &mut sink, &resumed).unwrap();
    drop(sink);
    c.check(
        first.attempted == 9_000 && second.skipped_existing == 9_000 && second.attempted == 13_500,
        format!(
            "interrupted at {} then resumed: skipped {}, attempted {}",
            first.attempted, second.skipped_existing, second.attempted
        ),
    );
    let rows = read_results(&path).unwrap();
    let keys: HashSet<_> = rows.iter().map(|r| r.key.clone()).collect();
    c.check(
        rows.len() == 22_500 && keys.len() == 22_500 && keys == plan.iter().cloned().collect(),
        format!("{} rows, {} distinct keys, zero duplicates", rows.len(), keys.len()),
    );
    c.check(rows.iter().all(|r| r.status.is_ok()), "all trials ok against the stub");
    for (d, e) in dispatchers.iter().zip(&endpoints) {
        let peak = peak_window_count(&d.request_log(), e.rate_window());
        c.check(peak <= e.max_requests_per_minute, format!("{}: peak {peak} per window (limit {})", e.name, e.max_requests_per_minute));
    }

    // A tight limit actually binds: 300 requests at 40 per 100 ms window.
    let tight = endpoint("GPT", &url, 40, 100, Some(8));
    let d = [Dispatcher::new(tight.clone(), retry, Instant::now()).unwrap()];
    let small = enumerate_plan(
        &parse_or_subset(&corpus),
        &["GPT"],
        &HistoryCondition::ALL,
        &[ReplicateSlot::Morning],
        &[day],
    )
    .unwrap();
    let mut sink = ResultsSink::create(&dir.path().join("tight.csv")).unwrap();
    let t0 = Instant::now();
    let s = run_plan(&small, &corpus, &scripts, &d, &mut sink, &RunOptions::default()).unwrap();
    let peak = peak_window_count(&s.request_log["GPT"], tight.rate_window());
    c.check(
        s.attempted == 300 && peak <= 40 && t0.elapsed() >= tight.rate_window() * 7,
        format!("binding limit: {} requests, peak {peak} per 100 ms (limit 40), took {:?}", s.attempted, t0.elapsed()),
    );
    c.check(start.elapsed() < HARNESS_BUDGET, format!("runtime {:?} < {HARNESS_BUDGET:?}", start.elapsed()));
}

/// English POP prompts only.
fn parse_or_subset(corpus: &plum_core::corpus::Corpus) -> plum_core::corpus::Corpus {
    plum_core::corpus::Corpus::from_prompts(
        corpus.subset(Language::English, PolitenessCategory::Pop).iter().cloned(),
    )
    .unwrap()
}

fn corpus_validation(c: &mut Checks) {
    let dir = tempfile::tempdir().unwrap();
    common::write_synthetic_tree(dir.path());
    let corpus = parse_corpus(dir.path(), true).unwrap();
    let per_group = corpus.counts().values().all(|&n| n == 100) && corpus.counts().len() == 15;
    c.check(corpus.len() == 1500 && per_group, format!("strict parse: {} prompts, 100 in each of 15 groups", corpus.len()));

    let missing = tempfile::tempdir().unwrap();
    common::write_synthetic_tree(missing.path());
    std::fs::remove_file(category_path(missing.path(), Language::Hindi, PolitenessCategory::Poi)).unwrap();
    let err = parse_corpus(missing.path(), true).unwrap_err();
    c.check(
        matches!(err.corpus_error(), Some(CorpusError::MissingCategoryFile { .. })),
        format!("missing file: {err}"),
    );

    let short = tempfile::tempdir().unwrap();
    common::write_synthetic_tree(short.path());
    let p = category_path(short.path(), Language::Spanish, PolitenessCategory::Nep);
    let text: String = std::fs::read_to_string(&p).unwrap().lines().take(99).map(|l| format!("{l}\n")).collect();
    std::fs::write(&p, text).unwrap();
    let err = parse_corpus(short.path(), true).unwrap_err();
    c.check(
        matches!(err.corpus_error(), Some(CorpusError::CountMismatch { expected: 100, found: 99, .. })),
        format!("99-line file: {err}"),
    );
}

fn main() {
    let criteria: [(&str, fn(&mut Checks)); 9] = [
        ("ANOVA reproduction (English)", anova_english),
        ("ANOVA reproduction (Spanish, Hindi)", anova_spanish_hindi),
        ("Tukey reproduction", tukey),
        ("Distribution and ANOVA oracles", distribution_oracles),
        ("Hypothesis suite", hypotheses),
        ("Metric formula suite", metric_formulas),
        ("Printed-table reconciliation", reconciliation),
        ("Harness contract", harness),
        ("Corpus validation", corpus_validation),
    ];
    let mut failed = 0;
    println!();
    for (name, run) in criteria {
        let mut checks = Checks::default();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| run(&mut checks)));
        let pass = outcome.is_ok() && checks.0.iter().all(|c| c.pass);
        if !pass {
            failed += 1;
        }
        println!("{} {name}", if pass { "PASS" } else { "FAIL" });
        for ch in &checks.0 {
            println!("       [{}] {}", if ch.pass { "ok" } else { "x " }, ch.label);
        }
        if outcome.is_err() {
            println!("       [x ] panicked");
        }
    }
    println!("\nacceptance: {} passed, {failed} failed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
