//! Range, determinism and verdict invariants under random inputs.

use plum_core::backend::MockBackend;
use plum_core::hypotheses::{evaluate_all, evaluate_h5, DecisionRule, Evidence, Verdict};
use plum_core::metrics::{composite_quality, flesch_reading_ease, normalize_fre, score_batch, ScoringInput, ScoringOptions};
use plum_core::stats::{CellKey, FactorialDataset};
use plum_core::text::VowelGroupCounter;
use plum_core::{HistoryCondition, Language, PolitenessCategory};
use proptest::prelude::*;

const MODELS: [&str; 5] = ["Claude", "GPT", "Gemini", "Llama", "Mistral"];
const WORDS: [&str; 12] = [
    "please", "share", "the", "report", "today", "thanks", "kindly", "explain", "this", "result", "now", "quickly",
];

fn sentence() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(&WORDS[..]), 2..9).prop_map(|w| format!("{}.", w.join(" ")))
}

fn response() -> impl Strategy<Value = String> {
    prop::collection::vec(sentence(), 1..5).prop_map(|s| s.join(" "))
}

fn inputs() -> impl Strategy<Value = Vec<ScoringInput>> {
    prop::collection::vec((sentence(), response()), 1..5).prop_map(|v| {
        v.into_iter()
            .map(|(prompt, resp)| ScoringInput {
                language: Language::English,
                context_texts: vec![prompt.clone()],
                prompt_text: prompt,
                response_text: resp,
            })
            .collect()
    })
}

fn dataset(values: &[f64]) -> FactorialDataset {
    let mut it = values.iter().copied();
    let mut d = FactorialDataset::new();
    for language in Language::ALL {
        for model in MODELS {
            for condition in HistoryCondition::ALL {
                for category in PolitenessCategory::ALL {
                    let key = CellKey { language, model: model.into(), condition, category };
                    d.insert(key, it.next().unwrap()).unwrap();
                }
            }
        }
    }
    d
}

fn full_dataset() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, 225)
}

fn verdicts(d: &FactorialDataset) -> Vec<Verdict> {
    evaluate_all(d).outcomes().into_iter().map(|o| o.verdict).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn scores_stay_in_unit_range_and_cqs_is_their_mean(batch in inputs(), seed in 0u64..1000) {
        let backend = MockBackend::new(seed);
        let out = score_batch(&batch, &backend, &VowelGroupCounter, &ScoringOptions::default());
        let mut depth_max = 0.0f64;
        for r in &out {
            let s = r.as_ref().unwrap();
            let p = s.scores.parameters();
            prop_assert!(p.iter().all(|x| (0.0..=1.0).contains(x)), "{p:?}");
            prop_assert!((s.scores.cqs - p.iter().sum::<f64>() / 8.0).abs() < 1e-12);
            prop_assert!((composite_quality(&p) - s.scores.cqs).abs() < 1e-12);
            depth_max = depth_max.max(p[2]);
        }
        // Depth is normalised by the batch maximum.
        let any_spread = out.iter().any(|r| r.as_ref().unwrap().sigma_topic > 0.0);
        prop_assert_eq!(depth_max == 1.0, any_spread);
    }

    #[test]
    fn scoring_is_deterministic(batch in inputs(), seed in 0u64..1000) {
        let run = || score_batch(&batch, &MockBackend::new(seed), &VowelGroupCounter, &ScoringOptions::default());
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn readability_falls_with_syllables_and_rises_with_sentences(
        words in 1usize..200, sentences in 1usize..20, syllables in 1usize..600,
    ) {
        let base = flesch_reading_ease(words, sentences, syllables);
        prop_assert!(flesch_reading_ease(words, sentences, syllables + 1) < base);
        prop_assert!(flesch_reading_ease(words, sentences + 1, syllables) > base);
        prop_assert!((0.0..=1.0).contains(&normalize_fre(base)));
    }

    #[test]
    fn verdicts_survive_exact_rescaling(values in full_dataset(), shift in 0u32..4) {
        let c = (1u64 << shift) as f64 * 0.5;
        let scaled: Vec<f64> = values.iter().map(|v| v * c).collect();
        prop_assert_eq!(verdicts(&dataset(&values)), verdicts(&dataset(&scaled)));
    }

    #[test]
    fn verdicts_are_recomputable_from_evidence(values in full_dataset()) {
        let report = evaluate_all(&dataset(&values));
        for o in report.outcomes() {
            prop_assert_eq!(o.verdict, o.recomputed_verdict());
            prop_assert!(o.evidence.iter().any(|e| e.decisive));
            prop_assert!(o.evidence.iter().all(|e| !e.witness.is_empty()));
        }
        prop_assert_eq!(report.h1.evidence.len(), 4);
        prop_assert_eq!(report.h5.evidence.len(), MODELS.len() * Language::ALL.len());
    }

    #[test]
    fn raising_a_bal_cell_never_weakens_h5(values in full_dataset(), pick in 0usize..15) {
        let d = dataset(&values);
        let before = evaluate_h5(&d).verdict;
        let (language, model) = (Language::ALL[pick / 5], MODELS[pick % 5]);
        let mut bumped = FactorialDataset::new();
        for (k, v) in d.iter() {
            let lift = k.language == language && k.model == model
                && k.condition == HistoryCondition::Raw && k.category == PolitenessCategory::Bal;
            bumped.insert(k.clone(), if lift { 2.0 } else { v }).unwrap();
        }
        let after = evaluate_h5(&bumped).verdict;
        prop_assert!(after >= before);
    }

    #[test]
    fn majority_rule_matches_violation_count(holds in prop::collection::vec(any::<bool>(), 1..20)) {
        let evidence: Vec<Evidence> = holds
            .iter()
            .map(|&h| Evidence { predicate: String::new(), holds: h, witness: vec![], decisive: true })
            .collect();
        let violations = holds.iter().filter(|h| !**h).count();
        let expected = if violations == 0 {
            Verdict::Supported
        } else if 2 * violations < holds.len() {
            Verdict::PartiallySupported
        } else {
            Verdict::Refuted
        };
        prop_assert_eq!(DecisionRule::STRICT_MAJORITY.apply(&evidence), expected);
        prop_assert_eq!(DecisionRule::AllDecisive.apply(&evidence) == Verdict::Supported, violations == 0);
        prop_assert_eq!(DecisionRule::AnyDecisive.apply(&evidence) == Verdict::Supported, violations < holds.len());
    }
}
