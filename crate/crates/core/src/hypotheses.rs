//! Executable checks for hypotheses H1–H6 over a factorial CQS dataset.
//!
//! Each outcome carries its evidence list; the verdict is recomputable from
//! that list and the outcome's [`DecisionRule`].

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::stats::FactorialDataset;
use crate::taxonomy::{HistoryCondition, Language, PolitenessCategory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HypothesisId {
    H1,
    H2,
    H3,
    H4,
    H5,
    H6,
}

impl HypothesisId {
    pub const ALL: [HypothesisId; 6] = [
        HypothesisId::H1,
        HypothesisId::H2,
        HypothesisId::H3,
        HypothesisId::H4,
        HypothesisId::H5,
        HypothesisId::H6,
    ];

    pub fn code(self) -> &'static str {
        match self {
            HypothesisId::H1 => "H1",
            HypothesisId::H2 => "H2",
            HypothesisId::H3 => "H3",
            HypothesisId::H4 => "H4",
            HypothesisId::H5 => "H5",
            HypothesisId::H6 => "H6",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            HypothesisId::H1 => "Politeness Monotonicity",
            HypothesisId::H2 => "Polite History Dominance",
            HypothesisId::H3 => "Language Moderation",
            HypothesisId::H4 => "Model Differential Sensitivity",
            HypothesisId::H5 => "Bald-on-Record Efficiency (RAW)",
            HypothesisId::H6 => "Tonal Inertia",
        }
    }
}

/// Ordered from worst to best so that `a <= b` reads "b is no weaker".
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Verdict {
    Refuted,
    PartiallySupported,
    Supported,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Supported => "supported",
            Verdict::PartiallySupported => "partially_supported",
            Verdict::Refuted => "refuted",
        }
    }
}

impl core::fmt::Display for Verdict {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variant {
    /// Every (model, language) instance must satisfy the ordering.
    StrictUniversal,
    /// The ordering is checked on averaged CQS.
    MeanAggregated,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::StrictUniversal => "strict_universal",
            Variant::MeanAggregated => "mean_aggregated",
        }
    }
}

/// One evaluated predicate instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Evidence {
    pub predicate: String,
    pub holds: bool,
    /// Named values the predicate compared.
    pub witness: Vec<(String, f64)>,
    /// Only decisive entries enter the verdict; others are reported context.
    pub decisive: bool,
}

impl Evidence {
    fn decisive(predicate: String, holds: bool, witness: Vec<(String, f64)>) -> Self {
        Evidence {
            predicate,
            holds,
            witness,
            decisive: true,
        }
    }

    fn context(predicate: String, holds: bool, witness: Vec<(String, f64)>) -> Self {
        Evidence {
            decisive: false,
            ..Evidence::decisive(predicate, holds, witness)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecisionRule {
    /// Supported iff every decisive predicate holds.
    AllDecisive,
    /// Supported iff at least one decisive predicate holds.
    AnyDecisive,
    /// Supported if all hold; partially supported if the violation fraction
    /// is below `max_violation_fraction`; refuted otherwise.
    Majority { max_violation_fraction: f64 },
}

impl DecisionRule {
    pub const STRICT_MAJORITY: DecisionRule = DecisionRule::Majority {
        max_violation_fraction: 0.5,
    };

    pub fn apply(&self, evidence: &[Evidence]) -> Verdict {
        let decisive: Vec<bool> = evidence.iter().filter(|e| e.decisive).map(|e| e.holds).collect();
        if decisive.is_empty() {
            return Verdict::Refuted;
        }
        let violations = decisive.iter().filter(|h| !**h).count();
        match *self {
            DecisionRule::AllDecisive if violations == 0 => Verdict::Supported,
            DecisionRule::AllDecisive => Verdict::Refuted,
            DecisionRule::AnyDecisive if violations < decisive.len() => Verdict::Supported,
            DecisionRule::AnyDecisive => Verdict::Refuted,
            DecisionRule::Majority { .. } if violations == 0 => Verdict::Supported,
            DecisionRule::Majority { max_violation_fraction } => {
                if (violations as f64) / (decisive.len() as f64) < max_violation_fraction {
                    Verdict::PartiallySupported
                } else {
                    Verdict::Refuted
                }
            }
        }
    }
}

/// Range of category means for one model.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityRange {
    pub model: String,
    pub sigma: f64,
}

/// Range of category means under one history condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistorySpread {
    pub condition: HistoryCondition,
    pub delta_q: f64,
}

/// Best category for a language; `tied` lists every level sharing the maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct LanguageArgmax {
    pub language: Language,
    pub chosen: PolitenessCategory,
    pub tied: Vec<PolitenessCategory>,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Detail {
    None,
    Argmax(Vec<LanguageArgmax>),
    Sensitivity(Vec<SensitivityRange>),
    Spread(Vec<HistorySpread>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisOutcome {
    pub id: HypothesisId,
    pub variant: Variant,
    /// Language slice for per-language checks.
    pub scope: Option<Language>,
    pub rule: DecisionRule,
    pub verdict: Verdict,
    pub evidence: Vec<Evidence>,
    pub detail: Detail,
}

impl HypothesisOutcome {
    fn new(
        id: HypothesisId,
        variant: Variant,
        scope: Option<Language>,
        rule: DecisionRule,
        evidence: Vec<Evidence>,
        detail: Detail,
    ) -> Self {
        HypothesisOutcome {
            id,
            variant,
            scope,
            rule,
            verdict: rule.apply(&evidence),
            evidence,
            detail,
        }
    }

    /// Verdict recomputed from the stored evidence.
    pub fn recomputed_verdict(&self) -> Verdict {
        self.rule.apply(&self.evidence)
    }

    pub fn violations(&self) -> impl Iterator<Item = &Evidence> {
        self.evidence.iter().filter(|e| e.decisive && !e.holds)
    }
}

fn mean_where<F: Fn(&crate::stats::CellKey) -> bool>(d: &FactorialDataset, f: F) -> Option<f64> {
    let (sum, n) = d
        .iter()
        .filter(|(k, _)| f(k))
        .fold((0.0, 0usize), |(s, n), (_, v)| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn w(name: &str, v: f64) -> (String, f64) {
    (name.into(), v)
}

fn range(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if values.is_empty() {
        0.0
    } else {
        max - min
    }
}

/// Grand-mean category ordering POP ≥ NEP ≥ BAL > POI > NEI.
pub fn evaluate_h1(d: &FactorialDataset) -> HypothesisOutcome {
    use PolitenessCategory::*;
    let q = |c: PolitenessCategory| mean_where(d, |k| k.category == c).unwrap_or(f64::NAN);
    let chain = [(Pop, Nep, false), (Nep, Bal, false), (Bal, Poi, true), (Poi, Nei, true)];
    let evidence = chain
        .iter()
        .map(|&(a, b, strict)| {
            let (qa, qb) = (q(a), q(b));
            let holds = if strict { qa > qb } else { qa >= qb };
            let op = if strict { ">" } else { ">=" };
            Evidence::decisive(
                format!("mean({}) {} mean({})", a.label(), op, b.label()),
                holds,
                vec![w(a.label(), qa), w(b.label(), qb)],
            )
        })
        .collect();
    HypothesisOutcome::new(
        HypothesisId::H1,
        Variant::MeanAggregated,
        None,
        DecisionRule::AllDecisive,
        evidence,
        Detail::None,
    )
}

fn models_by_language(d: &FactorialDataset) -> Vec<(Language, Vec<String>)> {
    d.languages()
        .into_iter()
        .map(|l| (l, d.models(l).into_iter().map(String::from).collect()))
        .collect()
}

fn history_chain(
    label: &str,
    pol: f64,
    raw: f64,
    imp: f64,
    decisive_pol_raw: bool,
    decisive_raw_imp: bool,
) -> [Evidence; 2] {
    let make = |decisive: bool, p: String, h: bool, wit: Vec<(String, f64)>| {
        if decisive {
            Evidence::decisive(p, h, wit)
        } else {
            Evidence::context(p, h, wit)
        }
    };
    [
        make(
            decisive_pol_raw,
            format!("{label}: POL > RAW"),
            pol > raw,
            vec![w("POL", pol), w("RAW", raw)],
        ),
        make(
            decisive_raw_imp,
            format!("{label}: RAW > IMP"),
            raw > imp,
            vec![w("RAW", raw), w("IMP", imp)],
        ),
    ]
}

/// History ordering POL > RAW > IMP.
///
/// The strict variant requires the chain for every (model, language). The
/// mean-aggregated variant decides on the grand means: POL must exceed both
/// RAW and IMP. The grand RAW > IMP link and all per-language chains are
/// attached as non-decisive context.
pub fn evaluate_h2(d: &FactorialDataset, variant: Variant) -> HypothesisOutcome {
    use HistoryCondition::*;
    let mut evidence = Vec::new();
    match variant {
        Variant::StrictUniversal => {
            for (lang, models) in models_by_language(d) {
                for m in models {
                    let q = |h: HistoryCondition| {
                        mean_where(d, |k| k.language == lang && k.model == m && k.condition == h).unwrap_or(f64::NAN)
                    };
                    let label = format!("{}/{}", m, lang.name());
                    evidence.extend(history_chain(&label, q(Pol), q(Raw), q(Imp), true, true));
                }
            }
        }
        Variant::MeanAggregated => {
            let q = |h: HistoryCondition| mean_where(d, |k| k.condition == h).unwrap_or(f64::NAN);
            let (pol, raw, imp) = (q(Pol), q(Raw), q(Imp));
            evidence.extend(history_chain("grand mean", pol, raw, imp, true, false));
            evidence.push(Evidence::decisive(
                String::from("grand mean: POL > IMP"),
                pol > imp,
                vec![w("POL", pol), w("IMP", imp)],
            ));
            for lang in d.languages() {
                let q = |h: HistoryCondition| {
                    mean_where(d, |k| k.language == lang && k.condition == h).unwrap_or(f64::NAN)
                };
                evidence.extend(history_chain(lang.name(), q(Pol), q(Raw), q(Imp), false, false));
            }
        }
    }
    HypothesisOutcome::new(HypothesisId::H2, variant, None, DecisionRule::AllDecisive, evidence, Detail::None)
}

/// Category maximising the model- and condition-averaged CQS of a language.
/// Ties resolve to the lexicographically first label.
pub fn language_argmax(d: &FactorialDataset, language: Language) -> Option<LanguageArgmax> {
    let means: Vec<(PolitenessCategory, f64)> = PolitenessCategory::ALL
        .into_iter()
        .filter_map(|c| mean_where(d, |k| k.language == language && k.category == c).map(|m| (c, m)))
        .collect();
    let best = means.iter().map(|(_, m)| *m).fold(f64::NEG_INFINITY, f64::max);
    let mut tied: Vec<PolitenessCategory> = means.iter().filter(|(_, m)| *m == best).map(|(c, _)| *c).collect();
    tied.sort_by_key(|c| c.label());
    Some(LanguageArgmax {
        language,
        chosen: *tied.first()?,
        tied,
        mean: best,
    })
}

/// The best category differs between at least two languages.
pub fn evaluate_h3(d: &FactorialDataset) -> HypothesisOutcome {
    let argmaxes: Vec<LanguageArgmax> = d.languages().into_iter().filter_map(|l| language_argmax(d, l)).collect();
    let mut evidence = Vec::new();
    for (i, a) in argmaxes.iter().enumerate() {
        for b in &argmaxes[i + 1..] {
            evidence.push(Evidence::decisive(
                format!(
                    "argmax({}) = {} differs from argmax({}) = {}",
                    a.language.name(),
                    a.chosen.label(),
                    b.language.name(),
                    b.chosen.label()
                ),
                a.chosen != b.chosen,
                vec![w(a.language.name(), a.mean), w(b.language.name(), b.mean)],
            ));
        }
    }
    HypothesisOutcome::new(
        HypothesisId::H3,
        Variant::MeanAggregated,
        None,
        DecisionRule::AnyDecisive,
        evidence,
        Detail::Argmax(argmaxes),
    )
}

/// Per-model range of category means within one language, sorted by
/// descending range then name.
pub fn sensitivity_ranges(d: &FactorialDataset, language: Language) -> Vec<SensitivityRange> {
    let mut out: Vec<SensitivityRange> = d
        .models(language)
        .into_iter()
        .map(|m| {
            let means: Vec<f64> = PolitenessCategory::ALL
                .into_iter()
                .filter_map(|c| mean_where(d, |k| k.language == language && k.model == m && k.category == c))
                .collect();
            SensitivityRange {
                model: m.into(),
                sigma: range(&means),
            }
        })
        .collect();
    out.sort_by(|a, b| b.sigma.total_cmp(&a.sigma).then_with(|| a.model.cmp(&b.model)));
    out
}

/// Default model pair compared by H4.
pub const H4_MORE_SENSITIVE: &str = "Llama";
pub const H4_LESS_SENSITIVE: &str = "GPT";

/// `σ(more) > σ(less)` within one language.
pub fn evaluate_h4(d: &FactorialDataset, language: Language, more: &str, less: &str) -> HypothesisOutcome {
    let ranges = sensitivity_ranges(d, language);
    let sigma = |m: &str| ranges.iter().find(|r| r.model == m).map(|r| r.sigma);
    let (hi, lo) = (sigma(more), sigma(less));
    let mut evidence = vec![Evidence::decisive(
        format!("{}: sigma({more}) > sigma({less})", language.name()),
        matches!((hi, lo), (Some(h), Some(l)) if h > l),
        vec![w(more, hi.unwrap_or(f64::NAN)), w(less, lo.unwrap_or(f64::NAN))],
    )];
    if let (Some(first), Some(last)) = (ranges.first(), ranges.last()) {
        evidence.push(Evidence::context(
            format!("{}: {more} has the largest sigma", language.name()),
            hi == Some(first.sigma),
            vec![w(&first.model, first.sigma)],
        ));
        evidence.push(Evidence::context(
            format!("{}: {less} has the smallest sigma", language.name()),
            lo == Some(last.sigma),
            vec![w(&last.model, last.sigma)],
        ));
    }
    HypothesisOutcome::new(
        HypothesisId::H4,
        Variant::MeanAggregated,
        Some(language),
        DecisionRule::AllDecisive,
        evidence,
        Detail::Sensitivity(ranges),
    )
}

/// `BAL ≥ POP` under RAW for every (model, language), judged by `rule`.
pub fn evaluate_h5_with(d: &FactorialDataset, rule: DecisionRule) -> HypothesisOutcome {
    use PolitenessCategory::*;
    let mut evidence = Vec::new();
    for (lang, models) in models_by_language(d) {
        for m in models {
            let q = |c: PolitenessCategory| {
                d.value(lang, &m, HistoryCondition::Raw, c).unwrap_or(f64::NAN)
            };
            let (bal, pop) = (q(Bal), q(Pop));
            evidence.push(Evidence::decisive(
                format!("{}/{}: BAL >= POP under RAW", m, lang.name()),
                bal >= pop,
                vec![w("BAL", bal), w("POP", pop)],
            ));
        }
    }
    HypothesisOutcome::new(HypothesisId::H5, Variant::StrictUniversal, None, rule, evidence, Detail::None)
}

pub fn evaluate_h5(d: &FactorialDataset) -> HypothesisOutcome {
    evaluate_h5_with(d, DecisionRule::STRICT_MAJORITY)
}

/// Per-condition range of model-averaged category means within one language.
pub fn history_spreads(d: &FactorialDataset, language: Language) -> Vec<HistorySpread> {
    HistoryCondition::ALL
        .into_iter()
        .map(|h| {
            let means: Vec<f64> = PolitenessCategory::ALL
                .into_iter()
                .filter_map(|c| mean_where(d, |k| k.language == language && k.condition == h && k.category == c))
                .collect();
            HistorySpread {
                condition: h,
                delta_q: range(&means),
            }
        })
        .collect()
}

/// Impolite history compresses the category spread: ΔQ(IMP) ≤ ΔQ(RAW) and
/// ΔQ(IMP) ≤ ΔQ(POL) decide; ΔQ(RAW) ≤ ΔQ(POL) is attached as context.
pub fn evaluate_h6(d: &FactorialDataset, language: Language) -> HypothesisOutcome {
    let spreads = history_spreads(d, language);
    let dq = |h: HistoryCondition| spreads.iter().find(|s| s.condition == h).map_or(f64::NAN, |s| s.delta_q);
    let (raw, pol, imp) = (dq(HistoryCondition::Raw), dq(HistoryCondition::Pol), dq(HistoryCondition::Imp));
    let name = language.name();
    let evidence = vec![
        Evidence::decisive(format!("{name}: dQ(IMP) <= dQ(RAW)"), imp <= raw, vec![w("IMP", imp), w("RAW", raw)]),
        Evidence::decisive(format!("{name}: dQ(IMP) <= dQ(POL)"), imp <= pol, vec![w("IMP", imp), w("POL", pol)]),
        Evidence::context(format!("{name}: dQ(RAW) <= dQ(POL)"), raw <= pol, vec![w("RAW", raw), w("POL", pol)]),
    ];
    HypothesisOutcome::new(
        HypothesisId::H6,
        Variant::MeanAggregated,
        Some(language),
        DecisionRule::AllDecisive,
        evidence,
        Detail::Spread(spreads),
    )
}

/// Background assumptions, listed in the report header and never tested.
pub const AXIOMS: [(&str, &str, &str); 4] = [
    ("A1", "Face Sensitivity", "Models react to face-threatening and face-saving cues in a prompt."),
    ("A2", "Context Retention", "Output at a turn depends on earlier turns as well as the current input."),
    ("A3", "Measurability", "Pragmatic effects surface in aggregate quantitative metrics."),
    ("A4", "Language Specificity", "How a strategy affects face depends on the language."),
];

/// Claim that follows from a hypothesis when it is supported.
#[derive(Debug, Clone, PartialEq)]
pub struct Corollary {
    pub name: &'static str,
    pub follows_from: HypothesisId,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub id: HypothesisId,
    pub verdict: Verdict,
    /// Which variant or slice the verdict was taken from.
    pub basis: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub h1: HypothesisOutcome,
    pub h2_strict: HypothesisOutcome,
    pub h2_mean: HypothesisOutcome,
    pub h3: HypothesisOutcome,
    pub h4: BTreeMap<Language, HypothesisOutcome>,
    pub h5: HypothesisOutcome,
    pub h6: BTreeMap<Language, HypothesisOutcome>,
    pub corollaries: Vec<Corollary>,
    pub summary: Vec<SummaryRow>,
}

impl HypothesisReport {
    /// Every outcome, in report order.
    pub fn outcomes(&self) -> Vec<&HypothesisOutcome> {
        let mut v = vec![&self.h1, &self.h2_strict, &self.h2_mean, &self.h3];
        v.extend(self.h4.values());
        v.push(&self.h5);
        v.extend(self.h6.values());
        v
    }

    pub fn verdict(&self, id: HypothesisId) -> Option<Verdict> {
        self.summary.iter().find(|r| r.id == id).map(|r| r.verdict)
    }
}

fn summary_slice(map: &BTreeMap<Language, HypothesisOutcome>) -> Option<(&Language, &HypothesisOutcome)> {
    map.get_key_value(&Language::English).or_else(|| map.iter().next())
}

/// All six hypotheses. The summary uses the mean-aggregated H2 and the
/// English slice of H4 and H6 when English is present.
pub fn evaluate_all(d: &FactorialDataset) -> HypothesisReport {
    let langs = d.languages();
    let h4: BTreeMap<Language, HypothesisOutcome> = langs
        .iter()
        .map(|&l| (l, evaluate_h4(d, l, H4_MORE_SENSITIVE, H4_LESS_SENSITIVE)))
        .collect();
    let h6: BTreeMap<Language, HypothesisOutcome> = langs.iter().map(|&l| (l, evaluate_h6(d, l))).collect();
    let h1 = evaluate_h1(d);
    let h2_strict = evaluate_h2(d, Variant::StrictUniversal);
    let h2_mean = evaluate_h2(d, Variant::MeanAggregated);
    let h3 = evaluate_h3(d);
    let h5 = evaluate_h5(d);

    let mut summary = vec![
        SummaryRow { id: HypothesisId::H1, verdict: h1.verdict, basis: "grand means".into() },
        SummaryRow { id: HypothesisId::H2, verdict: h2_mean.verdict, basis: Variant::MeanAggregated.as_str().into() },
        SummaryRow { id: HypothesisId::H3, verdict: h3.verdict, basis: "per-language argmax".into() },
    ];
    let sliced = |id, map: &BTreeMap<Language, HypothesisOutcome>| {
        summary_slice(map).map(|(l, o)| SummaryRow { id, verdict: o.verdict, basis: l.name().into() })
    };
    summary.extend(sliced(HypothesisId::H4, &h4));
    summary.push(SummaryRow { id: HypothesisId::H5, verdict: h5.verdict, basis: "all (model, language) under RAW".into() });
    summary.extend(sliced(HypothesisId::H6, &h6));

    let corollaries = vec![
        Corollary { name: "History Anchoring", follows_from: HypothesisId::H2, holds: h2_mean.verdict == Verdict::Supported },
        Corollary { name: "No Universal Prompt Strategy", follows_from: HypothesisId::H3, holds: h3.verdict == Verdict::Supported },
    ];

    HypothesisReport { h1, h2_strict, h2_mean, h3, h4, h5, h6, corollaries, summary }
}
