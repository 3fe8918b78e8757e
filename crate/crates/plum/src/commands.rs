//! Subcommand implementations, separate from argument parsing so tests can
//! drive them directly.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use plum_core::backend::{MockBackend, ScorerBackend};
use plum_core::harness::{enumerate_plan, peak_window_count};
use plum_core::hypotheses::{evaluate_all, HypothesisReport, AXIOMS};
use plum_core::metrics::{reconcile, PrintedParameterRow, ScoringOptions, RECONCILIATION_TOLERANCE};
use plum_core::report::{
    anova_table, compare_with_printed, deviation_table, eta_table, hypothesis_evidence_table, hypothesis_summary_table,
    plot_data, reconciliation_table, table_history_by_model, table_parameters, table_politeness_by_model, tukey_table,
    Cell, CellSource, Column, ParameterRow, Table, PRINTED_ROUNDING,
};
use plum_core::stats::{two_way_anova, tukey_hsd, AnovaTable, Factor, FactorialDataset};
use plum_core::{HistoryCondition, Language};

use crate::config::Config;
use crate::corpus_fs::{parse_corpus, validate_tree};
use crate::dispatch::Dispatcher;
use crate::emit::{emit_bundle, Format, Manifest, Provenance, ReportBundle};
use crate::fixtures::{dataset_from_parameter_rows, load_cqs_fixture, load_parameter_rows, load_printed_tables};
use crate::http_backend::HttpBackend;
use crate::runner::{run_plan, RunOptions, RunSummary};
use crate::scoring::{score_records, write_scores};
use crate::scripts::ScriptSet;
use crate::sink::{read_results, ResultsSink};
use crate::syllables::HyphenationCounter;

/// Prints one line per corpus file; true when every file passed.
pub fn validate_corpus(root: &Path, strict: bool, out: &mut dyn Write) -> Result<bool> {
    let reports = validate_tree(root, strict);
    let mut ok = true;
    for r in &reports {
        match &r.result {
            Ok(n) => writeln!(out, "ok     {} {:<3} {} prompts  {}", r.language.code(), r.category.label(), n, r.path.display())?,
            Err(e) => {
                ok = false;
                writeln!(out, "error  {} {:<3} {}", r.language.code(), r.category.label(), e)?;
            }
        }
    }
    if ok {
        if let Err(e) = parse_corpus(root, strict) {
            ok = false;
            writeln!(out, "error  {e}")?;
        }
    }
    writeln!(out, "{}", if ok { "corpus valid" } else { "corpus invalid" })?;
    Ok(ok)
}

pub fn parse_conditions(s: &str) -> Result<Vec<HistoryCondition>> {
    let mut v: Vec<HistoryCondition> = s
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse().map_err(|e| anyhow::anyhow!("{e}")))
        .collect::<Result<_>>()?;
    v.sort();
    v.dedup();
    Ok(v)
}

pub struct RunArgs {
    pub corpus: PathBuf,
    pub config: PathBuf,
    pub out: PathBuf,
    pub conditions: Vec<HistoryCondition>,
    pub resume: bool,
}

pub fn run(args: &RunArgs, out: &mut dyn Write) -> Result<RunSummary> {
    let corpus = parse_corpus(&args.corpus, true)?;
    let config = Config::load(&args.config)?;
    if config.endpoints.is_empty() {
        bail!("config lists no endpoints");
    }
    let origin = Instant::now();
    let dispatchers = config
        .endpoints
        .iter()
        .map(|e| Dispatcher::new(e.clone(), config.retry, origin).with_context(|| format!("endpoint `{}`", e.name)))
        .collect::<Result<Vec<_>>>()?;
    let models: Vec<&str> = config.endpoints.iter().map(|e| e.name.as_str()).collect();
    let plan = enumerate_plan(&corpus, &models, &args.conditions, &config.replicate_slots, &config.days)?;
    let mut sink = if args.resume { ResultsSink::resume(&args.out)? } else { ResultsSink::create(&args.out)? };
    let options = RunOptions {
        run_id: uuid::Uuid::new_v4().to_string(),
        live_priming: config.live_priming,
        ..RunOptions::default()
    };
    writeln!(out, "run {}: {} planned trials, {} already complete", options.run_id, plan.len(), sink.completed_len())?;
    let summary = run_plan(&plan, &corpus, &config.scripts, &dispatchers, &mut sink, &options)?;
    writeln!(
        out,
        "attempted={} succeeded={} failed={} skipped_existing={}",
        summary.attempted, summary.succeeded, summary.failed, summary.skipped_existing
    )?;
    for e in &config.endpoints {
        let log = &summary.request_log[&e.name];
        writeln!(
            out,
            "{}: {} requests, peak {} per {:?} (limit {})",
            e.name,
            log.len(),
            peak_window_count(log, e.rate_window()),
            e.rate_window(),
            e.max_requests_per_minute
        )?;
    }
    Ok(summary)
}

pub struct ScoreArgs {
    pub input: PathBuf,
    pub out: PathBuf,
    /// `mock` or a sidecar base URL.
    pub backend: String,
    pub k: Option<usize>,
    pub config: Option<PathBuf>,
}

pub fn score(args: &ScoreArgs, out: &mut dyn Write) -> Result<()> {
    let records = read_results(&args.input)?;
    let scripts = match &args.config {
        Some(p) => Config::load(p)?.scripts,
        None => ScriptSet::defaults(),
    };
    let backend: Box<dyn ScorerBackend> = if args.backend == "mock" {
        Box::new(MockBackend::new(0))
    } else {
        Box::new(HttpBackend::connect(&args.backend)?)
    };
    let options = ScoringOptions { k: args.k, ..ScoringOptions::default() };
    let scored = score_records(&records, &scripts, backend.as_ref(), &HyphenationCounter::new(), &options);
    write_scores(&args.out, &scored.rows)?;
    for (key, e) in &scored.failures {
        writeln!(out, "not scored {key}: {e}")?;
    }
    writeln!(
        out,
        "scored {} of {} records ({} not ok, {} failed) with {}",
        scored.rows.len(),
        records.len(),
        scored.not_ok,
        scored.failures.len(),
        backend.identity()
    )?;
    Ok(())
}

/// A fixture in either layout: CQS only, or per-parameter with printed CQS.
pub struct Fixture {
    pub dataset: FactorialDataset,
    pub parameter_rows: Option<Vec<PrintedParameterRow>>,
}

pub fn load_fixture(path: &Path) -> Result<Fixture> {
    let mut reader = csv::Reader::from_path(path).with_context(|| path.display().to_string())?;
    let has_parameters = reader.headers()?.iter().any(|h| h == "s1");
    if has_parameters {
        let rows = load_parameter_rows(path)?;
        let dataset = dataset_from_parameter_rows(&rows)?;
        for l in dataset.languages() {
            dataset.design(l)?;
        }
        Ok(Fixture { dataset, parameter_rows: Some(rows) })
    } else {
        Ok(Fixture { dataset: load_cqs_fixture(path)?, parameter_rows: None })
    }
}

pub fn stats_tables(d: &FactorialDataset, language: Language) -> Result<(AnovaTable, Vec<Table>)> {
    let anova = two_way_anova(d, language)?;
    let category = tukey_hsd(d, language, Factor::Category)?;
    let history = tukey_hsd(d, language, Factor::History)?;
    let tables = vec![
        anova_table(language, &anova),
        tukey_table(language, "Category", &category),
        tukey_table(language, "History", &history),
        eta_table(&[(language, &anova)]),
    ];
    Ok((anova, tables))
}

fn provenance(command: &str, fixture: &Path) -> Result<Provenance> {
    Ok(Provenance::new()
        .with_input(fixture)
        .with_context(|| fixture.display().to_string())?
        .with_parameter("command", command))
}

pub fn stats(fixture: &Path, language: Language, out_dir: &Path) -> Result<Manifest> {
    let f = load_fixture(fixture)?;
    let (_, tables) = stats_tables(&f.dataset, language)?;
    let bundle = ReportBundle { tables, provenance: provenance("stats", fixture)?.with_parameter("language", language.code()) };
    Ok(emit_bundle(&bundle, out_dir, &[Format::Csv, Format::Text])?)
}

pub fn axioms_table() -> Table {
    let mut t = Table::new(
        "axioms",
        "Presupposed axioms (documentation, not tested)",
        vec![Column::text("id"), Column::text("name"), Column::text("statement")],
    );
    for (id, name, text) in AXIOMS {
        t.push(vec![Cell::text(id), Cell::text(name), Cell::text(text)]);
    }
    t
}

pub fn hypothesis_tables(report: &HypothesisReport) -> Vec<Table> {
    vec![axioms_table(), hypothesis_summary_table(report), hypothesis_evidence_table(report)]
}

pub fn hypotheses(fixture: &Path, out_dir: &Path) -> Result<(HypothesisReport, Manifest)> {
    let f = load_fixture(fixture)?;
    let report = evaluate_all(&f.dataset);
    let bundle = ReportBundle { tables: hypothesis_tables(&report), provenance: provenance("hypotheses", fixture)? };
    let manifest = emit_bundle(&bundle, out_dir, &[Format::Csv, Format::Text])?;
    Ok((report, manifest))
}

pub struct ReportArgs {
    pub fixture: PathBuf,
    pub out: PathBuf,
    pub formats: Vec<Format>,
    pub reference: Option<PathBuf>,
}

/// Assembles the full bundle: marginal matrices, statistics, hypotheses,
/// plot data, and, when available, per-parameter and deviation tables.
pub fn report_bundle(args: &ReportArgs) -> Result<ReportBundle> {
    let f = load_fixture(&args.fixture)?;
    let d = &f.dataset;
    let mut prov = provenance("report", &args.fixture)?;
    let mut tables = Vec::new();
    let mut matrices = Vec::new();
    let mut anovas = Vec::new();
    for l in d.languages() {
        let p = table_politeness_by_model(d, l);
        let h = table_history_by_model(d, l);
        tables.push(p.to_table());
        tables.push(h.to_table());
        matrices.push(p);
        matrices.push(h);
        let (anova, stats) = stats_tables(d, l)?;
        tables.extend(stats.into_iter().filter(|t| t.name != "eta_squared"));
        anovas.push((l, anova));
    }
    let eta_rows: Vec<(Language, &AnovaTable)> = anovas.iter().map(|(l, a)| (*l, a)).collect();
    tables.push(eta_table(&eta_rows));
    tables.extend(hypothesis_tables(&evaluate_all(d)));
    tables.push(plot_data(d));
    if let Some(rows) = &f.parameter_rows {
        let mut by_lang: BTreeMap<Language, Vec<ParameterRow>> = BTreeMap::new();
        for r in rows {
            // The printed CQS is shown as printed; reconciliation reports the gap.
            let mut scores = plum_core::metrics::ParameterScores::from_parameters(r.parameters)?;
            scores.cqs = r.printed_cqs;
            by_lang.entry(r.language).or_default().push(ParameterRow {
                model: r.model.clone(),
                condition: r.condition,
                category: r.category,
                scores,
            });
        }
        for (l, rows) in &by_lang {
            tables.push(table_parameters(*l, rows, CellSource::Fixture));
        }
        tables.push(reconciliation_table(&reconcile(rows, RECONCILIATION_TOLERANCE)));
    }
    if let Some(reference) = &args.reference {
        let printed = load_printed_tables(reference)?;
        tables.push(deviation_table(&compare_with_printed(&matrices, &printed, PRINTED_ROUNDING)));
        prov = prov.with_input(reference).with_context(|| reference.display().to_string())?;
    }
    Ok(ReportBundle { tables, provenance: prov })
}

pub fn report(args: &ReportArgs) -> Result<Manifest> {
    let bundle = report_bundle(args)?;
    Ok(emit_bundle(&bundle, &args.out, &args.formats)?)
}
