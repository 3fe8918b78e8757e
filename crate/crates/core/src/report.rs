//! Tabular artifacts: CQS matrices, per-parameter breakdowns, ANOVA and
//! Tukey tables, the hypothesis summary and long-format plot data.
//!
//! Every numeric cell records whether it was computed or copied from a
//! fixture. Rendering to aligned text rounds to three decimals; the CSV
//! writer in the `plum` crate keeps full precision.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::hypotheses::HypothesisReport;
use crate::metrics::{ParameterScores, ReconciliationEntry};
use crate::stats::{AnovaTable, FactorialDataset, TukeyResult};
use crate::taxonomy::{HistoryCondition, Language, PolitenessCategory};

/// Display precision for aligned text.
pub const DISPLAY_DECIMALS: usize = 3;

/// Half a unit in the last printed decimal; larger gaps against a printed
/// reference are real deviations.
pub const PRINTED_ROUNDING: f64 = 0.0005;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellSource {
    Computed,
    Fixture,
}

impl CellSource {
    pub fn as_str(self) -> &'static str {
        match self {
            CellSource::Computed => "computed",
            CellSource::Fixture => "fixture",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Number { value: f64, source: CellSource },
    Integer(i64),
    Empty,
}

impl Cell {
    pub fn computed(value: f64) -> Cell {
        Cell::Number { value, source: CellSource::Computed }
    }

    pub fn fixture(value: f64) -> Cell {
        Cell::Number { value, source: CellSource::Fixture }
    }

    pub fn text(s: impl Into<String>) -> Cell {
        Cell::Text(s.into())
    }

    pub fn optional(value: Option<f64>) -> Cell {
        value.map_or(Cell::Empty, Cell::computed)
    }

    pub fn number(&self) -> Option<f64> {
        match self {
            Cell::Number { value, .. } => Some(*value),
            Cell::Integer(i) => Some(*i as f64),
            _ => None,
        }
    }

    /// Full-precision rendering for CSV.
    pub fn raw(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Number { value, .. } => format!("{value}"),
            Cell::Integer(i) => i.to_string(),
            Cell::Empty => String::new(),
        }
    }

    /// Rounded rendering for aligned text.
    pub fn display(&self) -> String {
        match self {
            Cell::Number { value, .. } => format!("{value:.prec$}", prec = DISPLAY_DECIMALS),
            Cell::Empty => String::from("-"),
            other => other.raw(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Text,
    Number,
    Integer,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

impl Column {
    pub fn text(name: &str) -> Column {
        Column { name: name.into(), kind: ColumnKind::Text }
    }

    pub fn number(name: &str) -> Column {
        Column { name: name.into(), kind: ColumnKind::Number }
    }

    pub fn integer(name: &str) -> Column {
        Column { name: name.into(), kind: ColumnKind::Integer }
    }
}

/// Rectangular table with typed columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File-safe identifier.
    pub name: String,
    pub title: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, title: impl Into<String>, columns: Vec<Column>) -> Table {
        Table { name: name.into(), title: title.into(), columns, rows: Vec::new() }
    }

    /// Appends a row; panics if its width differs from the header.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch in {}", self.name);
        self.rows.push(row);
    }

    pub fn header(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Number of numeric cells.
    pub fn numeric_cells(&self) -> usize {
        self.rows.iter().flatten().filter(|c| matches!(c, Cell::Number { .. })).count()
    }

    /// Aligned plain-text rendering with a title line.
    pub fn render_text(&self) -> String {
        let body: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(Cell::display).collect()).collect();
        let mut widths: Vec<usize> = self.columns.iter().map(|c| c.name.chars().count()).collect();
        for row in &body {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let mut out = String::new();
        out.push_str(&self.title);
        out.push('\n');
        let line = |cells: &mut dyn Iterator<Item = (usize, &str)>, out: &mut String| {
            let mut parts = Vec::new();
            for (i, s) in cells {
                let pad = widths[i].saturating_sub(s.chars().count());
                let padded = match self.columns[i].kind {
                    ColumnKind::Text => format!("{s}{}", " ".repeat(pad)),
                    _ => format!("{}{s}", " ".repeat(pad)),
                };
                parts.push(padded);
            }
            out.push_str(parts.join("  ").trim_end());
            out.push('\n');
        };
        line(&mut self.columns.iter().map(|c| c.name.as_str()).enumerate(), &mut out);
        let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        out.push_str(&rule.join("  "));
        out.push('\n');
        for row in &body {
            line(&mut row.iter().map(String::as_str).enumerate(), &mut out);
        }
        out
    }
}

/// Where a row maximum fell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RowMax {
    Unique(usize),
    Tie(Vec<usize>),
    /// Row has no values.
    None,
}

/// Column positions holding a row's maximum.
pub fn row_max(values: &[Option<f64>]) -> RowMax {
    let best = values.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    let hits: Vec<usize> = values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v == Some(best))
        .map(|(i, _)| i)
        .collect();
    match hits.len() {
        0 => RowMax::None,
        1 => RowMax::Unique(hits[0]),
        _ => RowMax::Tie(hits),
    }
}

/// Models × levels matrix of averaged CQS.
#[derive(Debug, Clone, PartialEq)]
pub struct CqsMatrix {
    pub language: Language,
    pub kind: MatrixKind,
    pub models: Vec<String>,
    pub levels: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
    pub maxima: Vec<RowMax>,
    pub source: CellSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MatrixKind {
    /// Categories as columns, averaged over conditions.
    Politeness,
    /// Conditions as columns, averaged over categories.
    History,
}

impl MatrixKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MatrixKind::Politeness => "politeness",
            MatrixKind::History => "history",
        }
    }
}

/// Model order used by the printed tables; other models follow by name.
pub const MODEL_ORDER: [&str; 5] = ["Gemini", "GPT", "Claude", "DeepSeek", "Llama"];

pub fn ordered_models<'a, I: IntoIterator<Item = &'a str>>(models: I) -> Vec<String> {
    let mut v: Vec<String> = models.into_iter().map(String::from).collect();
    v.sort_by_key(|m| (MODEL_ORDER.iter().position(|o| o == m).unwrap_or(MODEL_ORDER.len()), m.clone()));
    v.dedup();
    v
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| s / n as f64)
}

impl CqsMatrix {
    fn build(d: &FactorialDataset, language: Language, kind: MatrixKind, source: CellSource) -> CqsMatrix {
        let models = ordered_models(d.models(language));
        let levels: Vec<String> = match kind {
            MatrixKind::Politeness => PolitenessCategory::ALL.iter().map(|c| c.label().into()).collect(),
            MatrixKind::History => HistoryCondition::ALL.iter().map(|h| h.label().into()).collect(),
        };
        let values: Vec<Vec<Option<f64>>> = models
            .iter()
            .map(|m| {
                levels
                    .iter()
                    .map(|lvl| {
                        mean(
                            d.language(language)
                                .filter(|(k, _)| {
                                    k.model == *m
                                        && match kind {
                                            MatrixKind::Politeness => k.category.label() == lvl,
                                            MatrixKind::History => k.condition.label() == lvl,
                                        }
                                })
                                .map(|(_, v)| v),
                        )
                    })
                    .collect()
            })
            .collect();
        let maxima = values.iter().map(|r| row_max(r)).collect();
        CqsMatrix { language, kind, models, levels, values, maxima, source }
    }

    pub fn get(&self, model: &str, level: &str) -> Option<f64> {
        let r = self.models.iter().position(|m| m == model)?;
        let c = self.levels.iter().position(|l| l == level)?;
        self.values[r][c]
    }

    /// Label of the row maximum, or the tied labels joined by `/`.
    pub fn max_label(&self, row: usize) -> String {
        match &self.maxima[row] {
            RowMax::Unique(i) => self.levels[*i].clone(),
            RowMax::Tie(v) => {
                let names: Vec<&str> = v.iter().map(|i| self.levels[*i].as_str()).collect();
                format!("tie:{}", names.join("/"))
            }
            RowMax::None => String::new(),
        }
    }

    pub fn to_table(&self) -> Table {
        let mut cols = vec![Column::text("model")];
        cols.extend(self.levels.iter().map(|l| Column::number(l)));
        cols.push(Column::text("max"));
        let title = match self.kind {
            MatrixKind::Politeness => format!("Mean CQS by politeness category ({})", self.language.name()),
            MatrixKind::History => format!("Mean CQS by history condition ({})", self.language.name()),
        };
        let mut t = Table::new(format!("{}_{}", self.kind.as_str(), self.language.code()), title, cols);
        for (i, m) in self.models.iter().enumerate() {
            let mut row = vec![Cell::text(m.as_str())];
            row.extend(self.values[i].iter().map(|v| v.map_or(Cell::Empty, |x| Cell::Number { value: x, source: self.source })));
            row.push(Cell::text(self.max_label(i)));
            t.push(row);
        }
        t
    }
}

/// Models × categories, each cell the condition-averaged CQS.
pub fn table_politeness_by_model(d: &FactorialDataset, language: Language) -> CqsMatrix {
    CqsMatrix::build(d, language, MatrixKind::Politeness, CellSource::Computed)
}

/// Models × conditions, each cell the category-averaged CQS.
pub fn table_history_by_model(d: &FactorialDataset, language: Language) -> CqsMatrix {
    CqsMatrix::build(d, language, MatrixKind::History, CellSource::Computed)
}

/// One printed matrix cell used as a comparison reference.
#[derive(Debug, Clone, PartialEq)]
pub struct PrintedCell {
    pub language: Language,
    pub kind: MatrixKind,
    pub model: String,
    pub level: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Deviation {
    pub printed: PrintedCell,
    pub recomputed: Option<f64>,
    pub delta: Option<f64>,
    pub flagged: bool,
}

/// Compares recomputed matrix cells with printed values. Cells whose
/// matrix is absent or whose coordinates are missing are flagged.
pub fn compare_with_printed(matrices: &[CqsMatrix], printed: &[PrintedCell], tolerance: f64) -> Vec<Deviation> {
    printed
        .iter()
        .map(|p| {
            let recomputed = matrices
                .iter()
                .find(|m| m.language == p.language && m.kind == p.kind)
                .and_then(|m| m.get(&p.model, &p.level));
            let delta = recomputed.map(|r| r - p.value);
            Deviation {
                printed: p.clone(),
                recomputed,
                delta,
                flagged: delta.map_or(true, |d| d.abs() > tolerance),
            }
        })
        .collect()
}

pub fn deviation_table(deviations: &[Deviation]) -> Table {
    let mut t = Table::new(
        "printed_deviations",
        "Recomputed versus printed CQS",
        vec![
            Column::text("language"),
            Column::text("table"),
            Column::text("model"),
            Column::text("level"),
            Column::number("printed"),
            Column::number("recomputed"),
            Column::number("delta"),
            Column::text("flagged"),
        ],
    );
    for d in deviations {
        t.push(vec![
            Cell::text(d.printed.language.name()),
            Cell::text(d.printed.kind.as_str()),
            Cell::text(d.printed.model.as_str()),
            Cell::text(d.printed.level.as_str()),
            Cell::fixture(d.printed.value),
            Cell::optional(d.recomputed),
            Cell::optional(d.delta),
            Cell::text(if d.flagged { "yes" } else { "no" }),
        ]);
    }
    t
}

/// Per-parameter breakdown for one language, one row per (model, condition, category).
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterRow {
    pub model: String,
    pub condition: HistoryCondition,
    pub category: PolitenessCategory,
    pub scores: ParameterScores,
}

pub fn table_parameters(language: Language, rows: &[ParameterRow], source: CellSource) -> Table {
    let mut cols = vec![Column::text("model"), Column::text("condition"), Column::text("category")];
    cols.extend(ParameterScores::NAMES.iter().map(|n| Column::number(n)));
    cols.push(Column::number("cqs"));
    let mut t = Table::new(
        format!("parameters_{}", language.code()),
        format!("Per-parameter breakdown ({})", language.name()),
        cols,
    );
    let mut sorted: Vec<&ParameterRow> = rows.iter().collect();
    let order = |m: &str| MODEL_ORDER.iter().position(|o| *o == m).unwrap_or(MODEL_ORDER.len());
    sorted.sort_by(|a, b| {
        (order(&a.model), &a.model, a.condition, a.category).cmp(&(order(&b.model), &b.model, b.condition, b.category))
    });
    for r in sorted {
        let mut row = vec![Cell::text(r.model.as_str()), Cell::text(r.condition.label()), Cell::text(r.category.label())];
        row.extend(r.scores.parameters().iter().map(|v| Cell::Number { value: *v, source }));
        row.push(Cell::Number { value: r.scores.cqs, source });
        t.push(row);
    }
    t
}

pub fn reconciliation_table(entries: &[ReconciliationEntry]) -> Table {
    let mut t = Table::new(
        "reconciliation",
        "Printed CQS versus mean of printed parameters",
        vec![
            Column::text("language"),
            Column::text("model"),
            Column::text("condition"),
            Column::text("category"),
            Column::number("printed_cqs"),
            Column::number("parameter_mean"),
            Column::number("deviation"),
            Column::text("flagged"),
        ],
    );
    for e in entries {
        t.push(vec![
            Cell::text(e.row.language.name()),
            Cell::text(e.row.model.as_str()),
            Cell::text(e.row.condition.label()),
            Cell::text(e.row.category.label()),
            Cell::fixture(e.row.printed_cqs),
            Cell::computed(e.recomputed_cqs),
            Cell::computed(e.deviation),
            Cell::text(if e.flagged { "yes" } else { "no" }),
        ]);
    }
    t
}

pub fn anova_table(language: Language, table: &AnovaTable) -> Table {
    let mut t = Table::new(
        format!("anova_{}", language.code()),
        format!("Two-way ANOVA ({})", language.name()),
        vec![
            Column::text("source"),
            Column::number("ss"),
            Column::integer("df"),
            Column::number("ms"),
            Column::number("f"),
            Column::number("p"),
            Column::number("eta2"),
        ],
    );
    for r in table.rows() {
        t.push(vec![
            Cell::text(r.source.label()),
            Cell::computed(r.ss),
            Cell::Integer(r.df as i64),
            Cell::optional(r.ms),
            Cell::optional(r.f),
            Cell::optional(r.p),
            Cell::optional(r.eta2),
        ]);
    }
    t
}

pub fn tukey_table(language: Language, factor_name: &str, results: &[TukeyResult]) -> Table {
    let mut t = Table::new(
        format!("tukey_{}_{}", factor_name.to_ascii_lowercase(), language.code()),
        format!("Tukey HSD, {} ({})", factor_name, language.name()),
        vec![
            Column::text("comparison"),
            Column::number("mean_diff"),
            Column::number("q"),
            Column::number("p"),
            Column::text("significant"),
        ],
    );
    for r in results {
        t.push(vec![
            Cell::text(format!("{} vs {}", r.pair.0, r.pair.1)),
            Cell::computed(r.mean_diff),
            Cell::computed(r.q),
            Cell::computed(r.p),
            Cell::text(if r.significant { "yes" } else { "no" }),
        ]);
    }
    t
}

/// Effect sizes for several languages side by side.
pub fn eta_table(rows: &[(Language, &AnovaTable)]) -> Table {
    use crate::stats::Source;
    let mut t = Table::new(
        "eta_squared",
        "Effect sizes (eta squared)",
        vec![
            Column::text("language"),
            Column::number("category"),
            Column::number("history"),
            Column::number("interaction"),
        ],
    );
    for (l, a) in rows {
        t.push(vec![
            Cell::text(l.name()),
            Cell::optional(a.row(Source::CategoryA).eta2),
            Cell::optional(a.row(Source::HistoryB).eta2),
            Cell::optional(a.row(Source::Interaction).eta2),
        ]);
    }
    t
}

pub fn hypothesis_summary_table(report: &HypothesisReport) -> Table {
    let mut t = Table::new(
        "hypotheses_summary",
        "Hypothesis assessments",
        vec![Column::text("id"), Column::text("hypothesis"), Column::text("verdict"), Column::text("basis")],
    );
    for r in &report.summary {
        t.push(vec![
            Cell::text(r.id.code()),
            Cell::text(r.id.name()),
            Cell::text(r.verdict.as_str()),
            Cell::text(r.basis.as_str()),
        ]);
    }
    t
}

/// Every evaluated predicate with its witness values.
pub fn hypothesis_evidence_table(report: &HypothesisReport) -> Table {
    let mut t = Table::new(
        "hypotheses_evidence",
        "Hypothesis evidence",
        vec![
            Column::text("id"),
            Column::text("variant"),
            Column::text("scope"),
            Column::text("verdict"),
            Column::text("predicate"),
            Column::text("holds"),
            Column::text("decisive"),
            Column::text("witness"),
        ],
    );
    for o in report.outcomes() {
        for e in &o.evidence {
            let witness: Vec<String> = e.witness.iter().map(|(k, v)| format!("{k}={v}")).collect();
            t.push(vec![
                Cell::text(o.id.code()),
                Cell::text(o.variant.as_str()),
                Cell::text(o.scope.map_or("all", |l| l.name())),
                Cell::text(o.verdict.as_str()),
                Cell::text(e.predicate.as_str()),
                Cell::text(if e.holds { "true" } else { "false" }),
                Cell::text(if e.decisive { "true" } else { "false" }),
                Cell::text(witness.join(";")),
            ]);
        }
    }
    t
}

/// Long-format means for plotting: one row per (language, condition, category).
pub fn plot_data(d: &FactorialDataset) -> Table {
    let mut t = Table::new(
        "plot_cqs",
        "Mean CQS by language, condition and category",
        vec![Column::text("language"), Column::text("condition"), Column::text("category"), Column::number("mean_cqs")],
    );
    let mut cells: BTreeMap<(Language, HistoryCondition, PolitenessCategory), (f64, usize)> = BTreeMap::new();
    for (k, v) in d.iter() {
        let e = cells.entry((k.language, k.condition, k.category)).or_insert((0.0, 0));
        e.0 += v;
        e.1 += 1;
    }
    for ((l, h, c), (s, n)) in cells {
        t.push(vec![Cell::text(l.name()), Cell::text(h.label()), Cell::text(c.label()), Cell::computed(s / n as f64)]);
    }
    t
}
