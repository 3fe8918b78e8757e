use super::dataset::{BalancedDesign, FactorialDataset};
use super::dist::f_survival;
use super::StatsError;
use crate::taxonomy::Language;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Source {
    CategoryA,
    HistoryB,
    Interaction,
    Error,
    Total,
}

impl Source {
    pub const ALL: [Source; 5] = [
        Source::CategoryA,
        Source::HistoryB,
        Source::Interaction,
        Source::Error,
        Source::Total,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Source::CategoryA => "Category (A)",
            Source::HistoryB => "History (B)",
            Source::Interaction => "A x B",
            Source::Error => "Error",
            Source::Total => "Total",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnovaRow {
    pub source: Source,
    pub ss: f64,
    pub df: u32,
    /// Absent for the total row.
    pub ms: Option<f64>,
    /// Present for effect rows when the error variance is positive.
    pub f: Option<f64>,
    pub p: Option<f64>,
    /// Absent when the total sum of squares is zero.
    pub eta2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnovaTable {
    rows: [AnovaRow; 5],
    grand_mean: f64,
    replicates: usize,
}

impl AnovaTable {
    pub fn rows(&self) -> &[AnovaRow; 5] {
        &self.rows
    }

    pub fn row(&self, source: Source) -> &AnovaRow {
        &self.rows[source as usize]
    }

    pub fn grand_mean(&self) -> f64 {
        self.grand_mean
    }

    pub fn replicates(&self) -> usize {
        self.replicates
    }

    /// `SS_E / df_E`.
    pub fn ms_error(&self) -> f64 {
        let e = self.row(Source::Error);
        e.ss / e.df as f64
    }
}

/// Fixed-effects two-way decomposition of a balanced design.
pub fn anova(design: &BalancedDesign) -> AnovaTable {
    let (a, b, n) = (design.a_levels(), design.b_levels(), design.replicates());
    let g = design.grand_mean();
    let sq = |x: f64| x * x;

    let ss_total: f64 = design.observations().map(|y| sq(y - g)).sum();
    let ss_a = (b * n) as f64 * (0..a).map(|i| sq(design.a_mean(i) - g)).sum::<f64>();
    let ss_b = (a * n) as f64 * (0..b).map(|j| sq(design.b_mean(j) - g)).sum::<f64>();
    let mut ss_cells = 0.0;
    let mut ss_e = 0.0;
    for i in 0..a {
        for j in 0..b {
            let m = design.cell_mean(i, j);
            ss_cells += n as f64 * sq(m - g);
            ss_e += design.cell(i, j).iter().map(|&y| sq(y - m)).sum::<f64>();
        }
    }
    // Rounding can push a zero interaction slightly negative.
    let ss_ab = (ss_cells - ss_a - ss_b).max(0.0);

    let df_a = (a - 1) as u32;
    let df_b = (b - 1) as u32;
    let df_ab = df_a * df_b;
    let df_e = (a * b * (n - 1)) as u32;
    let df_t = (a * b * n - 1) as u32;
    let ms_e = ss_e / df_e as f64;
    let eta = |ss: f64| (ss_total > 0.0).then(|| (ss / ss_total).clamp(0.0, 1.0));

    let effect = |source, ss: f64, df: u32| {
        let ms = ss / df as f64;
        let f = (ss_e > 0.0).then(|| ms / ms_e);
        let p = f.map(|f| f_survival(f, df, df_e).unwrap_or(1.0));
        AnovaRow {
            source,
            ss,
            df,
            ms: Some(ms),
            f,
            p,
            eta2: eta(ss),
        }
    };

    AnovaTable {
        rows: [
            effect(Source::CategoryA, ss_a, df_a),
            effect(Source::HistoryB, ss_b, df_b),
            effect(Source::Interaction, ss_ab, df_ab),
            AnovaRow {
                source: Source::Error,
                ss: ss_e,
                df: df_e,
                ms: Some(ms_e),
                f: None,
                p: None,
                eta2: eta(ss_e),
            },
            AnovaRow {
                source: Source::Total,
                ss: ss_total,
                df: df_t,
                ms: None,
                f: None,
                p: None,
                eta2: eta(ss_total),
            },
        ],
        grand_mean: g,
        replicates: n,
    }
}

/// ANOVA with Category as factor A and History as factor B, models as replicates.
pub fn two_way_anova(dataset: &FactorialDataset, language: Language) -> Result<AnovaTable, StatsError> {
    Ok(anova(&dataset.design(language)?))
}

/// Per-source share of the total sum of squares.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaSquared {
    pub category: f64,
    pub history: f64,
    pub interaction: f64,
    pub error: f64,
}

impl EtaSquared {
    pub fn get(&self, source: Source) -> Option<f64> {
        match source {
            Source::CategoryA => Some(self.category),
            Source::HistoryB => Some(self.history),
            Source::Interaction => Some(self.interaction),
            Source::Error => Some(self.error),
            Source::Total => None,
        }
    }
}

pub fn eta_squared(table: &AnovaTable) -> Result<EtaSquared, StatsError> {
    let total = table.row(Source::Total).ss;
    if total <= 0.0 {
        return Err(StatsError::ZeroTotalVariance);
    }
    let e = |s| table.row(s).ss / total;
    Ok(EtaSquared {
        category: e(Source::CategoryA),
        history: e(Source::HistoryB),
        interaction: e(Source::Interaction),
        error: e(Source::Error),
    })
}
