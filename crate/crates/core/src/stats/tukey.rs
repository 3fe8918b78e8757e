use alloc::string::String;
use alloc::vec::Vec;

use super::anova::{anova, AnovaTable};
use super::dataset::{BalancedDesign, FactorialDataset};
use super::dist::studentized_range_survival;
use super::{StatsError, ALPHA};
use crate::taxonomy::Language;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Factor {
    /// Politeness category, factor A.
    Category,
    /// History condition, factor B.
    History,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TukeyResult {
    pub pair: (String, String),
    /// Marginal mean of `pair.0` minus that of `pair.1`.
    pub mean_diff: f64,
    pub q: f64,
    pub p: f64,
    pub significant: bool,
}

impl TukeyResult {
    /// The same comparison with the pair order swapped.
    pub fn reversed(&self) -> TukeyResult {
        TukeyResult {
            pair: (self.pair.1.clone(), self.pair.0.clone()),
            mean_diff: -self.mean_diff,
            ..self.clone()
        }
    }

    pub fn involves(&self, a: &str, b: &str) -> bool {
        (self.pair.0 == a && self.pair.1 == b) || (self.pair.0 == b && self.pair.1 == a)
    }
}

/// All pairwise comparisons of one factor's marginal means.
///
/// Pairs are ordered by label; within a pair the alphabetically first level
/// comes first.
pub fn tukey_design(
    design: &BalancedDesign,
    table: &AnovaTable,
    factor: Factor,
    alpha: f64,
) -> Result<Vec<TukeyResult>, StatsError> {
    let ms_e = table.ms_error();
    if !(ms_e > 0.0) {
        return Err(StatsError::ZeroErrorVariance);
    }
    let df_e = table.row(super::Source::Error).df;
    let n = design.replicates();
    let (labels, means, n_group): (&[String], Vec<f64>, usize) = match factor {
        Factor::Category => (
            design.a_labels(),
            (0..design.a_levels()).map(|i| design.a_mean(i)).collect(),
            design.b_levels() * n,
        ),
        Factor::History => (
            design.b_labels(),
            (0..design.b_levels()).map(|j| design.b_mean(j)).collect(),
            design.a_levels() * n,
        ),
    };
    let k = labels.len() as u32;
    let se = libm::sqrt(ms_e / n_group as f64);
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.sort_by(|&x, &y| labels[x].cmp(&labels[y]));
    let mut out = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        for &j in &order[pos + 1..] {
            let mean_diff = means[i] - means[j];
            let q = mean_diff.abs() / se;
            let p = studentized_range_survival(q, k, df_e)?;
            out.push(TukeyResult {
                pair: (labels[i].clone(), labels[j].clone()),
                mean_diff,
                q,
                p,
                significant: p < alpha,
            });
        }
    }
    Ok(out)
}

/// Tukey HSD for one language at the default significance level.
pub fn tukey_hsd(dataset: &FactorialDataset, language: Language, factor: Factor) -> Result<Vec<TukeyResult>, StatsError> {
    let design = dataset.design(language)?;
    let table = anova(&design);
    tukey_design(&design, &table, factor, ALPHA)
}
