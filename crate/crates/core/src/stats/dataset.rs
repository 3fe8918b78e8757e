use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::StatsError;
use crate::taxonomy::{HistoryCondition, Language, PolitenessCategory};

/// Coordinates of one CQS value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellKey {
    pub language: Language,
    pub model: String,
    pub condition: HistoryCondition,
    pub category: PolitenessCategory,
}

impl core::fmt::Display for CellKey {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "{}/{}/{}/{}",
            self.language.name(),
            self.model,
            self.condition.label(),
            self.category.label()
        )
    }
}

/// CQS values keyed by language, model, history condition and category.
/// Models act as replicates within each (condition, category) cell.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FactorialDataset {
    values: BTreeMap<CellKey, f64>,
}

impl FactorialDataset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: CellKey, cqs: f64) -> Result<(), StatsError> {
        if self.values.contains_key(&key) {
            return Err(StatsError::DuplicateKey(key.to_string()));
        }
        self.values.insert(key, cqs);
        Ok(())
    }

    pub fn from_entries<I>(entries: I) -> Result<Self, StatsError>
    where
        I: IntoIterator<Item = (CellKey, f64)>,
    {
        let mut d = Self::new();
        for (k, v) in entries {
            d.insert(k, v)?;
        }
        Ok(d)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, key: &CellKey) -> Option<f64> {
        self.values.get(key).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CellKey, f64)> {
        self.values.iter().map(|(k, v)| (k, *v))
    }

    pub fn language(&self, language: Language) -> impl Iterator<Item = (&CellKey, f64)> {
        self.iter().filter(move |(k, _)| k.language == language)
    }

    pub fn language_len(&self, language: Language) -> usize {
        self.language(language).count()
    }

    pub fn languages(&self) -> BTreeSet<Language> {
        self.values.keys().map(|k| k.language).collect()
    }

    pub fn models(&self, language: Language) -> BTreeSet<&str> {
        self.language(language).map(|(k, _)| k.model.as_str()).collect()
    }

    /// Value at a coordinate, if present.
    pub fn value(
        &self,
        language: Language,
        model: &str,
        condition: HistoryCondition,
        category: PolitenessCategory,
    ) -> Option<f64> {
        self.get(&CellKey {
            language,
            model: model.into(),
            condition,
            category,
        })
    }

    /// The Category (A) × History (B) design for one language.
    ///
    /// Every category present must appear under every condition present,
    /// each cell with the same model set of size ≥ 2.
    pub fn design(&self, language: Language) -> Result<BalancedDesign, StatsError> {
        let mut cells: BTreeMap<(PolitenessCategory, HistoryCondition), BTreeMap<&str, f64>> = BTreeMap::new();
        for (k, v) in self.language(language) {
            cells
                .entry((k.category, k.condition))
                .or_default()
                .insert(k.model.as_str(), v);
        }
        if cells.is_empty() {
            return Err(StatsError::NoData(language));
        }
        let cats: Vec<PolitenessCategory> = PolitenessCategory::ALL
            .into_iter()
            .filter(|c| cells.keys().any(|(cc, _)| cc == c))
            .collect();
        let conds: Vec<HistoryCondition> = HistoryCondition::ALL
            .into_iter()
            .filter(|h| cells.keys().any(|(_, hh)| hh == h))
            .collect();
        let models = self.models(language);
        let mut data = Vec::with_capacity(cats.len());
        for &c in &cats {
            let mut row = Vec::with_capacity(conds.len());
            for &h in &conds {
                let cell = cells.get(&(c, h)).ok_or_else(|| {
                    StatsError::UnbalancedDesign(format!("{}: missing cell {}/{}", language.name(), c.label(), h.label()))
                })?;
                if cell.len() != models.len() {
                    let missing: Vec<&str> = models.iter().filter(|m| !cell.contains_key(*m)).copied().collect();
                    return Err(StatsError::UnbalancedDesign(format!(
                        "{}: cell {}/{} lacks {}",
                        language.name(),
                        c.label(),
                        h.label(),
                        missing.join(", ")
                    )));
                }
                row.push(cell.values().copied().collect());
            }
            data.push(row);
        }
        BalancedDesign::new(
            cats.iter().map(|c| c.label().into()).collect(),
            conds.iter().map(|h| h.label().into()).collect(),
            data,
        )
    }
}

/// Balanced a × b design with n replicates per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BalancedDesign {
    a_labels: Vec<String>,
    b_labels: Vec<String>,
    n: usize,
    /// `cells[i][j]` holds the replicates at A level i, B level j.
    cells: Vec<Vec<Vec<f64>>>,
}

impl BalancedDesign {
    pub fn new(a_labels: Vec<String>, b_labels: Vec<String>, cells: Vec<Vec<Vec<f64>>>) -> Result<Self, StatsError> {
        let (a, b) = (a_labels.len(), b_labels.len());
        if a < 2 || b < 2 {
            return Err(StatsError::UnbalancedDesign(format!("need ≥ 2 levels per factor, got {a} × {b}")));
        }
        if cells.len() != a || cells.iter().any(|r| r.len() != b) {
            return Err(StatsError::UnbalancedDesign("cell grid does not match level labels".into()));
        }
        let n = cells[0][0].len();
        if n < 2 {
            return Err(StatsError::UnbalancedDesign(format!("need ≥ 2 replicates per cell, got {n}")));
        }
        if cells.iter().flatten().any(|c| c.len() != n) {
            return Err(StatsError::UnbalancedDesign("replicate counts differ between cells".into()));
        }
        if cells.iter().flatten().flatten().any(|v| !v.is_finite()) {
            return Err(StatsError::UnbalancedDesign("non-finite observation".into()));
        }
        Ok(BalancedDesign {
            a_labels,
            b_labels,
            n,
            cells,
        })
    }

    pub fn a_levels(&self) -> usize {
        self.a_labels.len()
    }

    pub fn b_levels(&self) -> usize {
        self.b_labels.len()
    }

    pub fn replicates(&self) -> usize {
        self.n
    }

    pub fn a_labels(&self) -> &[String] {
        &self.a_labels
    }

    pub fn b_labels(&self) -> &[String] {
        &self.b_labels
    }

    pub fn cell(&self, i: usize, j: usize) -> &[f64] {
        &self.cells[i][j]
    }

    pub fn observations(&self) -> impl Iterator<Item = f64> + '_ {
        self.cells.iter().flatten().flatten().copied()
    }

    pub fn total(&self) -> usize {
        self.a_levels() * self.b_levels() * self.n
    }

    pub fn grand_mean(&self) -> f64 {
        self.observations().sum::<f64>() / self.total() as f64
    }

    pub fn cell_mean(&self, i: usize, j: usize) -> f64 {
        mean(&self.cells[i][j])
    }

    /// Mean over B levels and replicates at A level `i`.
    pub fn a_mean(&self, i: usize) -> f64 {
        self.cells[i].iter().flatten().sum::<f64>() / (self.b_levels() * self.n) as f64
    }

    /// Mean over A levels and replicates at B level `j`.
    pub fn b_mean(&self, j: usize) -> f64 {
        self.cells.iter().map(|r| r[j].iter().sum::<f64>()).sum::<f64>() / (self.a_levels() * self.n) as f64
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}
