//! Two-way fixed-effects ANOVA with replication, Tukey HSD, η² and Cohen's κ.

mod anova;
mod dataset;
pub mod dist;
mod kappa;
pub mod special;
mod tukey;

pub use anova::{anova, eta_squared, two_way_anova, AnovaRow, AnovaTable, EtaSquared, Source};
pub use dataset::{BalancedDesign, CellKey, FactorialDataset};
pub use dist::{f_survival, studentized_range_survival, t_two_sided_survival};
pub use kappa::cohens_kappa;
pub use tukey::{tukey_design, tukey_hsd, Factor, TukeyResult};

use alloc::string::String;
use thiserror::Error;

use crate::taxonomy::Language;

/// Default significance level.
pub const ALPHA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("invalid degrees of freedom ({df1}, {df2})")]
    InvalidDegreesOfFreedom { df1: u32, df2: u32 },
    #[error("invalid studentized-range parameters: q = {q}, k = {k}, df = {df}")]
    InvalidParameters { q: f64, k: u32, df: u32 },
    #[error("unbalanced design: {0}")]
    UnbalancedDesign(String),
    #[error("no observations for {0}")]
    NoData(Language),
    #[error("duplicate observation for {0}")]
    DuplicateKey(String),
    #[error("error variance is zero")]
    ZeroErrorVariance,
    #[error("total variance is zero")]
    ZeroTotalVariance,
    #[error("chance agreement is 1")]
    DegenerateChance,
    #[error("confusion matrix is not square")]
    NotSquare,
    #[error("confusion matrix is empty or all zero")]
    EmptyMatrix,
}
