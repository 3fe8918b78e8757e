//! Core algorithms for politeness experiments over chat models.
//!
//! Everything here is pure and allocation-only: corpus line handling, the
//! factorial trial plan, the eight response-quality parameters and their
//! composite, two-way ANOVA with Tukey HSD, and the hypothesis evaluator.
//! File formats, HTTP dispatch and the command line live in the `plum` crate.

#![no_std]

extern crate alloc;

pub mod backend;
pub mod corpus;
pub mod harness;
pub mod hypotheses;
pub mod kmeans;
pub mod metrics;
pub mod report;
pub mod stats;
pub mod taxonomy;
pub mod text;

pub use taxonomy::{CalendarDay, HistoryCondition, Language, PolitenessCategory, ReplicateSlot};
