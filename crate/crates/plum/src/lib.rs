//! File formats, HTTP dispatch, scoring IO and report emission around
//! `plum-core`.

pub mod commands;
pub mod config;
pub mod corpus_fs;
pub mod dispatch;
pub mod emit;
pub mod fixtures;
pub mod http_backend;
pub mod runner;
pub mod scoring;
pub mod scripts;
pub mod sink;
pub mod syllables;
