//! Holds the `acceptance` test target; no library code.
//!
//! Run it with `cargo test -p plum-validation --test acceptance`.
