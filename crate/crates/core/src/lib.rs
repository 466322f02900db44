//! Stopout prediction for weekly-structured online courses.
//!
//! The pipeline runs in stages, each consuming the previous stage's output:
//!
//! ```text
//! event files ─► event_store ─► features ─► cohort ─► dataset ─► logistic ─► eval
//!                                                        │
//!                                                        └──► importance
//! ```
//!
//! [`synth`] generates courses with a planted stopout mechanism and
//! [`pipeline`] wires the stages into file-mediated batch runs.

pub mod cohort;
pub mod config;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod event_store;
pub mod features;
pub mod importance;
pub mod linalg;
pub mod logistic;
pub mod pipeline;
pub mod rng;
pub mod synth;
pub mod tsv;

pub use error::{Error, Result};
