//! Interest classification of social-network community pages.
//!
//! The pipeline: [`corpus`] normalizes page texts into tokens, [`features`]
//! turns them into Bernoulli, plain-frequency or normalized-frequency
//! vectors, [`classifiers`] trains one of twelve configurations on top of the
//! solvers in [`optim`], and [`eval`] runs the repeated 50/50 split protocol
//! scoring per-class F1. [`stats`] and [`report`] cover percent agreement,
//! Mann-Whitney comparisons and the aggregates over a published score table.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` deliberately rejects NaN

pub mod classifiers;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod optim;
pub mod report;
pub mod stats;

pub use error::{Error, Result};
