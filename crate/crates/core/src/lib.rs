//! Pool-based sequential active learning for regression.
//!
//! The crate bundles the selection strategies (random, query-by-committee,
//! expected model change, greedy sampling, the outlier-filtered EMCM variant
//! and the cluster-based representativeness/diversity family), the ridge and
//! k-means building blocks they rely on, and a repeated-split benchmark
//! harness with rank tables and post-hoc statistics.

pub mod cli;
pub mod clustering;
pub mod data;
pub mod error;
pub mod evaluation;
pub mod regression;
pub mod stats;
pub mod strategies;
pub mod synthetic;

pub use error::{Error, Result};
