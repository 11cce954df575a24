//! Multi-objective, frontier-seeking active learning over finite candidate
//! pools.
//!
//! The crate provides:
//!
//! - exact dominance, Pareto frontiers, recursive strata, and s-shells
//!   ([`pareto`]);
//! - a bagged-tree surrogate with per-output Gaussian predictive summaries
//!   ([`surrogate`]);
//! - dimensionally-homogeneous acquisition functions — uncertainty sampling
//!   by coefficients of variation, joint exceedance, hyperplane improvement,
//!   and Monte Carlo non-dominance — plus a random baseline
//!   ([`acquisition`]);
//! - candidate-improvement and scoped model-error metrics ([`metrics`]);
//! - synthetic pool generators and CSV ingestion ([`datasets`]);
//! - a retrospective simulation engine with seeded, schedule-independent
//!   ensembles ([`simulate`]);
//! - a batch CLI (`stratal`) driven by a declarative experiment config
//!   ([`config`], [`cli`]).

pub mod acquisition;
pub mod cli;
pub mod config;
pub mod datasets;
pub mod error;
pub mod matrix;
pub mod metrics;
pub mod pareto;
pub mod seeding;
pub mod simulate;
pub mod surrogate;

pub use error::{Error, Result};
