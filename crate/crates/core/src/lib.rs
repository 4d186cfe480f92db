//! Quantitative toolkit for emissions-allowance markets.
//!
//! The crate covers four analysis stages that share one set of domain types:
//!
//! * [`ingest`]: transfer and spot-price CSV parsing, compliance-flow
//!   filtering, EUR valuation and weekly aggregation.
//! * [`stats`] and [`forecast`]: unit-root and ARCH-LM tests, and a rolling
//!   AR + GARCH(1,1) one-step-ahead backtest.
//! * [`network`]: annual registry trade networks with self-loops and their
//!   eigenvector centrality.
//! * [`elasticity`]: log-log price/quantity regressions by OLS and LAD.
//!
//! Data-parallel loops (rolling steps, bootstrap replicates, per-year and
//! per-cell work) run on rayon when the `parallel` feature is enabled, which
//! it is by default. Results are identical either way.

pub mod elasticity;
pub mod error;
pub mod forecast;
pub mod ingest;
pub mod model;
pub mod network;
pub mod par;
pub mod stats;

pub use error::{Error, ErrorKind, Result};
pub use nalgebra;
