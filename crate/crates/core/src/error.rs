use std::path::PathBuf;

use chrono::NaiveDate;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure category, used by front-ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad, missing or insufficient input data.
    Data,
    /// A numerical routine could not produce a valid answer.
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{source_name}: header does not match schema, missing column `{column}`")]
    Schema { source_name: String, column: String },

    #[error("{source_name}: row {row}: {message}")]
    MalformedRow {
        source_name: String,
        row: usize,
        message: String,
    },

    #[error("csv error in {source_name}: {message}")]
    Csv { source_name: String, message: String },

    #[error("invalid registry code `{0}`: expected two uppercase ASCII letters")]
    InvalidRegistry(String),

    #[error("unknown account class `{0}`")]
    InvalidAccountClass(String),

    #[error("unknown market `{0}`")]
    InvalidMarket(String),

    #[error("date {date} lies outside the study window [{start}, {end}]")]
    OutsideWindow {
        date: NaiveDate,
        start: NaiveDate,
        end: NaiveDate,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("insufficient data for {what}: need {needed}, got {got}")]
    InsufficientData {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("{0}: series has zero variance")]
    ZeroVariance(&'static str),

    #[error("design matrix is rank deficient (rank {rank} < {cols} columns)")]
    RankDeficient { rank: usize, cols: usize },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("{what} did not converge after {iterations} iterations (last change {last_change:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        last_change: f64,
    },

    #[error("GARCH fit failed on every start: {0}")]
    FitFailure(String),

    #[error("no valued transfers in {year}")]
    EmptyNetwork { year: i32 },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::ZeroVariance(_)
            | Error::RankDeficient { .. }
            | Error::NonFinite(_)
            | Error::NonConvergence { .. }
            | Error::FitFailure(_) => ErrorKind::Numerical,
            _ => ErrorKind::Data,
        }
    }
}
