//! Statistical building blocks: tail probabilities, least squares with
//! classical inference, sample autocorrelations, and the ADF and ARCH-LM
//! hypothesis tests.

mod acf;
mod adf;
mod arch;
pub mod dist;
mod ols;

use serde::{Deserialize, Serialize};

pub use acf::{acf, pacf, white_noise_band};
pub use adf::{adf_test, schwert_max_lag, AdfOptions, AdfRegression};
pub use arch::arch_lm_test;
pub use ols::{ols, OlsFit};

/// Default significance level for test conclusions.
pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Conclusion {
    RejectH0,
    FailToReject,
}

impl Conclusion {
    pub fn from_p(p_value: f64, alpha: f64) -> Self {
        if p_value < alpha {
            Conclusion::RejectH0
        } else {
            Conclusion::FailToReject
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub lags_used: usize,
    /// Observations in the test regression.
    pub nobs: usize,
    pub alpha: f64,
    pub conclusion: Conclusion,
}

impl TestResult {
    pub(crate) fn new(statistic: f64, p_value: f64, lags_used: usize, nobs: usize, alpha: f64) -> Self {
        Self {
            statistic,
            p_value,
            lags_used,
            nobs,
            alpha,
            conclusion: Conclusion::from_p(p_value, alpha),
        }
    }
}

pub(crate) fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample variance with `n - 1` denominator.
pub(crate) fn sample_variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

pub(crate) fn is_constant(x: &[f64]) -> bool {
    x.windows(2).all(|w| w[0] == w[1])
}
