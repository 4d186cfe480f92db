use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::ols;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArModel {
    pub order: usize,
    pub intercept: f64,
    /// `phi_1..phi_p`, lag 1 first.
    pub coefficients: Vec<f64>,
    /// Standard errors of `coefficients`.
    pub standard_errors: Vec<f64>,
    /// Regression rows used in the fit.
    pub nobs: usize,
    /// True when the input was identically zero and no regression was run.
    pub degenerate: bool,
}

/// Minimum series length for an order-`p` fit.
pub(crate) fn min_length(order: usize) -> usize {
    (order + 10).max(10 * order)
}

/// Fits `r_t = c + Σ phi_i r_{t-i} + e_t` by least squares.
///
/// An all-zero series yields the zero model flagged `degenerate`; any other
/// collinear input (such as a nonzero constant) is a rank-deficiency error.
pub fn fit_ar(series: &[f64], order: usize) -> Result<ArModel> {
    if order == 0 {
        return Err(Error::InvalidParameter("AR order must be at least 1".into()));
    }
    let needed = min_length(order);
    if series.len() < needed {
        return Err(Error::InsufficientData {
            what: "AR fit",
            needed,
            got: series.len(),
        });
    }
    let nobs = series.len() - order;
    if series.iter().all(|&v| v == 0.0) {
        return Ok(ArModel {
            order,
            intercept: 0.0,
            coefficients: vec![0.0; order],
            standard_errors: vec![0.0; order],
            nobs,
            degenerate: true,
        });
    }
    let x = DMatrix::from_fn(nobs, order + 1, |r, c| {
        if c == 0 {
            1.0
        } else {
            series[order + r - c]
        }
    });
    let fit = ols(&x, &series[order..])?;
    Ok(ArModel {
        order,
        intercept: fit.coefficients[0],
        coefficients: fit.coefficients[1..].to_vec(),
        standard_errors: fit.standard_errors[1..].to_vec(),
        nobs,
        degenerate: fit.degenerate,
    })
}

impl ArModel {
    /// One-step-ahead mean given the history (most recent value last).
    pub fn forecast_next(&self, history: &[f64]) -> f64 {
        let n = history.len();
        debug_assert!(n >= self.order);
        self.intercept
            + self
                .coefficients
                .iter()
                .enumerate()
                .map(|(i, phi)| phi * history[n - 1 - i])
                .sum::<f64>()
    }

    /// In-sample residuals for `series[order..]`.
    pub fn residuals(&self, series: &[f64]) -> Vec<f64> {
        (self.order..series.len())
            .map(|t| series[t] - self.forecast_next(&series[..t]))
            .collect()
    }
}
