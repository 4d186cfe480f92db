use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::dist::t_two_sided;
use crate::error::{Error, Result};

/// Relative tolerance for declaring a column dependent, against the largest
/// column norm.
const RANK_TOL: f64 = 1e-10;

/// Least-squares fit with classical (homoskedastic) inference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub t_stats: Vec<f64>,
    /// Two-sided Student-t p-values with `df_resid` degrees of freedom.
    pub p_values: Vec<f64>,
    pub residuals: Vec<f64>,
    pub r_squared: f64,
    pub n: usize,
    pub df_resid: usize,
    /// Sum of squared residuals.
    pub ssr: f64,
    /// Residual variance `ssr / df_resid`.
    pub sigma2: f64,
    /// Set when the residual variance is zero and inference is degenerate.
    pub degenerate: bool,
}

impl OlsFit {
    /// Gaussian AIC up to an additive constant: `n ln(ssr / n) + 2k`.
    pub fn aic(&self) -> f64 {
        let n = self.n as f64;
        n * (self.ssr / n).ln() + 2.0 * self.coefficients.len() as f64
    }
}

/// Ordinary least squares of `y` on the columns of `x` via Householder QR.
///
/// An intercept, when wanted, must be supplied as a column of ones. The
/// reported `r_squared` is centred when such a constant column exists.
pub fn ols(x: &DMatrix<f64>, y: &[f64]) -> Result<OlsFit> {
    let (n, k) = x.shape();
    if y.len() != n {
        return Err(Error::InvalidParameter(format!(
            "design has {n} rows but response has {} values",
            y.len()
        )));
    }
    if k == 0 || n <= k {
        return Err(Error::InsufficientData {
            what: "least squares (observations > regressors)",
            needed: k + 1,
            got: n,
        });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("least squares input"));
    }

    let max_norm = x.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    let qr = x.clone().qr();
    let r = qr.r();
    let rank = (0..k).filter(|&i| r[(i, i)].abs() > RANK_TOL * max_norm).count();
    if rank < k || max_norm == 0.0 {
        return Err(Error::RankDeficient { rank, cols: k });
    }

    let yv = DVector::from_column_slice(y);
    let qty = qr.q().transpose() * &yv;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or(Error::RankDeficient { rank, cols: k })?;
    let resid = &yv - x * &beta;
    let ssr = resid.norm_squared();
    let df_resid = n - k;
    let sigma2 = ssr / df_resid as f64;

    let yy = yv.norm_squared();
    let degenerate = ssr <= 1e-24 * yy;

    let has_intercept = x
        .column_iter()
        .any(|c| c[0] != 0.0 && c.iter().all(|&v| v == c[0]));
    let tss = if has_intercept {
        let m = yv.mean();
        yv.iter().map(|v| (v - m) * (v - m)).sum::<f64>()
    } else {
        yy
    };
    let r_squared = if tss > 0.0 && !degenerate {
        (1.0 - ssr / tss).clamp(0.0, 1.0)
    } else if tss > 0.0 {
        1.0
    } else {
        0.0
    };

    // (X'X)^-1 = R^-1 R^-T
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or(Error::RankDeficient { rank, cols: k })?;
    let coefficients: Vec<f64> = beta.iter().copied().collect();
    let scale = coefficients.iter().fold(1.0_f64, |m, b| m.max(b.abs()));

    let mut standard_errors = Vec::with_capacity(k);
    let mut t_stats = Vec::with_capacity(k);
    let mut p_values = Vec::with_capacity(k);
    for (j, &b) in coefficients.iter().enumerate() {
        let var = r_inv.row(j).norm_squared();
        if degenerate {
            standard_errors.push(0.0);
            if b.abs() <= 1e-10 * scale {
                t_stats.push(0.0);
                p_values.push(1.0);
            } else {
                t_stats.push(b.signum() * f64::INFINITY);
                p_values.push(0.0);
            }
        } else {
            let se = (sigma2 * var).sqrt();
            let t = b / se;
            standard_errors.push(se);
            t_stats.push(t);
            p_values.push(t_two_sided(t, df_resid as f64)?);
        }
    }

    Ok(OlsFit {
        coefficients,
        standard_errors,
        t_stats,
        p_values,
        residuals: resid.iter().copied().collect(),
        r_squared,
        n,
        df_resid,
        ssr,
        sigma2,
        degenerate,
    })
}
