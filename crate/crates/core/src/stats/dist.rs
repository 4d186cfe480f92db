//! Survival functions for the normal, Student-t and chi-squared laws.
//!
//! Tails are evaluated directly from the regularized incomplete beta and
//! gamma functions (never as `1 - cdf`), so tiny p-values keep their
//! relative precision.

use statrs::function::{beta::beta_reg, erf::erfc, gamma::gamma_ur};

use crate::error::{Error, Result};

fn check_df(df: f64) -> Result<()> {
    if df.is_finite() && df > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("degrees of freedom must be positive, got {df}")))
    }
}

/// `P(Z > x)` for a standard normal `Z`.
pub fn norm_sf(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// `P(|T| > |t|)` for Student-t with `df` degrees of freedom.
pub fn t_two_sided(t: f64, df: f64) -> Result<f64> {
    check_df(df)?;
    if t.is_nan() {
        return Err(Error::NonFinite("t statistic"));
    }
    if t.is_infinite() {
        return Ok(0.0);
    }
    Ok(beta_reg(df / 2.0, 0.5, df / (df + t * t)).clamp(0.0, 1.0))
}

/// `P(T > x)` for Student-t with `df` degrees of freedom.
pub fn t_sf(x: f64, df: f64) -> Result<f64> {
    let tail = 0.5 * t_two_sided(x, df)?;
    Ok(if x >= 0.0 { tail } else { 1.0 - tail })
}

/// `P(X > x)` for chi-squared with `k` degrees of freedom.
pub fn chi2_sf(x: f64, k: f64) -> Result<f64> {
    check_df(k)?;
    if x.is_nan() {
        return Err(Error::NonFinite("chi-squared statistic"));
    }
    if x <= 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(gamma_ur(k / 2.0, x / 2.0).clamp(0.0, 1.0))
}
