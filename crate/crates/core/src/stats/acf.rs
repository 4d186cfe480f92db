use crate::error::{Error, Result};

fn check(series: &[f64], max_lag: usize) -> Result<()> {
    if max_lag == 0 || series.len() <= max_lag {
        return Err(Error::InsufficientData {
            what: "autocorrelation (length > max_lag >= 1)",
            needed: max_lag.max(1) + 1,
            got: series.len(),
        });
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("autocorrelation input"));
    }
    Ok(())
}

/// Biased sample autocorrelations `rho(0..=max_lag)`, with `rho(0) = 1`.
pub fn acf(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    check(series, max_lag)?;
    let m = super::mean(series);
    let dev: Vec<f64> = series.iter().map(|v| v - m).collect();
    let denom: f64 = dev.iter().map(|d| d * d).sum();
    if denom == 0.0 {
        return Err(Error::ZeroVariance("autocorrelation"));
    }
    Ok((0..=max_lag)
        .map(|k| {
            if k == 0 {
                1.0
            } else {
                dev.iter().zip(&dev[k..]).map(|(a, b)| a * b).sum::<f64>() / denom
            }
        })
        .collect())
}

/// Partial autocorrelations by the Durbin-Levinson recursion on [`acf`].
/// Index 0 holds 1 so lags line up with the ACF output.
pub fn pacf(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let rho = acf(series, max_lag)?;
    let mut out = vec![1.0];
    let mut phi: Vec<f64> = Vec::with_capacity(max_lag);
    for k in 1..=max_lag {
        let num = rho[k] - (1..k).map(|j| phi[j - 1] * rho[k - j]).sum::<f64>();
        let den = 1.0 - (1..k).map(|j| phi[j - 1] * rho[j]).sum::<f64>();
        let phi_kk = num / den;
        if !phi_kk.is_finite() || phi_kk.abs() > 1.0 + 1e-10 {
            return Err(Error::NonConvergence {
                what: "Durbin-Levinson recursion",
                iterations: k,
                last_change: phi_kk,
            });
        }
        let prev = phi.clone();
        for j in 1..k {
            phi[j - 1] = prev[j - 1] - phi_kk * prev[k - j - 1];
        }
        phi.push(phi_kk);
        out.push(phi_kk.clamp(-1.0, 1.0));
    }
    Ok(out)
}

/// Approximate 95% band `±1.96/√n` for white-noise autocorrelations.
pub fn white_noise_band(n: usize) -> f64 {
    1.96 / (n as f64).sqrt()
}
