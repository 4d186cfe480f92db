use nalgebra::DMatrix;

use super::dist::chi2_sf;
use super::{is_constant, ols, TestResult};
use crate::error::{Error, Result};

/// Engle's ARCH-LM test: regress `e²_t` on a constant and `lags` of its own
/// lags; `n·R²` is asymptotically chi-squared with `lags` degrees of freedom.
///
/// Constant squared residuals give statistic 0 and p-value 1.
pub fn arch_lm_test(residuals: &[f64], lags: usize, alpha: f64) -> Result<TestResult> {
    if lags == 0 {
        return Err(Error::InvalidParameter("ARCH-LM needs at least one lag".into()));
    }
    if residuals.len() <= lags + 1 {
        return Err(Error::InsufficientData {
            what: "ARCH-LM test",
            needed: lags + 2,
            got: residuals.len(),
        });
    }
    let e2: Vec<f64> = residuals.iter().map(|e| e * e).collect();
    let nobs = e2.len() - lags;
    if is_constant(&e2) {
        return Ok(TestResult::new(0.0, 1.0, lags, nobs, alpha));
    }
    let x = DMatrix::from_fn(nobs, lags + 1, |r, c| if c == 0 { 1.0 } else { e2[lags + r - c] });
    let fit = ols(&x, &e2[lags..])?;
    let stat = nobs as f64 * fit.r_squared;
    let p = chi2_sf(stat, lags as f64)?;
    Ok(TestResult::new(stat, p, lags, nobs, alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::Conclusion;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn garch(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (omega, alpha, beta): (f64, f64, f64) = (0.05, 0.1, 0.85);
        let mut var = omega / (1.0 - alpha - beta);
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let z: f64 = StandardNormal.sample(&mut rng);
            let e = var.sqrt() * z;
            out.push(e);
            var = omega + alpha * e * e + beta * var;
        }
        out
    }

    #[test]
    fn degenerate_constant_squares() {
        let x: Vec<f64> = (0..30).map(|i| if i % 2 == 0 { 1.5 } else { -1.5 }).collect();
        let r = arch_lm_test(&x, 5, 0.05).unwrap();
        assert_eq!((r.statistic, r.p_value), (0.0, 1.0));
        assert_eq!(r.conclusion, Conclusion::FailToReject);
    }

    #[test]
    fn size_and_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut false_rejects = 0;
        let mut true_rejects = 0;
        for seed in 0..30 {
            let iid: Vec<f64> = (0..1000).map(|_| StandardNormal.sample(&mut rng)).collect();
            if arch_lm_test(&iid, 5, 0.05).unwrap().conclusion == Conclusion::RejectH0 {
                false_rejects += 1;
            }
            if arch_lm_test(&garch(seed, 1000), 5, 0.05).unwrap().conclusion == Conclusion::RejectH0 {
                true_rejects += 1;
            }
        }
        assert!(false_rejects <= 4, "{false_rejects}");
        assert!(true_rejects >= 26, "{true_rejects}");
    }

    #[test]
    fn scale_invariant_and_errors() {
        let e = garch(4, 400);
        let a = arch_lm_test(&e, 5, 0.05).unwrap();
        let scaled: Vec<f64> = e.iter().map(|v| v * 0.01).collect();
        let b = arch_lm_test(&scaled, 5, 0.05).unwrap();
        assert!((a.statistic - b.statistic).abs() < 1e-9 * a.statistic);
        assert!(arch_lm_test(&e[..6], 5, 0.05).is_err());
        assert!(arch_lm_test(&e, 0, 0.05).is_err());
    }
}
