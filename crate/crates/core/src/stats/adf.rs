use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::dist::norm_sf;
use super::{is_constant, ols, TestResult, DEFAULT_ALPHA};
use crate::error::{Error, Result};

/// Deterministic terms in the test regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdfRegression {
    None,
    #[default]
    Constant,
    ConstantTrend,
}

impl std::str::FromStr for AdfRegression {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "n" | "none" => Ok(AdfRegression::None),
            "c" | "constant" => Ok(AdfRegression::Constant),
            "ct" | "constant-trend" | "constant_trend" => Ok(AdfRegression::ConstantTrend),
            _ => Err(Error::InvalidParameter(format!("unknown ADF regression {s:?} (expected n, c or ct)"))),
        }
    }
}

impl AdfRegression {
    fn n_det(self) -> usize {
        match self {
            AdfRegression::None => 0,
            AdfRegression::Constant => 1,
            AdfRegression::ConstantTrend => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdfOptions {
    pub regression: AdfRegression,
    /// Upper bound for AIC lag search; Schwert's rule when `None`.
    pub max_lag: Option<usize>,
    /// Skip the search and use exactly this many lagged differences.
    pub fixed_lag: Option<usize>,
    pub alpha: f64,
}

impl Default for AdfOptions {
    fn default() -> Self {
        Self {
            regression: AdfRegression::Constant,
            max_lag: None,
            fixed_lag: None,
            alpha: DEFAULT_ALPHA,
        }
    }
}

/// `floor(12 (n/100)^(1/4))`.
pub fn schwert_max_lag(n: usize) -> usize {
    (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

// MacKinnon (1994) response-surface coefficients for a single series
// (ascending powers of the statistic), as tabulated in statsmodels'
// `adfvalues.py`.
struct Surface {
    max: f64,
    min: f64,
    star: f64,
    small: [f64; 3],
    large: [f64; 4],
}

const SURFACE_NONE: Surface = Surface {
    max: f64::INFINITY,
    min: -19.04,
    star: -1.04,
    small: [0.6344, 1.2378, 0.032496],
    large: [0.4797, 0.93557, -0.06999, 0.033066],
};
const SURFACE_CONSTANT: Surface = Surface {
    max: 2.74,
    min: -18.83,
    star: -1.61,
    small: [2.1659, 1.4412, 0.038269],
    large: [1.7339, 0.93202, -0.12745, -0.010368],
};
const SURFACE_TREND: Surface = Surface {
    max: 0.7,
    min: -16.18,
    star: -2.89,
    small: [3.2512, 1.6047, 0.049588],
    large: [2.5261, 0.61654, -0.37956, -0.060285],
};

fn polyval(coef: &[f64], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Approximate asymptotic p-value of an ADF statistic, clamped to `[1e-20, 1]`.
pub(crate) fn mackinnon_p(stat: f64, regression: AdfRegression) -> f64 {
    let s = match regression {
        AdfRegression::None => &SURFACE_NONE,
        AdfRegression::Constant => &SURFACE_CONSTANT,
        AdfRegression::ConstantTrend => &SURFACE_TREND,
    };
    let p = if stat > s.max {
        1.0
    } else if stat < s.min {
        0.0
    } else {
        let z = if stat <= s.star {
            polyval(&s.small, stat)
        } else {
            polyval(&s.large, stat)
        };
        // Phi(z), written as an upper tail to keep precision for z << 0.
        norm_sf(-z)
    };
    p.clamp(1e-20, 1.0)
}

/// Regression rows for targets `dy[start..]` with `k` lagged differences.
fn design(y: &[f64], dy: &[f64], k: usize, start: usize, reg: AdfRegression) -> (DMatrix<f64>, Vec<f64>) {
    let det = reg.n_det();
    let rows = dy.len() - start;
    let x = DMatrix::from_fn(rows, det + 1 + k, |r, c| {
        let t = start + r;
        match c {
            c if c < det => {
                if c == 0 {
                    1.0
                } else {
                    (t + 1) as f64
                }
            }
            c if c == det => y[t],
            c => dy[t - (c - det)],
        }
    });
    (x, dy[start..].to_vec())
}

/// Augmented Dickey-Fuller unit-root test.
///
/// Regresses `Δy_t` on the deterministic terms, `y_{t-1}` and `k` lagged
/// differences; the statistic is the t-ratio of the `y_{t-1}` coefficient.
/// Without a fixed lag, `k` minimises AIC over `0..=max_lag` on a common
/// sample, and the chosen model is then refitted on all usable rows.
pub fn adf_test(series: &[f64], opts: &AdfOptions) -> Result<TestResult> {
    let n = series.len();
    if n < 20 {
        return Err(Error::InsufficientData {
            what: "ADF test",
            needed: 20,
            got: n,
        });
    }
    if is_constant(series) {
        return Err(Error::ZeroVariance("ADF test"));
    }
    let det = opts.regression.n_det();
    let dy: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();
    let fits = |k: usize| dy.len() > k && dy.len() - k >= det + 1 + k + 10;

    let lag = match opts.fixed_lag {
        Some(k) => {
            if !fits(k) {
                return Err(Error::InsufficientData {
                    what: "ADF test with fixed lag",
                    needed: 2 * k + det + 12,
                    got: n,
                });
            }
            k
        }
        None => {
            let mut max_lag = opts.max_lag.unwrap_or_else(|| schwert_max_lag(n));
            while max_lag > 0 && !fits(max_lag) {
                max_lag -= 1;
            }
            let mut best = (f64::INFINITY, 0);
            for k in 0..=max_lag {
                let (x, target) = design(series, &dy, k, max_lag, opts.regression);
                let aic = ols(&x, &target)?.aic();
                if aic < best.0 {
                    best = (aic, k);
                }
            }
            best.1
        }
    };

    let (x, target) = design(series, &dy, lag, lag, opts.regression);
    let fit = ols(&x, &target)?;
    let stat = fit.t_stats[det];
    if !stat.is_finite() {
        return Err(Error::NonFinite("ADF statistic"));
    }
    let p = mackinnon_p(stat, opts.regression);
    Ok(TestResult::new(stat, p, lag, fit.n, opts.alpha))
}
