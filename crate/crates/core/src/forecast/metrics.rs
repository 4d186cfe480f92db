use serde::{Deserialize, Serialize};

use super::rolling::RollingForecastResult;
use crate::error::{Error, Result};

/// Point and interval accuracy of a rolling forecast.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastMetrics {
    pub mse: f64,
    pub rmse: f64,
    pub mae: f64,
    /// Share of steps where `sign(forecast) == sign(actual)`; zero only matches zero.
    pub directional_accuracy: f64,
    /// Share of steps with `|actual - mean| <= sqrt(variance)`.
    pub hit_rate: f64,
    pub steps: usize,
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

pub fn evaluate(result: &RollingForecastResult) -> Result<ForecastMetrics> {
    let n = result.steps.len();
    if n == 0 {
        return Err(Error::InsufficientData {
            what: "forecast evaluation",
            needed: 1,
            got: 0,
        });
    }
    let (mut se, mut ae, mut dir, mut hit) = (0.0, 0.0, 0usize, 0usize);
    for s in &result.steps {
        let err = s.actual - s.forecast_mean;
        se += err * err;
        ae += err.abs();
        if sign(s.forecast_mean) == sign(s.actual) {
            dir += 1;
        }
        if err.abs() <= s.forecast_variance.sqrt() {
            hit += 1;
        }
    }
    let nf = n as f64;
    let mse = se / nf;
    Ok(ForecastMetrics {
        mse,
        rmse: mse.sqrt(),
        mae: ae / nf,
        directional_accuracy: dir as f64 / nf,
        hit_rate: hit as f64 / nf,
        steps: n,
    })
}
