use serde::{Deserialize, Serialize};

use super::ar::fit_ar;
use super::garch::{fit_garch, GarchModel, GarchOptions};
use crate::error::{Error, Result};
use crate::model::{IsoWeek, ReturnSeries};
use crate::par;
use crate::stats::sample_variance;

#[derive(Debug, Clone, PartialEq)]
pub struct RollingOptions {
    /// Training window length in weeks.
    pub window: usize,
    pub ar_order: usize,
    pub garch: GarchOptions,
}

impl Default for RollingOptions {
    fn default() -> Self {
        Self {
            window: 104,
            ar_order: 3,
            garch: GarchOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastStep {
    pub week: IsoWeek,
    pub forecast_mean: f64,
    pub forecast_variance: f64,
    pub actual: f64,
    /// The GARCH fit failed and the variance is the window residual variance.
    pub flagged: bool,
    pub garch: Option<GarchModel>,
}

impl ForecastStep {
    /// `mean ± one standard deviation`.
    pub fn band(&self) -> (f64, f64) {
        let sd = self.forecast_variance.sqrt();
        (self.forecast_mean - sd, self.forecast_mean + sd)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingForecastResult {
    pub window: usize,
    pub ar_order: usize,
    pub steps: Vec<ForecastStep>,
}

impl RollingForecastResult {
    pub fn flagged_steps(&self) -> usize {
        self.steps.iter().filter(|s| s.flagged).count()
    }
}

/// One-step-ahead rolling backtest.
///
/// For each target `t >= window`, an AR model is fitted to the preceding
/// `window` returns and gives the mean forecast; a GARCH(1,1) fitted to that
/// window's AR residuals gives the variance forecast
/// `omega + alpha e2_last + beta s2_last`. Steps are independent and run in
/// parallel; output order always follows the series.
pub fn rolling_forecast(series: &ReturnSeries, opts: &RollingOptions) -> Result<RollingForecastResult> {
    let values = series.values();
    if opts.window < 50 {
        return Err(Error::InvalidParameter(format!(
            "rolling window must be at least 50, got {}",
            opts.window
        )));
    }
    if values.len() <= opts.window {
        return Err(Error::InsufficientData {
            what: "rolling forecast (series longer than window)",
            needed: opts.window + 1,
            got: values.len(),
        });
    }
    let steps = par::map_range(values.len() - opts.window, |i| {
        let t = opts.window + i;
        forecast_step(&values[t - opts.window..t], values[t], series.points[t].week, opts)
    });
    Ok(RollingForecastResult {
        window: opts.window,
        ar_order: opts.ar_order,
        steps: steps.into_iter().collect::<Result<_>>()?,
    })
}

fn forecast_step(train: &[f64], actual: f64, week: IsoWeek, opts: &RollingOptions) -> Result<ForecastStep> {
    let ar = fit_ar(train, opts.ar_order)?;
    let forecast_mean = ar.forecast_next(train);
    let resid = ar.residuals(train);
    let (forecast_variance, garch, flagged) = match fit_garch(&resid, &opts.garch) {
        Ok(fit) => (fit.model.forecast_variance(&resid), Some(fit.model), false),
        Err(_) => (sample_variance(&resid), None, true),
    };
    if !(forecast_variance.is_finite() && forecast_variance > 0.0) {
        return Err(Error::NonFinite("forecast variance"));
    }
    Ok(ForecastStep {
        week,
        forecast_mean,
        forecast_variance,
        actual,
        flagged,
        garch,
    })
}
