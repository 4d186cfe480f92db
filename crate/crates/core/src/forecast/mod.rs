//! Rolling two-stage return forecasting: an AR(p) conditional mean fitted by
//! least squares and a GARCH(1,1) conditional variance fitted by Gaussian
//! maximum likelihood, both refitted at every step.

mod ar;
mod garch;
mod metrics;
mod optim;
mod rolling;
pub mod sim;

pub use ar::{fit_ar, ArModel};
pub use garch::{
    fit_garch, garch_nll, GarchFit, GarchModel, GarchOptions, VarianceInit, DEFAULT_GARCH_STARTS,
};
pub use metrics::{evaluate, ForecastMetrics};
pub use optim::{nelder_mead, Minimum, NelderMeadOptions};
pub use rolling::{rolling_forecast, ForecastStep, RollingForecastResult, RollingOptions};
