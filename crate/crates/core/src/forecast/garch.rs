use serde::{Deserialize, Serialize};

use super::optim::{nelder_mead, NelderMeadOptions};
use crate::error::{Error, Result};
use crate::stats::sample_variance;

/// GARCH(1,1): `s2_t = omega + alpha e2_{t-1} + beta s2_{t-1}`, with
/// `s2_1 = init_variance`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GarchModel {
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
    pub init_variance: f64,
}

impl GarchModel {
    pub fn validate(&self) -> Result<()> {
        let ok = self.omega > 0.0
            && self.alpha >= 0.0
            && self.beta >= 0.0
            && self.alpha + self.beta < 1.0
            && self.init_variance > 0.0
            && [self.omega, self.alpha, self.beta, self.init_variance]
                .iter()
                .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "GARCH parameters violate omega > 0, alpha, beta >= 0, alpha + beta < 1: {self:?}"
            )))
        }
    }

    pub fn persistence(&self) -> f64 {
        self.alpha + self.beta
    }

    pub fn unconditional_variance(&self) -> f64 {
        self.omega / (1.0 - self.alpha - self.beta)
    }

    /// Conditional variances `s2_1..s2_n` for the given residuals.
    pub fn variance_path(&self, residuals: &[f64]) -> Vec<f64> {
        let Some((_, head)) = residuals.split_last() else {
            return Vec::new();
        };
        let mut s2 = self.init_variance;
        let mut out = Vec::with_capacity(residuals.len());
        out.push(s2);
        for e in head {
            s2 = self.omega + self.alpha * e * e + self.beta * s2;
            out.push(s2);
        }
        out
    }

    /// Variance forecast for the period after the last residual.
    pub fn forecast_variance(&self, residuals: &[f64]) -> f64 {
        match (residuals.last(), self.variance_path(residuals).last()) {
            (Some(e), Some(s2)) => self.omega + self.alpha * e * e + self.beta * s2,
            _ => self.init_variance,
        }
    }

    /// Unconstrained coordinates `(ln omega, logit(alpha + beta), logit(alpha / (alpha + beta)))`.
    pub fn to_unconstrained(&self) -> [f64; 3] {
        let s = self.alpha + self.beta;
        [self.omega.ln(), logit(s), logit(self.alpha / s)]
    }

    /// Inverse of [`to_unconstrained`](Self::to_unconstrained); always yields
    /// `alpha, beta >= 0` and `alpha + beta < 1` up to rounding.
    pub fn from_unconstrained(theta: &[f64], init_variance: f64) -> Self {
        let s = logistic(theta[1]);
        let f = logistic(theta[2]);
        Self {
            omega: theta[0].exp(),
            alpha: s * f,
            beta: s * (1.0 - f),
            init_variance,
        }
    }
}

fn logistic(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Gaussian negative log-likelihood `½ Σ [ln(2π s2_t) + e2_t / s2_t]`.
pub fn garch_nll(params: &GarchModel, residuals: &[f64]) -> Result<f64> {
    if residuals.is_empty() {
        return Err(Error::InsufficientData {
            what: "GARCH likelihood",
            needed: 1,
            got: 0,
        });
    }
    params.validate()?;
    let ln2pi = (2.0 * std::f64::consts::PI).ln();
    let mut s2 = params.init_variance;
    let mut total = 0.0;
    for (t, &e) in residuals.iter().enumerate() {
        if t > 0 {
            let prev = residuals[t - 1];
            s2 = params.omega + params.alpha * prev * prev + params.beta * s2;
        }
        if !(s2.is_finite() && s2 > 0.0) {
            return Err(Error::NonFinite("GARCH variance recursion"));
        }
        total += ln2pi + s2.ln() + e * e / s2;
    }
    let nll = 0.5 * total;
    if nll.is_finite() {
        Ok(nll)
    } else {
        Err(Error::NonFinite("GARCH likelihood"))
    }
}

/// How the first conditional variance is set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarianceInit {
    /// Sample variance of the residuals being fitted.
    #[default]
    SampleVariance,
    /// `omega / (1 - alpha - beta)` of each candidate.
    Unconditional,
}

impl std::str::FromStr for VarianceInit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sample-variance" | "sample" => Ok(VarianceInit::SampleVariance),
            "unconditional" => Ok(VarianceInit::Unconditional),
            _ => Err(Error::InvalidParameter(format!(
                "unknown variance init {s:?} (expected sample-variance or unconditional)"
            ))),
        }
    }
}

/// Starting `(alpha, beta)` pairs; `omega` starts at `var * (1 - alpha - beta)`.
pub const DEFAULT_GARCH_STARTS: [(f64, f64); 3] = [(0.05, 0.90), (0.10, 0.80), (0.20, 0.60)];

#[derive(Debug, Clone, PartialEq)]
pub struct GarchOptions {
    pub init: VarianceInit,
    pub starts: Vec<(f64, f64)>,
    pub optimizer: NelderMeadOptions,
    pub min_length: usize,
}

impl Default for GarchOptions {
    fn default() -> Self {
        Self {
            init: VarianceInit::SampleVariance,
            starts: DEFAULT_GARCH_STARTS.to_vec(),
            optimizer: NelderMeadOptions::default(),
            min_length: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarchFit {
    pub model: GarchModel,
    pub nll: f64,
    /// Simplex iterations of the winning start.
    pub iterations: usize,
    pub best_start: usize,
    pub converged_starts: usize,
}

/// Maximum-likelihood GARCH(1,1) by multi-start Nelder-Mead over the
/// unconstrained reparameterisation.
pub fn fit_garch(residuals: &[f64], opts: &GarchOptions) -> Result<GarchFit> {
    if residuals.len() < opts.min_length {
        return Err(Error::InsufficientData {
            what: "GARCH fit",
            needed: opts.min_length,
            got: residuals.len(),
        });
    }
    if residuals.iter().any(|e| !e.is_finite()) {
        return Err(Error::NonFinite("GARCH residuals"));
    }
    let var = sample_variance(residuals);
    if !(var > 0.0) {
        return Err(Error::ZeroVariance("GARCH fit"));
    }
    let build = |theta: &[f64]| {
        let m = GarchModel::from_unconstrained(theta, var);
        match opts.init {
            VarianceInit::SampleVariance => m,
            VarianceInit::Unconditional => GarchModel {
                init_variance: m.unconditional_variance(),
                ..m
            },
        }
    };
    let objective = |theta: &[f64]| garch_nll(&build(theta), residuals).unwrap_or(f64::INFINITY);

    let mut best: Option<(usize, super::optim::Minimum)> = None;
    let mut converged_starts = 0;
    let mut diagnostics = Vec::new();
    for (i, &(a, b)) in opts.starts.iter().enumerate() {
        let start = GarchModel {
            omega: var * (1.0 - a - b),
            alpha: a,
            beta: b,
            init_variance: var,
        };
        let m = nelder_mead(objective, &start.to_unconstrained(), &opts.optimizer);
        diagnostics.push(format!(
            "start {i}: nll={} iterations={} converged={}",
            m.value, m.iterations, m.converged
        ));
        if !m.converged || !m.value.is_finite() {
            continue;
        }
        converged_starts += 1;
        if best.as_ref().is_none_or(|(_, b)| m.value < b.value) {
            best = Some((i, m));
        }
    }
    let (best_start, m) = best.ok_or_else(|| Error::FitFailure(diagnostics.join("; ")))?;
    let model = build(&m.x);
    model.validate().map_err(|e| Error::FitFailure(e.to_string()))?;
    Ok(GarchFit {
        model,
        nll: m.value,
        iterations: m.iterations,
        best_start,
        converged_starts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forecast::sim::{simulate_garch, standard_normals};
    use proptest::prelude::*;

    #[test]
    fn collapses_to_iid_gaussian() {
        let e = [0.3, -1.2, 0.7, 0.05];
        let omega = 0.8;
        let m = GarchModel { omega, alpha: 0.0, beta: 0.0, init_variance: omega };
        let want: f64 = e
            .iter()
            .map(|x| 0.5 * ((2.0 * std::f64::consts::PI * omega).ln() + x * x / omega))
            .sum();
        assert!((garch_nll(&m, &e).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn three_step_hand_recursion() {
        let e = [0.1, -0.2, 0.1];
        let m = GarchModel { omega: 0.1, alpha: 0.2, beta: 0.3, init_variance: 0.02 };
        // s2_1 = 0.02
        // s2_2 = 0.1 + 0.2 * 0.01 + 0.3 * 0.02  = 0.108
        // s2_3 = 0.1 + 0.2 * 0.04 + 0.3 * 0.108 = 0.1404
        let s2 = [0.02, 0.108, 0.1404];
        let want: f64 = e
            .iter()
            .zip(s2)
            .map(|(x, v)| 0.5 * ((2.0 * std::f64::consts::PI * v).ln() + x * x / v))
            .sum();
        assert!((garch_nll(&m, &e).unwrap() - want).abs() < 1e-14);
        let path = m.variance_path(&e);
        for (a, b) in path.iter().zip(s2) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn scaling_identity() {
        let e = standard_normals(3, 200);
        let m = GarchModel { omega: 0.1, alpha: 0.15, beta: 0.7, init_variance: 0.9 };
        let e2: Vec<f64> = e.iter().map(|x| 2.0 * x).collect();
        let m2 = GarchModel { omega: 0.4, init_variance: 3.6, ..m };
        let shift = garch_nll(&m2, &e2).unwrap() - garch_nll(&m, &e).unwrap();
        assert!((shift - 200.0 * std::f64::consts::LN_2).abs() < 1e-9);
    }

    #[test]
    fn rejects_invalid() {
        let bad = GarchModel { omega: 0.1, alpha: 0.5, beta: 0.5, init_variance: 1.0 };
        assert!(garch_nll(&bad, &[0.1]).is_err());
        let ok = GarchModel { omega: 0.1, alpha: 0.1, beta: 0.5, init_variance: 1.0 };
        assert!(garch_nll(&ok, &[]).is_err());
        assert!(garch_nll(&ok, &[f64::NAN]).is_err());
        assert!(matches!(fit_garch(&[0.1; 20], &GarchOptions::default()), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn recovers_parameters() {
        let e = simulate_garch(2024, 5000, 0.05, 0.10, 0.85);
        let fit = fit_garch(&e, &GarchOptions::default()).unwrap();
        let m = fit.model;
        assert!((m.omega - 0.05).abs() <= 0.05, "{m:?}");
        assert!((m.alpha - 0.10).abs() <= 0.05, "{m:?}");
        assert!((m.beta - 0.85).abs() <= 0.08, "{m:?}");
        assert!(m.alpha + m.beta < 1.0);
    }

    #[test]
    fn iid_residuals_give_small_alpha() {
        let e = standard_normals(77, 2000);
        let fit = fit_garch(&e, &GarchOptions::default()).unwrap();
        let m = fit.model;
        assert!(m.alpha <= 0.05, "{m:?}");
        assert!((m.unconditional_variance() / sample_variance(&e) - 1.0).abs() < 0.2, "{m:?}");
    }

    #[test]
    fn unconditional_init_variant() {
        let e = simulate_garch(5, 800, 0.1, 0.1, 0.8);
        let opts = GarchOptions { init: VarianceInit::Unconditional, ..Default::default() };
        let m = fit_garch(&e, &opts).unwrap().model;
        assert!((m.init_variance - m.unconditional_variance()).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn reparameterisation_round_trip(u in -12.0f64..3.0, v1 in -6.0f64..6.0, v2 in -6.0f64..6.0) {
            let m = GarchModel::from_unconstrained(&[u, v1, v2], 1.0);
            prop_assert!(m.alpha >= 0.0 && m.beta >= 0.0 && m.alpha + m.beta < 1.0 && m.omega > 0.0);
            let back = m.to_unconstrained();
            for (a, b) in back.iter().zip([u, v1, v2]) {
                prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{a} vs {b}");
            }
            let again = GarchModel::from_unconstrained(&back, 1.0);
            prop_assert!((again.alpha - m.alpha).abs() <= 1e-12);
            prop_assert!((again.beta - m.beta).abs() <= 1e-12);
        }

        #[test]
        fn fitted_models_are_stationary(seed in 0u64..1000) {
            let e = standard_normals(seed, 120);
            if let Ok(fit) = fit_garch(&e, &GarchOptions::default()) {
                prop_assert!(fit.model.alpha + fit.model.beta < 1.0);
            }
        }
    }
}
