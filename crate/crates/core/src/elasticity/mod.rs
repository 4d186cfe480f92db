//! Log-log price elasticities of bilateral allowance flows, by period, with
//! OLS and LAD fits.

mod graph;
pub mod lad;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Dataset, SpotLookup, DEFAULT_MAX_PRICE_GAP_DAYS};
use crate::model::{PeriodSegmentation, RegistryCode};
use crate::par;
use crate::stats::{dist::norm_sf, ols};

pub use graph::elasticity_graph;
pub use lad::{lad_fit, LadFit};

/// One day of flow between an ordered registry pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowObservation {
    pub date: NaiveDate,
    pub from: RegistryCode,
    pub to: RegistryCode,
    pub log_q: f64,
    pub log_p: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DailyAggregation {
    #[default]
    Sum,
    Mean,
}

impl FromStr for DailyAggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sum" => Ok(Self::Sum),
            "mean" => Ok(Self::Mean),
            _ => Err(Error::InvalidParameter(format!("unknown daily aggregation {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Method {
    Ols,
    Lad,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Ols => "OLS",
            Method::Lad => "LAD",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ols" => Ok(Method::Ols),
            "lad" => Ok(Method::Lad),
            _ => Err(Error::InvalidParameter(format!("unknown method {s:?} (expected ols or lad)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElasticityOptions {
    pub min_n: usize,
    pub bootstrap_reps: usize,
    pub seed: u64,
    /// Significance level for the `significant` flag.
    pub alpha: f64,
    pub aggregation: DailyAggregation,
    pub max_gap_days: i64,
}

impl Default for ElasticityOptions {
    fn default() -> Self {
        Self {
            min_n: 30,
            bootstrap_reps: 999,
            seed: 42,
            alpha: 0.05,
            aggregation: DailyAggregation::Sum,
            max_gap_days: DEFAULT_MAX_PRICE_GAP_DAYS,
        }
    }
}

/// Fitted `log q = beta0 + beta1 log p` for one pair, period and method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElasticityEstimate {
    pub from: RegistryCode,
    pub to: RegistryCode,
    pub period: String,
    pub method: Method,
    pub beta0: f64,
    pub beta1: f64,
    pub se0: f64,
    pub se1: f64,
    pub p0: f64,
    pub p1: f64,
    pub n: usize,
    pub significant: bool,
    /// LAD only: bootstrap replicates that were usable.
    pub bootstrap_used: Option<usize>,
}

/// Daily flows from `from` to `to` within the labelled period, paired with
/// the forward-filled secondary spot price. Days without flow or without a
/// usable price are omitted.
pub fn build_flows(
    ds: &Dataset,
    from: &RegistryCode,
    to: &RegistryCode,
    seg: &PeriodSegmentation,
    period: &str,
    opts: &ElasticityOptions,
) -> Result<Vec<FlowObservation>> {
    let target = seg
        .period(period)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown period {period:?}")))?
        .index;
    let lookup = SpotLookup::new(&ds.prices, opts.max_gap_days);
    Ok(flows_with(ds, from, to, seg, target, &lookup, opts.aggregation))
}

fn flows_with(
    ds: &Dataset,
    from: &RegistryCode,
    to: &RegistryCode,
    seg: &PeriodSegmentation,
    period_index: usize,
    lookup: &SpotLookup,
    aggregation: DailyAggregation,
) -> Vec<FlowObservation> {
    let mut days: BTreeMap<NaiveDate, (u64, usize)> = BTreeMap::new();
    for t in &ds.transfers {
        if &t.from_registry == from
            && &t.to_registry == to
            && t.quantity > 0
            && seg.period_of(t.date).is_ok_and(|p| p.index == period_index)
        {
            let d = days.entry(t.date).or_insert((0, 0));
            d.0 += t.quantity;
            d.1 += 1;
        }
    }
    days.into_iter()
        .filter_map(|(date, (total, count))| {
            let price = lookup.price_on(date).filter(|p| *p > 0.0)?;
            let q = match aggregation {
                DailyAggregation::Sum => total as f64,
                DailyAggregation::Mean => total as f64 / count as f64,
            };
            Some(FlowObservation {
                date,
                from: from.clone(),
                to: to.clone(),
                log_q: q.ln(),
                log_p: price.ln(),
            })
        })
        .collect()
}

fn check_sample(obs: &[FlowObservation], min_n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if obs.len() < min_n.max(3) {
        return Err(Error::InsufficientData {
            what: "elasticity regression",
            needed: min_n.max(3),
            got: obs.len(),
        });
    }
    let x: Vec<f64> = obs.iter().map(|o| o.log_p).collect();
    if x.windows(2).all(|w| w[0] == w[1]) {
        return Err(Error::ZeroVariance("log price"));
    }
    Ok((x, obs.iter().map(|o| o.log_q).collect()))
}

fn estimate(
    obs: &[FlowObservation],
    period: &str,
    method: Method,
    coef: [f64; 2],
    se: [f64; 2],
    p: [f64; 2],
    alpha: f64,
) -> ElasticityEstimate {
    ElasticityEstimate {
        from: obs[0].from.clone(),
        to: obs[0].to.clone(),
        period: period.to_owned(),
        method,
        beta0: coef[0],
        beta1: coef[1],
        se0: se[0],
        se1: se[1],
        p0: p[0],
        p1: p[1],
        n: obs.len(),
        significant: p[1] < alpha,
        bootstrap_used: None,
    }
}

/// OLS of `log_q` on `(1, log_p)` with classical t-test p-values.
pub fn fit_ols_loglog(obs: &[FlowObservation], period: &str, opts: &ElasticityOptions) -> Result<ElasticityEstimate> {
    let (x, y) = check_sample(obs, opts.min_n)?;
    let design = DMatrix::from_fn(x.len(), 2, |i, j| if j == 0 { 1.0 } else { x[i] });
    let fit = ols(&design, &y)?;
    Ok(estimate(
        obs,
        period,
        Method::Ols,
        [fit.coefficients[0], fit.coefficients[1]],
        [fit.standard_errors[0], fit.standard_errors[1]],
        [fit.p_values[0], fit.p_values[1]],
        opts.alpha,
    ))
}

/// Point estimate and nonparametric bootstrap inference for LAD.
#[derive(Debug, Clone, PartialEq)]
pub struct LadInference {
    pub fit: LadFit,
    pub se: [f64; 2],
    pub p: [f64; 2],
    pub used: usize,
}

/// LAD fit of `y` on `x` with bootstrap standard errors.
///
/// All resample indices are drawn up front from one ChaCha8 stream seeded
/// with `seed`, so replicates can run in any order. Replicates run on the
/// descent solver; resamples whose abscissae are all equal are skipped.
/// p-values use the normal approximation `2 * P(Z > |b / se|)`.
pub fn lad_bootstrap(x: &[f64], y: &[f64], reps: usize, seed: u64) -> Result<LadInference> {
    let fit = lad_fit(x, y)?;
    let n = x.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<Vec<usize>> = (0..reps)
        .map(|_| (0..n).map(|_| rng.random_range(0..n)).collect())
        .collect();
    let replicates: Vec<[f64; 2]> = par::map_slice(&draws, |idx| {
        let bx: Vec<f64> = idx.iter().map(|&i| x[i]).collect();
        let by: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
        lad::lad_descent(&bx, &by).ok().map(|f| [f.intercept, f.slope])
    })
    .into_iter()
    .flatten()
    .collect();
    if replicates.len() < 2 {
        return Err(Error::FitFailure(format!(
            "only {} of {reps} bootstrap resamples were usable",
            replicates.len()
        )));
    }
    let mut se = [0.0; 2];
    let mut p = [0.0; 2];
    let point = [fit.intercept, fit.slope];
    for k in 0..2 {
        let vals: Vec<f64> = replicates.iter().map(|r| r[k]).collect();
        se[k] = crate::stats::sample_variance(&vals).sqrt();
        p[k] = normal_p(point[k], se[k]);
    }
    Ok(LadInference {
        fit,
        se,
        p,
        used: replicates.len(),
    })
}

fn normal_p(b: f64, se: f64) -> f64 {
    if se > 0.0 {
        (2.0 * norm_sf((b / se).abs())).min(1.0)
    } else if b == 0.0 {
        1.0
    } else {
        0.0
    }
}

pub fn fit_lad_loglog(obs: &[FlowObservation], period: &str, opts: &ElasticityOptions) -> Result<ElasticityEstimate> {
    let (x, y) = check_sample(obs, opts.min_n)?;
    let inf = lad_bootstrap(&x, &y, opts.bootstrap_reps, opts.seed)?;
    Ok(ElasticityEstimate {
        bootstrap_used: Some(inf.used),
        ..estimate(
            obs,
            period,
            Method::Lad,
            [inf.fit.intercept, inf.fit.slope],
            inf.se,
            inf.p,
            opts.alpha,
        )
    })
}

/// Significance stars: `*` p < 0.05, `**` p < 0.01, `***` p < 0.001.
pub fn stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub from: RegistryCode,
    pub to: RegistryCode,
    pub period: String,
    pub method: Method,
    pub estimate: Option<ElasticityEstimate>,
    /// Why the cell has no estimate.
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElasticityReport {
    pub rows: Vec<ReportRow>,
}

impl ElasticityReport {
    pub fn estimates(&self) -> impl Iterator<Item = &ElasticityEstimate> {
        self.rows.iter().filter_map(|r| r.estimate.as_ref())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("from,to,period,method,beta0,se0,p0,stars0,beta1,se1,p1,stars1,n,reason\n");
        for r in &self.rows {
            match &r.estimate {
                Some(e) => out.push_str(&format!(
                    "{},{},{},{},{:?},{:?},{:?},{},{:?},{:?},{:?},{},{},\n",
                    r.from,
                    r.to,
                    r.period,
                    r.method,
                    e.beta0,
                    e.se0,
                    e.p0,
                    stars(e.p0),
                    e.beta1,
                    e.se1,
                    e.p1,
                    stars(e.p1),
                    e.n
                )),
                None => out.push_str(&format!(
                    "{},{},{},{},,,,,,,,,,{}\n",
                    r.from,
                    r.to,
                    r.period,
                    r.method,
                    csv_field(r.reason.as_deref().unwrap_or(""))
                )),
            }
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Every (from, to, period, method) cell over `registries`, ordered by
/// source code, destination code, period and method. Cells that cannot be
/// fitted carry the reason instead of an estimate.
pub fn elasticity_report(
    ds: &Dataset,
    seg: &PeriodSegmentation,
    registries: &[RegistryCode],
    methods: &[Method],
    opts: &ElasticityOptions,
) -> ElasticityReport {
    let mut codes = registries.to_vec();
    codes.sort();
    codes.dedup();
    let mut methods = methods.to_vec();
    methods.sort();
    methods.dedup();
    let lookup = SpotLookup::new(&ds.prices, opts.max_gap_days);
    let mut cells = Vec::new();
    for from in &codes {
        for to in &codes {
            for period in seg.periods() {
                cells.push((from, to, period));
            }
        }
    }
    let rows = par::map_slice(&cells, |&(from, to, period)| {
        let obs = flows_with(ds, from, to, seg, period.index, &lookup, opts.aggregation);
        methods
            .iter()
            .map(|&method| {
                let fitted = match method {
                    Method::Ols => fit_ols_loglog(&obs, &period.label, opts),
                    Method::Lad => fit_lad_loglog(&obs, &period.label, opts),
                };
                ReportRow {
                    from: from.clone(),
                    to: to.clone(),
                    period: period.label.clone(),
                    method,
                    reason: fitted.as_ref().err().map(|e| e.to_string()),
                    estimate: fitted.ok(),
                }
            })
            .collect::<Vec<_>>()
    });
    ElasticityReport {
        rows: rows.into_iter().flatten().collect(),
    }
}

#[cfg(test)]
mod tests;
