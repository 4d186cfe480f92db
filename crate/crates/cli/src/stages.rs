//! One function per subcommand. Each reads the shared [`Context`] and adds
//! its outputs to the artifact buffer.

use std::fmt::Write as _;
use std::io::Write as _;

use serde::Serialize;

use etsmarket_core::elasticity::{elasticity_graph, elasticity_report, ElasticityOptions, ElasticityReport};
use etsmarket_core::forecast::{evaluate, rolling_forecast, GarchOptions, RollingOptions};
use etsmarket_core::ingest::{
    aggregate_weekly, enrich_values, filter_compliance_flows, log_returns, parse_prices, parse_transactions,
    summarize_flows, Dataset, FlowFilter, ParseMode, ParseOptions, ParseReport, SourceInfo,
};
use etsmarket_core::model::{ReturnSeries, WeeklyPriceSeries};
use etsmarket_core::network::{
    build_annual_network, centrality_timeseries, export_network, CentralityOptions,
};
use etsmarket_core::stats::{acf, adf_test, arch_lm_test, pacf, white_noise_band, AdfOptions, DEFAULT_ALPHA};
use etsmarket_core::Error;

use crate::artifacts::Artifacts;
use crate::config::{OutputFormat, RunConfig};
use crate::CliError;

/// Parsed inputs plus the filtered, valued transfer set.
pub struct Context {
    pub cfg: RunConfig,
    pub reports: Vec<ParseReport>,
    pub raw: Dataset,
    pub flows: Dataset,
}

impl Context {
    pub fn load(cfg: RunConfig) -> Result<Self, CliError> {
        let opts = ParseOptions {
            mode: if cfg.strict { ParseMode::Strict } else { ParseMode::Lenient },
            ..Default::default()
        };
        let mut reports = Vec::new();
        let mut provenance = Vec::new();
        let transfers = match &cfg.transactions {
            Some(path) => {
                let (t, r) = parse_transactions(path, &opts)?;
                provenance.push(SourceInfo {
                    path: r.source.clone(),
                    rows: r.rows,
                });
                reports.push(r);
                t
            }
            None => Vec::new(),
        };
        let prices = match &cfg.prices {
            Some(path) => {
                let (p, r) = parse_prices(path, &opts)?;
                provenance.push(SourceInfo {
                    path: r.source.clone(),
                    rows: r.rows,
                });
                reports.push(r);
                p
            }
            None => Vec::new(),
        };
        for r in &reports {
            for issue in &r.rejected {
                eprintln!("warning: {} line {}: {}", r.source, issue.row, issue.message);
            }
        }
        let raw = Dataset::new(transfers, prices, provenance)?;
        let filter = FlowFilter {
            include_oha_oha: cfg.include_oha_oha,
            start: cfg.start,
            end: cfg.end,
        };
        let mut flows = enrich_values(&filter_compliance_flows(&raw, &filter), cfg.max_price_gap);
        flows.prices.retain(|p| p.date >= cfg.start && p.date <= cfg.end);
        if flows.unvalued() > 0 {
            eprintln!(
                "warning: {} transfers have no spot price within {} days and are left unvalued",
                flows.unvalued(),
                cfg.max_price_gap
            );
        }
        Ok(Self {
            cfg,
            reports,
            raw,
            flows,
        })
    }

    fn require_transactions(&self) -> Result<(), CliError> {
        match self.cfg.transactions {
            Some(_) => Ok(()),
            None => Err(CliError::Usage("this command needs --transactions".into())),
        }
    }

    fn require_prices(&self) -> Result<(), CliError> {
        match self.cfg.prices {
            Some(_) => Ok(()),
            None => Err(CliError::Usage("this command needs --prices".into())),
        }
    }

    fn weekly(&self) -> Result<(WeeklyPriceSeries, ReturnSeries), CliError> {
        self.require_prices()?;
        let weekly = aggregate_weekly(&self.flows.prices)?;
        let returns = log_returns(&weekly)?;
        Ok((weekly, returns))
    }

    fn add_table<T: Serialize>(&self, out: &mut Artifacts, stem: &str, rows: &[T]) -> Result<(), CliError> {
        if self.cfg.wants(OutputFormat::Csv) {
            out.add_csv(&format!("{stem}.csv"), rows)?;
        }
        if self.cfg.wants(OutputFormat::Json) {
            out.add_json(&format!("{stem}.json"), rows)?;
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct IngestSummary<'a> {
    sources: &'a [ParseReport],
    transfers_parsed: usize,
    prices_parsed: usize,
    transfers_retained: usize,
    transfers_unvalued: usize,
    weeks: usize,
}

#[derive(Serialize)]
struct TransferRow<'a> {
    id: &'a str,
    date: chrono::NaiveDate,
    from_registry: &'a str,
    to_registry: &'a str,
    from_class: &'a str,
    to_class: &'a str,
    quantity: u64,
    value_eur: Option<f64>,
}

#[derive(Serialize)]
struct WeekRow {
    week: String,
    mean_price: f64,
    n_obs: usize,
    log_return: Option<f64>,
}

pub fn ingest(ctx: &Context, out: &mut Artifacts) -> Result<(), CliError> {
    let rows: Vec<TransferRow> = ctx
        .flows
        .transfers
        .iter()
        .map(|t| TransferRow {
            id: &t.id,
            date: t.date,
            from_registry: t.from_registry.as_str(),
            to_registry: t.to_registry.as_str(),
            from_class: t.from_class.as_str(),
            to_class: t.to_class.as_str(),
            quantity: t.quantity,
            value_eur: t.value_eur,
        })
        .collect();
    out.add_csv("transfers_clean.csv", &rows)?;
    let mut weeks = 0;
    if ctx.cfg.prices.is_some() {
        let (weekly, returns) = ctx.weekly()?;
        weeks = weekly.len();
        let rows: Vec<WeekRow> = weekly
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| WeekRow {
                week: p.week.to_string(),
                mean_price: p.mean_price,
                n_obs: p.n_obs,
                log_return: i.checked_sub(1).map(|k| returns.points[k].r),
            })
            .collect();
        out.add_csv("weekly_prices.csv", &rows)?;
    }
    out.add_json(
        "ingest_report.json",
        &IngestSummary {
            sources: &ctx.reports,
            transfers_parsed: ctx.raw.transfers.len(),
            prices_parsed: ctx.raw.prices.len(),
            transfers_retained: ctx.flows.transfers.len(),
            transfers_unvalued: ctx.flows.unvalued(),
            weeks,
        },
    )
}

pub fn summary(ctx: &Context, out: &mut Artifacts) -> Result<(), CliError> {
    ctx.require_transactions()?;
    let s = summarize_flows(&ctx.flows);
    out.add_json("summary.json", &s)?;
    if ctx.cfg.wants(OutputFormat::Csv) {
        out.add_csv("summary_pairs.csv", &s.pairs)?;
        out.add_csv("summary_registries.csv", &s.registries)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct AcfRow {
    lag: usize,
    acf: f64,
    pacf: f64,
    band: f64,
}

pub fn test(ctx: &Context, out: &mut Artifacts) -> Result<(), CliError> {
    let (_, returns) = ctx.weekly()?;
    let r = returns.values();
    let adf = adf_test(
        &r,
        &AdfOptions {
            regression: ctx.cfg.adf_regression,
            max_lag: ctx.cfg.adf_max_lag,
            ..Default::default()
        },
    )?;
    let mean = r.iter().sum::<f64>() / r.len() as f64;
    let demeaned: Vec<f64> = r.iter().map(|v| v - mean).collect();
    let arch = arch_lm_test(&demeaned, ctx.cfg.arch_lags, DEFAULT_ALPHA)?;

    let lags = ctx.cfg.acf_lags.min(r.len().saturating_sub(1));
    let (a, p) = (acf(&r, lags)?, pacf(&r, lags)?);
    let band = white_noise_band(r.len());
    let rows: Vec<AcfRow> = (1..=lags)
        .map(|k| AcfRow {
            lag: k,
            acf: a[k],
            pacf: p[k],
            band,
        })
        .collect();
    ctx.add_table(out, "acf", &rows)?;

    #[derive(Serialize)]
    struct Tests<'a> {
        observations: usize,
        adf: &'a etsmarket_core::stats::TestResult,
        adf_regression: etsmarket_core::stats::AdfRegression,
        arch_lm: &'a etsmarket_core::stats::TestResult,
    }
    out.add_json(
        "tests.json",
        &Tests {
            observations: r.len(),
            adf: &adf,
            adf_regression: ctx.cfg.adf_regression,
            arch_lm: &arch,
        },
    )?;

    let mut table = String::new();
    let _ = writeln!(table, "{:<10} {:>12} {:>12} {:>5} {:>5}  Conclusion", "Test", "Statistic", "p-value", "Lags", "N");
    let verdict = |reject: bool, yes: &str, no: &str| if reject { yes.to_owned() } else { no.to_owned() };
    let _ = writeln!(
        table,
        "{:<10} {:>12.4} {:>12.3e} {:>5} {:>5}  {}",
        "ADF",
        adf.statistic,
        adf.p_value,
        adf.lags_used,
        adf.nobs,
        verdict(adf.p_value < adf.alpha, "stationary in mean (reject H0)", "unit root not rejected")
    );
    let _ = writeln!(
        table,
        "{:<10} {:>12.4} {:>12.3e} {:>5} {:>5}  {}",
        "ARCH-LM",
        arch.statistic,
        arch.p_value,
        arch.lags_used,
        arch.nobs,
        verdict(arch.p_value < arch.alpha, "ARCH effects present (reject H0)", "no ARCH effects detected")
    );
    let _ = std::io::stdout().write_all(table.as_bytes());
    Ok(())
}

#[derive(Serialize)]
struct ForecastRow {
    week: String,
    mean: f64,
    variance: f64,
    actual: f64,
    band_lo: f64,
    band_hi: f64,
    flagged: bool,
}

pub fn forecast(ctx: &Context, out: &mut Artifacts) -> Result<(), CliError> {
    let (_, returns) = ctx.weekly()?;
    let opts = RollingOptions {
        window: ctx.cfg.window,
        ar_order: ctx.cfg.ar_order,
        garch: GarchOptions {
            init: ctx.cfg.variance_init,
            ..Default::default()
        },
    };
    let result = rolling_forecast(&returns, &opts)?;
    let metrics = evaluate(&result)?;
    let rows: Vec<ForecastRow> = result
        .steps
        .iter()
        .map(|s| {
            let (lo, hi) = s.band();
            ForecastRow {
                week: s.week.to_string(),
                mean: s.forecast_mean,
                variance: s.forecast_variance,
                actual: s.actual,
                band_lo: lo,
                band_hi: hi,
                flagged: s.flagged,
            }
        })
        .collect();
    ctx.add_table(out, "forecast", &rows)?;
    if result.flagged_steps() > 0 {
        eprintln!(
            "warning: GARCH fit failed in {} of {} windows; those steps use the window residual variance",
            result.flagged_steps(),
            result.steps.len()
        );
    }

    #[derive(Serialize)]
    struct MetricsOut {
        mse: f64,
        rmse: f64,
        mae: f64,
        directional_accuracy: f64,
        hit_rate: f64,
        steps: usize,
        flagged_steps: usize,
        window: usize,
        ar_order: usize,
    }
    out.add_json(
        "forecast_metrics.json",
        &MetricsOut {
            mse: metrics.mse,
            rmse: metrics.rmse,
            mae: metrics.mae,
            directional_accuracy: metrics.directional_accuracy,
            hit_rate: metrics.hit_rate,
            steps: metrics.steps,
            flagged_steps: result.flagged_steps(),
            window: result.window,
            ar_order: result.ar_order,
        },
    )
}

pub fn network(ctx: &Context, out: &mut Artifacts) -> Result<(), CliError> {
    ctx.require_transactions()?;
    let mut built = 0;
    for year in ctx.cfg.year_range() {
        let net = match build_annual_network(&ctx.flows, year, ctx.cfg.aggregation) {
            Ok(net) => net,
            Err(Error::EmptyNetwork { year }) => {
                eprintln!("warning: no valued transfers in {year}; no network written");
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        built += 1;
        out.add(
            format!("network_{year}.dot"),
            export_network(&net, ctx.cfg.edge_threshold, ctx.cfg.node_threshold),
        );
        if ctx.cfg.wants(OutputFormat::Csv) {
            out.add(format!("network_{year}_weights.csv"), net.to_csv());
        }
        if ctx.cfg.wants(OutputFormat::Json) {
            #[derive(Serialize)]
            struct Weights<'a> {
                year: i32,
                aggregation: etsmarket_core::network::Aggregation,
                nodes: &'a [etsmarket_core::model::RegistryCode],
                weights: Vec<Vec<f64>>,
            }
            let w = net.weights();
            out.add_json(
                &format!("network_{year}_weights.json"),
                &Weights {
                    year,
                    aggregation: ctx.cfg.aggregation,
                    nodes: net.nodes(),
                    weights: (0..w.nrows()).map(|i| w.row(i).iter().copied().collect()).collect(),
                },
            )?;
        }
    }
    if built == 0 {
        return Err(Error::EmptyNetwork { year: ctx.cfg.years.0 }.into());
    }
    Ok(())
}

pub fn centrality(ctx: &Context, out: &mut Artifacts) -> Result<(), CliError> {
    ctx.require_transactions()?;
    let opts = CentralityOptions {
        transpose: ctx.cfg.transpose,
        damping: ctx.cfg.damping,
        ..Default::default()
    };
    let table = centrality_timeseries(&ctx.flows, ctx.cfg.year_range(), ctx.cfg.aggregation, &opts);
    for f in &table.failures {
        eprintln!("warning: centrality for {}: {}", f.year, f.message);
    }
    if table.rows.is_empty() {
        return Err(CliError::Data("no year produced a centrality result".into()));
    }
    if ctx.cfg.wants(OutputFormat::Csv) {
        out.add("centrality.csv", table.to_csv());
    }
    if ctx.cfg.wants(OutputFormat::Json) {
        #[derive(Serialize)]
        struct CentralityOut<'a> {
            aggregation: etsmarket_core::network::Aggregation,
            options: &'a CentralityOptions,
            table: &'a etsmarket_core::network::CentralityTable,
        }
        out.add_json(
            "centrality.json",
            &CentralityOut {
                aggregation: ctx.cfg.aggregation,
                options: &opts,
                table: &table,
            },
        )?;
    }
    Ok(())
}

pub fn elasticity(ctx: &Context, out: &mut Artifacts) -> Result<(), CliError> {
    ctx.require_transactions()?;
    ctx.require_prices()?;
    let seg = ctx.cfg.segmentation()?;
    let opts = ElasticityOptions {
        min_n: ctx.cfg.min_n,
        bootstrap_reps: ctx.cfg.bootstrap_reps,
        seed: ctx.cfg.seed,
        aggregation: ctx.cfg.daily_aggregation,
        max_gap_days: ctx.cfg.max_price_gap,
        ..Default::default()
    };
    let methods = ctx.cfg.method.methods();
    let report: ElasticityReport = elasticity_report(&ctx.flows, &seg, &ctx.cfg.registries, &methods, &opts);
    for row in report.rows.iter().filter(|r| r.estimate.is_none()) {
        eprintln!(
            "warning: {}->{} {} {}: {}",
            row.from,
            row.to,
            row.period,
            row.method,
            row.reason.as_deref().unwrap_or("not estimated")
        );
    }
    if ctx.cfg.wants(OutputFormat::Csv) {
        out.add("elasticity.csv", report.to_csv());
    }
    if ctx.cfg.wants(OutputFormat::Json) {
        out.add_json("elasticity.json", &report)?;
    }
    let estimates: Vec<_> = report.estimates().cloned().collect();
    for period in seg.periods() {
        for &method in &methods {
            let (dot, warnings) = elasticity_graph(&estimates, &period.label, method);
            for w in warnings {
                eprintln!("warning: {w}");
            }
            let stem: String = period
                .label
                .chars()
                .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
                .collect();
            out.add(format!("elasticity_{stem}_{}.dot", method.as_str().to_ascii_lowercase()), dot);
        }
    }
    Ok(())
}
