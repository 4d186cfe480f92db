//! Command-line flags, the JSON config file, and their resolution into a
//! single [`RunConfig`]. Flags given on the command line win over the file.

use std::fs;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use etsmarket_core::elasticity::{DailyAggregation, Method};
use etsmarket_core::forecast::VarianceInit;
use etsmarket_core::ingest::DEFAULT_MAX_PRICE_GAP_DAYS;
use etsmarket_core::model::{PeriodSegmentation, RegistryCode, STUDY_END, STUDY_START};
use etsmarket_core::network::Aggregation;
use etsmarket_core::stats::AdfRegression;

use crate::CliError;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_ARCH_LAGS: usize = 12;
pub const DEFAULT_REGISTRIES: &str = "FR,DE,GB";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    Ols,
    Lad,
    Both,
}

impl MethodChoice {
    pub fn methods(self) -> Vec<Method> {
        match self {
            MethodChoice::Ols => vec![Method::Ols],
            MethodChoice::Lad => vec![Method::Lad],
            MethodChoice::Both => vec![Method::Ols, Method::Lad],
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Transfer CSV (id,date,from_registry,to_registry,from_class,to_class,quantity).
    #[arg(long)]
    pub transactions: Option<PathBuf>,
    /// Price CSV (date,market,price).
    #[arg(long)]
    pub prices: Option<PathBuf>,
    /// Output directory [default: out].
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// JSON file with flat, flag-named keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Random seed [default: 42].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Abort on the first malformed row instead of skipping it.
    #[arg(long)]
    pub strict: bool,
    /// First day of the analysis window [default: 2010-01-05].
    #[arg(long)]
    pub start: Option<NaiveDate>,
    /// Last day of the analysis window [default: 2020-04-30].
    #[arg(long)]
    pub end: Option<NaiveDate>,
    /// Days a spot price may be carried forward [default: 7].
    #[arg(long)]
    pub max_price_gap: Option<i64>,
    /// Drop OHA->OHA transfers.
    #[arg(long)]
    pub exclude_oha_oha: bool,
    /// Write only this format for tables (both by default).
    #[arg(long, value_enum)]
    pub output_format: Option<OutputFormat>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct TestArgs {
    /// ADF deterministic terms: n, c or ct [default: c].
    #[arg(long)]
    pub adf_regression: Option<AdfRegression>,
    /// Upper bound of the ADF lag search [default: Schwert's rule].
    #[arg(long)]
    pub adf_max_lag: Option<usize>,
    /// Lags in the ARCH-LM auxiliary regression [default: 12].
    #[arg(long)]
    pub arch_lags: Option<usize>,
    /// Lags in the ACF/PACF table [default: 20].
    #[arg(long)]
    pub acf_lags: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ForecastArgs {
    /// Rolling training window in weeks [default: 104].
    #[arg(long)]
    pub window: Option<usize>,
    /// AR order of the mean model [default: 3].
    #[arg(long)]
    pub ar_order: Option<usize>,
    /// GARCH start variance: sample-variance or unconditional.
    #[arg(long)]
    pub variance_init: Option<VarianceInit>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GraphArgs {
    /// Year or inclusive range such as 2011-2018 [default: every year of the window].
    #[arg(long)]
    pub year: Option<String>,
    /// Per-pair weight: mean or sum [default: mean].
    #[arg(long)]
    pub aggregation: Option<Aggregation>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct NetworkArgs {
    /// Smallest off-diagonal weight (EUR) drawn as an edge [default: 0].
    #[arg(long)]
    pub edge_threshold: Option<f64>,
    /// Self-trade weight (EUR) above which node size scales [default: 0].
    #[arg(long)]
    pub node_threshold: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CentralityArgs {
    /// Score nodes by incoming rather than outgoing weight.
    #[arg(long)]
    pub transpose: bool,
    /// Constant added to every adjacency entry [default: 0].
    #[arg(long)]
    pub damping: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ElasticityArgs {
    /// Comma-separated registry codes [default: FR,DE,GB].
    #[arg(long)]
    pub registries: Option<String>,
    /// Comma-separated period breakpoints [default: 2013-01-01,2018-01-01].
    #[arg(long)]
    pub breakpoints: Option<String>,
    #[arg(long, value_enum)]
    pub method: Option<MethodChoice>,
    /// Bootstrap replicates for LAD inference [default: 999].
    #[arg(long)]
    pub bootstrap_reps: Option<usize>,
    /// Smallest sample fitted [default: 30].
    #[arg(long)]
    pub min_n: Option<usize>,
    /// Daily quantity aggregation: sum or mean [default: sum].
    #[arg(long)]
    pub daily_aggregation: Option<DailyAggregation>,
}

/// Contents of `--config`; keys are the long flag names.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct FileConfig {
    transactions: Option<PathBuf>,
    prices: Option<PathBuf>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    strict: Option<bool>,
    start: Option<NaiveDate>,
    end: Option<NaiveDate>,
    max_price_gap: Option<i64>,
    exclude_oha_oha: Option<bool>,
    output_format: Option<OutputFormat>,
    adf_regression: Option<String>,
    adf_max_lag: Option<usize>,
    arch_lags: Option<usize>,
    acf_lags: Option<usize>,
    window: Option<usize>,
    ar_order: Option<usize>,
    variance_init: Option<String>,
    year: Option<String>,
    aggregation: Option<String>,
    edge_threshold: Option<f64>,
    node_threshold: Option<f64>,
    transpose: Option<bool>,
    damping: Option<f64>,
    registries: Option<String>,
    breakpoints: Option<String>,
    method: Option<MethodChoice>,
    bootstrap_reps: Option<usize>,
    min_n: Option<usize>,
    daily_aggregation: Option<String>,
}

/// Fully resolved settings of one run. Serialized (without `out`) for the
/// manifest's config hash.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub transactions: Option<PathBuf>,
    pub prices: Option<PathBuf>,
    #[serde(skip)]
    pub out: PathBuf,
    pub seed: u64,
    pub strict: bool,
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub max_price_gap: i64,
    pub include_oha_oha: bool,
    pub output_format: Option<OutputFormat>,
    pub adf_regression: AdfRegression,
    pub adf_max_lag: Option<usize>,
    pub arch_lags: usize,
    pub acf_lags: usize,
    pub window: usize,
    pub ar_order: usize,
    pub variance_init: VarianceInit,
    pub years: (i32, i32),
    pub aggregation: Aggregation,
    pub edge_threshold: f64,
    pub node_threshold: f64,
    pub transpose: bool,
    pub damping: f64,
    pub registries: Vec<RegistryCode>,
    pub breakpoints: Vec<NaiveDate>,
    pub method: MethodChoice,
    pub bootstrap_reps: usize,
    pub min_n: usize,
    pub daily_aggregation: DailyAggregation,
}

/// Every flag group; subcommands that lack a group pass its default.
#[derive(Debug, Clone, Default)]
pub struct Flags {
    pub common: CommonArgs,
    pub test: TestArgs,
    pub forecast: ForecastArgs,
    pub graph: GraphArgs,
    pub network: NetworkArgs,
    pub centrality: CentralityArgs,
    pub elasticity: ElasticityArgs,
}

fn parse_file_value<T: FromStr<Err = etsmarket_core::Error>>(key: &str, v: Option<String>) -> Result<Option<T>, CliError> {
    v.map(|s| s.parse::<T>().map_err(|e| CliError::Usage(format!("config `{key}`: {e}"))))
        .transpose()
}

fn parse_years(s: &str) -> Result<(i32, i32), CliError> {
    let bad = || CliError::Usage(format!("invalid year {s:?} (expected YYYY or YYYY-YYYY)"));
    let (a, b) = match s.split_once('-') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s.trim(), s.trim()),
    };
    let (a, b) = (a.parse::<i32>().map_err(|_| bad())?, b.parse::<i32>().map_err(|_| bad())?);
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

fn parse_registries(s: &str) -> Result<Vec<RegistryCode>, CliError> {
    s.split(',')
        .map(|c| RegistryCode::new(c.trim()).map_err(|e| CliError::Usage(e.to_string())))
        .collect()
}

fn parse_breakpoints(s: &str) -> Result<Vec<NaiveDate>, CliError> {
    s.split(',')
        .filter(|c| !c.trim().is_empty())
        .map(|c| {
            NaiveDate::from_str(c.trim()).map_err(|e| CliError::Usage(format!("breakpoint {c:?}: {e}")))
        })
        .collect()
}

impl RunConfig {
    pub fn resolve(flags: Flags) -> Result<Self, CliError> {
        let Flags {
            common,
            test,
            forecast,
            graph,
            network,
            centrality,
            elasticity,
        } = flags;
        let file = match &common.config {
            Some(path) => read_config(path)?,
            None => FileConfig::default(),
        };
        let start = common.start.or(file.start).unwrap_or(STUDY_START);
        let end = common.end.or(file.end).unwrap_or(STUDY_END);
        if start > end {
            return Err(CliError::Usage(format!("--start {start} is after --end {end}")));
        }
        let years = match graph.year.or(file.year) {
            Some(s) => parse_years(&s)?,
            None => (start.year(), end.year()),
        };
        let registries = parse_registries(
            elasticity
                .registries
                .or(file.registries)
                .as_deref()
                .unwrap_or(DEFAULT_REGISTRIES),
        )?;
        let breakpoints = match elasticity.breakpoints.or(file.breakpoints) {
            Some(s) => parse_breakpoints(&s)?,
            None => PeriodSegmentation::default()
                .periods()
                .iter()
                .skip(1)
                .map(|p| p.start)
                .collect(),
        };
        let cfg = Self {
            transactions: common.transactions.or(file.transactions),
            prices: common.prices.or(file.prices),
            out: common.out.or(file.out).unwrap_or_else(|| PathBuf::from("out")),
            seed: common.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            strict: common.strict || file.strict.unwrap_or(false),
            start,
            end,
            max_price_gap: common
                .max_price_gap
                .or(file.max_price_gap)
                .unwrap_or(DEFAULT_MAX_PRICE_GAP_DAYS),
            include_oha_oha: !(common.exclude_oha_oha || file.exclude_oha_oha.unwrap_or(false)),
            output_format: common.output_format.or(file.output_format),
            adf_regression: test
                .adf_regression
                .or(parse_file_value("adf-regression", file.adf_regression)?)
                .unwrap_or_default(),
            adf_max_lag: test.adf_max_lag.or(file.adf_max_lag),
            arch_lags: test.arch_lags.or(file.arch_lags).unwrap_or(DEFAULT_ARCH_LAGS),
            acf_lags: test.acf_lags.or(file.acf_lags).unwrap_or(20),
            window: forecast.window.or(file.window).unwrap_or(104),
            ar_order: forecast.ar_order.or(file.ar_order).unwrap_or(3),
            variance_init: forecast
                .variance_init
                .or(parse_file_value("variance-init", file.variance_init)?)
                .unwrap_or_default(),
            years,
            aggregation: graph
                .aggregation
                .or(parse_file_value("aggregation", file.aggregation)?)
                .unwrap_or_default(),
            edge_threshold: network.edge_threshold.or(file.edge_threshold).unwrap_or(0.0),
            node_threshold: network.node_threshold.or(file.node_threshold).unwrap_or(0.0),
            transpose: centrality.transpose || file.transpose.unwrap_or(false),
            damping: centrality.damping.or(file.damping).unwrap_or(0.0),
            registries,
            breakpoints,
            method: elasticity.method.or(file.method).unwrap_or(MethodChoice::Both),
            bootstrap_reps: elasticity.bootstrap_reps.or(file.bootstrap_reps).unwrap_or(999),
            min_n: elasticity.min_n.or(file.min_n).unwrap_or(30),
            daily_aggregation: elasticity
                .daily_aggregation
                .or(parse_file_value("daily-aggregation", file.daily_aggregation)?)
                .unwrap_or_default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        for path in [&self.transactions, &self.prices].into_iter().flatten() {
            if !path.is_file() {
                return Err(CliError::Data(format!("input file {} does not exist", path.display())));
            }
        }
        if self.max_price_gap < 0 {
            return Err(CliError::Usage("--max-price-gap must be >= 0".into()));
        }
        for (name, v) in [
            ("--edge-threshold", self.edge_threshold),
            ("--node-threshold", self.node_threshold),
            ("--damping", self.damping),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(CliError::Usage(format!("{name} must be a nonnegative number")));
            }
        }
        if self.arch_lags == 0 || self.ar_order == 0 {
            return Err(CliError::Usage("--arch-lags and --ar-order must be positive".into()));
        }
        Ok(())
    }

    pub fn year_range(&self) -> RangeInclusive<i32> {
        self.years.0..=self.years.1
    }

    /// Default labels for the default breakpoints and window, generated
    /// labels otherwise.
    pub fn segmentation(&self) -> Result<PeriodSegmentation, CliError> {
        let default = PeriodSegmentation::default();
        let default_bps: Vec<NaiveDate> = default.periods().iter().skip(1).map(|p| p.start).collect();
        if self.breakpoints == default_bps && (self.start, self.end) == default.window() {
            return Ok(default);
        }
        PeriodSegmentation::new(self.start, self.end, &self.breakpoints).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn wants(&self, format: OutputFormat) -> bool {
        self.output_format.is_none_or(|f| f == format)
    }
}

fn read_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut cfg: FileConfig =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
    // Relative paths in the file are relative to the file itself.
    let base = path.parent().unwrap_or(Path::new(""));
    for p in [&mut cfg.transactions, &mut cfg.prices, &mut cfg.out].into_iter().flatten() {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    }
    Ok(cfg)
}
