//! Command-line front end: flag parsing, stage dispatch, exit codes.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

pub mod artifacts;
pub mod config;
pub mod stages;

use std::ffi::OsString;

use clap::{Parser, Subcommand};
use etsmarket_core::ErrorKind;

use artifacts::Artifacts;
use config::{CentralityArgs, CommonArgs, ElasticityArgs, Flags, ForecastArgs, GraphArgs, NetworkArgs, RunConfig, TestArgs};
use stages::Context;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Core(etsmarket_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Core(e) => match e.kind() {
                ErrorKind::Data => EXIT_DATA,
                ErrorKind::Numerical => EXIT_NUMERICAL,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<etsmarket_core::Error> for CliError {
    fn from(e: etsmarket_core::Error) -> Self {
        CliError::Core(e)
    }
}

#[derive(Debug, Parser)]
#[command(name = "etsmarket", version, about = "Emissions-allowance market analysis pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse, filter and value the inputs; write cleaned transfers and weekly prices.
    Ingest {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Transfer counts and value shares by account-class pair and registry.
    Summary {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// ADF and ARCH-LM tests plus ACF/PACF of weekly returns.
    Test {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        test: TestArgs,
    },
    /// Rolling one-step AR + GARCH(1,1) forecast and its accuracy.
    Forecast {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        forecast: ForecastArgs,
    },
    /// Annual trade networks as DOT plus weight matrices.
    Network {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        network: NetworkArgs,
    },
    /// Eigenvector-centrality proportions per registry and year.
    Centrality {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        centrality: CentralityArgs,
    },
    /// OLS and LAD log-log price elasticities per registry pair and period.
    Elasticity {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        elasticity: ElasticityArgs,
    },
    /// Every stage in order, stopping at the first failure.
    All {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        test: TestArgs,
        #[command(flatten)]
        forecast: ForecastArgs,
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        network: NetworkArgs,
        #[command(flatten)]
        centrality: CentralityArgs,
        #[command(flatten)]
        elasticity: ElasticityArgs,
    },
}

type Stage = fn(&Context, &mut Artifacts) -> Result<(), CliError>;

const ALL_STAGES: [(&str, Stage); 7] = [
    ("ingest", stages::ingest),
    ("summary", stages::summary),
    ("test", stages::test),
    ("forecast", stages::forecast),
    ("network", stages::network),
    ("centrality", stages::centrality),
    ("elasticity", stages::elasticity),
];

impl Command {
    fn into_parts(self) -> (&'static str, Flags) {
        let mut flags = Flags::default();
        let name = match self {
            Command::Ingest { common } => {
                flags.common = common;
                "ingest"
            }
            Command::Summary { common } => {
                flags.common = common;
                "summary"
            }
            Command::Test { common, test } => {
                (flags.common, flags.test) = (common, test);
                "test"
            }
            Command::Forecast { common, forecast } => {
                (flags.common, flags.forecast) = (common, forecast);
                "forecast"
            }
            Command::Network { common, graph, network } => {
                (flags.common, flags.graph, flags.network) = (common, graph, network);
                "network"
            }
            Command::Centrality {
                common,
                graph,
                centrality,
            } => {
                (flags.common, flags.graph, flags.centrality) = (common, graph, centrality);
                "centrality"
            }
            Command::Elasticity { common, elasticity } => {
                (flags.common, flags.elasticity) = (common, elasticity);
                "elasticity"
            }
            Command::All {
                common,
                test,
                forecast,
                graph,
                network,
                centrality,
                elasticity,
            } => {
                flags = Flags {
                    common,
                    test,
                    forecast,
                    graph,
                    network,
                    centrality,
                    elasticity,
                };
                "all"
            }
        };
        (name, flags)
    }
}

fn execute(name: &str, flags: Flags) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(flags)?;
    let ctx = Context::load(cfg)?;
    let mut artifacts = Artifacts::default();
    for (stage, run) in ALL_STAGES {
        if name == "all" || name == stage {
            run(&ctx, &mut artifacts).inspect_err(|_| eprintln!("error in stage `{stage}`"))?;
        }
    }
    let written = artifacts::commit(&artifacts, &ctx.cfg, name)?;
    eprintln!("wrote {} files to {}", written.len(), ctx.cfg.out.display());
    Ok(())
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let (name, flags) = cli.command.into_parts();
    match execute(name, flags) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
