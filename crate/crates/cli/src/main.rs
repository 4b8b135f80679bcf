// Flag help strings use <placeholder> syntax, which rustdoc misreads as HTML.
#![allow(rustdoc::invalid_html_tags, rustdoc::broken_intra_doc_links)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use sairp_cli::commands;
use sairp_cli::config::RunConfig;

/// Solver suite for battery swap station scheduling, allocation, and
/// inventory replenishment.
#[derive(Parser)]
#[command(
    name = "sairp",
    version,
    about,
    after_help = "Artifact and input CSV column layouts are documented in docs/schemas.md.\n\
                  Output root precedence: --out, then $SAIRP_OUT_ROOT, then ./sairp-out."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand; each overrides the config file.
#[derive(Args, Default)]
struct CommonFlags {
    /// JSON config file; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Scenario: builtin:<id> or point:<beta>,<L>,<deltaC> [default: builtin:1]
    #[arg(long)]
    scenario: Option<String>,
    /// Hourly price CSV (hour,usd_per_kwh) replacing the bundled series
    #[arg(long)]
    price_csv: Option<PathBuf>,
    /// Hourly demand CSV (hour,lambda) replacing the bundled template
    #[arg(long)]
    demand_csv: Option<PathBuf>,
    /// Batteries at the station [default: 3]
    #[arg(long, short = 'M', alias = "M")]
    m: Option<u32>,
    /// Decision epochs [default: 48]
    #[arg(long, short = 'T', alias = "T")]
    t: Option<usize>,
    /// Replacement threshold [default: 0.8]
    #[arg(long)]
    theta: Option<f64>,
    /// Capacity grid increment [default: 0.01]
    #[arg(long)]
    epsilon: Option<f64>,
    /// Plug-ins [default: equal to M]
    #[arg(long)]
    phi: Option<u32>,
    /// Solver: bi[:cap], mbi[:cap], or adp:<avi|avi-rb|madp|madp-m|madp-rb>
    #[arg(long)]
    solver: Option<String>,
    /// Stepsize: one-over-n, harmonic:w=<w>, stc:mu1=..,mu2=..,zeta=..[,alpha0=..], adaptive[:w=<w>]
    #[arg(long)]
    stepsize: Option<String>,
    /// ADP iteration budget [default: 20000]
    #[arg(long)]
    tau: Option<usize>,
    /// RNG seed [default: 1]
    #[arg(long)]
    seed: Option<u64>,
    /// Smallest instance size for the regression initialization [default: 2]
    #[arg(long)]
    m_bar: Option<u32>,
    /// Decision epochs of the regression instances [default: T]
    #[arg(long)]
    t_bar: Option<usize>,
    /// Extra regression instance sizes beyond the smallest [default: 2]
    #[arg(long)]
    rb_iterations: Option<usize>,
    /// Epoch slope of the hand-built monotone initialization [default: 0.5]
    #[arg(long)]
    init_slope: Option<f64>,
    /// Output directory [default: $SAIRP_OUT_ROOT or ./sairp-out]
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

impl CommonFlags {
    fn into_config(self) -> anyhow::Result<RunConfig> {
        let config_path = self.config;
        let flags = RunConfig {
            scenario: self.scenario,
            price_csv: self.price_csv,
            demand_csv: self.demand_csv,
            m: self.m,
            t: self.t,
            theta: self.theta,
            epsilon: self.epsilon,
            phi: self.phi,
            solver: self.solver,
            stepsize: self.stepsize,
            tau: self.tau,
            seed: self.seed,
            m_bar: self.m_bar,
            t_bar: self.t_bar,
            rb_iterations: self.rb_iterations,
            init_slope: self.init_slope,
            out: self.out,
            ..RunConfig::default()
        };
        let base = match &config_path {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        Ok(base.merged_with(flags))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario and write value/policy (or trace) artifacts
    Solve {
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Roll demand paths through a solved policy or value artifact
    Simulate {
        #[command(flatten)]
        common: CommonFlags,
        /// Exact policy artifact from a previous solve
        #[arg(long)]
        policy: Option<PathBuf>,
        /// Approximate value artifact from a previous solve
        #[arg(long)]
        values: Option<PathBuf>,
        /// Number of random demand paths
        #[arg(long)]
        paths: Option<usize>,
        /// Use the single path where demand equals its rounded mean
        #[arg(long)]
        mean_demand: bool,
    },
    /// Sweep scenarios x solvers and emit gap and convergence artifacts
    Experiment {
        #[command(flatten)]
        common: CommonFlags,
        /// Scenario set: builtin:all, builtin:<a>-<b>, builtin:<ids>, file:<points.csv>
        #[arg(long)]
        scenarios: Option<String>,
        /// Comma-separated solver list [default: bi,mbi:cap,adp:madp-rb]
        #[arg(long, value_delimiter = ',')]
        solvers: Option<Vec<String>>,
    },
    /// Solve with two solvers and compare their policies on common paths
    Compare {
        #[command(flatten)]
        common: CommonFlags,
        #[arg(long)]
        solver_a: String,
        #[arg(long)]
        solver_b: String,
        /// Number of common demand paths [default: 100]
        #[arg(long)]
        paths: Option<usize>,
    },
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    error: &'a str,
}

fn run() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Solve { common } => commands::cmd_solve(&common.into_config()?),
        Command::Simulate {
            common,
            policy,
            values,
            paths,
            mean_demand,
        } => {
            let mut cfg = common.into_config()?;
            if paths.is_some() {
                cfg.paths = paths;
            }
            if mean_demand {
                cfg.mean_demand = Some(true);
            }
            commands::cmd_simulate(&cfg, policy.as_deref(), values.as_deref())
        }
        Command::Experiment {
            common,
            scenarios,
            solvers,
        } => {
            let mut cfg = common.into_config()?;
            if scenarios.is_some() {
                cfg.scenarios = scenarios;
            }
            if solvers.is_some() {
                cfg.solvers = solvers;
            }
            commands::cmd_experiment(&cfg)
        }
        Command::Compare {
            common,
            solver_a,
            solver_b,
            paths,
        } => {
            let mut cfg = common.into_config()?;
            if paths.is_some() {
                cfg.paths = paths;
            }
            commands::cmd_compare(&cfg, &solver_a, &solver_b)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let record = ErrorRecord {
                error: &format!("{err:#}"),
            };
            eprintln!(
                "{}",
                serde_json::to_string(&record).unwrap_or_else(|_| format!("{{\"error\":\"{err}\"}}"))
            );
            ExitCode::FAILURE
        }
    }
}
