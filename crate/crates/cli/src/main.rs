//! Command-line interface: simulation, fitting, diagnostics, density tables,
//! coverage studies, and full benchmark-scenario reproduction.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 numerical failure.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use mfising::Error;

#[derive(Parser)]
#[command(
    name = "mfising",
    version,
    about = "Mean-field Ising model with three-body interactions: exact likelihood, simulation, and hybrid MCMC inference"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default, Clone)]
struct ThetaArgs {
    /// Three-body coupling K
    #[arg(long = "K", allow_hyphen_values = true)]
    k: Option<f64>,
    /// Two-body coupling J
    #[arg(long = "J", allow_hyphen_values = true)]
    j: Option<f64>,
    /// External field h
    #[arg(long = "h", allow_hyphen_values = true)]
    h: Option<f64>,
}

#[derive(Args, Debug, Default, Clone)]
struct SamplerArgs {
    /// MCMC kernel: amh, rmahmc, or hybrid
    #[arg(long)]
    kernel: Option<String>,
    /// Total iterations per chain
    #[arg(long)]
    iters: Option<usize>,
    /// Burn-in iterations discarded from summaries
    #[arg(long)]
    burnin: Option<usize>,
    /// Number of chains
    #[arg(long)]
    chains: Option<usize>,
    /// Leapfrog step size
    #[arg(long)]
    eps: Option<f64>,
    /// Leapfrog steps per proposal
    #[arg(long)]
    leapfrog: Option<usize>,
    /// Metric off-diagonal shrinkage during burn-in
    #[arg(long)]
    chi_burnin: Option<f64>,
    /// Metric off-diagonal shrinkage after burn-in
    #[arg(long)]
    chi_after: Option<f64>,
    /// Random-walk proposal covariance scale
    #[arg(long)]
    amh_scale: Option<f64>,
    /// Draws before covariance adaptation kicks in
    #[arg(long)]
    amh_warmup: Option<usize>,
    /// Fallback proposal standard deviation
    #[arg(long)]
    amh_fallback_sd: Option<f64>,
    /// Diagonal jitter factor for mass matrices
    #[arg(long)]
    jitter: Option<f64>,
    /// Adapt the step size toward 0.7 acceptance during burn-in
    #[arg(long)]
    adapt_eps: bool,
    /// Gradient source for the dynamics: posterior or likelihood
    #[arg(long)]
    grad: Option<String>,
    /// Isotropic prior standard deviation
    #[arg(long)]
    prior_sd: Option<f64>,
}

#[derive(Args, Debug, Default, Clone)]
struct GridArgs {
    /// Grid lower bound: one value or K,J,h
    #[arg(long, allow_hyphen_values = true)]
    grid_lo: Option<String>,
    /// Grid upper bound: one value or K,J,h
    #[arg(long, allow_hyphen_values = true)]
    grid_hi: Option<String>,
    /// Grid step
    #[arg(long)]
    grid_step: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a magnetization dataset from the model and write CSV + JSON
    Simulate {
        #[command(flatten)]
        theta: ThetaArgs,
        /// Number of spins N
        #[arg(long)]
        n: Option<usize>,
        /// Number of replicas M
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        stream: Option<u64>,
        /// Output prefix for <prefix>.csv and <prefix>.json
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Fit a dataset: grid-initialized chains, chain CSVs, report JSON
    Fit {
        /// Dataset path (.json envelope or .csv plus --n)
        #[arg(long)]
        data: Option<PathBuf>,
        /// Spins N (required for bare CSV datasets)
        #[arg(long)]
        n: Option<usize>,
        /// Starting point K,J,h (skips grid search for chain 0)
        #[arg(long, allow_hyphen_values = true)]
        init: Option<String>,
        /// Interval level for the report
        #[arg(long)]
        level: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        stream: Option<u64>,
        #[command(flatten)]
        sampler: SamplerArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Rank lattice points of the posterior for starting values
    InitGrid {
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        /// How many ranked points to print
        #[arg(long)]
        top: Option<usize>,
        #[arg(long)]
        prior_sd: Option<f64>,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Tabulate magnetization pmfs over the spectrum, one column per theta
    Density {
        /// Parameter triple K,J,h (repeatable)
        #[arg(long = "theta", allow_hyphen_values = true)]
        thetas: Vec<String>,
        #[arg(long)]
        n: Option<usize>,
        /// Output CSV path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Summarize chain CSVs: PSRF, means, credible intervals
    Diagnose {
        /// Chain CSV paths
        #[arg(required = true)]
        chains: Vec<PathBuf>,
        #[arg(long)]
        burnin: Option<usize>,
        #[arg(long)]
        level: Option<f64>,
        /// Use the split-halves variant of the convergence statistic
        #[arg(long)]
        split: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Interval-coverage study over replicated datasets
    Coverage {
        #[command(flatten)]
        theta: ThetaArgs,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        /// Number of replications
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        level: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Base stream for the replicated datasets
        #[arg(long)]
        stream: Option<u64>,
        #[command(flatten)]
        sampler: SamplerArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run a named benchmark scenario end to end and grade the results
    Reproduce {
        /// Scenario name: bimodal1, bimodal2, unimodal1, critical, nonident
        scenario: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidConfig(_)
        | Error::NonFinite { .. }
        | Error::MagnetizationRange { .. }
        | Error::BoundaryAtom { .. }
        | Error::EmptyGrid => 1,
        Error::OffSpectrum { .. }
        | Error::DataRow { .. }
        | Error::EmptyDataset
        | Error::Io { .. }
        | Error::Parse { .. } => 2,
        Error::NonConvergence { .. } | Error::SingularMass | Error::InvalidChains(_) => 3,
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    configure_workers();
    let result = match cli.command {
        Command::Simulate {
            theta,
            n,
            m,
            seed,
            stream,
            out,
            config,
        } => commands::simulate(theta, n, m, seed, stream, out, config),
        Command::Fit {
            data,
            n,
            init,
            level,
            seed,
            stream,
            sampler,
            grid,
            out,
            config,
        } => commands::fit(
            data, n, init, level, seed, stream, sampler, grid, out, config,
        ),
        Command::InitGrid {
            data,
            n,
            top,
            prior_sd,
            grid,
            out,
            config,
        } => commands::init_grid(data, n, top, prior_sd, grid, out, config),
        Command::Density {
            thetas,
            n,
            out,
            config,
        } => commands::density(thetas, n, out, config),
        Command::Diagnose {
            chains,
            burnin,
            level,
            split,
            out,
            config,
        } => commands::diagnose(chains, burnin, level, split, out, config),
        Command::Coverage {
            theta,
            n,
            m,
            reps,
            level,
            seed,
            stream,
            sampler,
            grid,
            out,
            config,
        } => commands::coverage(
            theta, n, m, reps, level, seed, stream, sampler, grid, out, config,
        ),
        Command::Reproduce {
            scenario,
            seed,
            out,
            config,
        } => commands::reproduce(scenario, seed, out, config),
    };
    if let Err(err) = result {
        eprintln!("error: {err}");
        std::process::exit(exit_code(&err));
    }
}

/// Worker count for chain and replication fan-out, from MFISING_WORKERS.
fn configure_workers() {
    if let Ok(value) = std::env::var("MFISING_WORKERS") {
        if let Ok(workers) = value.parse::<usize>() {
            if workers >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .build_global();
            }
        }
    }
}
