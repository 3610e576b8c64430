use clap::{Parser, Subcommand};
use mgtlab_cli::config::Config;
use mgtlab_cli::experiments::{self, Kind};
use std::path::PathBuf;
use std::process::ExitCode;

/// Spectral laboratory for the MGT/JMGT equations with exponential memory.
#[derive(Parser)]
#[command(name = "mgtlab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML configuration file; omit to run with built-in defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for CSV artifacts and JSON reports.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Seed of the single counter-based generator for randomized sweeps.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Characteristic-root branches along a radial sweep.
    Roots,
    /// Kernel magnitudes and calibrated pointwise envelopes.
    Kernels,
    /// Solution-norm decay histories and rate fits.
    Decay,
    /// The oscillatory-integral oracle and its envelope rates.
    Oscint,
    /// Vanishing sound-diffusivity sweep and energy identities.
    Inviscid,
    /// Nonlinear JMGT runs on the periodic box.
    Nonlinear,
    /// The full acceptance suite.
    Accept,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!("thread pool: {e}");
            return ExitCode::FAILURE;
        }
    }
    let kind = match cli.command {
        Command::Roots => Kind::Roots,
        Command::Kernels => Kind::Kernels,
        Command::Decay => Kind::Decay,
        Command::Oscint => Kind::Oscint,
        Command::Inviscid => Kind::Inviscid,
        Command::Nonlinear => Kind::Nonlinear,
        Command::Accept => Kind::Accept,
    };
    let cfg = match Config::load(cli.config.as_deref()) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("config error: {e:#}");
            return ExitCode::FAILURE;
        }
    };
    match experiments::run(kind, &cfg, &cli.out, cli.seed) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
