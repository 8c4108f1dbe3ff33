//! `qllab`: run graph experiments from JSON configs and write CSV/JSON artifacts.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 numerical failure.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

use config::{resolve, ConfigError, Overrides, Resolved};

#[derive(Parser)]
#[command(name = "qllab", version, about = "Quantum-like states on classical graphs")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// JSON experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; falls back to the config, then QLLAB_SEED, then 0.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for ensembles.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Spectra of cycle powers, generated graphs, QL bits, products or disordered ensembles.
    Spectrum,
    /// Emergent-state purity against the fraction of edges retained.
    DisorderSweep,
    /// Kuramoto synchronization on QL-bit products.
    Kuramoto,
    /// Emergent two-state projections of a QL bit ensemble.
    Qlbit,
    /// Emergent product states, degenerate mixtures and detuning.
    Product {
        /// Check the Cartesian spectrum composition on `verify_pair`.
        #[arg(long)]
        verify: bool,
    },
    /// Witness readout statistics.
    Witness,
    /// Exact isoperimetric constants and Cheeger bounds.
    Cheeger,
}

fn prepare<P: DeserializeOwned>(name: &str, o: &Overrides) -> anyhow::Result<Resolved<P>> {
    let r: Resolved<P> = resolve(name, o)?;
    if let Some(jobs) = r.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
    }
    Ok(r)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let g = cli.global;
    let o = Overrides { config: g.config, seed: g.seed, out: g.out, jobs: g.jobs };
    match cli.command {
        Command::Spectrum => commands::spectrum::run(prepare("spectrum", &o)?),
        Command::DisorderSweep => commands::disorder::run(prepare("disorder-sweep", &o)?),
        Command::Kuramoto => commands::kuramoto::run(prepare("kuramoto", &o)?),
        Command::Qlbit => commands::qlbit::run(prepare("qlbit", &o)?),
        Command::Product { verify } => commands::product::run(prepare("product", &o)?, verify),
        Command::Witness => commands::witness::run(prepare("witness", &o)?),
        Command::Cheeger => commands::cheeger::run(prepare("cheeger", &o)?),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<qllab_core::Error>() {
        Some(qllab_core::Error::Io(_)) => 1,
        Some(qllab_core::Error::Json(_)) => 2,
        Some(_) => 3,
        None if err.downcast_ref::<std::io::Error>().is_some() => 1,
        // Failed checks such as the composition test.
        None => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
