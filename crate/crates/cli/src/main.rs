//! `recondiag`: batch diagnostics for molecular reconstruction experiments.

mod commands;
mod input;
mod output;
mod svg;

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use output::Format;

#[derive(Parser)]
#[command(name = "recondiag", version, about = "Diagnose reconstruction failures of molecular generative models")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

/// Settings shared by all commands. Flags override `RECON_*` environment
/// variables, which override the defaults.
#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Seed for every random choice.
    #[arg(long, global = true, env = "RECON_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Worker threads; 0 picks one per core.
    #[arg(long, global = true, env = "RECON_THREADS", default_value_t = 0,
          value_parser = clap::value_parser!(u16).range(0..=1024))]
    pub threads: u16,

    /// Monte Carlo samples per density for distinguishability.
    #[arg(long, global = true, env = "RECON_MC_SAMPLES", default_value_t = 200_000,
          value_parser = clap::value_parser!(u64).range(1_000..=1_000_000_000))]
    pub mc_samples: u64,

    /// Maximum number of resonance structures enumerated per target.
    #[arg(long, global = true, env = "RECON_RESONANCE_LIMIT", default_value_t = 64,
          value_parser = clap::value_parser!(u64).range(1..=100_000))]
    pub resonance_limit: u64,

    /// Encoding of per-record outputs; defaults depend on the command.
    #[arg(long, global = true, env = "RECON_FORMAT", value_enum)]
    pub format: Option<Format>,

    /// Distinguishability cut for the reported fraction.
    #[arg(long, global = true, env = "RECON_THRESHOLD", default_value_t = 0.975, value_parser = parse_unit)]
    pub threshold: f64,

    /// Output directory, created if missing.
    #[arg(long, global = true, env = "RECON_OUT", default_value = "recondiag-out")]
    pub out: PathBuf,
}

fn parse_unit(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Reconstruction accuracy of a pairs file.
    Acc {
        /// TSV with header `molecule_id<TAB>original<TAB>reconstruction`.
        pairs: PathBuf,
    },
    /// Similarity of reconstructions, optionally against random corpus pairs.
    Sim {
        pairs: PathBuf,
        /// SMILES corpus for the random-pair baseline.
        #[arg(long)]
        baseline: Option<PathBuf>,
        /// Number of random baseline pairs.
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        /// Keep exactly reconstructed pairs too.
        #[arg(long)]
        all: bool,
    },
    /// Classify the first error of each generation trace.
    Classify {
        /// JSON Lines, one trace per line.
        traces: PathBuf,
    },
    /// Distinguishability of posterior pairs.
    Distinguish {
        /// JSON Lines with `p_mean`, `p_logvar`, `q_mean`, `q_logvar`.
        posteriors: PathBuf,
        /// Histogram bins over [0.5, 1].
        #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u16).range(1..=1000))]
        bins: u16,
    },
    /// Motif decomposition of every corpus molecule.
    Decompose { corpus: PathBuf },
    /// Reference generation traces for every corpus molecule.
    Groundtruth { corpus: PathBuf },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    rayon::ThreadPoolBuilder::new()
        .num_threads(usize::from(cli.global.threads))
        .build_global()
        .context("cannot start worker pool")?;
    let g = &cli.global;
    match &cli.command {
        Command::Acc { pairs } => commands::acc(g, pairs),
        Command::Sim { pairs, baseline, n, all } => commands::sim(g, pairs, baseline.as_deref(), *n, !*all),
        Command::Classify { traces } => commands::classify(g, traces),
        Command::Distinguish { posteriors, bins } => commands::distinguish(g, posteriors, usize::from(*bins)),
        Command::Decompose { corpus } => commands::decompose(g, corpus),
        Command::Groundtruth { corpus } => commands::groundtruth(g, corpus),
    }
}
