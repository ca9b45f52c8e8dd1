use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

mod compute;
mod config;
mod evaluate;
mod fuse;
mod generate;
mod inputs;
mod output;
mod plots;
mod trend;

use config::Loaded;

#[derive(Parser)]
#[command(name = "kosrel", version, about = "Multi-aspect concept relevance for tree-structured vocabularies")]
struct Cli {
    /// Pipeline config (TOML).
    #[arg(long, global = true, default_value = "kosrel.toml")]
    config: PathBuf,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides `base_seed` (or the scenario seed for `generate`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate inputs, print counts.
    Ingest,
    /// Write a synthetic scenario and matching config.
    Generate(generate::GenerateArgs),
    /// Monthly aspect scores for the configured window.
    Compute,
    /// Fused rankings, global and per level.
    Fuse,
    /// Rank-trend slopes and top/bottom-k tables.
    Trend,
    /// Cohort tests and aspect correlations.
    Evaluate,
    /// SVG rank trajectory charts.
    ExportPlots,
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global().context("cannot size thread pool")?;
    }
    if let Command::Generate(args) = &cli.command {
        return generate::run(args, cli.seed);
    }
    let loaded = Loaded::load(&cli.config, cli.seed)?;
    match cli.command {
        Command::Ingest => inputs::run(&loaded),
        Command::Compute => compute::run(&loaded),
        Command::Fuse => fuse::run(&loaded),
        Command::Trend => trend::run(&loaded),
        Command::Evaluate => evaluate::run(&loaded),
        Command::ExportPlots => plots::run(&loaded),
        Command::Generate(_) => unreachable!(),
    }
}
