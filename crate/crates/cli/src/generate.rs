//! `generate`: write a synthetic scenario plus a ready-to-run config.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use kosrel::citegraph::write_citations;
use kosrel::evaluate::write_changes;
use kosrel::synthgen::{generate, ScenarioConfig};

use crate::output::create;

#[derive(Debug, Default, clap::Args)]
pub struct GenerateArgs {
    /// Directory receiving the generated files.
    #[arg(long, default_value = "synthetic")]
    pub out: std::path::PathBuf,
    /// TOML file with scenario settings; flags below override it.
    #[arg(long)]
    pub scenario: Option<std::path::PathBuf>,
    /// Number of months.
    #[arg(long)]
    pub months: Option<usize>,
    /// Articles published per month.
    #[arg(long)]
    pub articles_per_month: Option<usize>,
    /// Mean number of references per article.
    #[arg(long)]
    pub refs_mean: Option<f64>,
    /// Fraction of descriptors changed per AA release.
    #[arg(long)]
    pub evolving_fraction: Option<f64>,
    /// Probability that an article is retracted.
    #[arg(long)]
    pub retraction_rate: Option<f64>,
}

pub fn scenario_config(args: &GenerateArgs, seed: Option<u64>) -> Result<ScenarioConfig> {
    let mut cfg = match &args.scenario {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("cannot read scenario {}", p.display()))?;
            toml::from_str(&text).with_context(|| format!("invalid scenario {}", p.display()))?
        }
        None => ScenarioConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(v) = args.months {
        cfg.months = v;
    }
    if let Some(v) = args.articles_per_month {
        cfg.articles_per_month = v;
    }
    if let Some(v) = args.refs_mean {
        cfg.refs_mean = v;
    }
    if let Some(v) = args.evolving_fraction {
        cfg.evolving_fraction = v;
    }
    if let Some(v) = args.retraction_rate {
        cfg.retraction_rate = v;
    }
    Ok(cfg)
}

pub fn write_scenario(cfg: &ScenarioConfig, out: &Path) -> Result<()> {
    let s = generate(cfg)?;
    let mut w = create(&out.join("hierarchy.tsv"))?;
    s.hierarchy.write_tsv(&mut w)?;
    w.flush()?;
    let mut w = create(&out.join("articles.jsonl"))?;
    s.store.write_jsonl(&mut w)?;
    w.flush()?;
    let mut w = create(&out.join("citations.tsv"))?;
    write_citations(&s.edges, &mut w)?;
    w.flush()?;
    let mut w = create(&out.join("changes.tsv"))?;
    write_changes(&s.changes, &mut w)?;
    w.flush()?;

    let mut w = create(&out.join("kosrel.toml"))?;
    writeln!(w, "hierarchy = \"hierarchy.tsv\"")?;
    writeln!(w, "articles = \"articles.jsonl\"")?;
    writeln!(w, "citations = \"citations.tsv\"")?;
    writeln!(w, "changes = \"changes.tsv\"")?;
    writeln!(w, "base_seed = {}", cfg.seed)?;
    writeln!(w, "output_dir = \"out\"")?;
    w.flush()?;

    println!(
        "wrote {} tree nodes, {} articles, {} citations, {} change records to {}",
        s.hierarchy.len(),
        s.store.len(),
        s.edges.len(),
        s.changes.len(),
        out.display()
    );
    Ok(())
}

pub fn run(args: &GenerateArgs, seed: Option<u64>) -> Result<()> {
    let cfg = scenario_config(args, seed)?;
    write_scenario(&cfg, &args.out)
}
