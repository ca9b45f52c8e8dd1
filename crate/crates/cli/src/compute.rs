//! `compute`: per-month aspect score tables, sample membership and manifest.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use kosrel::pipeline::{compute_month, MonthResult};
use kosrel::scores::fmt_f64;
use kosrel::{Aspect, AspectScores, Month, NodeScores, TreeCode};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::Loaded;
use crate::inputs;
use crate::output::{self, csv_reader, csv_writer, finish, read_json, write_json};

pub fn scores_dir(l: &Loaded) -> PathBuf {
    l.output_dir().join("scores")
}

pub fn aspect_file(dir: &Path, aspect: Aspect, month: Month) -> PathBuf {
    dir.join(format!("{aspect}_{month}.csv"))
}

fn sample_file(dir: &Path, month: Month) -> PathBuf {
    dir.join("samples").join(format!("{month}.csv"))
}

pub fn run(l: &Loaded) -> Result<()> {
    let inp = inputs::load(l)?;
    let months = l.window(&inp.store)?;
    let params = l.compute_params();
    log::info!("computing {} months", months.len());
    let results: Vec<MonthResult> = months
        .par_iter()
        .enumerate()
        .map(|(i, &m)| {
            compute_month(&inp.hierarchy, &inp.store, &inp.graph, m, i, &params)
                .with_context(|| format!("computing {m}"))
        })
        .collect::<Result<_>>()?;
    for r in results.iter().filter(|r| !r.pagerank_converged) {
        log::warn!("{}: pagerank stopped after {} iterations without converging", r.month, r.pagerank_iterations);
    }
    output::replace_dir(&scores_dir(l), |dir| write_results(dir, l, &results))
}

fn write_results(dir: &Path, l: &Loaded, results: &[MonthResult]) -> Result<()> {
    let mut months = Vec::new();
    for (i, r) in results.iter().enumerate() {
        for a in &r.aspects {
            let mut w = csv_writer(&aspect_file(dir, a.aspect, r.month), &l.hash)?;
            w.write_record(["tree_code", "level", "aspect", "month", "value"])?;
            let (aspect, month) = (a.aspect.to_string(), r.month.to_string());
            for (code, &v) in &a.values {
                w.write_record([code.as_str(), &code.level().to_string(), &aspect, &month, &fmt_f64(v)])?;
            }
            finish(w)?;
        }
        let mut w = csv_writer(&sample_file(dir, r.month), &l.hash)?;
        w.write_record(["article_id"])?;
        for id in &r.members {
            w.write_record([id.to_string()])?;
        }
        finish(w)?;
        months.push(json!({
            "month": r.month,
            "month_index": i,
            "seed": r.seed,
            "sampled_nodes": r.members.len(),
            "sampled_edges": r.sampled_edges,
            "pagerank_iterations": r.pagerank_iterations,
            "pagerank_converged": r.pagerank_converged,
            "unknown_descriptors": r.unknown_descriptors,
        }));
    }
    let manifest = json!({
        "first_month": results.first().map(|r| r.month),
        "last_month": results.last().map(|r| r.month),
        "sample_fraction": l.cfg.sample_fraction,
        "base_seed": l.cfg.base_seed,
        "seed_rule": "base_seed + month_index",
        "aspects": Aspect::ALL.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
        "months": months,
    });
    write_json(&dir.join("manifest.json"), &l.hash, manifest)
}

/// One month of `compute` output read back from disk.
pub struct StoredMonth {
    pub month: Month,
    /// In [`Aspect::ALL`] order.
    pub aspects: Vec<AspectScores>,
    pub members: Vec<u64>,
}

fn read_aspect(path: &Path, hash: &str, aspect: Aspect, month: Month) -> Result<AspectScores> {
    let mut values = NodeScores::new();
    for rec in csv_reader(path, hash)?.records() {
        let rec = rec.with_context(|| format!("in {}", path.display()))?;
        let code = TreeCode::new(&rec[0]).with_context(|| format!("in {}", path.display()))?;
        let v: f64 = rec[4].parse().with_context(|| format!("bad value in {}", path.display()))?;
        values.insert(code, v);
    }
    Ok(AspectScores::new(aspect, month, values))
}

/// Reads every month listed in the manifest.
pub fn load(l: &Loaded) -> Result<Vec<StoredMonth>> {
    let dir = scores_dir(l);
    let manifest_path = dir.join("manifest.json");
    let manifest = read_json(&manifest_path)?;
    output::check_json_hash(&manifest_path, &manifest, &l.hash)?;
    let Some(entries) = manifest.get("months").and_then(Value::as_array) else {
        bail!("{} lists no months", manifest_path.display());
    };
    entries
        .par_iter()
        .map(|e| {
            let month: Month = e
                .get("month")
                .and_then(Value::as_str)
                .context("manifest entry without month")?
                .parse()?;
            let aspects = Aspect::ALL
                .iter()
                .map(|&a| read_aspect(&aspect_file(&dir, a, month), &l.hash, a, month))
                .collect::<Result<Vec<_>>>()?;
            let path = sample_file(&dir, month);
            let members = csv_reader(&path, &l.hash)?
                .records()
                .map(|r| Ok(r?[0].parse::<u64>()?))
                .collect::<Result<Vec<_>>>()
                .with_context(|| format!("in {}", path.display()))?;
            Ok(StoredMonth { month, aspects, members })
        })
        .collect()
}
