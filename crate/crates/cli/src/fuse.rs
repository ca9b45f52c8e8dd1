//! `fuse`: global and per-level fused rankings for every computed month.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{Context, Result};
use kosrel::fusion::{fuse_aspects, Ranks};
use kosrel::scores::fmt_f64;
use kosrel::{Month, NodeScores, RelevanceRanking, Scope, TreeCode};
use rayon::prelude::*;

use crate::compute;
use crate::config::Loaded;
use crate::output::{self, csv_reader, csv_writer, finish};

pub fn rankings_file(l: &Loaded) -> PathBuf {
    l.output_dir().join("rankings").join("rankings.csv")
}

/// Global ranking followed by one re-ranking per level present.
pub fn month_rankings(month: &compute::StoredMonth, k: u32) -> Result<Vec<RelevanceRanking>> {
    let global = fuse_aspects(month.month, &month.aspects, k)?;
    let max_level = global.rrf.keys().map(TreeCode::level).max().unwrap_or(0);
    let mut out = Vec::with_capacity(max_level + 1);
    for level in 1..=max_level {
        out.push(global.within_level(level));
    }
    out.insert(0, global);
    Ok(out)
}

pub fn run(l: &Loaded) -> Result<()> {
    let months = compute::load(l)?;
    let per_month: Vec<Vec<RelevanceRanking>> =
        months.par_iter().map(|m| month_rankings(m, l.cfg.rrf_k)).collect::<Result<_>>()?;
    let path = rankings_file(l);
    output::replace_dir(path.parent().expect("rankings dir"), |dir| {
        let mut w = csv_writer(&dir.join("rankings.csv"), &l.hash)?;
        w.write_record(["month", "scope", "tree_code", "rrf_value", "rank"])?;
        for r in per_month.iter().flatten() {
            let (month, scope) = (r.month.to_string(), r.scope.to_string());
            for (code, v, rank) in r.ordered() {
                w.write_record([month.as_str(), &scope, code.as_str(), &fmt_f64(v), &rank.to_string()])?;
            }
        }
        finish(w)
    })
}

/// Rankings read back from `fuse` output, in month then scope order.
pub fn load(l: &Loaded) -> Result<Vec<RelevanceRanking>> {
    let path = rankings_file(l);
    let mut groups: BTreeMap<(Month, Scope), (NodeScores, Ranks)> = BTreeMap::new();
    for rec in csv_reader(&path, &l.hash)?.records() {
        let rec = rec.with_context(|| format!("in {}", path.display()))?;
        let parsed = (|| -> Result<_> {
            let month: Month = rec[0].parse()?;
            let scope: Scope = rec[1].parse()?;
            let code = TreeCode::new(&rec[2])?;
            Ok((month, scope, code, rec[3].parse::<f64>()?, rec[4].parse::<u32>()?))
        })()
        .with_context(|| format!("bad row in {}", path.display()))?;
        let (month, scope, code, v, rank) = parsed;
        let g = groups.entry((month, scope)).or_default();
        g.0.insert(code.clone(), v);
        g.1.insert(code, rank);
    }
    Ok(groups
        .into_iter()
        .map(|((month, scope), (rrf, rank))| RelevanceRanking { month, scope, rrf, rank })
        .collect())
}
