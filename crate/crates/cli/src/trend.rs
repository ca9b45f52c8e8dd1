//! `trend`: yearly positions per level, rank-trend slopes and top/bottom-k
//! tables by average rank.

use std::collections::BTreeMap;

use anyhow::{bail, Result};
use kosrel::fusion::{bottom_k_by_average, period_positions, top_k_by_average, trend_slopes, Ranks};
use kosrel::scores::fmt_f64;
use kosrel::{RelevanceRanking, Scope};

use crate::config::Loaded;
use crate::fuse;
use crate::output::{self, csv_writer, finish};

/// Per-level rankings grouped by year.
pub fn by_level_and_year(rankings: &[RelevanceRanking]) -> BTreeMap<usize, BTreeMap<i32, Vec<RelevanceRanking>>> {
    let mut out: BTreeMap<usize, BTreeMap<i32, Vec<RelevanceRanking>>> = BTreeMap::new();
    for r in rankings {
        if let Scope::Level(level) = r.scope {
            out.entry(level).or_default().entry(r.month.year()).or_default().push(r.clone());
        }
    }
    out
}

/// Yearly positions (1 = best mean rank in the year) per level.
pub fn yearly_positions(rankings: &[RelevanceRanking]) -> BTreeMap<usize, BTreeMap<i32, Ranks>> {
    by_level_and_year(rankings)
        .into_iter()
        .map(|(level, years)| (level, years.into_iter().map(|(y, rs)| (y, period_positions(&rs))).collect()))
        .collect()
}

pub fn run(l: &Loaded) -> Result<()> {
    let rankings = fuse::load(l)?;
    let grouped = by_level_and_year(&rankings);
    let positions = yearly_positions(&rankings);
    let years: Vec<i32> = positions.values().flat_map(|y| y.keys().copied()).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    if years.len() < 2 {
        bail!("rank trends need a window spanning at least two years, got {years:?}");
    }
    let (first, last) = (years[0], years[years.len() - 1]);

    output::replace_dir(&l.output_dir().join("trend"), |dir| {
        let mut w = csv_writer(&dir.join("trend.csv"), &l.hash)?;
        w.write_record(["tree_code", "level", "slope", "first_year", "last_year"])?;
        for (level, per_year) in &positions {
            let series: Vec<Ranks> = per_year.values().cloned().collect();
            if series.len() < 2 {
                continue;
            }
            let (fy, ly) = (per_year.keys().next().unwrap(), per_year.keys().last().unwrap());
            for (code, slope) in trend_slopes(&series)? {
                w.write_record([
                    code.as_str(),
                    &level.to_string(),
                    &fmt_f64(slope),
                    &fy.to_string(),
                    &ly.to_string(),
                ])?;
            }
        }
        finish(w)?;

        let mut w = csv_writer(&dir.join("top_bottom.csv"), &l.hash)?;
        w.write_record(["period", "scope", "table", "position", "tree_code", "average_rank"])?;
        let k = l.cfg.top_k;
        for (level, per_year) in &grouped {
            let scope = Scope::Level(*level).to_string();
            let all: Vec<RelevanceRanking> = per_year.values().flatten().cloned().collect();
            let periods = per_year
                .iter()
                .map(|(y, rs)| (y.to_string(), rs.as_slice()))
                .chain(std::iter::once((format!("{first}-{last}"), all.as_slice())));
            for (period, rs) in periods {
                for (table, rows) in [("top", top_k_by_average(rs, k)), ("bottom", bottom_k_by_average(rs, k))] {
                    for (i, (code, avg)) in rows.iter().enumerate() {
                        w.write_record([
                            period.as_str(),
                            &scope,
                            table,
                            &(i + 1).to_string(),
                            code.as_str(),
                            &fmt_f64(*avg),
                        ])?;
                    }
                }
            }
        }
        finish(w)
    })
}
