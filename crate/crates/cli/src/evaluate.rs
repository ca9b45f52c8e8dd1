//! `evaluate`: evolution and retraction cohort tests, aspect correlations.

use anyhow::Result;
use kosrel::evaluate::{aspect_correlation, CorrelationMethod, MonthlyNodeScores, CORRELATION_LABELS};
use kosrel::pipeline::{correlation_rows, evolution_tests, retraction_tests, CohortTest};
use kosrel::scores::fmt_f64;
use kosrel::{Aspect, Month, NodeScores, RelevanceRanking, Scope};
use serde_json::{json, Value};

use crate::config::Loaded;
use crate::output::{self, csv_writer, finish, write_json};
use crate::{compute, fuse, inputs};

/// Label used for the fused ranking next to the four aspect names.
pub const RELEVANCE: &str = "relevance";

fn record(key: &str, aspect: &str, t: &CohortTest) -> Value {
    let mut v = json!({
        key: t.label,
        "aspect": aspect,
        "n1": t.n1,
        "n2": t.n2,
        "mean1": t.mean1,
        "mean2": t.mean2,
    });
    let extra = match &t.test {
        Some(r) => json!({"u": r.u_statistic, "p": r.p_value, "method": r.method, "status": "ok"}),
        None => json!({"u": null, "p": null, "method": null, "status": "skipped"}),
    };
    if let (Value::Object(a), Value::Object(b)) = (&mut v, extra) {
        a.extend(b);
    }
    v
}

pub fn run(l: &Loaded) -> Result<()> {
    let inp = inputs::load(l)?;
    let months = compute::load(l)?;
    let global: Vec<RelevanceRanking> = fuse::load(l)?.into_iter().filter(|r| r.scope == Scope::Global).collect();
    let fused = |m: Month| global.iter().find(|r| r.month == m).map(|r| &r.rrf);
    if let Some(missing) = months.iter().find(|m| fused(m.month).is_none()) {
        anyhow::bail!("no fused ranking for {}; rerun fuse", missing.month);
    }

    // fused relevance first, then the four aspects
    let mut series: Vec<(&str, Vec<(Month, &NodeScores)>)> =
        vec![(RELEVANCE, months.iter().map(|m| (m.month, fused(m.month).unwrap())).collect())];
    for a in Aspect::ALL {
        series.push((a.name(), months.iter().map(|m| (m.month, &m.aspects[a as usize].values)).collect()));
    }

    let mut evolution = Vec::new();
    let mut retraction = Vec::new();
    for (name, monthly) in &series {
        for t in evolution_tests(&inp.hierarchy, &inp.changes, monthly)? {
            evolution.push(record("release", name, &t));
        }
        let with_members: Vec<MonthlyNodeScores<'_>> = monthly
            .iter()
            .zip(&months)
            .map(|(&(month, scores), m)| MonthlyNodeScores { month, scores, members: &m.members })
            .collect();
        for t in retraction_tests(&inp.store, &inp.hierarchy, &with_members)? {
            retraction.push(record("year", name, &t));
        }
    }

    let tables: Vec<(Month, [&NodeScores; 5])> = months
        .iter()
        .map(|m| {
            let a = &m.aspects;
            (m.month, [&a[0].values, &a[1].values, &a[2].values, &a[3].values, fused(m.month).unwrap()])
        })
        .collect();
    let rows = correlation_rows(&inp.hierarchy, &tables);

    output::replace_dir(&l.output_dir().join("evaluation"), |dir| {
        write_json(&dir.join("evolution.json"), &l.hash, json!({ "results": evolution }))?;
        write_json(&dir.join("retraction.json"), &l.hash, json!({ "results": retraction }))?;
        for (method, name) in [(CorrelationMethod::Pearson, "pearson"), (CorrelationMethod::Spearman, "spearman")] {
            let matrix = match aspect_correlation(&rows, method) {
                Ok(m) => m,
                Err(e) => {
                    log::warn!("skipping {name} correlation: {e}");
                    continue;
                }
            };
            let mut w = csv_writer(&dir.join(format!("correlation_{name}.csv")), &l.hash)?;
            let mut header = vec!["aspect"];
            header.extend(CORRELATION_LABELS);
            w.write_record(&header)?;
            for (label, row) in CORRELATION_LABELS.iter().zip(&matrix) {
                let mut rec = vec![label.to_string()];
                rec.extend(row.iter().map(|&v| fmt_f64(v)));
                w.write_record(&rec)?;
            }
            finish(w)?;
        }
        Ok(())
    })
}
