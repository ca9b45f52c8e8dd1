//! Month-by-month orchestration: snapshot, sample, score, aggregate,
//! propagate, fuse, and the cohort evaluations built on top.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::citegraph::CitationGraph;
use crate::corpus::{ArticleStore, Month};
use crate::error::Result;
use crate::evaluate::{
    descriptor_scores, evolution_cohorts, mann_whitney, retraction_cohorts, ChangeRecord, MonthlyNodeScores,
    TestResult,
};
use crate::fusion::{fuse_aspects, RelevanceRanking};
use crate::graphmetrics::{aggregate_to_nodes, disruption_all, pagerank, PageRankParams};
use crate::infometrics::{informativeness, map_articles, mapping_counts, usefulness, InformativenessMode, MappingMatrix};
use crate::kosmodel::Hierarchy;
use crate::propagate::propagate;
use crate::scores::{Aspect, AspectScores, NodeScores};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComputeParams {
    pub sample_fraction: f64,
    pub base_seed: u64,
    pub pagerank: PageRankParams,
    pub informativeness_mode: InformativenessMode,
}

impl Default for ComputeParams {
    fn default() -> Self {
        ComputeParams {
            sample_fraction: 0.10,
            base_seed: 0,
            pagerank: PageRankParams::default(),
            informativeness_mode: InformativenessMode::default(),
        }
    }
}

pub fn month_seed(base_seed: u64, month_index: usize) -> u64 {
    base_seed.wrapping_add(month_index as u64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonthResult {
    pub month: Month,
    pub seed: u64,
    /// One entry per aspect, in [`Aspect::ALL`] order.
    pub aspects: Vec<AspectScores>,
    /// Sampled article ids, ascending.
    pub members: Vec<u64>,
    pub sampled_edges: usize,
    pub pagerank_iterations: usize,
    pub pagerank_converged: bool,
    pub unknown_descriptors: usize,
}

impl MonthResult {
    pub fn aspect(&self, aspect: Aspect) -> &AspectScores {
        &self.aspects[aspect as usize]
    }
}

fn fill_missing(h: &Hierarchy, mut scores: NodeScores) -> NodeScores {
    for code in h.codes() {
        scores.entry(code.clone()).or_insert(0.0);
    }
    scores
}

/// All four aspects for `month`. `graph` is the full citation graph; the
/// cumulative snapshot up to `month` is sampled with
/// `month_seed(base_seed, month_index)`. Graph aspects cover every node
/// (0 where nothing propagates); information aspects come from the month's
/// own articles.
pub fn compute_month(
    h: &Hierarchy,
    store: &ArticleStore,
    graph: &CitationGraph,
    month: Month,
    month_index: usize,
    params: &ComputeParams,
) -> Result<MonthResult> {
    let seed = month_seed(params.base_seed, month_index);
    let snapshot = graph.cumulative_snapshot(store, month);
    let sampled = snapshot.sample_nodes(params.sample_fraction, seed)?;
    drop(snapshot);

    let mut aspects = Vec::with_capacity(4);
    let (graph_mappings, mut unknown) = map_articles(h, store, sampled.ids().iter().copied());
    let mut iterations = 0;
    let mut converged = true;
    if sampled.node_count() == 0 {
        for aspect in [Aspect::Disruptiveness, Aspect::Influence] {
            aspects.push(AspectScores::new(aspect, month, fill_missing(h, NodeScores::new())));
        }
    } else {
        let dis = disruption_all(&sampled);
        let pr = pagerank(&sampled, &params.pagerank)?;
        iterations = pr.iterations;
        converged = pr.converged;
        for (aspect, article_scores) in [(Aspect::Disruptiveness, dis), (Aspect::Influence, pr.scores)] {
            let seeds = aggregate_to_nodes(h, &article_scores, &graph_mappings)?;
            let propagated = propagate(h, &seeds)?;
            aspects.push(AspectScores::new(aspect, month, fill_missing(h, propagated)));
        }
    }

    let (month_mappings, u) = map_articles(h, store, store.articles_in_month(month));
    unknown += u;
    let counts = mapping_counts(h, &month_mappings)?;
    aspects.push(AspectScores::new(
        Aspect::Informativeness,
        month,
        informativeness(h, &counts, params.informativeness_mode),
    ));
    let matrix = MappingMatrix::build(h, &month_mappings)?;
    aspects.push(AspectScores::new(Aspect::Usefulness, month, usefulness(h, &matrix)));

    Ok(MonthResult {
        month,
        seed,
        aspects,
        members: sampled.ids().to_vec(),
        sampled_edges: sampled.edge_count(),
        pagerank_iterations: iterations,
        pagerank_converged: converged,
        unknown_descriptors: unknown,
    })
}

/// Global fused ranking of one month's aspects.
pub fn fuse_month(result: &MonthResult, k: u32) -> Result<RelevanceRanking> {
    fuse_aspects(result.month, &result.aspects, k)
}

/// Node-wise mean of the monthly score tables falling in `year`.
/// Returns `None` when no month of `year` is present.
pub fn yearly_mean(monthly: &[(Month, &NodeScores)], year: i32) -> Option<NodeScores> {
    let mut sums: BTreeMap<_, (f64, usize)> = BTreeMap::new();
    let mut any = false;
    for (_, scores) in monthly.iter().filter(|(m, _)| m.year() == year) {
        any = true;
        for (code, &v) in scores.iter() {
            let e = sums.entry(code.clone()).or_insert((0.0, 0));
            e.0 += v;
            e.1 += 1;
        }
    }
    any.then(|| sums.into_iter().map(|(c, (s, n))| (c, s / n as f64)).collect())
}

/// Outcome of one cohort comparison; `test` is `None` when a cohort is empty.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CohortTest {
    pub label: String,
    pub n1: usize,
    pub n2: usize,
    pub mean1: f64,
    pub mean2: f64,
    pub test: Option<TestResult>,
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 }
}

fn cohort_test(label: String, a: &[f64], b: &[f64]) -> Result<CohortTest> {
    let test = if a.is_empty() || b.is_empty() { None } else { Some(mann_whitney(a, b)?) };
    Ok(CohortTest { label, n1: a.len(), n2: b.len(), mean1: mean(a), mean2: mean(b), test })
}

/// Releases named in `changes` plus their `AB` siblings, for the years in
/// `years`, in order.
pub fn releases_for_years(changes: &[ChangeRecord], years: &BTreeSet<i32>) -> Vec<String> {
    let mut out: BTreeSet<String> = changes
        .iter()
        .filter(|c| ChangeRecord::release_year(&c.release).is_some_and(|y| years.contains(&y)))
        .map(|c| c.release.clone())
        .collect();
    for y in years {
        out.insert(format!("{y}AA"));
        out.insert(format!("{y}AB"));
    }
    out.into_iter().collect()
}

/// Evolving vs. stable descriptors per release, on the mean scores of the
/// release's year. Group 1 is the evolving cohort.
pub fn evolution_tests(
    h: &Hierarchy,
    changes: &[ChangeRecord],
    monthly: &[(Month, &NodeScores)],
) -> Result<Vec<CohortTest>> {
    let years: BTreeSet<i32> = monthly.iter().map(|(m, _)| m.year()).collect();
    let mut out = Vec::new();
    for release in releases_for_years(changes, &years) {
        let Some(year) = ChangeRecord::release_year(&release) else { continue };
        let Some(scores) = yearly_mean(monthly, year) else { continue };
        let subset: Vec<ChangeRecord> = changes.iter().filter(|c| c.release == release).cloned().collect();
        let cohorts = evolution_cohorts(&scores, &subset, h);
        out.push(cohort_test(release, &cohorts.evolving, &cohorts.stable)?);
    }
    Ok(out)
}

/// Retracted vs. other articles per year. Group 1 is the retracted cohort.
pub fn retraction_tests(
    store: &ArticleStore,
    h: &Hierarchy,
    months: &[MonthlyNodeScores<'_>],
) -> Result<Vec<CohortTest>> {
    let years: BTreeSet<i32> = months.iter().map(|m| m.month.year()).collect();
    let mut out = Vec::new();
    for year in years {
        let c = retraction_cohorts(store, h, year, months);
        out.push(cohort_test(year.to_string(), &c.retracted, &c.other)?);
    }
    Ok(out)
}

/// `(descriptor, month) -> [dis, infl, info, use, rel]` observation rows.
/// Each month supplies its four aspect tables in [`Aspect::ALL`] order
/// followed by the fused relevance.
pub fn correlation_rows(h: &Hierarchy, months: &[(Month, [&NodeScores; 5])]) -> BTreeMap<(String, Month), [f64; 5]> {
    let mut rows: BTreeMap<(String, Month), [f64; 5]> = BTreeMap::new();
    for (month, tables) in months {
        for (col, table) in tables.iter().enumerate() {
            for (d, v) in descriptor_scores(h, table) {
                rows.entry((d, *month)).or_insert([0.0; 5])[col] = v;
            }
        }
    }
    rows
}
