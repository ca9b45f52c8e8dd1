//! Per-article disruption and PageRank on a citation graph, and their
//! aggregation onto the tree nodes the articles are annotated with.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::citegraph::CitationGraph;
use crate::error::{Error, Result};
use crate::infometrics::ArticleMapping;
use crate::kosmodel::Hierarchy;
use crate::scores::NodeScores;

/// A value per article, aligned with the graph's sorted ids.
#[derive(Clone, Debug, PartialEq)]
pub struct ArticleScores {
    pub ids: Vec<u64>,
    pub values: Vec<f64>,
    /// Number of articles in the network the scores were computed on.
    pub graph_size_m: usize,
}

impl ArticleScores {
    pub fn get(&self, id: u64) -> Option<f64> {
        self.ids.binary_search(&id).ok().map(|i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.ids.iter().copied().zip(self.values.iter().copied())
    }
}

/// Citer counts behind one disruption value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DisruptionCounts {
    /// Cite the focal article and none of its references.
    pub n_i: usize,
    /// Cite the focal article and at least one of its references.
    pub n_j: usize,
    /// Cite at least one reference but not the focal article.
    pub n_k: usize,
}

impl DisruptionCounts {
    pub fn index(self) -> f64 {
        let denom = self.n_i + self.n_j + self.n_k;
        if denom == 0 {
            0.0
        } else {
            (self.n_i as f64 - self.n_j as f64) / denom as f64
        }
    }
}

/// Reusable epoch-stamped marks so each focal computation is O(local work).
struct Scratch {
    refs: Vec<u32>,
    seen: Vec<u32>,
    epoch: u32,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Scratch { refs: vec![0; n], seen: vec![0; n], epoch: 0 }
    }

    fn next_epoch(&mut self) -> u32 {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.refs.fill(0);
            self.seen.fill(0);
            self.epoch = 1;
        }
        self.epoch
    }
}

fn disruption_counts_at(g: &CitationGraph, focal: usize, s: &mut Scratch) -> DisruptionCounts {
    let e = s.next_epoch();
    let refs = g.cited_by_index(focal);
    for &r in refs {
        s.refs[r as usize] = e;
    }
    let mut c = DisruptionCounts::default();
    s.seen[focal] = e;
    for &citer in g.citing_index(focal) {
        s.seen[citer as usize] = e;
        if g.cited_by_index(citer as usize).iter().any(|&t| s.refs[t as usize] == e) {
            c.n_j += 1;
        } else {
            c.n_i += 1;
        }
    }
    for &r in refs {
        for &q in g.citing_index(r as usize) {
            let q = q as usize;
            if s.seen[q] != e {
                s.seen[q] = e;
                c.n_k += 1;
            }
        }
    }
    c
}

pub fn disruption_counts(g: &CitationGraph, focal: u64) -> Result<DisruptionCounts> {
    let idx = g.index_of(focal).ok_or(Error::UnknownArticle(focal))?;
    Ok(disruption_counts_at(g, idx, &mut Scratch::new(g.node_count())))
}

/// `(n_i - n_j) / (n_i + n_j + n_k)` for one focal article, 0 when nobody
/// cites it or its references.
pub fn disruption_of(g: &CitationGraph, focal: u64) -> Result<f64> {
    disruption_counts(g, focal).map(DisruptionCounts::index)
}

/// Disruption of every article in the graph. Parallel over focal articles;
/// the output does not depend on the thread count.
pub fn disruption_all(g: &CitationGraph) -> ArticleScores {
    let n = g.node_count();
    let chunk = (n / (rayon::current_num_threads() * 8)).max(4096);
    let starts: Vec<usize> = (0..n).step_by(chunk).collect();
    let parts: Vec<Vec<f64>> = starts
        .par_iter()
        .map(|&start| {
            let mut s = Scratch::new(n);
            (start..(start + chunk).min(n)).map(|i| disruption_counts_at(g, i, &mut s).index()).collect()
        })
        .collect();
    ArticleScores { ids: g.ids().to_vec(), values: parts.concat(), graph_size_m: n }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PageRankParams {
    pub alpha: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PageRankParams {
    fn default() -> Self {
        PageRankParams { alpha: 0.85, tol: 1e-9, max_iter: 200 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PageRankResult {
    pub scores: ArticleScores,
    pub iterations: usize,
    pub converged: bool,
}

const REDUCE_CHUNK: usize = 4096;

/// Sum with a fixed chunking so the result is independent of thread count.
fn stable_sum(values: &[f64]) -> f64 {
    let partial: Vec<f64> = values.par_chunks(REDUCE_CHUNK).map(|c| c.iter().sum::<f64>()).collect();
    partial.iter().sum()
}

/// Jacobi iteration of `x_i = alpha * sum_{j -> i} x_j / outdeg(j) + beta`
/// with `beta = 1 - alpha`, starting from all ones. Dangling nodes pass
/// nothing on and the vector is not normalized. Stops once the L1 change
/// drops below `tol`.
pub fn pagerank(g: &CitationGraph, params: &PageRankParams) -> Result<PageRankResult> {
    let PageRankParams { alpha, tol, max_iter } = *params;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("pagerank alpha {alpha} outside (0, 1)")));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("pagerank tolerance {tol} must be positive")));
    }
    let beta = 1.0 - alpha;
    let n = g.node_count();
    let inv_out: Vec<f64> = (0..n)
        .map(|j| match g.out_degree(j) {
            0 => 0.0,
            d => 1.0 / d as f64,
        })
        .collect();
    let mut x = vec![1.0; n];
    let mut share = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut diff = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        share.par_iter_mut().enumerate().for_each(|(j, s)| *s = x[j] * inv_out[j]);
        next.par_iter_mut().zip(diff.par_iter_mut()).enumerate().for_each(|(i, (v, d))| {
            let inflow: f64 = g.citing_index(i).iter().map(|&j| share[j as usize]).sum();
            *v = alpha * inflow + beta;
            *d = (*v - x[i]).abs();
        });
        std::mem::swap(&mut x, &mut next);
        if stable_sum(&diff) < tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("pagerank stopped after {iterations} iterations without reaching tol {tol}");
    }
    Ok(PageRankResult {
        scores: ArticleScores { ids: g.ids().to_vec(), values: x, graph_size_m: n },
        iterations,
        converged,
    })
}

/// Sum of article scores per directly mapped node, divided by the number of
/// articles in the network. Nodes no scored article maps to are absent.
/// `mappings` must be sorted by article id.
pub fn aggregate_to_nodes(
    h: &Hierarchy,
    scores: &ArticleScores,
    mappings: &[ArticleMapping],
) -> Result<NodeScores> {
    if scores.graph_size_m == 0 {
        return Err(Error::invalid("cannot aggregate scores of an empty network"));
    }
    let m = scores.graph_size_m as f64;
    let mut sums: BTreeMap<usize, f64> = BTreeMap::new();
    for mapping in mappings {
        let Some(v) = scores.get(mapping.article) else { continue };
        for &node in &mapping.nodes {
            if node >= h.len() {
                return Err(Error::UnknownTreeCode(format!("node index {node}")));
            }
            *sums.entry(node).or_insert(0.0) += v;
        }
    }
    Ok(sums.into_iter().map(|(n, s)| (h.code(n).clone(), s / m)).collect())
}
