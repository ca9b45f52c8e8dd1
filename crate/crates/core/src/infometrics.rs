//! Informativeness and usefulness from article-to-node mappings.
//!
//! Both metrics use direct propagation: an article mapped to a node also
//! counts for every ancestor of that node.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::ArticleStore;
use crate::error::{Error, Result};
use crate::kosmodel::Hierarchy;
use crate::scores::NodeScores;

/// An article and the hierarchy node indices its descriptors resolve to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArticleMapping {
    pub article: u64,
    pub nodes: Vec<usize>,
}

/// Resolves the descriptors of `ids` against `h`. Returns the mappings in
/// ascending article order and the number of unknown descriptor ids seen.
pub fn map_articles<I>(h: &Hierarchy, store: &ArticleStore, ids: I) -> (Vec<ArticleMapping>, usize)
where
    I: IntoIterator<Item = u64>,
{
    let mut unknown = 0;
    let mut out: Vec<ArticleMapping> = ids
        .into_iter()
        .filter_map(|id| store.get(id))
        .map(|a| {
            let (nodes, u) = h.resolve_descriptors(a.descriptors.iter().map(String::as_str));
            unknown += u;
            ArticleMapping { article: a.id, nodes }
        })
        .collect();
    out.sort_by_key(|m| m.article);
    (out, unknown)
}

fn check_nodes(h: &Hierarchy, mappings: &[ArticleMapping]) -> Result<()> {
    for m in mappings {
        if let Some(&bad) = m.nodes.iter().find(|&&n| n >= h.len()) {
            return Err(Error::UnknownTreeCode(format!("node index {bad}")));
        }
    }
    Ok(())
}

/// Direct and propagated mapping counts per node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MappingCounts {
    pub direct: Vec<u64>,
    pub propagated: Vec<u64>,
    /// `level_totals[l - 1]` is the propagated mass at level `l`.
    pub level_totals: Vec<u64>,
}

pub fn mapping_counts(h: &Hierarchy, mappings: &[ArticleMapping]) -> Result<MappingCounts> {
    check_nodes(h, mappings)?;
    let mut direct = vec![0u64; h.len()];
    for m in mappings {
        let mut nodes = m.nodes.clone();
        nodes.sort_unstable();
        nodes.dedup();
        for n in nodes {
            direct[n] += 1;
        }
    }
    let mut propagated = direct.clone();
    for level in (2..=h.max_level()).rev() {
        for &n in h.level_indices(level) {
            if let Some(p) = h.parent(n) {
                propagated[p] += propagated[n];
            }
        }
    }
    let level_totals = (1..=h.max_level())
        .map(|l| h.level_indices(l).iter().map(|&n| propagated[n]).sum())
        .collect();
    Ok(MappingCounts { direct, propagated, level_totals })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InformativenessMode {
    /// `-p log2 p`, the node's summand in its level's Shannon entropy.
    #[default]
    EntropyTerm,
    /// `-log2 p`, self-information of the node.
    Surprisal,
}

impl fmt::Display for InformativenessMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InformativenessMode::EntropyTerm => "entropy-term",
            InformativenessMode::Surprisal => "surprisal",
        })
    }
}

impl FromStr for InformativenessMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "entropy-term" => Ok(InformativenessMode::EntropyTerm),
            "surprisal" => Ok(InformativenessMode::Surprisal),
            _ => Err(Error::invalid(format!("unknown informativeness mode {s:?}"))),
        }
    }
}

/// Node probability is its propagated count over its level's total.
/// Nodes on levels with no mappings are left unscored, as are zero-probability
/// nodes in surprisal mode.
pub fn informativeness(h: &Hierarchy, counts: &MappingCounts, mode: InformativenessMode) -> NodeScores {
    let mut out = BTreeMap::new();
    for level in 1..=h.max_level() {
        let total = counts.level_totals[level - 1];
        if total == 0 {
            continue;
        }
        for &n in h.level_indices(level) {
            let c = counts.propagated[n];
            let p = c as f64 / total as f64;
            let score = match mode {
                InformativenessMode::EntropyTerm if c == 0 => 0.0,
                InformativenessMode::EntropyTerm => -p * p.log2(),
                InformativenessMode::Surprisal if c == 0 => continue,
                // p == 1 gives -0.0
                InformativenessMode::Surprisal => 0.0 - p.log2(),
            };
            out.insert(h.code(n).clone(), score + 0.0);
        }
    }
    out
}

/// Binary node-by-article incidence with propagation: an article marks a
/// node when it maps to the node or to any of its descendants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MappingMatrix {
    /// Row per hierarchy node: ascending column indices.
    pub rows: Vec<Vec<u32>>,
    /// Article id of each column.
    pub columns: Vec<u64>,
}

impl MappingMatrix {
    pub fn build(h: &Hierarchy, mappings: &[ArticleMapping]) -> Result<Self> {
        check_nodes(h, mappings)?;
        let mut rows = vec![Vec::new(); h.len()];
        let mut columns = Vec::new();
        let mut marked = Vec::new();
        for m in mappings {
            marked.clear();
            for &n in &m.nodes {
                let mut cur = Some(n);
                while let Some(c) = cur {
                    marked.push(c);
                    cur = h.parent(c);
                }
            }
            if marked.is_empty() {
                continue;
            }
            marked.sort_unstable();
            marked.dedup();
            let col = columns.len() as u32;
            columns.push(m.article);
            for &n in &marked {
                rows[n].push(col);
            }
        }
        Ok(MappingMatrix { rows, columns })
    }

    pub fn n_nodes(&self) -> usize {
        self.rows.len()
    }

    pub fn m_articles(&self) -> usize {
        self.columns.len()
    }

    pub fn get(&self, node: usize, col: usize) -> bool {
        self.rows[node].binary_search(&(col as u32)).is_ok()
    }
}

/// Category utility of every node over the mapping matrix:
/// `p(c) * sum_k [M_ck - p(f_k)^2]` with `p(c)` the row's share of all
/// marks and `p(f_k)` the column mean over nodes.
pub fn usefulness(h: &Hierarchy, matrix: &MappingMatrix) -> NodeScores {
    let mut out = BTreeMap::new();
    let total: usize = matrix.rows.iter().map(Vec::len).sum();
    if matrix.m_articles() == 0 || total == 0 {
        return out;
    }
    let n = matrix.n_nodes() as f64;
    let mut colsum = vec![0u32; matrix.m_articles()];
    for row in &matrix.rows {
        for &c in row {
            colsum[c as usize] += 1;
        }
    }
    let feature_sq: f64 = colsum.iter().map(|&s| (s as f64 / n).powi(2)).sum();
    for (i, row) in matrix.rows.iter().enumerate() {
        let r = row.len() as f64;
        let score = if row.is_empty() { 0.0 } else { r / total as f64 * (r - feature_sq) };
        out.insert(h.code(i).clone(), score);
    }
    out
}
