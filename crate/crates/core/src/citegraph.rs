//! Directed citation graph stored as a pair of CSR adjacency arrays.
//!
//! Edges run from the citing article to the cited article. Node ids are kept
//! sorted so a node's dense index is its rank among the graph's ids; every
//! operation that derives a new graph (snapshot, sample) preserves that order.

use std::io::{BufRead, Write};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{ArticleStore, Month};
use crate::error::{Error, Result};

/// Counters for edges discarded while building a graph.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BuildStats {
    pub self_loops: usize,
    pub unknown_endpoints: usize,
    pub duplicates: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CitationGraph {
    ids: Vec<u64>,
    out_offsets: Vec<usize>,
    out_targets: Vec<u32>,
    in_offsets: Vec<usize>,
    in_sources: Vec<u32>,
    month: Option<Month>,
    sample_seed: Option<u64>,
}

/// Parses the citations TSV (`citing_id \t cited_id`).
pub fn parse_citations<R: BufRead>(reader: R) -> Result<Vec<(u64, u64)>> {
    let mut edges = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let mut cols = t.split('\t').map(str::trim);
        let (Some(a), Some(b), None) = (cols.next(), cols.next(), cols.next()) else {
            return Err(Error::parse(lineno, "expected `citing_id<TAB>cited_id`"));
        };
        let citing = a.parse().map_err(|_| Error::parse(lineno, format!("bad article id {a:?}")))?;
        let cited = b.parse().map_err(|_| Error::parse(lineno, format!("bad article id {b:?}")))?;
        edges.push((citing, cited));
    }
    Ok(edges)
}

/// Writes edges in the format [`parse_citations`] reads.
pub fn write_citations<W: Write>(edges: &[(u64, u64)], mut w: W) -> Result<()> {
    writeln!(w, "# citing_id\tcited_id")?;
    for (citing, cited) in edges {
        writeln!(w, "{citing}\t{cited}")?;
    }
    Ok(())
}

fn csr(n: usize, pairs: &[(u32, u32)]) -> (Vec<usize>, Vec<u32>) {
    let mut offsets = vec![0usize; n + 1];
    for &(s, _) in pairs {
        offsets[s as usize + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut fill = offsets.clone();
    let mut targets = vec![0u32; pairs.len()];
    for &(s, t) in pairs {
        targets[fill[s as usize]] = t;
        fill[s as usize] += 1;
    }
    (offsets, targets)
}

impl CitationGraph {
    /// Assembles a graph from sorted ids and deduplicated index pairs.
    fn from_index_pairs(ids: Vec<u64>, mut pairs: Vec<(u32, u32)>) -> Self {
        let n = ids.len();
        pairs.sort_unstable();
        let (out_offsets, out_targets) = csr(n, &pairs);
        let mut rev: Vec<(u32, u32)> = pairs.iter().map(|&(s, t)| (t, s)).collect();
        rev.sort_unstable();
        let (in_offsets, in_sources) = csr(n, &rev);
        CitationGraph {
            ids,
            out_offsets,
            out_targets,
            in_offsets,
            in_sources,
            month: None,
            sample_seed: None,
        }
    }

    /// Builds the graph over every article in `store`. Self-citations and
    /// edges touching unknown ids are dropped; repeated edges are collapsed.
    pub fn build<I>(edges: I, store: &ArticleStore) -> (Self, BuildStats)
    where
        I: IntoIterator<Item = (u64, u64)>,
    {
        let ids: Vec<u64> = store.iter().map(|a| a.id).collect();
        Self::build_over(ids, edges)
    }

    /// Like [`CitationGraph::build`] but over an explicit, sorted id list.
    pub fn build_over<I>(mut ids: Vec<u64>, edges: I) -> (Self, BuildStats)
    where
        I: IntoIterator<Item = (u64, u64)>,
    {
        ids.sort_unstable();
        ids.dedup();
        assert!(ids.len() <= u32::MAX as usize, "graph too large for u32 indices");
        let mut stats = BuildStats::default();
        let mut pairs = Vec::new();
        for (citing, cited) in edges {
            if citing == cited {
                stats.self_loops += 1;
                continue;
            }
            match (ids.binary_search(&citing), ids.binary_search(&cited)) {
                (Ok(s), Ok(t)) => pairs.push((s as u32, t as u32)),
                _ => stats.unknown_endpoints += 1,
            }
        }
        let before = pairs.len();
        pairs.sort_unstable();
        pairs.dedup();
        stats.duplicates = before - pairs.len();
        (Self::from_index_pairs(ids, pairs), stats)
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out_targets.len()
    }

    /// Sorted article ids; position = dense node index.
    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn id(&self, idx: usize) -> u64 {
        self.ids[idx]
    }

    pub fn index_of(&self, id: u64) -> Option<usize> {
        self.ids.binary_search(&id).ok()
    }

    pub fn contains(&self, id: u64) -> bool {
        self.index_of(id).is_some()
    }

    pub fn month(&self) -> Option<Month> {
        self.month
    }

    pub fn sample_seed(&self) -> Option<u64> {
        self.sample_seed
    }

    /// Indices of the articles `idx` cites, ascending.
    #[inline]
    pub fn cited_by_index(&self, idx: usize) -> &[u32] {
        &self.out_targets[self.out_offsets[idx]..self.out_offsets[idx + 1]]
    }

    /// Indices of the articles citing `idx`, ascending.
    #[inline]
    pub fn citing_index(&self, idx: usize) -> &[u32] {
        &self.in_sources[self.in_offsets[idx]..self.in_offsets[idx + 1]]
    }

    #[inline]
    pub fn out_degree(&self, idx: usize) -> usize {
        self.out_offsets[idx + 1] - self.out_offsets[idx]
    }

    #[inline]
    pub fn in_degree(&self, idx: usize) -> usize {
        self.in_offsets[idx + 1] - self.in_offsets[idx]
    }

    /// References of `id`: the articles it cites.
    pub fn successors_of(&self, id: u64) -> Result<Vec<u64>> {
        let i = self.index_of(id).ok_or(Error::UnknownArticle(id))?;
        Ok(self.cited_by_index(i).iter().map(|&t| self.ids[t as usize]).collect())
    }

    /// Articles citing `id`.
    pub fn predecessors_of(&self, id: u64) -> Result<Vec<u64>> {
        let i = self.index_of(id).ok_or(Error::UnknownArticle(id))?;
        Ok(self.citing_index(i).iter().map(|&s| self.ids[s as usize]).collect())
    }

    pub fn has_edge(&self, citing: u64, cited: u64) -> bool {
        match (self.index_of(citing), self.index_of(cited)) {
            (Some(s), Some(t)) => self.cited_by_index(s).binary_search(&(t as u32)).is_ok(),
            _ => false,
        }
    }

    /// All edges as `(citing, cited)` ids in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        (0..self.node_count()).flat_map(move |s| {
            self.cited_by_index(s).iter().map(move |&t| (self.ids[s], self.ids[t as usize]))
        })
    }

    /// Subgraph induced by the nodes whose flag is set.
    pub fn induced(&self, keep: &[bool]) -> CitationGraph {
        assert_eq!(keep.len(), self.node_count());
        let mut remap = vec![u32::MAX; self.node_count()];
        let mut ids = Vec::new();
        for (i, &k) in keep.iter().enumerate() {
            if k {
                remap[i] = ids.len() as u32;
                ids.push(self.ids[i]);
            }
        }
        let n = ids.len();
        let mut out_offsets = Vec::with_capacity(n + 1);
        let mut out_targets = Vec::new();
        out_offsets.push(0);
        for (i, &k) in keep.iter().enumerate() {
            if !k {
                continue;
            }
            // targets stay sorted because remap is monotone
            out_targets.extend(
                self.cited_by_index(i).iter().map(|&t| remap[t as usize]).filter(|&t| t != u32::MAX),
            );
            out_offsets.push(out_targets.len());
        }
        let mut in_offsets = Vec::with_capacity(n + 1);
        let mut in_sources = Vec::with_capacity(out_targets.len());
        in_offsets.push(0);
        for (i, &k) in keep.iter().enumerate() {
            if !k {
                continue;
            }
            in_sources.extend(
                self.citing_index(i).iter().map(|&s| remap[s as usize]).filter(|&s| s != u32::MAX),
            );
            in_offsets.push(in_sources.len());
        }
        CitationGraph {
            ids,
            out_offsets,
            out_targets,
            in_offsets,
            in_sources,
            month: self.month,
            sample_seed: self.sample_seed,
        }
    }

    /// Subgraph induced by the articles published in or before `month`.
    pub fn cumulative_snapshot(&self, store: &ArticleStore, month: Month) -> CitationGraph {
        let keep: Vec<bool> = self
            .ids
            .iter()
            .map(|&id| store.month_of(id).is_some_and(|m| m <= month))
            .collect();
        let mut g = self.induced(&keep);
        g.month = Some(month);
        g
    }

    /// Keeps `floor(fraction * n)` nodes chosen uniformly at random, along
    /// with every edge whose endpoints both survive.
    ///
    /// Selection: node indices in ascending id order are shuffled with a
    /// Fisher-Yates pass driven by ChaCha8 seeded from `seed`, and the
    /// prefix is kept. See [`seeded_shuffle`].
    pub fn sample_nodes(&self, fraction: f64, seed: u64) -> Result<CitationGraph> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::invalid(format!("sample fraction {fraction} outside (0, 1]")));
        }
        if fraction == 1.0 {
            return Ok(self.clone());
        }
        let n = self.node_count();
        let take = (fraction * n as f64).floor() as usize;
        let mut order: Vec<u32> = (0..n as u32).collect();
        seeded_shuffle(&mut order, seed);
        let mut keep = vec![false; n];
        for &i in &order[..take] {
            keep[i as usize] = true;
        }
        let mut g = self.induced(&keep);
        g.sample_seed = Some(seed);
        Ok(g)
    }
}

/// Uniform integer in `[0, bound)` by rejection on the top of the u64 range.
fn bounded(rng: &mut ChaCha8Rng, bound: u64) -> u64 {
    let zone = u64::MAX - (u64::MAX - bound + 1) % bound;
    loop {
        let v = rng.next_u64();
        if v <= zone {
            return v % bound;
        }
    }
}

/// In-place Fisher-Yates shuffle, `i` from the last index down to 1, swapping
/// with a uniform `j` in `[0, i]`. Deterministic for a given seed.
pub fn seeded_shuffle<T>(items: &mut [T], seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..items.len()).rev() {
        let j = bounded(&mut rng, i as u64 + 1) as usize;
        items.swap(i, j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Article;

    fn store(rows: &[(u64, &str)]) -> ArticleStore {
        let mut s = ArticleStore::new();
        for &(id, m) in rows {
            s.insert(Article { id, month: m.parse().unwrap(), descriptors: Default::default(), retracted: false })
                .unwrap();
        }
        s
    }

    fn check_invariants(g: &CitationGraph) {
        let mut out_total = 0;
        let mut in_total = 0;
        for i in 0..g.node_count() {
            out_total += g.out_degree(i);
            in_total += g.in_degree(i);
            for &t in g.cited_by_index(i) {
                assert!(g.citing_index(t as usize).contains(&(i as u32)));
                assert_ne!(t as usize, i);
            }
        }
        assert_eq!(out_total, g.edge_count());
        assert_eq!(in_total, g.edge_count());
    }

    #[test]
    fn single_edge() {
        let s = store(&[(1, "2014-01"), (2, "2014-02")]);
        let (g, stats) = CitationGraph::build([(2, 1)], &s);
        assert_eq!(stats, BuildStats::default());
        assert_eq!(g.successors_of(2).unwrap(), vec![1]);
        assert_eq!(g.predecessors_of(1).unwrap(), vec![2]);
        assert!(g.successors_of(1).unwrap().is_empty());
        assert!(g.predecessors_of(99).is_err());
        check_invariants(&g);
    }

    #[test]
    fn drops_self_loops_unknown_and_duplicates() {
        let s = store(&[(1, "2014-01"), (2, "2014-02")]);
        let (g, stats) = CitationGraph::build([(1, 1), (2, 1), (2, 1), (2, 9)], &s);
        assert_eq!(stats, BuildStats { self_loops: 1, unknown_endpoints: 1, duplicates: 1 });
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn isolated_node() {
        let s = store(&[(5, "2014-01")]);
        let (g, _) = CitationGraph::build([], &s);
        assert!(g.successors_of(5).unwrap().is_empty());
        assert!(g.predecessors_of(5).unwrap().is_empty());
    }

    #[test]
    fn snapshots() {
        let s = store(&[(1, "2014-01"), (2, "2014-02")]);
        let (g, _) = CitationGraph::build([(2, 1)], &s);
        let jan = g.cumulative_snapshot(&s, "2014-01".parse().unwrap());
        assert_eq!(jan.ids(), &[1]);
        assert_eq!(jan.edge_count(), 0);
        let feb = g.cumulative_snapshot(&s, "2014-02".parse().unwrap());
        assert_eq!(feb.ids(), &[1, 2]);
        assert!(feb.has_edge(2, 1));
        check_invariants(&feb);
    }

    #[test]
    fn sample_identity_and_determinism() {
        let s = store(&(1..=10).map(|i| (i, "2014-01")).collect::<Vec<_>>());
        let edges: Vec<_> = (2..=10).map(|i| (i, i - 1)).collect();
        let (g, _) = CitationGraph::build(edges, &s);
        assert_eq!(g.sample_nodes(1.0, 3).unwrap(), g);
        let a = g.sample_nodes(0.5, 42).unwrap();
        let b = g.sample_nodes(0.5, 42).unwrap();
        assert_eq!(a.node_count(), 5);
        assert_eq!(a, b);
        check_invariants(&a);
        assert!(g.sample_nodes(0.0, 1).is_err());
        assert!(g.sample_nodes(1.5, 1).is_err());
        assert!(g.sample_nodes(f64::NAN, 1).is_err());
    }

    #[test]
    fn complete_digraph_sample_keeps_induced_edges() {
        let s = store(&(1..=4).map(|i| (i, "2014-01")).collect::<Vec<_>>());
        let edges: Vec<_> =
            (1..=4).flat_map(|a| (1..=4).filter(move |&b| b != a).map(move |b| (a, b))).collect();
        let (g, _) = CitationGraph::build(edges, &s);
        assert_eq!(g.edge_count(), 12);
        for seed in 0..20 {
            let h = g.sample_nodes(0.5, seed).unwrap();
            assert_eq!(h.node_count(), 2);
            assert_eq!(h.edge_count(), 2);
        }
    }

    #[test]
    fn parse_rows() {
        let edges = parse_citations("# c\n2\t1\n3 \t 1\n".as_bytes()).unwrap();
        assert_eq!(edges, vec![(2, 1), (3, 1)]);
        assert!(matches!(parse_citations("2\tx\n".as_bytes()), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_citations("2\n".as_bytes()), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn shuffle_is_a_permutation() {
        let mut v: Vec<u32> = (0..100).collect();
        seeded_shuffle(&mut v, 9);
        let mut sorted = v.clone();
        sorted.sort();
        assert_eq!(sorted, (0..100).collect::<Vec<_>>());
        assert_ne!(v, sorted);
    }
}
