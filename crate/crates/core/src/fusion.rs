//! Aspect rankings, reciprocal rank fusion and rank trajectories.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::corpus::Month;
use crate::error::{Error, Result};
use crate::kosmodel::TreeCode;
use crate::scores::NodeScores;

pub use crate::scores::{Aspect, AspectScores};

/// The default RRF constant.
pub const RRF_K: u32 = 60;

/// Ordinal rank per node, 1 = best.
pub type Ranks = BTreeMap<TreeCode, u32>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scope {
    Global,
    Level(usize),
}

impl Scope {
    pub fn admits(self, code: &TreeCode) -> bool {
        match self {
            Scope::Global => true,
            Scope::Level(l) => code.level() == l,
        }
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scope::Global => f.write_str("global"),
            Scope::Level(l) => write!(f, "level-{l}"),
        }
    }
}

impl FromStr for Scope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "global" {
            return Ok(Scope::Global);
        }
        s.strip_prefix("level-")
            .and_then(|l| l.parse().ok())
            .filter(|&l| l >= 1)
            .map(Scope::Level)
            .ok_or_else(|| Error::invalid(format!("unknown scope {s:?}")))
    }
}

/// Descending by value, ties by ascending code.
fn order_desc<'a>(values: impl Iterator<Item = (&'a TreeCode, f64)>) -> Vec<(&'a TreeCode, f64)> {
    let mut v: Vec<_> = values.collect();
    v.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    v
}

fn ordinal_ranks<'a>(values: impl Iterator<Item = (&'a TreeCode, f64)>) -> Ranks {
    order_desc(values).into_iter().enumerate().map(|(i, (c, _))| (c.clone(), i as u32 + 1)).collect()
}

/// Ranks the nodes of `scores` that fall in `scope`; the largest value gets
/// rank 1 and ties go to the smaller code.
pub fn rank_by_aspect(scores: &NodeScores, scope: Scope) -> Ranks {
    ordinal_ranks(scores.iter().filter(|(c, _)| scope.admits(c)).map(|(c, &v)| (c, v)))
}

/// Fused relevance of every node for one month and scope.
#[derive(Clone, Debug, PartialEq)]
pub struct RelevanceRanking {
    pub month: Month,
    pub scope: Scope,
    pub rrf: NodeScores,
    pub rank: Ranks,
}

impl RelevanceRanking {
    fn from_values(month: Month, scope: Scope, rrf: NodeScores) -> Self {
        let rank = ordinal_ranks(rrf.iter().map(|(c, &v)| (c, v)));
        RelevanceRanking { month, scope, rrf, rank }
    }

    /// `(code, rrf, rank)` in rank order.
    pub fn ordered(&self) -> Vec<(&TreeCode, f64, u32)> {
        let mut v: Vec<_> = self.rank.iter().map(|(c, &r)| (c, self.rrf[c], r)).collect();
        v.sort_by_key(|&(_, _, r)| r);
        v
    }

    /// Re-ranks the fused values of the nodes at `level`.
    pub fn within_level(&self, level: usize) -> RelevanceRanking {
        let rrf = self.rrf.iter().filter(|(c, _)| c.level() == level).map(|(c, &v)| (c.clone(), v)).collect();
        Self::from_values(self.month, Scope::Level(level), rrf)
    }

    pub fn len(&self) -> usize {
        self.rank.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rank.is_empty()
    }
}

/// `sum_r 1 / (k + rank_r(d))` over the given per-aspect rankings. A node
/// missing from one ranking gets no term from it. Terms are added in the
/// order the rankings are given.
pub fn rrf_fuse(month: Month, scope: Scope, ranks: &[Ranks], k: u32) -> Result<RelevanceRanking> {
    if k == 0 {
        return Err(Error::invalid("rrf k must be positive"));
    }
    let mut rrf: NodeScores = BTreeMap::new();
    for r in ranks {
        for code in r.keys() {
            rrf.entry(code.clone()).or_insert(0.0);
        }
    }
    for (code, total) in rrf.iter_mut() {
        for r in ranks {
            if let Some(&pos) = r.get(code) {
                *total += 1.0 / (k as f64 + pos as f64);
            }
        }
    }
    Ok(RelevanceRanking::from_values(month, scope, rrf))
}

/// Ranks each aspect globally and fuses them in [`Aspect::ALL`] order.
pub fn fuse_aspects(month: Month, aspects: &[AspectScores], k: u32) -> Result<RelevanceRanking> {
    let mut sorted: Vec<&AspectScores> = aspects.iter().collect();
    sorted.sort_by_key(|a| a.aspect);
    let ranks: Vec<Ranks> = sorted.iter().map(|a| rank_by_aspect(&a.values, Scope::Global)).collect();
    rrf_fuse(month, Scope::Global, &ranks, k)
}

/// Mean change between consecutive ranks, `(last - first) / (len - 1)`.
/// Negative means the concept climbs.
pub fn rank_trend_slope(series: &[u32]) -> Result<f64> {
    if series.len() < 2 {
        return Err(Error::invalid("rank trend needs at least two points"));
    }
    let total: i64 = series.windows(2).map(|w| w[1] as i64 - w[0] as i64).sum();
    Ok(total as f64 / (series.len() - 1) as f64)
}

pub fn top_k(r: &RelevanceRanking, k: usize) -> Vec<(TreeCode, u32)> {
    r.ordered().into_iter().take(k).map(|(c, _, p)| (c.clone(), p)).collect()
}

/// Worst-ranked first.
pub fn bottom_k(r: &RelevanceRanking, k: usize) -> Vec<(TreeCode, u32)> {
    r.ordered().into_iter().rev().take(k).map(|(c, _, p)| (c.clone(), p)).collect()
}

/// Mean rank of each node over several rankings, ascending mean then code.
pub fn average_ranks(rankings: &[RelevanceRanking]) -> Vec<(TreeCode, f64)> {
    let mut acc: BTreeMap<&TreeCode, (u64, u32)> = BTreeMap::new();
    for r in rankings {
        for (c, &p) in &r.rank {
            let e = acc.entry(c).or_default();
            e.0 += p as u64;
            e.1 += 1;
        }
    }
    let mut v: Vec<(TreeCode, f64)> =
        acc.into_iter().map(|(c, (sum, n))| (c.clone(), sum as f64 / n as f64)).collect();
    v.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    v
}

pub fn top_k_by_average(rankings: &[RelevanceRanking], k: usize) -> Vec<(TreeCode, f64)> {
    average_ranks(rankings).into_iter().take(k).collect()
}

/// Highest mean rank first.
pub fn bottom_k_by_average(rankings: &[RelevanceRanking], k: usize) -> Vec<(TreeCode, f64)> {
    let mut v = average_ranks(rankings);
    v.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v.truncate(k);
    v
}

/// Integer position of each node when ordered by mean rank over a period.
pub fn period_positions(rankings: &[RelevanceRanking]) -> Ranks {
    average_ranks(rankings).into_iter().enumerate().map(|(i, (c, _))| (c, i as u32 + 1)).collect()
}

/// Slope of each node's yearly position series. Only nodes present in
/// every year are reported.
pub fn trend_slopes(yearly: &[Ranks]) -> Result<BTreeMap<TreeCode, f64>> {
    if yearly.len() < 2 {
        return Err(Error::invalid("rank trend needs at least two years"));
    }
    let mut out = BTreeMap::new();
    'node: for code in yearly[0].keys() {
        let mut series = Vec::with_capacity(yearly.len());
        for y in yearly {
            match y.get(code) {
                Some(&p) => series.push(p),
                None => continue 'node,
            }
        }
        out.insert(code.clone(), rank_trend_slope(&series)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(s: &str) -> TreeCode {
        TreeCode::new(s).unwrap()
    }

    fn scores(pairs: &[(&str, f64)]) -> NodeScores {
        pairs.iter().map(|&(c, v)| (code(c), v)).collect()
    }

    fn month() -> Month {
        "2014-01".parse().unwrap()
    }

    #[test]
    fn ranking_basics() {
        let r = rank_by_aspect(&scores(&[("A", 0.9), ("B", 0.1)]), Scope::Global);
        assert_eq!(r[&code("A")], 1);
        assert_eq!(r[&code("B")], 2);
        let tie = rank_by_aspect(&scores(&[("B", 0.5), ("A", 0.5)]), Scope::Global);
        assert_eq!(tie[&code("A")], 1);
        let neg = rank_by_aspect(&scores(&[("A", -0.2), ("B", 0.0), ("C", 0.3)]), Scope::Global);
        assert_eq!(neg[&code("A")], 3);
        let lvl = rank_by_aspect(&scores(&[("A", 1.0), ("A01", 0.5), ("A02", 0.7)]), Scope::Level(2));
        assert_eq!(lvl.len(), 2);
        assert_eq!(lvl[&code("A02")], 1);
    }

    #[test]
    fn rrf_closed_forms() {
        let one: Ranks = [(code("A"), 1)].into();
        let f = rrf_fuse(month(), Scope::Global, &[one.clone(), one.clone(), one.clone(), one], RRF_K).unwrap();
        assert!((f.rrf[&code("A")] - 4.0 / 61.0).abs() < 1e-15);
        assert!((f.rrf[&code("A")] - 0.065574).abs() < 5e-7);

        let ranks: Vec<Ranks> = (1..=4).map(|p| [(code("A"), p)].into()).collect();
        let f = rrf_fuse(month(), Scope::Global, &ranks, RRF_K).unwrap();
        let direct: f64 = (61..=64).map(|d| 1.0 / d as f64).sum();
        assert!((f.rrf[&code("A")] - direct).abs() < 1e-15);
        assert!((f.rrf[&code("A")] - 0.064020).abs() < 5e-7);
        assert!(rrf_fuse(month(), Scope::Global, &ranks, 0).is_err());
    }

    #[test]
    fn three_firsts_beat_complement() {
        // every placement of X's single second place among four aspects
        for second in 0..4 {
            let ranks: Vec<Ranks> = (0..4)
                .map(|a| {
                    let (x, y) = if a == second { (2, 1) } else { (1, 2) };
                    [(code("X"), x), (code("Y"), y)].into()
                })
                .collect();
            let f = rrf_fuse(month(), Scope::Global, &ranks, RRF_K).unwrap();
            assert_eq!(f.rank[&code("X")], 1);
            assert!(f.rrf[&code("X")] > f.rrf[&code("Y")]);
        }
    }

    #[test]
    fn missing_aspect_contributes_nothing() {
        let a: Ranks = [(code("A"), 1), (code("B"), 2)].into();
        let b: Ranks = [(code("A"), 1)].into();
        let f = rrf_fuse(month(), Scope::Global, &[a, b], RRF_K).unwrap();
        assert_eq!(f.rrf[&code("B")], 1.0 / 62.0);
    }

    #[test]
    fn slopes() {
        assert!((rank_trend_slope(&[5, 3, 3, 1]).unwrap() + 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(rank_trend_slope(&[2, 2, 2]).unwrap(), 0.0);
        assert_eq!(rank_trend_slope(&[1, 2]).unwrap(), 1.0);
        assert!(rank_trend_slope(&[1]).is_err());
    }

    fn ranking(pairs: &[(&str, f64)]) -> RelevanceRanking {
        RelevanceRanking::from_values(month(), Scope::Global, scores(pairs))
    }

    #[test]
    fn top_and_bottom() {
        let r = ranking(&[("A", 0.3), ("B", 0.2), ("C", 0.1)]);
        assert_eq!(top_k(&r, 10).len(), 3);
        assert_eq!(top_k(&r, 1), vec![(code("A"), 1)]);
        assert_eq!(bottom_k(&r, 1), vec![(code("C"), 3)]);
    }

    #[test]
    fn yearly_average() {
        let months = [
            ranking(&[("A", 0.3), ("B", 0.2)]),
            ranking(&[("A", 0.3), ("B", 0.2)]),
            ranking(&[("A", 0.1), ("B", 0.2)]),
        ];
        let avg = average_ranks(&months);
        assert_eq!(avg[0].0, code("A"));
        assert!((avg[0].1 - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(bottom_k_by_average(&months, 1)[0].0, code("B"));
        assert_eq!(top_k_by_average(&months, 1)[0].0, code("A"));
        assert_eq!(period_positions(&months)[&code("B")], 2);
    }

    #[test]
    fn level_slice_reranks() {
        let r = ranking(&[("A", 0.9), ("A01", 0.5), ("A02", 0.7), ("B", 0.1)]);
        let l2 = r.within_level(2);
        assert_eq!(l2.scope, Scope::Level(2));
        assert_eq!(l2.rank[&code("A02")], 1);
        assert_eq!(l2.rank[&code("A01")], 2);
    }

    #[test]
    fn scope_names() {
        for s in [Scope::Global, Scope::Level(3)] {
            assert_eq!(s.to_string().parse::<Scope>().unwrap(), s);
        }
        assert!("level-0".parse::<Scope>().is_err());
    }
}
