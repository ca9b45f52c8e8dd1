mod common;

use std::collections::BTreeSet;

use common::{graph_over, random_dag, random_hierarchy, rng};
use kosrel::fusion::{rank_by_aspect, rrf_fuse, Ranks, RRF_K};
use kosrel::graphmetrics::{disruption_counts, disruption_of, pagerank, DisruptionCounts, PageRankParams};
use kosrel::infometrics::{informativeness, mapping_counts, ArticleMapping, InformativenessMode, MappingMatrix};
use kosrel::kosmodel::parse_hierarchy;
use kosrel::propagate::propagate;
use kosrel::{Hierarchy, Month, NodeScores, Scope, TreeCode};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn random_seeds(r: &mut impl Rng, h: &Hierarchy, density: f64) -> NodeScores {
    let mut out = NodeScores::new();
    for c in h.codes() {
        if r.random_bool(density) {
            out.insert(c.clone(), r.random_range(-5.0..5.0));
        }
    }
    out
}

fn random_mappings(r: &mut impl Rng, h: &Hierarchy, articles: usize) -> Vec<ArticleMapping> {
    (0..articles)
        .map(|a| {
            let k = r.random_range(0..4);
            let mut nodes: Vec<usize> = (0..k).map(|_| r.random_range(0..h.len())).collect();
            nodes.sort_unstable();
            nodes.dedup();
            ArticleMapping { article: a as u64 + 1, nodes }
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hierarchy_structure(seed in any::<u64>()) {
        let h = random_hierarchy(&mut rng(seed), 120, 6);
        for i in 0..h.len() {
            if let Some(p) = h.parent(i) {
                prop_assert_eq!(h.level(p) + 1, h.level(i));
            } else {
                prop_assert_eq!(h.level(i), 1);
            }
        }
        let mut seen = BTreeSet::new();
        let mut stack: Vec<usize> = h.roots().to_vec();
        while let Some(n) = stack.pop() {
            seen.insert(n);
            stack.extend_from_slice(h.children(n));
        }
        prop_assert_eq!(seen.len(), h.len());
    }

    #[test]
    fn hierarchy_round_trip(seed in any::<u64>()) {
        let h = random_hierarchy(&mut rng(seed), 80, 5);
        let mut buf = Vec::new();
        h.write_tsv(&mut buf).unwrap();
        let (again, _) = parse_hierarchy(buf.as_slice()).unwrap();
        prop_assert_eq!(&again, &h);
        let mut buf2 = Vec::new();
        again.write_tsv(&mut buf2).unwrap();
        prop_assert_eq!(buf, buf2);
    }

    #[test]
    fn csr_degree_sums(seed in any::<u64>()) {
        let mut r = rng(seed);
        let edges = random_dag(&mut r, 60, 0.1);
        let g = graph_over(60, &edges);
        let out: usize = (0..g.node_count()).map(|i| g.out_degree(i)).sum();
        let inn: usize = (0..g.node_count()).map(|i| g.in_degree(i)).sum();
        prop_assert_eq!(out, g.edge_count());
        prop_assert_eq!(inn, g.edge_count());
        prop_assert_eq!(g.edge_count(), edges.len());
    }

    #[test]
    fn snapshots_grow(seed in any::<u64>()) {
        let mut r = rng(seed);
        let store = common::monthly_store(80, 6);
        let edges = random_dag(&mut r, 80, 0.08);
        let (g, _) = kosrel::CitationGraph::build(edges, &store);
        let start = Month::new(2014, 1).unwrap();
        let snaps: Vec<_> = (0..6).map(|m| g.cumulative_snapshot(&store, start.plus(m))).collect();
        for w in snaps.windows(2) {
            let a: BTreeSet<_> = w[0].edges().collect();
            let b: BTreeSet<_> = w[1].edges().collect();
            prop_assert!(a.is_subset(&b));
            prop_assert!(w[0].ids().iter().all(|&id| w[1].contains(id)));
        }
        prop_assert_eq!(snaps[5].edge_count(), g.edge_count());
    }

    #[test]
    fn entropy_terms(seed in any::<u64>()) {
        let mut r = rng(seed);
        let h = random_hierarchy(&mut r, 60, 4);
        let maps = random_mappings(&mut r, &h, 40);
        let counts = mapping_counts(&h, &maps).unwrap();
        let ent = informativeness(&h, &counts, InformativenessMode::EntropyTerm);
        let sur = informativeness(&h, &counts, InformativenessMode::Surprisal);
        for level in 1..=h.max_level() {
            let nodes = h.level_indices(level);
            let total: u64 = nodes.iter().map(|&n| counts.propagated[n]).sum();
            if total == 0 {
                continue;
            }
            let mut shannon = 0.0;
            let mut nonzero = 0;
            for &n in nodes {
                let c = counts.propagated[n];
                if c > 0 {
                    let p = c as f64 / total as f64;
                    shannon -= p * p.log2();
                    nonzero += 1;
                }
            }
            let sum: f64 = nodes.iter().map(|&n| ent[h.code(n)]).sum();
            prop_assert!((sum - shannon).abs() < 1e-12);
            prop_assert!(shannon <= (nonzero as f64).log2() + 1e-12);
        }
        let cap = std::f64::consts::LOG2_E / std::f64::consts::E;
        prop_assert!(ent.values().all(|&v| (0.0..=cap + 1e-15).contains(&v)));
        prop_assert!(sur.values().all(|&v| v >= 0.0));
    }

    #[test]
    fn matrix_parent_rows_cover_children(seed in any::<u64>()) {
        let mut r = rng(seed);
        let h = random_hierarchy(&mut r, 60, 5);
        let m = MappingMatrix::build(&h, &random_mappings(&mut r, &h, 30)).unwrap();
        for n in 0..h.len() {
            if let Some(p) = h.parent(n) {
                let parent: BTreeSet<_> = m.rows[p].iter().collect();
                prop_assert!(m.rows[n].iter().all(|c| parent.contains(c)));
            }
        }
    }

    #[test]
    fn disruption_bounds_and_k_citers(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = 50;
        let mut edges = random_dag(&mut r, n, 0.1);
        let g = graph_over(n, &edges);
        for &id in g.ids() {
            let d = disruption_of(&g, id).unwrap();
            prop_assert!((-1.0..=1.0).contains(&d));
        }
        // add a citer of one reference of a focal article with nonzero D
        let focal = g.ids().iter().copied().find(|&id| {
            disruption_of(&g, id).unwrap() != 0.0 && !g.successors_of(id).unwrap().is_empty()
        });
        if let Some(focal) = focal {
            let reference = g.successors_of(focal).unwrap()[0];
            let before = disruption_counts(&g, focal).unwrap();
            let newcomer = n as u64 + 1;
            edges.push((newcomer, reference));
            let g2 = graph_over(n + 1, &edges);
            let after = disruption_counts(&g2, focal).unwrap();
            prop_assert_eq!(after.n_k, before.n_k + 1);
            prop_assert!(after.index().abs() < before.index().abs());
        }
    }

    #[test]
    fn disruption_sign_flip(i in 0usize..50, j in 0usize..50, k in 0usize..50) {
        let a = DisruptionCounts { n_i: i, n_j: j, n_k: k }.index();
        let b = DisruptionCounts { n_i: j, n_j: i, n_k: k }.index();
        prop_assert_eq!(a, -b);
    }

    #[test]
    fn pagerank_floor(seed in any::<u64>(), alpha in 0.05f64..0.95) {
        let mut r = rng(seed);
        let g = graph_over(40, &random_dag(&mut r, 40, 0.1));
        let params = PageRankParams { alpha, ..Default::default() };
        let res = pagerank(&g, &params).unwrap();
        let beta = 1.0 - alpha;
        prop_assert!(res.scores.values.iter().all(|&x| x >= beta - 1e-12));
    }

    #[test]
    fn propagation_is_linear(seed in any::<u64>(), a in -3.0f64..3.0) {
        let mut r = rng(seed);
        let h = random_hierarchy(&mut r, 100, 6);
        let s1 = random_seeds(&mut r, &h, 0.4);
        let s2 = random_seeds(&mut r, &h, 0.4);
        let p1 = propagate(&h, &s1).unwrap();
        let p2 = propagate(&h, &s2).unwrap();
        let scaled: NodeScores = s1.iter().map(|(c, v)| (c.clone(), a * v)).collect();
        let ps = propagate(&h, &scaled).unwrap();
        for (c, v) in &p1 {
            prop_assert!((ps[c] - a * v).abs() <= 1e-9 * (1.0 + v.abs()));
        }
        let mut sum = s1.clone();
        for (c, v) in &s2 {
            *sum.entry(c.clone()).or_insert(0.0) += v;
        }
        let psum = propagate(&h, &sum).unwrap();
        for (c, v) in &psum {
            let expect = p1.get(c).unwrap_or(&0.0) + p2.get(c).unwrap_or(&0.0);
            prop_assert!((v - expect).abs() <= 1e-9 * (1.0 + expect.abs()));
        }
    }

    #[test]
    fn propagation_is_monotone(seed in any::<u64>(), bump in 0.0f64..10.0) {
        let mut r = rng(seed);
        let h = random_hierarchy(&mut r, 100, 6);
        let seeds = random_seeds(&mut r, &h, 0.5);
        let base = propagate(&h, &seeds).unwrap();
        let target = h.code(r.random_range(0..h.len())).clone();
        let mut raised = seeds.clone();
        *raised.entry(target.clone()).or_insert(0.0) += bump;
        let up = propagate(&h, &raised).unwrap();
        for anc in target.ancestors() {
            prop_assert!(up[&anc] >= base[&anc]);
        }
    }

    #[test]
    fn propagation_ignores_input_order(seed in any::<u64>()) {
        let mut r = rng(seed);
        let h = random_hierarchy(&mut r, 100, 6);
        let mut codes: Vec<String> = h.codes().iter().map(|c| c.to_string()).collect();
        codes.shuffle(&mut r);
        let shuffled = Hierarchy::from_codes(codes).unwrap();
        let seeds = random_seeds(&mut r, &h, 0.5);
        prop_assert_eq!(propagate(&h, &seeds).unwrap(), propagate(&shuffled, &seeds).unwrap());
    }

    #[test]
    fn rrf_range_and_monotonicity(seed in any::<u64>()) {
        let mut r = rng(seed);
        let codes: Vec<TreeCode> = (0..30).map(|i| TreeCode::new(format!("A{:02}", i + 1)).unwrap()).collect();
        let ranks: Vec<Ranks> = (0..4)
            .map(|_| {
                let scores: NodeScores = codes.iter().map(|c| (c.clone(), r.random_range(0.0..1.0))).collect();
                rank_by_aspect(&scores, Scope::Global)
            })
            .collect();
        let m = Month::new(2014, 1).unwrap();
        let f = rrf_fuse(m, Scope::Global, &ranks, RRF_K).unwrap();
        let cap = 4.0 / (RRF_K as f64 + 1.0);
        prop_assert!(f.rrf.values().all(|&v| v > 0.0 && v <= cap + 1e-15));

        // improve one aspect rank of one node by swapping with its better neighbour
        let aspect = r.random_range(0..4);
        let (node, &pos) = ranks[aspect].iter().find(|(_, &p)| p > 1).unwrap();
        let mut better = ranks.clone();
        better[aspect].insert(node.clone(), pos - 1);
        let g = rrf_fuse(m, Scope::Global, &better, RRF_K).unwrap();
        prop_assert!(g.rrf[node] > f.rrf[node]);
    }

    #[test]
    fn ranks_follow_scores(seed in any::<u64>()) {
        let mut r = rng(seed);
        let scores: NodeScores = (0..40)
            .map(|i| (TreeCode::new(format!("B{:02}", i + 1)).unwrap(), (r.random_range(0..10) as f64) / 3.0))
            .collect();
        let ranks = rank_by_aspect(&scores, Scope::Global);
        let mut by_rank: Vec<(&TreeCode, u32)> = ranks.iter().map(|(c, &p)| (c, p)).collect();
        by_rank.sort_by_key(|&(_, p)| p);
        let positions: Vec<u32> = by_rank.iter().map(|&(_, p)| p).collect();
        prop_assert_eq!(positions, (1..=40).collect::<Vec<u32>>());
        for w in by_rank.windows(2) {
            prop_assert!(scores[w[0].0] >= scores[w[1].0]);
        }
    }
}
