#![allow(dead_code)]

use kosrel::{Article, ArticleStore, CitationGraph, Hierarchy, Month};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random forest with at most `max_nodes` nodes and `max_depth` levels.
pub fn random_hierarchy(rng: &mut impl Rng, max_nodes: usize, max_depth: usize) -> Hierarchy {
    let roots = rng.random_range(1..=4usize);
    let mut codes: Vec<(String, usize, usize)> = (0..roots).map(|i| (((b'A' + i as u8) as char).to_string(), 1, 0)).collect();
    let target = rng.random_range(roots..=max_nodes.max(roots));
    while codes.len() < target {
        let p = rng.random_range(0..codes.len());
        let (code, level, kids) = codes[p].clone();
        if level >= max_depth {
            continue;
        }
        let child = if level == 1 { format!("{code}{:02}", kids + 1) } else { format!("{code}.{:03}", kids + 1) };
        codes[p].2 += 1;
        codes.push((child, level + 1, 0));
    }
    Hierarchy::from_codes(codes.into_iter().map(|c| c.0)).unwrap()
}

/// Store with `n` articles spread over `months` months starting 2014-01.
pub fn monthly_store(n: usize, months: usize) -> ArticleStore {
    let start = Month::new(2014, 1).unwrap();
    let mut store = ArticleStore::new();
    for i in 0..n {
        let month = start.plus((i * months / n) as i64);
        store.insert(Article { id: i as u64 + 1, month, descriptors: Default::default(), retracted: false }).unwrap();
    }
    store
}

/// Random temporal DAG: node `i` cites only nodes with smaller index.
pub fn random_dag(rng: &mut impl Rng, n: usize, p: f64) -> Vec<(u64, u64)> {
    let mut edges = Vec::new();
    for i in 1..n {
        for j in 0..i {
            if rng.random_bool(p) {
                edges.push((i as u64 + 1, j as u64 + 1));
            }
        }
    }
    edges
}

pub fn graph_over(n: usize, edges: &[(u64, u64)]) -> CitationGraph {
    CitationGraph::build_over((1..=n as u64).collect(), edges.iter().copied()).0
}
