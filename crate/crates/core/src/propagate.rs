//! Bottom-up propagation of graph-metric node scores through the hierarchy.
//!
//! Levels are processed deepest first. For every parent of the current
//! level, the children's values are summed and divided by the size of the
//! whole current level (not the parent's child count), then the parent's own
//! seed is added. A leaf child takes its seed as value; a child with neither
//! a seed nor descendants contributes 0. Level-1 nodes are the children of a
//! virtual root whose value is not reported.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::kosmodel::Hierarchy;
use crate::scores::NodeScores;

/// Seed values, keyed by tree code, for the directly mapped nodes.
pub type NodeSeedScores = NodeScores;

/// Propagated value per node, keyed by tree code.
pub type HierarchyScores = NodeScores;

pub fn propagate(h: &Hierarchy, seeds: &NodeSeedScores) -> Result<HierarchyScores> {
    let mut seed: Vec<Option<f64>> = vec![None; h.len()];
    for (code, &v) in seeds {
        let idx = h.index_of(code).ok_or_else(|| Error::UnknownTreeCode(code.to_string()))?;
        seed[idx] = Some(v);
    }
    let values = propagate_indexed(h, &seed);
    Ok(values
        .into_iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|v| (h.code(i).clone(), v)))
        .collect())
}

/// Index-based core of [`propagate`]; `None` marks nodes without a value.
pub fn propagate_indexed(h: &Hierarchy, seed: &[Option<f64>]) -> Vec<Option<f64>> {
    let mut value: Vec<Option<f64>> = vec![None; h.len()];
    for level in (1..=h.max_level()).rev() {
        let nodes = h.level_indices(level);
        if nodes.is_empty() {
            continue;
        }
        let level_size = nodes.len() as f64;
        // unique parents in ascending order; None stands for the virtual root
        let parents: BTreeMap<Option<usize>, ()> = nodes.iter().map(|&n| (h.parent(n), ())).collect();
        for parent in parents.into_keys() {
            let children = match parent {
                Some(p) => h.children(p),
                None => h.roots(),
            };
            let mut pooled = 0.0;
            for &child in children {
                if h.is_leaf(child) {
                    if let Some(s) = seed[child] {
                        value[child] = Some(s);
                    }
                }
                pooled += value[child].unwrap_or(0.0);
            }
            if let Some(p) = parent {
                value[p] = Some(pooled / level_size + seed[p].unwrap_or(0.0));
            }
        }
    }
    value
}
