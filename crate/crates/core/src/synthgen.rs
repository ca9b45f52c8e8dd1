//! Deterministic synthetic corpora: a hierarchy with descriptors, monthly
//! articles with heavy-tailed descriptor usage, backward-in-time citations
//! with preferential attachment, planted evolving descriptors and retraction
//! flags.

use std::collections::BTreeSet;

use rand::distr::weighted::WeightedIndex;
use rand::distr::{Bernoulli, Distribution};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{LogNormal, Poisson};
use serde::{Deserialize, Serialize};

use crate::corpus::{Article, ArticleStore, Month};
use crate::error::{Error, Result};
use crate::evaluate::{ChangeRecord, ChangeType};
use crate::kosmodel::{Hierarchy, HierarchyBuilder, TreeCode, MAX_CATEGORIES, MESH_CATEGORIES};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub start_month: Month,
    pub months: usize,
    pub articles_per_month: usize,
    /// Number of categories, then children per node for each deeper level.
    pub branching: Vec<usize>,
    /// Chance that a tree node joins an existing descriptor instead of
    /// starting a new one.
    pub multi_mapping_fraction: f64,
    /// Log-scale spread of descriptor popularity.
    pub usage_sigma: f64,
    pub descriptors_per_article: f64,
    /// Citation weight of an article is `(in_degree + 1) ^ exponent`.
    pub pa_exponent: f64,
    /// Mean of the Poisson number of references per article.
    pub refs_mean: f64,
    /// Share of descriptors changed in each `AA` release.
    pub evolving_fraction: f64,
    /// Popularity multiplier applied to evolving descriptors.
    pub usage_boost: f64,
    pub retraction_rate: f64,
    /// Retracted articles draw descriptors with popularity raised to this power.
    pub retraction_bias: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            seed: 1,
            start_month: Month::new(2014, 1).expect("valid month"),
            months: 24,
            articles_per_month: 5_000,
            branching: vec![16, 8, 6, 5],
            multi_mapping_fraction: 0.05,
            usage_sigma: 1.0,
            descriptors_per_article: 6.0,
            pa_exponent: 1.0,
            refs_mean: 20.0,
            evolving_fraction: 0.01,
            usage_boost: 2.5,
            retraction_rate: 0.005,
            retraction_bias: 1.5,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let rate = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::InfeasibleScenario(format!("{name} = {v} is not in [0, 1]")))
            }
        };
        rate("multi_mapping_fraction", self.multi_mapping_fraction)?;
        rate("evolving_fraction", self.evolving_fraction)?;
        rate("retraction_rate", self.retraction_rate)?;
        let bad = |msg: String| Err(Error::InfeasibleScenario(msg));
        if self.months == 0 || self.articles_per_month == 0 {
            return bad("months and articles_per_month must be positive".into());
        }
        if self.branching.is_empty() || self.branching.contains(&0) {
            return bad("branching factors must be at least 1".into());
        }
        if self.branching[0] > MAX_CATEGORIES {
            return bad(format!("at most {MAX_CATEGORIES} categories"));
        }
        if self.branching.get(1).is_some_and(|&b| b > 99) || self.branching.iter().skip(2).any(|&b| b > 999) {
            return bad("branching exceeds the tree-code segment width".into());
        }
        if self.branching.len() < 2 {
            return bad("hierarchy needs at least two levels to carry descriptors".into());
        }
        for (name, v) in [
            ("usage_sigma", self.usage_sigma),
            ("pa_exponent", self.pa_exponent),
            ("refs_mean", self.refs_mean),
            ("retraction_bias", self.retraction_bias),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be a finite non-negative number"));
            }
        }
        if !(self.usage_boost.is_finite() && self.usage_boost > 0.0) {
            return bad("usage_boost must be positive".into());
        }
        if !(self.descriptors_per_article.is_finite() && self.descriptors_per_article >= 1.0) {
            return bad("descriptors_per_article must be at least 1".into());
        }
        if self.months > 1 && self.refs_mean > self.articles_per_month as f64 {
            return bad(format!(
                "refs_mean {} exceeds the {} articles available to the first citing month",
                self.refs_mean, self.articles_per_month
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub hierarchy: Hierarchy,
    pub store: ArticleStore,
    /// `(citing, cited)` in generation order.
    pub edges: Vec<(u64, u64)>,
    pub changes: Vec<ChangeRecord>,
    /// Descriptors planted as evolving, across all releases.
    pub evolving: BTreeSet<String>,
}

fn build_hierarchy(cfg: &ScenarioConfig, rng: &mut ChaCha8Rng) -> Result<Hierarchy> {
    let mut level: Vec<String> = MESH_CATEGORIES[..cfg.branching[0]].iter().map(|c| c.to_string()).collect();
    let mut all: Vec<String> = level.clone();
    for (depth, &b) in cfg.branching.iter().enumerate().skip(1) {
        let mut next = Vec::with_capacity(level.len() * b);
        for parent in &level {
            for k in 1..=b {
                next.push(if depth == 1 { format!("{parent}{k:02}") } else { format!("{parent}.{k:03}") });
            }
        }
        all.extend(next.iter().cloned());
        level = next;
    }
    all.sort();

    let mut builder = HierarchyBuilder::new();
    let mut descriptors: Vec<String> = Vec::new();
    for code in all {
        let tc = TreeCode::new(code)?;
        if tc.level() == 1 {
            builder.node(tc, "");
            continue;
        }
        let descriptor = if !descriptors.is_empty() && rng.random_bool(cfg.multi_mapping_fraction) {
            descriptors[rng.random_range(0..descriptors.len())].clone()
        } else {
            let d = format!("D{:06}", descriptors.len() + 1);
            descriptors.push(d.clone());
            d
        };
        let label = format!("Concept {descriptor}");
        builder.node(tc.clone(), &label);
        builder.map(tc, &descriptor);
    }
    builder.build()
}

/// Fenwick tree over non-negative weights with prefix-bounded sampling.
struct Fenwick {
    tree: Vec<f64>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Fenwick { tree: vec![0.0; n + 1] }
    }

    fn add(&mut self, idx: usize, delta: f64) {
        let mut i = idx + 1;
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    fn prefix(&self, count: usize) -> f64 {
        let mut i = count;
        let mut s = 0.0;
        while i > 0 {
            s += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        s
    }

    /// Smallest index whose inclusive prefix sum exceeds `target`.
    fn find(&self, mut target: f64) -> usize {
        let mut pos = 0;
        let mut step = (self.tree.len() - 1).next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && self.tree[next] <= target {
                pos = next;
                target -= self.tree[next];
            }
            step >>= 1;
        }
        pos
    }
}

fn sample_distinct<R: Rng>(rng: &mut R, dist: &WeightedIndex<f64>, k: usize, out: &mut Vec<usize>) {
    out.clear();
    let mut tries = 0;
    while out.len() < k && tries < 20 * k {
        let d = dist.sample(rng);
        if !out.contains(&d) {
            out.push(d);
        }
        tries += 1;
    }
}

pub fn generate(cfg: &ScenarioConfig) -> Result<Scenario> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let hierarchy = build_hierarchy(cfg, &mut rng)?;
    let descriptors: Vec<String> = hierarchy.descriptors().map(|(d, _)| d.to_string()).collect();

    // planted changes: one AA release per year with changes, AB releases empty
    let last = cfg.start_month.plus(cfg.months as i64 - 1);
    let per_release = (cfg.evolving_fraction * descriptors.len() as f64).round() as usize;
    let mut pool: Vec<usize> = (0..descriptors.len()).collect();
    pool.shuffle(&mut rng);
    let mut pool = pool.into_iter();
    let mut changes = Vec::new();
    let mut evolving = BTreeSet::new();
    for year in cfg.start_month.year()..=last.year() {
        let release = format!("{year}AA");
        let mut batch: Vec<usize> = pool.by_ref().take(per_release).collect();
        batch.sort_unstable();
        for d in batch {
            let change_type = ChangeType::ALL[rng.random_range(0..ChangeType::ALL.len())];
            changes.push(ChangeRecord { release: release.clone(), descriptor: descriptors[d].clone(), change_type });
            evolving.insert(descriptors[d].clone());
        }
    }

    let popularity = LogNormal::new(0.0, cfg.usage_sigma).map_err(|e| Error::InfeasibleScenario(e.to_string()))?;
    let weights: Vec<f64> = descriptors
        .iter()
        .map(|d| {
            let w: f64 = popularity.sample(&mut rng);
            if evolving.contains(d) { w * cfg.usage_boost } else { w }
        })
        .collect();
    let usual = WeightedIndex::new(&weights).map_err(|e| Error::InfeasibleScenario(e.to_string()))?;
    let biased = WeightedIndex::new(weights.iter().map(|w| w.powf(cfg.retraction_bias)))
        .map_err(|e| Error::InfeasibleScenario(e.to_string()))?;
    let extra_descriptors = Poisson::new(cfg.descriptors_per_article - 1.0).ok();
    let references = Poisson::new(cfg.refs_mean).ok();
    let retraction = Bernoulli::new(cfg.retraction_rate).map_err(|e| Error::InfeasibleScenario(e.to_string()))?;

    let total = cfg.months * cfg.articles_per_month;
    let mut store = ArticleStore::new();
    let mut edges = Vec::with_capacity((total as f64 * cfg.refs_mean) as usize);
    let mut fenwick = Fenwick::new(total);
    let mut in_degree = vec![0u32; total];
    let attach = |d: u32| (d as f64 + 1.0).powf(cfg.pa_exponent);
    let mut picked = Vec::new();
    let mut cited: Vec<usize> = Vec::new();

    for m in 0..cfg.months {
        let month = cfg.start_month.plus(m as i64);
        let prior = m * cfg.articles_per_month;
        for k in 0..cfg.articles_per_month {
            let idx = prior + k;
            let id = idx as u64 + 1;
            let retracted = retraction.sample(&mut rng);
            let n_desc = 1 + extra_descriptors.map_or(0, |p| p.sample(&mut rng) as usize);
            sample_distinct(&mut rng, if retracted { &biased } else { &usual }, n_desc, &mut picked);
            let article_descriptors = picked.iter().map(|&d| descriptors[d].clone()).collect();

            if prior > 0 {
                let n_refs = references.map_or(0, |p| p.sample(&mut rng) as usize).min(prior);
                cited.clear();
                let mut tries = 0;
                while cited.len() < n_refs && tries < 20 * n_refs {
                    tries += 1;
                    let mass = fenwick.prefix(prior);
                    let target = rng.random::<f64>() * mass;
                    let t = fenwick.find(target).min(prior - 1);
                    if !cited.contains(&t) {
                        cited.push(t);
                        let old = attach(in_degree[t]);
                        in_degree[t] += 1;
                        fenwick.add(t, attach(in_degree[t]) - old);
                    }
                }
                edges.extend(cited.iter().map(|&t| (id, t as u64 + 1)));
            }
            store.insert(Article { id, month, descriptors: article_descriptors, retracted })?;
        }
        // this month's articles become citable from next month on
        for idx in prior..prior + cfg.articles_per_month {
            fenwick.add(idx, attach(in_degree[idx]));
        }
    }

    Ok(Scenario { hierarchy, store, edges, changes, evolving })
}
