//! Cohort statistics: Mann-Whitney tests for evolving vs. stable concepts
//! and retracted vs. other articles, and correlation between aspects.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::corpus::{ArticleStore, Month};
use crate::error::{Error, Result};
use crate::kosmodel::Hierarchy;
use crate::scores::NodeScores;

/// Groups up to this size (both sides, no ties) get the exact null distribution.
pub const EXACT_THRESHOLD: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestMethod {
    Exact,
    NormalApprox,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub u_statistic: f64,
    pub p_value: f64,
    pub n1: usize,
    pub n2: usize,
    pub method: TestMethod,
}

/// Average ranks (1-based) of `values`, ties sharing their mean rank.
/// Also returns `sum(t^3 - t)` over tie groups.
fn average_ranks(values: &[f64]) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        let t = (j - i) as f64;
        ties += t * t * t - t;
        i = j;
    }
    (ranks, ties)
}

/// Number of arrangements giving each value of U for group sizes (n1, n2).
fn u_distribution(n1: usize, n2: usize) -> Vec<f64> {
    // table[i][j] is the distribution for (i, j); built row by row
    let max_u = n1 * n2;
    let mut prev: Vec<Vec<f64>> = (0..=n2).map(|_| vec![1.0]).collect();
    for i in 1..=n1 {
        let mut cur: Vec<Vec<f64>> = Vec::with_capacity(n2 + 1);
        cur.push(vec![1.0]);
        for j in 1..=n2 {
            let mut d = vec![0.0; i * j + 1];
            // largest element from group 1 beats all j members of group 2
            for (u, &c) in prev[j].iter().enumerate() {
                d[u + j] += c;
            }
            for (u, &c) in cur[j - 1].iter().enumerate() {
                d[u] += c;
            }
            cur.push(d);
        }
        prev = cur;
    }
    let mut d = prev.swap_remove(n2);
    d.resize(max_u + 1, 0.0);
    d
}

struct Prepared {
    n1: usize,
    n2: usize,
    u1: f64,
    u: f64,
    ties: f64,
}

fn prepare(a: &[f64], b: &[f64]) -> Result<Prepared> {
    let (n1, n2) = (a.len(), b.len());
    if n1 == 0 || n2 == 0 {
        return Err(Error::invalid("mann-whitney needs two non-empty samples"));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::invalid("mann-whitney samples must be finite"));
    }
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, ties) = average_ranks(&pooled);
    let r1: f64 = ranks[..n1].iter().sum();
    let u1 = r1 - (n1 * (n1 + 1)) as f64 / 2.0;
    let u = u1.min((n1 * n2) as f64 - u1);
    Ok(Prepared { n1, n2, u1, u, ties })
}

/// Two-sided Mann-Whitney U test; `U = min(U1, U2)`.
///
/// Exact when both groups have at most [`EXACT_THRESHOLD`] members and the
/// pooled sample has no ties; otherwise the normal approximation with tie
/// correction and a 0.5 continuity correction.
pub fn mann_whitney(a: &[f64], b: &[f64]) -> Result<TestResult> {
    let prep = prepare(a, b)?;
    if prep.n1.max(prep.n2) <= EXACT_THRESHOLD && prep.ties == 0.0 {
        Ok(exact(&prep))
    } else {
        Ok(normal(&prep))
    }
}

/// Exact two-sided p from the full null distribution of U. Rejects tied samples.
pub fn mann_whitney_exact(a: &[f64], b: &[f64]) -> Result<TestResult> {
    let prep = prepare(a, b)?;
    if prep.ties != 0.0 {
        return Err(Error::invalid("the exact test assumes no ties"));
    }
    Ok(exact(&prep))
}

/// Normal approximation regardless of sample size.
pub fn mann_whitney_normal(a: &[f64], b: &[f64]) -> Result<TestResult> {
    Ok(normal(&prepare(a, b)?))
}

fn exact(prep: &Prepared) -> TestResult {
    let dist = u_distribution(prep.n1, prep.n2);
    let total: f64 = dist.iter().sum();
    let tail: f64 = dist[..=(prep.u as usize)].iter().sum();
    let p = (2.0 * tail / total).min(1.0);
    TestResult { u_statistic: prep.u, p_value: p, n1: prep.n1, n2: prep.n2, method: TestMethod::Exact }
}

fn normal(prep: &Prepared) -> TestResult {
    let nn = (prep.n1 * prep.n2) as f64;
    let n = (prep.n1 + prep.n2) as f64;
    let mean = nn / 2.0;
    let var = if n > 1.0 { nn / 12.0 * ((n + 1.0) - prep.ties / (n * (n - 1.0))) } else { 0.0 };
    let p = if var <= 0.0 {
        1.0
    } else {
        let z = ((prep.u1 - mean).abs() - 0.5).max(0.0) / var.sqrt();
        erfc(z / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
    };
    TestResult { u_statistic: prep.u, p_value: p, n1: prep.n1, n2: prep.n2, method: TestMethod::NormalApprox }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChangeType {
    Description,
    Extension,
    Move,
    Removal,
}

impl ChangeType {
    pub const ALL: [ChangeType; 4] =
        [ChangeType::Description, ChangeType::Extension, ChangeType::Move, ChangeType::Removal];

    pub fn name(self) -> &'static str {
        match self {
            ChangeType::Description => "description",
            ChangeType::Extension => "extension",
            ChangeType::Move => "move",
            ChangeType::Removal => "removal",
        }
    }
}

impl fmt::Display for ChangeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChangeType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ChangeType::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown change type {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ChangeRecord {
    pub release: String,
    pub descriptor: String,
    pub change_type: ChangeType,
}

impl ChangeRecord {
    /// Year of a release label such as `2014AA`.
    pub fn release_year(release: &str) -> Option<i32> {
        release.get(..4)?.parse().ok()
    }
}

/// Parses the changes TSV: `release \t descriptor_id \t change_type`.
pub fn parse_changes<R: BufRead>(reader: R) -> Result<Vec<ChangeRecord>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = t.split('\t').map(str::trim).collect();
        let [release, descriptor, kind] = cols[..] else {
            return Err(Error::parse(lineno, "expected `release<TAB>descriptor_id<TAB>change_type`"));
        };
        if ChangeRecord::release_year(release).is_none() {
            return Err(Error::parse(lineno, format!("bad release label {release:?}")));
        }
        let change_type = kind.parse().map_err(|e: Error| Error::parse(lineno, e.to_string()))?;
        out.push(ChangeRecord { release: release.to_string(), descriptor: descriptor.to_string(), change_type });
    }
    Ok(out)
}

pub fn write_changes<W: Write>(changes: &[ChangeRecord], mut w: W) -> Result<()> {
    writeln!(w, "# release\tdescriptor_id\tchange_type")?;
    for c in changes {
        writeln!(w, "{}\t{}\t{}", c.release, c.descriptor, c.change_type)?;
    }
    Ok(())
}

/// Descriptor-level score: the sum of the scores of its tree nodes. Only
/// descriptors with at least one scored node are reported.
pub fn descriptor_scores(h: &Hierarchy, node_scores: &NodeScores) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for (d, nodes) in h.descriptors() {
        let mut sum = 0.0;
        let mut any = false;
        for &n in nodes {
            if let Some(v) = node_scores.get(h.code(n)) {
                sum += v;
                any = true;
            }
        }
        if any {
            out.insert(d.to_string(), sum);
        }
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Cohorts {
    pub evolving: Vec<f64>,
    pub stable: Vec<f64>,
}

impl Cohorts {
    /// No evolving descriptors: nothing to test.
    pub fn skipped(&self) -> bool {
        self.evolving.is_empty()
    }
}

/// Splits scored descriptors by whether `changes` names them.
pub fn evolution_cohorts(node_scores: &NodeScores, changes: &[ChangeRecord], h: &Hierarchy) -> Cohorts {
    let changed: BTreeSet<&str> = changes.iter().map(|c| c.descriptor.as_str()).collect();
    let mut c = Cohorts::default();
    for (d, v) in descriptor_scores(h, node_scores) {
        if changed.contains(d.as_str()) {
            c.evolving.push(v);
        } else {
            c.stable.push(v);
        }
    }
    c
}

/// Node scores for one month and the articles present in that month's
/// sampled network.
#[derive(Clone, Copy, Debug)]
pub struct MonthlyNodeScores<'a> {
    pub month: Month,
    pub scores: &'a NodeScores,
    pub members: &'a [u64],
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RetractionCohorts {
    pub retracted: Vec<f64>,
    pub other: Vec<f64>,
}

/// Per-article values for `year`: each month an article is present in, its
/// value is the sum of its tree nodes' scores; the article's yearly value is
/// the mean over those months.
pub fn retraction_cohorts(
    store: &ArticleStore,
    h: &Hierarchy,
    year: i32,
    months: &[MonthlyNodeScores<'_>],
) -> RetractionCohorts {
    let mut acc: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
    for m in months.iter().filter(|m| m.month.year() == year) {
        for &id in m.members {
            let Some(article) = store.get(id) else { continue };
            let (nodes, _) = h.resolve_descriptors(article.descriptors.iter().map(String::as_str));
            let value: f64 = nodes.iter().map(|&n| m.scores.get(h.code(n)).copied().unwrap_or(0.0)).sum();
            let e = acc.entry(id).or_insert((0.0, 0));
            e.0 += value;
            e.1 += 1;
        }
    }
    let mut out = RetractionCohorts::default();
    for (id, (sum, n)) in acc {
        let mean = sum / n as f64;
        if store.get(id).is_some_and(|a| a.retracted) {
            out.retracted.push(mean);
        } else {
            out.other.push(mean);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationMethod {
    Pearson,
    Spearman,
}

/// Pearson correlation. Zero when either side has no variance.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)
    }
}

/// Pearson correlation of average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    pearson(&average_ranks(x).0, &average_ranks(y).0)
}

/// Correlation matrix of equally long columns; unit diagonal.
pub fn correlation_matrix(columns: &[Vec<f64>], method: CorrelationMethod) -> Result<Vec<Vec<f64>>> {
    let rows = columns.first().map_or(0, Vec::len);
    if columns.iter().any(|c| c.len() != rows) {
        return Err(Error::invalid("correlation columns differ in length"));
    }
    if rows < 3 {
        return Err(Error::invalid(format!("correlation needs at least 3 paired observations, got {rows}")));
    }
    let prepared: Vec<Vec<f64>> = match method {
        CorrelationMethod::Pearson => columns.to_vec(),
        CorrelationMethod::Spearman => columns.iter().map(|c| average_ranks(c).0).collect(),
    };
    let k = columns.len();
    let mut m = vec![vec![0.0; k]; k];
    for i in 0..k {
        m[i][i] = 1.0;
        for j in i + 1..k {
            let r = pearson(&prepared[i], &prepared[j]);
            m[i][j] = r;
            m[j][i] = r;
        }
    }
    Ok(m)
}

/// Column labels of the aspect correlation matrix.
pub const CORRELATION_LABELS: [&str; 5] = ["dis", "infl", "info", "use", "rel"];

/// Correlation of the four aspects and fused relevance over observations
/// keyed by (descriptor, month); each row holds the five values in
/// [`CORRELATION_LABELS`] order.
pub fn aspect_correlation(
    observations: &BTreeMap<(String, Month), [f64; 5]>,
    method: CorrelationMethod,
) -> Result<Vec<Vec<f64>>> {
    let columns: Vec<Vec<f64>> =
        (0..5).map(|c| observations.values().map(|row| row[c]).collect()).collect();
    correlation_matrix(&columns, method)
}
