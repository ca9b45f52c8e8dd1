//! Concept hierarchy: dotted tree codes, the node forest they describe, and
//! the descriptor to tree-node mapping.
//!
//! Tree codes follow the MeSH layout: a bare category letter (`D`), a letter
//! followed by a two-digit segment (`D12`), then any number of three-digit
//! segments separated by dots (`D12.776`, `M01.060.116`).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum number of top-level categories a hierarchy may hold.
pub const MAX_CATEGORIES: usize = 16;

/// The sixteen MeSH category letters.
pub const MESH_CATEGORIES: [char; MAX_CATEGORIES] =
    ['A', 'B', 'C', 'D', 'E', 'F', 'G', 'H', 'I', 'J', 'K', 'L', 'M', 'N', 'V', 'Z'];

/// A validated dotted tree code such as `D12.776`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TreeCode(String);

fn is_valid_code(s: &str) -> bool {
    let b = s.as_bytes();
    if b.is_empty() || !b[0].is_ascii_uppercase() {
        return false;
    }
    if b.len() == 1 {
        return true;
    }
    if b.len() < 3 || !b[1].is_ascii_digit() || !b[2].is_ascii_digit() {
        return false;
    }
    let mut rest = &b[3..];
    while !rest.is_empty() {
        if rest.len() < 4 || rest[0] != b'.' || !rest[1..4].iter().all(u8::is_ascii_digit) {
            return false;
        }
        rest = &rest[4..];
    }
    true
}

impl TreeCode {
    pub fn new(code: impl Into<String>) -> Result<Self> {
        let code = code.into();
        if is_valid_code(&code) {
            Ok(TreeCode(code))
        } else {
            Err(Error::InvalidTreeCode(code))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// 1 for a bare category letter, otherwise 2 plus the number of dots.
    pub fn level(&self) -> usize {
        if self.0.len() == 1 {
            1
        } else {
            2 + self.0.bytes().filter(|&c| c == b'.').count()
        }
    }

    pub fn parent(&self) -> Option<TreeCode> {
        match self.0.len() {
            1 => None,
            3 => Some(TreeCode(self.0[..1].to_string())),
            _ => {
                let cut = self.0.rfind('.').expect("validated code has a dot");
                Some(TreeCode(self.0[..cut].to_string()))
            }
        }
    }

    /// The category letter this code belongs to.
    pub fn category(&self) -> char {
        self.0.as_bytes()[0] as char
    }

    /// All proper ancestors, nearest first.
    pub fn ancestors(&self) -> impl Iterator<Item = TreeCode> {
        std::iter::successors(self.parent(), TreeCode::parent)
    }
}

/// Level of a tree code (1 for a category letter).
pub fn level_of(code: &TreeCode) -> usize {
    code.level()
}

impl fmt::Display for TreeCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for TreeCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TreeCode::new(s)
    }
}

impl TryFrom<String> for TreeCode {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        TreeCode::new(s)
    }
}

impl From<TreeCode> for String {
    fn from(c: TreeCode) -> String {
        c.0
    }
}

impl AsRef<str> for TreeCode {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// The concept forest. Nodes are stored in ascending code order and are
/// addressed either by [`TreeCode`] or by their dense index in that order.
#[derive(Clone, Debug, PartialEq)]
pub struct Hierarchy {
    codes: Vec<TreeCode>,
    index: HashMap<TreeCode, usize>,
    labels: Vec<String>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    levels: Vec<usize>,
    by_level: Vec<Vec<usize>>,
    descriptors: BTreeMap<String, Vec<usize>>,
}

/// Non-fatal findings from [`parse_hierarchy`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HierarchyReport {
    pub rows: usize,
    /// Codes referenced only by descriptor rows without a label anywhere in
    /// the file; they were created with an empty label.
    pub unlisted_codes: usize,
}

/// Accumulates rows and materializes a validated [`Hierarchy`].
#[derive(Debug, Default)]
pub struct HierarchyBuilder {
    labels: BTreeMap<TreeCode, String>,
    descriptors: BTreeMap<String, BTreeSet<TreeCode>>,
    pairs: BTreeSet<(TreeCode, String)>,
}

impl HierarchyBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a node with an optional label. A non-empty label replaces an
    /// empty one; the first non-empty label wins.
    pub fn node(&mut self, code: TreeCode, label: &str) -> &mut Self {
        let slot = self.labels.entry(code).or_default();
        if slot.is_empty() {
            *slot = label.to_string();
        }
        self
    }

    /// Maps `descriptor` to `code`. Returns `false` if the pair already exists.
    pub fn map(&mut self, code: TreeCode, descriptor: &str) -> bool {
        if !self.pairs.insert((code.clone(), descriptor.to_string())) {
            return false;
        }
        self.labels.entry(code.clone()).or_default();
        self.descriptors.entry(descriptor.to_string()).or_default().insert(code);
        true
    }

    pub fn build(self) -> Result<Hierarchy> {
        let mut labels = self.labels;
        let explicit: Vec<TreeCode> = labels.keys().cloned().collect();
        for code in explicit {
            for anc in code.ancestors() {
                labels.entry(anc).or_default();
            }
        }

        let roots = labels.keys().filter(|c| c.level() == 1).count();
        if roots > MAX_CATEGORIES {
            return Err(Error::invalid(format!(
                "hierarchy has {roots} top-level categories, at most {MAX_CATEGORIES} allowed"
            )));
        }

        let n = labels.len();
        let mut codes = Vec::with_capacity(n);
        let mut label_vec = Vec::with_capacity(n);
        for (code, label) in labels {
            codes.push(code);
            label_vec.push(label);
        }
        let index: HashMap<TreeCode, usize> =
            codes.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();

        let mut parent = vec![None; n];
        let mut children = vec![Vec::new(); n];
        let mut levels = vec![0; n];
        let mut by_level: Vec<Vec<usize>> = Vec::new();
        for (i, code) in codes.iter().enumerate() {
            let level = code.level();
            levels[i] = level;
            if by_level.len() < level {
                by_level.resize(level, Vec::new());
            }
            by_level[level - 1].push(i);
            if let Some(p) = code.parent() {
                let pi = index[&p];
                parent[i] = Some(pi);
                // codes are visited in ascending order, so children stay sorted
                children[pi].push(i);
            }
        }

        let descriptors = self
            .descriptors
            .into_iter()
            .map(|(d, set)| (d, set.iter().map(|c| index[c]).collect()))
            .collect();

        Ok(Hierarchy {
            codes,
            index,
            labels: label_vec,
            parent,
            children,
            levels,
            by_level,
            descriptors,
        })
    }
}

/// Parses the hierarchy TSV: `tree_code \t descriptor_id \t label`.
///
/// The descriptor and label columns may be empty or missing, which lets a
/// row declare a bare node. `#` lines and blank lines are skipped.
pub fn parse_hierarchy<R: BufRead>(reader: R) -> Result<(Hierarchy, HierarchyReport)> {
    let mut builder = HierarchyBuilder::new();
    let mut labelled: BTreeSet<TreeCode> = BTreeSet::new();
    let mut mapped: BTreeSet<TreeCode> = BTreeSet::new();
    let mut report = HierarchyReport::default();

    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut cols = line.split('\t').map(str::trim);
        let raw_code = cols.next().unwrap_or_default();
        let descriptor = cols.next().unwrap_or_default();
        let label = cols.next().unwrap_or_default();
        if cols.next().is_some() {
            return Err(Error::parse(lineno, "expected at most 3 tab-separated columns"));
        }
        let code = TreeCode::new(raw_code)
            .map_err(|_| Error::parse(lineno, format!("malformed tree code {raw_code:?}")))?;
        report.rows += 1;

        if !label.is_empty() {
            labelled.insert(code.clone());
        }
        if descriptor.is_empty() {
            if labelled.contains(&code) && label.is_empty() {
                continue;
            }
            builder.node(code, label);
        } else {
            if !builder.map(code.clone(), descriptor) {
                return Err(Error::parse(
                    lineno,
                    format!("duplicate row for ({code}, {descriptor})"),
                ));
            }
            builder.node(code.clone(), label);
            mapped.insert(code);
        }
    }

    report.unlisted_codes = mapped.difference(&labelled).count();
    if report.unlisted_codes > 0 {
        log::warn!(
            "{} tree codes are referenced by descriptors but never labelled",
            report.unlisted_codes
        );
    }
    Ok((builder.build()?, report))
}

impl Hierarchy {
    /// Builds a hierarchy from bare codes (ancestors are materialized).
    pub fn from_codes<I, S>(codes: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut b = HierarchyBuilder::new();
        for c in codes {
            b.node(TreeCode::new(c.as_ref())?, "");
        }
        b.build()
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn codes(&self) -> &[TreeCode] {
        &self.codes
    }

    pub fn code(&self, idx: usize) -> &TreeCode {
        &self.codes[idx]
    }

    pub fn index_of(&self, code: &TreeCode) -> Option<usize> {
        self.index.get(code).copied()
    }

    pub fn contains(&self, code: &TreeCode) -> bool {
        self.index.contains_key(code)
    }

    pub fn label(&self, idx: usize) -> &str {
        &self.labels[idx]
    }

    pub fn level(&self, idx: usize) -> usize {
        self.levels[idx]
    }

    pub fn parent(&self, idx: usize) -> Option<usize> {
        self.parent[idx]
    }

    /// Children in ascending code order.
    pub fn children(&self, idx: usize) -> &[usize] {
        &self.children[idx]
    }

    pub fn children_of(&self, code: &TreeCode) -> Vec<&TreeCode> {
        self.index_of(code)
            .map(|i| self.children[i].iter().map(|&c| &self.codes[c]).collect())
            .unwrap_or_default()
    }

    pub fn is_leaf(&self, idx: usize) -> bool {
        self.children[idx].is_empty()
    }

    pub fn max_level(&self) -> usize {
        self.by_level.len()
    }

    /// Node indices at `level`, ascending code order. Empty for unknown levels.
    pub fn level_indices(&self, level: usize) -> &[usize] {
        if level == 0 {
            return &[];
        }
        self.by_level.get(level - 1).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn nodes_at_level(&self, level: usize) -> BTreeSet<TreeCode> {
        self.level_indices(level).iter().map(|&i| self.codes[i].clone()).collect()
    }

    pub fn roots(&self) -> &[usize] {
        self.level_indices(1)
    }

    pub fn descriptor_count(&self) -> usize {
        self.descriptors.len()
    }

    pub fn descriptors(&self) -> impl Iterator<Item = (&str, &[usize])> {
        self.descriptors.iter().map(|(d, v)| (d.as_str(), v.as_slice()))
    }

    /// Node indices of one descriptor, if known.
    pub fn descriptor_nodes(&self, descriptor: &str) -> Option<&[usize]> {
        self.descriptors.get(descriptor).map(Vec::as_slice)
    }

    /// Resolves an article's descriptors to sorted, distinct node indices.
    /// The second value counts descriptors absent from the mapping.
    pub fn resolve_descriptors<'a, I>(&self, descriptors: I) -> (Vec<usize>, usize)
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut nodes = Vec::new();
        let mut unknown = 0;
        for d in descriptors {
            match self.descriptors.get(d) {
                Some(v) => nodes.extend_from_slice(v),
                None => unknown += 1,
            }
        }
        nodes.sort_unstable();
        nodes.dedup();
        (nodes, unknown)
    }

    /// Tree codes annotated by an article's descriptors, plus the number of
    /// unknown descriptor ids.
    pub fn treenodes_of_article<'a, I>(&self, descriptors: I) -> (BTreeSet<TreeCode>, usize)
    where
        I: IntoIterator<Item = &'a str>,
    {
        let (nodes, unknown) = self.resolve_descriptors(descriptors);
        (nodes.into_iter().map(|i| self.codes[i].clone()).collect(), unknown)
    }

    /// Writes the hierarchy back out in the TSV format `parse_hierarchy` reads.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut by_node: Vec<Vec<&str>> = vec![Vec::new(); self.len()];
        for (d, nodes) in &self.descriptors {
            for &n in nodes {
                by_node[n].push(d);
            }
        }
        writeln!(w, "# tree_code\tdescriptor_id\tlabel")?;
        for (i, code) in self.codes.iter().enumerate() {
            if by_node[i].is_empty() {
                writeln!(w, "{code}\t\t{}", self.labels[i])?;
            }
            for d in &by_node[i] {
                writeln!(w, "{code}\t{d}\t{}", self.labels[i])?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(s: &str) -> TreeCode {
        TreeCode::new(s).unwrap()
    }

    fn parse(text: &str) -> Result<(Hierarchy, HierarchyReport)> {
        parse_hierarchy(text.as_bytes())
    }

    #[test]
    fn levels() {
        assert_eq!(level_of(&code("D")), 1);
        assert_eq!(level_of(&code("D12")), 2);
        assert_eq!(level_of(&code("D12.776")), 3);
        assert_eq!(level_of(&code("M01.060.116")), 4);
    }

    #[test]
    fn parents() {
        assert_eq!(code("D12.776").parent(), Some(code("D12")));
        assert_eq!(code("D12").parent(), Some(code("D")));
        assert_eq!(code("D").parent(), None);
        let anc: Vec<_> = code("M01.060.116").ancestors().collect();
        assert_eq!(anc, vec![code("M01.060"), code("M01"), code("M")]);
    }

    #[test]
    fn grammar() {
        for bad in ["", "d", "D1", "D1.77", "D12.77", "D12.7765", "D12.", "DD1", "D123", "1"] {
            assert!(TreeCode::new(bad).is_err(), "{bad} should be rejected");
        }
        for good in ["Z", "C01", "D12.776", "M01.060.116"] {
            assert!(TreeCode::new(good).is_ok(), "{good} should be accepted");
        }
    }

    #[test]
    fn single_row_materializes_ancestors() {
        let (h, report) = parse("D12.776 \t D011506 \t Proteins\n").unwrap();
        let codes: Vec<&str> = h.codes().iter().map(TreeCode::as_str).collect();
        assert_eq!(codes, ["D", "D12", "D12.776"]);
        let (nodes, unknown) = h.treenodes_of_article(["D011506"]);
        assert_eq!(nodes.into_iter().collect::<Vec<_>>(), vec![code("D12.776")]);
        assert_eq!(unknown, 0);
        assert_eq!(report.unlisted_codes, 0);
        assert_eq!(h.label(h.index_of(&code("D12.776")).unwrap()), "Proteins");
    }

    #[test]
    fn children_sorted() {
        let (h, _) = parse("C14\tD002318\tCardiovascular Diseases\nC01\tD007239\tInfections\n").unwrap();
        let kids: Vec<&str> = h.children_of(&code("C")).iter().map(|c| c.as_str()).collect();
        assert_eq!(kids, ["C01", "C14"]);
    }

    #[test]
    fn malformed_code_reports_line() {
        let err = parse("# header\nD12\tD1\tx\nD1.77\tD2\ty\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_pair_rejected() {
        let err = parse("D12\tD1\tx\nD12\tD1\tx\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn unlabelled_mapping_counts_warning() {
        let (h, report) = parse("D12\tD1\tProteinish\nD13\tD2\t\n").unwrap();
        assert_eq!(report.unlisted_codes, 1);
        assert_eq!(h.label(h.index_of(&code("D13")).unwrap()), "");
    }

    #[test]
    fn nodes_at_level_toy() {
        let h = Hierarchy::from_codes(["R", "R01", "R01.001"]).unwrap();
        assert_eq!(h.nodes_at_level(2), BTreeSet::from([code("R01")]));
        assert!(h.nodes_at_level(99).is_empty());
        assert!(h.nodes_at_level(0).is_empty());
    }

    #[test]
    fn mesh_categories_are_level_one() {
        let h = Hierarchy::from_codes(MESH_CATEGORIES.iter().map(|c| format!("{c}01"))).unwrap();
        let level1: Vec<char> =
            h.nodes_at_level(1).iter().map(TreeCode::category).collect();
        assert_eq!(level1, MESH_CATEGORIES);
    }

    #[test]
    fn too_many_roots() {
        let codes: Vec<String> = ('A'..='Q').map(String::from).collect();
        assert!(Hierarchy::from_codes(codes).is_err());
    }

    #[test]
    fn unknown_descriptors_counted() {
        let (h, _) = parse("D12.776\tD011506\tProteins\n").unwrap();
        let (nodes, unknown) = h.treenodes_of_article(["X999999"]);
        assert!(nodes.is_empty());
        assert_eq!(unknown, 1);
        let (nodes, unknown) = h.treenodes_of_article(std::iter::empty());
        assert!(nodes.is_empty());
        assert_eq!(unknown, 0);
    }

    #[test]
    fn polyhierarchy_by_multi_mapping() {
        let (h, _) = parse("D12.776\tD1\tP\nC01.100\tD1\tP\n").unwrap();
        let (nodes, _) = h.treenodes_of_article(["D1"]);
        assert_eq!(nodes.len(), 2);
    }

    #[test]
    fn round_trip_is_identical() {
        let text = "C01\tD007239\tInfections\nD12.776\tD011506\tProteins\nD12.776.100\tD000001\t\nM01.060.116\tD000328\tAdult\nZ\t\tGeographicals\n";
        let (h, _) = parse(text).unwrap();
        let mut out = Vec::new();
        h.write_tsv(&mut out).unwrap();
        let (again, _) = parse_hierarchy(out.as_slice()).unwrap();
        assert_eq!(h, again);
    }
}
