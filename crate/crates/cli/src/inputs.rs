use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use anyhow::{Context, Result};
use kosrel::citegraph::parse_citations;
use kosrel::corpus::parse_articles;
use kosrel::evaluate::parse_changes;
use kosrel::kosmodel::{parse_hierarchy, HierarchyReport};
use kosrel::{ArticleStore, BuildStats, ChangeRecord, CitationGraph, Hierarchy};

use crate::config::Loaded;

pub struct Inputs {
    pub hierarchy: Hierarchy,
    pub hierarchy_report: HierarchyReport,
    pub store: ArticleStore,
    pub graph: CitationGraph,
    pub raw_edges: usize,
    pub stats: BuildStats,
    pub changes: Vec<ChangeRecord>,
}

fn open(path: &Path, what: &str) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("cannot open {what} file {}", path.display()))?;
    Ok(BufReader::new(f))
}

pub fn load(l: &Loaded) -> Result<Inputs> {
    let path = l.resolve(&l.cfg.hierarchy);
    let (hierarchy, hierarchy_report) =
        parse_hierarchy(open(&path, "hierarchy")?).with_context(|| format!("in {}", path.display()))?;

    let path = l.resolve(&l.cfg.articles);
    let store = parse_articles(open(&path, "articles")?).with_context(|| format!("in {}", path.display()))?;

    let path = l.resolve(&l.cfg.citations);
    let edges = parse_citations(open(&path, "citations")?).with_context(|| format!("in {}", path.display()))?;
    let raw_edges = edges.len();
    let (graph, stats) = CitationGraph::build(edges, &store);

    let changes = match &l.cfg.changes {
        Some(p) => {
            let path = l.resolve(p);
            parse_changes(open(&path, "changes")?).with_context(|| format!("in {}", path.display()))?
        }
        None => Vec::new(),
    };
    Ok(Inputs { hierarchy, hierarchy_report, store, graph, raw_edges, stats, changes })
}

/// `ingest`: parse everything and print a validation report.
pub fn run(l: &Loaded) -> Result<()> {
    let inp = load(l)?;
    let unknown: usize = inp
        .store
        .iter()
        .map(|a| inp.hierarchy.resolve_descriptors(a.descriptors.iter().map(String::as_str)).1)
        .sum();
    let window = l.window(&inp.store)?;
    let rows = [
        ("tree_nodes", inp.hierarchy.len().to_string()),
        ("descriptors", inp.hierarchy.descriptor_count().to_string()),
        ("hierarchy_rows", inp.hierarchy_report.rows.to_string()),
        ("unlabelled_codes", inp.hierarchy_report.unlisted_codes.to_string()),
        ("articles", inp.store.len().to_string()),
        ("retracted_articles", inp.store.retracted_ids().len().to_string()),
        ("unknown_descriptors", unknown.to_string()),
        ("citation_rows", inp.raw_edges.to_string()),
        ("edges_kept", inp.graph.edge_count().to_string()),
        ("dropped_self_loops", inp.stats.self_loops.to_string()),
        ("dropped_unknown_endpoints", inp.stats.unknown_endpoints.to_string()),
        ("dropped_duplicates", inp.stats.duplicates.to_string()),
        ("change_records", inp.changes.len().to_string()),
        ("window", format!("{}..{} ({} months)", window[0], window[window.len() - 1], window.len())),
        ("config_hash", l.hash.clone()),
    ];
    for (k, v) in rows {
        println!("{k}: {v}");
    }
    Ok(())
}
