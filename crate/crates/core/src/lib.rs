//! Multi-aspect relevance of knowledge-organization concepts: tree-code
//! hierarchies, article corpora, citation graphs, graph and information
//! metrics, hierarchical propagation, rank fusion and cohort statistics.

pub mod citegraph;
pub mod corpus;
pub mod error;
pub mod evaluate;
pub mod fusion;
pub mod graphmetrics;
pub mod infometrics;
pub mod kosmodel;
pub mod pipeline;
pub mod propagate;
pub mod scores;
pub mod synthgen;

pub use citegraph::{BuildStats, CitationGraph};
pub use corpus::{Article, ArticleStore, Month};
pub use error::{Error, Result};
pub use evaluate::{ChangeRecord, ChangeType, TestMethod, TestResult};
pub use fusion::{RelevanceRanking, Scope};
pub use graphmetrics::{ArticleScores, PageRankParams};
pub use infometrics::InformativenessMode;
pub use kosmodel::{Hierarchy, TreeCode};
pub use scores::{Aspect, AspectScores, NodeScores};
