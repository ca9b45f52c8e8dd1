use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use kosrel::pipeline::ComputeParams;
use kosrel::{ArticleStore, InformativenessMode, Month, PageRankParams};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

fn default_sample_fraction() -> f64 {
    0.10
}
fn default_alpha() -> f64 {
    0.85
}
fn default_tol() -> f64 {
    1e-9
}
fn default_max_iter() -> usize {
    200
}
fn default_rrf_k() -> u32 {
    kosrel::fusion::RRF_K
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_top_k() -> usize {
    10
}

/// Flat pipeline configuration as read from the TOML file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub hierarchy: PathBuf,
    pub articles: PathBuf,
    pub citations: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub changes: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_month: Option<Month>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last_month: Option<Month>,
    #[serde(default = "default_sample_fraction")]
    pub sample_fraction: f64,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_alpha")]
    pub pagerank_alpha: f64,
    #[serde(default = "default_tol")]
    pub pagerank_tol: f64,
    #[serde(default = "default_max_iter")]
    pub pagerank_max_iter: usize,
    #[serde(default = "default_rrf_k")]
    pub rrf_k: u32,
    #[serde(default)]
    pub informativeness_mode: InformativenessMode,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_top_k")]
    pub top_k: usize,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sample_fraction > 0.0 && self.sample_fraction <= 1.0) {
            bail!("sample_fraction must be in (0, 1], got {}", self.sample_fraction);
        }
        if !(self.pagerank_alpha > 0.0 && self.pagerank_alpha < 1.0) {
            bail!("pagerank_alpha must be in (0, 1), got {}", self.pagerank_alpha);
        }
        if !(self.pagerank_tol > 0.0) {
            bail!("pagerank_tol must be positive");
        }
        if self.rrf_k == 0 {
            bail!("rrf_k must be positive");
        }
        if let (Some(a), Some(b)) = (self.first_month, self.last_month) {
            if a > b {
                bail!("empty window: first_month {a} is after last_month {b}");
            }
        }
        Ok(())
    }

    /// SHA-256 over the canonical (key-sorted, compact) JSON form.
    pub fn hash(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let canonical = serde_json::to_string(&value).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

/// A validated config together with the directory its relative paths are
/// resolved against.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub cfg: PipelineConfig,
    pub base: PathBuf,
    pub hash: String,
}

impl Loaded {
    pub fn load(path: &Path, seed: Option<u64>) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let mut cfg: PipelineConfig =
            toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        if let Some(seed) = seed {
            cfg.base_seed = seed;
        }
        cfg.validate()?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let hash = cfg.hash();
        Ok(Loaded { cfg, base, hash })
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() { p.to_path_buf() } else { self.base.join(p) }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.cfg.output_dir)
    }

    pub fn compute_params(&self) -> ComputeParams {
        ComputeParams {
            sample_fraction: self.cfg.sample_fraction,
            base_seed: self.cfg.base_seed,
            pagerank: PageRankParams {
                alpha: self.cfg.pagerank_alpha,
                tol: self.cfg.pagerank_tol,
                max_iter: self.cfg.pagerank_max_iter,
            },
            informativeness_mode: self.cfg.informativeness_mode,
        }
    }

    /// Months of the analysis window; unset bounds default to the corpus span.
    pub fn window(&self, store: &ArticleStore) -> Result<Vec<Month>> {
        let first = self.cfg.first_month.or_else(|| store.months().next());
        let last = self.cfg.last_month.or_else(|| store.months().last());
        let (Some(first), Some(last)) = (first, last) else {
            bail!("the corpus is empty and no window is configured");
        };
        if first > last {
            bail!("empty window: {first} is after {last}");
        }
        Ok(Month::range_inclusive(first, last).collect())
    }
}
