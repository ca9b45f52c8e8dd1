//! File helpers: every output starts with a `# config_hash=...` comment
//! (an XML comment for SVG, a field for JSON).

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde_json::Value;

pub const HASH_PREFIX: &str = "# config_hash=";

pub type CsvWriter = csv::Writer<BufWriter<File>>;

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

pub fn csv_writer(path: &Path, hash: &str) -> Result<CsvWriter> {
    let mut w = create(path)?;
    writeln!(w, "{HASH_PREFIX}{hash}")?;
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w))
}

pub fn finish(w: CsvWriter) -> Result<()> {
    let mut inner = w.into_inner().map_err(|e| anyhow::anyhow!("flush failed: {}", e.error()))?;
    inner.flush()?;
    Ok(())
}

pub fn write_json(path: &Path, hash: &str, mut value: Value) -> Result<()> {
    if let Value::Object(map) = &mut value {
        map.insert("config_hash".into(), Value::String(hash.to_string()));
    }
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, &value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn read_json(path: &Path) -> Result<Value> {
    let f = File::open(path).with_context(|| format!("missing upstream output {}", path.display()))?;
    serde_json::from_reader(BufReader::new(f)).with_context(|| format!("invalid JSON in {}", path.display()))
}

/// Opens a CSV produced by this tool and checks its header hash.
pub fn csv_reader(path: &Path, hash: &str) -> Result<csv::Reader<BufReader<File>>> {
    let f = File::open(path).with_context(|| format!("missing upstream output {}", path.display()))?;
    let mut r = BufReader::new(f);
    let mut first = String::new();
    r.read_line(&mut first)?;
    match first.trim_end().strip_prefix(HASH_PREFIX) {
        Some(h) if h == hash => {}
        Some(h) => bail!(
            "{} was produced with a different config (hash {h}, current {hash}); rerun the upstream step",
            path.display()
        ),
        None => bail!("{} lacks a config hash header", path.display()),
    }
    Ok(csv::ReaderBuilder::new().from_reader(r))
}

/// Checks that a JSON output carries the current config hash.
pub fn check_json_hash(path: &Path, value: &Value, hash: &str) -> Result<()> {
    match value.get("config_hash").and_then(Value::as_str) {
        Some(h) if h == hash => Ok(()),
        _ => bail!("{} was produced with a different config; rerun the upstream step", path.display()),
    }
}

/// Stages a directory next to `target` and swaps it in once `fill`
/// succeeds; on failure the staged files are removed.
pub fn replace_dir<F>(target: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&Path) -> Result<()>,
{
    let parent = target.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&parent).with_context(|| format!("cannot create {}", parent.display()))?;
    let name = target.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let staging = parent.join(format!(".{name}.partial"));
    if staging.exists() {
        fs::remove_dir_all(&staging)?;
    }
    fs::create_dir_all(&staging)?;
    if let Err(e) = fill(&staging) {
        let _ = fs::remove_dir_all(&staging);
        return Err(e);
    }
    if target.exists() {
        fs::remove_dir_all(target).with_context(|| format!("cannot replace {}", target.display()))?;
    }
    fs::rename(&staging, target).with_context(|| format!("cannot move results into {}", target.display()))?;
    Ok(())
}
