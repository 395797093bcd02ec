use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use satd_core::miner::CorpusRecord;
use serde::Serialize;
use serde_json::Value;

use crate::config::SCHEMA_VERSION;

pub fn read_records(path: &Path) -> Result<Vec<CorpusRecord>> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.with_context(|| format!("reading {}", path.display()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line)
            .with_context(|| format!("{}:{}: not a corpus record", path.display(), i + 1))?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_records(path: &Path, records: &[CorpusRecord]) -> Result<()> {
    create_parent(path)?;
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    create_parent(path)?;
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn create_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(())
}

pub fn meta_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// Writes `<out>.meta.json` describing how `out` was produced.
pub fn write_meta(out: &Path, command: &str, seed: Option<u64>, details: Value) -> Result<()> {
    write_json(&meta_path(out), &meta(command, seed, details))
}

fn meta(command: &str, seed: Option<u64>, details: Value) -> Value {
    serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "tool": concat!("satd-forge ", env!("CARGO_PKG_VERSION")),
        "command": command,
        "seed": seed,
        "details": details,
    })
}
