//! Binary model files.
//!
//! Layout: the magic bytes `SATDF1`, a little-endian `u32` header length, a
//! JSON header, then every parameter block as little-endian `f32` in header
//! order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::params::Parameterized;
use super::tensor::Matrix;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 6] = b"SATDF1";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockMeta {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub kind: String,
    pub format_version: u32,
    pub seed: u64,
    /// Hyperparameters of the model.
    pub config: serde_json::Value,
    pub code_vocab: Option<Vec<String>>,
    pub comment_vocab: Option<Vec<String>>,
    pub blocks: Vec<BlockMeta>,
    /// Kind-specific payload that is not a weight matrix.
    #[serde(default)]
    pub extra: serde_json::Value,
}

impl CheckpointHeader {
    pub fn new(kind: &str, seed: u64, config: serde_json::Value) -> Self {
        CheckpointHeader {
            kind: kind.to_string(),
            format_version: FORMAT_VERSION,
            seed,
            config,
            code_vocab: None,
            comment_vocab: None,
            blocks: Vec::new(),
            extra: serde_json::Value::Null,
        }
    }
}

/// Loose named blocks, for models whose parameters are not a network.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedBlocks(pub Vec<(String, Matrix)>);

impl Parameterized for NamedBlocks {
    fn blocks(&self) -> Vec<(String, &Matrix)> {
        self.0.iter().map(|(n, m)| (n.clone(), m)).collect()
    }

    fn blocks_mut(&mut self) -> Vec<(String, &mut Matrix)> {
        self.0.iter_mut().map(|(n, m)| (n.clone(), m)).collect()
    }
}

pub struct Checkpoint {
    pub header: CheckpointHeader,
    pub blocks: Vec<(String, Matrix)>,
}

pub fn write_checkpoint<W: Write, P: Parameterized>(
    mut w: W,
    mut header: CheckpointHeader,
    params: &P,
) -> Result<()> {
    let blocks = params.blocks();
    header.blocks = blocks
        .iter()
        .map(|(name, m)| BlockMeta {
            name: name.clone(),
            rows: m.rows,
            cols: m.cols,
        })
        .collect();
    let json = serde_json::to_vec(&header)?;
    w.write_all(MAGIC)?;
    w.write_all(&(json.len() as u32).to_le_bytes())?;
    w.write_all(&json)?;
    for (_, m) in blocks {
        for &v in &m.data {
            w.write_all(&(v as f32).to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<Checkpoint> {
    let mut magic = [0u8; 6];
    r.read_exact(&mut magic)
        .map_err(|_| Error::Checkpoint("file too short".into()))?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint("not a satd-forge model file".into()));
    }
    let mut len = [0u8; 4];
    r.read_exact(&mut len)?;
    let mut json = vec![0u8; u32::from_le_bytes(len) as usize];
    r.read_exact(&mut json)
        .map_err(|_| Error::Checkpoint("truncated header".into()))?;
    let header: CheckpointHeader = serde_json::from_slice(&json)?;
    if header.format_version != FORMAT_VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported format version {}",
            header.format_version
        )));
    }
    let mut blocks = Vec::with_capacity(header.blocks.len());
    let mut buf = [0u8; 4];
    for meta in &header.blocks {
        let mut data = Vec::with_capacity(meta.rows * meta.cols);
        for _ in 0..meta.rows * meta.cols {
            r.read_exact(&mut buf)
                .map_err(|_| Error::Checkpoint(format!("truncated block {}", meta.name)))?;
            data.push(f32::from_le_bytes(buf) as f64);
        }
        blocks.push((
            meta.name.clone(),
            Matrix::from_vec(meta.rows, meta.cols, data),
        ));
    }
    Ok(Checkpoint { header, blocks })
}

impl Checkpoint {
    pub fn block(&self, name: &str) -> Result<&Matrix> {
        self.blocks
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, m)| m)
            .ok_or_else(|| Error::Checkpoint(format!("missing block {name}")))
    }
}

pub fn save_checkpoint<P: Parameterized>(
    path: &Path,
    header: CheckpointHeader,
    params: &P,
) -> Result<()> {
    write_checkpoint(BufWriter::new(File::create(path)?), header, params)
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    read_checkpoint(BufReader::new(File::open(path)?))
}

/// Copies named blocks into `params`. Every block of `params` must be present
/// with a matching shape; all offenders are reported at once.
pub fn restore_blocks<P: Parameterized>(params: &mut P, blocks: &[(String, Matrix)]) -> Result<()> {
    let mut problems = Vec::new();
    let mut targets = params.blocks_mut();
    for (name, m) in targets.iter_mut() {
        match blocks.iter().find(|(n, _)| n == name) {
            Some((_, src)) if src.shape() == m.shape() => {}
            Some((_, src)) => problems.push(format!(
                "{name}: expected {}x{}, found {}x{}",
                m.rows, m.cols, src.rows, src.cols
            )),
            None => problems.push(format!("{name}: missing")),
        }
    }
    if !problems.is_empty() {
        return Err(Error::ShapeMismatch(problems));
    }
    for (name, m) in targets {
        let src = &blocks.iter().find(|(n, _)| *n == name).expect("checked").1;
        m.data.copy_from_slice(&src.data);
    }
    Ok(())
}
