use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::Args;
use satd_core::detector::{DetectorHp, SvmConfig};
use satd_core::eval::{DetectorGrid, GeneratorGrid, ModelSpec};
use satd_core::generator::GeneratorHp;
use satd_core::nn::Pooling;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

/// Models to train or evaluate. Detection commands read `detectors`,
/// generation commands read `generators`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub detectors: Vec<ModelSpec>,
    #[serde(default)]
    pub generators: Vec<GeneratorHp>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            detectors: vec![
                ModelSpec::Dl(DetectorHp::default()),
                ModelSpec::Mnb { alpha: 1.0 },
                ModelSpec::Svm(SvmConfig::default()),
            ],
            generators: vec![GeneratorHp::default()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub detector: DetectorGrid,
    #[serde(default)]
    pub generator: GeneratorGrid,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            schema_version: SCHEMA_VERSION,
            detector: DetectorGrid::full(),
            generator: GeneratorGrid::full(),
        }
    }
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn check_version(v: &Value, path: &Path) -> Result<()> {
    match v.get("schema_version").and_then(Value::as_u64) {
        Some(n) if n == u64::from(SCHEMA_VERSION) => Ok(()),
        Some(n) => bail!("{}: unsupported schema_version {n}", path.display()),
        None => bail!("{}: missing schema_version", path.display()),
    }
}

/// Loads a run config. A `tune` output file is accepted too; its `hp` field
/// holds the selected settings.
pub fn load_run_config(path: Option<&Path>) -> Result<RunConfig> {
    let Some(path) = path else {
        return Ok(RunConfig::default());
    };
    let mut v = read_json(path)?;
    if let Some(hp) = v.get_mut("hp") {
        v = hp.take();
    }
    check_version(&v, path)?;
    serde_json::from_value(v).with_context(|| format!("{}: invalid run config", path.display()))
}

pub fn load_grid(path: Option<&Path>) -> Result<GridConfig> {
    let Some(path) = path else {
        return Ok(GridConfig::default());
    };
    let v = read_json(path)?;
    check_version(&v, path)?;
    serde_json::from_value(v).with_context(|| format!("{}: invalid grid", path.display()))
}

/// Command-line values that replace the matching config-file fields of every
/// neural model.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub latent_dim: Option<usize>,
    #[arg(long)]
    pub layers: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub pooling: Option<Pooling>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub dropout: Option<f64>,
}

impl Overrides {
    pub fn detector(&self, hp: &mut DetectorHp) {
        set(&mut hp.epochs, self.epochs);
        set(&mut hp.latent_dim, self.latent_dim);
        set(&mut hp.layers, self.layers);
        set(&mut hp.batch_size, self.batch_size);
        set(&mut hp.pooling, self.pooling);
        set(&mut hp.learning_rate, self.lr);
        set(&mut hp.dropout, self.dropout);
    }

    pub fn generator(&self, hp: &mut GeneratorHp) {
        set(&mut hp.epochs, self.epochs);
        set(&mut hp.latent_dim, self.latent_dim);
        set(&mut hp.layers, self.layers);
        set(&mut hp.batch_size, self.batch_size);
        set(&mut hp.learning_rate, self.lr);
        set(&mut hp.dropout, self.dropout);
    }

    pub fn run_config(&self, cfg: &mut RunConfig) {
        for spec in &mut cfg.detectors {
            if let ModelSpec::Dl(hp) = spec {
                self.detector(hp);
            }
        }
        for hp in &mut cfg.generators {
            self.generator(hp);
        }
    }

    /// Only the non-grid fields apply to a grid: its base settings.
    pub fn grid(&self, grid: &mut GridConfig) {
        set(&mut grid.detector.base.epochs, self.epochs);
        set(&mut grid.detector.base.learning_rate, self.lr);
        set(&mut grid.detector.base.dropout, self.dropout);
        set(&mut grid.generator.base.epochs, self.epochs);
        set(&mut grid.generator.base.learning_rate, self.lr);
        set(&mut grid.generator.base.dropout, self.dropout);
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}
