use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::detector::DetectorHp;
use crate::generator::GeneratorHp;
use crate::nn::Pooling;

/// Cartesian detector grid. Unlisted fields of [`DetectorHp`] take `base`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorGrid {
    pub latent_dims: Vec<usize>,
    pub layers: Vec<usize>,
    pub batch_sizes: Vec<usize>,
    pub poolings: Vec<Pooling>,
    pub base: DetectorHp,
}

impl Default for DetectorGrid {
    fn default() -> Self {
        Self::full()
    }
}

impl DetectorGrid {
    /// Every latent size, depth and batch size of the original study.
    pub fn full() -> Self {
        DetectorGrid {
            latent_dims: vec![8, 16, 32, 64, 128, 256],
            layers: vec![1, 2, 3],
            batch_sizes: vec![8, 16, 32, 64, 128, 256, 512],
            poolings: Pooling::ALL.to_vec(),
            base: DetectorHp::default(),
        }
    }

    pub fn expand(&self) -> Vec<DetectorHp> {
        let mut out = Vec::new();
        for &pooling in &self.poolings {
            for &latent_dim in &self.latent_dims {
                for &layers in &self.layers {
                    for &batch_size in &self.batch_sizes {
                        out.push(DetectorHp {
                            latent_dim,
                            layers,
                            batch_size,
                            pooling,
                            ..self.base.clone()
                        });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorGrid {
    pub latent_dims: Vec<usize>,
    pub layers: Vec<usize>,
    pub batch_sizes: Vec<usize>,
    pub base: GeneratorHp,
}

impl Default for GeneratorGrid {
    fn default() -> Self {
        Self::full()
    }
}

impl GeneratorGrid {
    pub fn full() -> Self {
        GeneratorGrid {
            latent_dims: vec![512, 1024, 2048],
            layers: vec![1, 2],
            batch_sizes: vec![32, 64, 128],
            base: GeneratorHp::default(),
        }
    }

    pub fn expand(&self) -> Vec<GeneratorHp> {
        let mut out = Vec::new();
        for &latent_dim in &self.latent_dims {
            for &layers in &self.layers {
                for &batch_size in &self.batch_sizes {
                    out.push(GeneratorHp {
                        latent_dim,
                        layers,
                        batch_size,
                        ..self.base.clone()
                    });
                }
            }
        }
        out
    }
}

/// Result of one configuration on the tuning set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningRow {
    /// Selection happens within a group (the pooling mode for detectors).
    pub group: String,
    pub config: serde_json::Value,
    /// F1 for detectors, BLEU-4 for the generator.
    pub score: f64,
    /// Precision for detectors.
    pub tiebreak: f64,
}

/// The `top` best rows of every group, best first, groups in name order.
pub fn select_top_per_group(rows: &[TuningRow], top: usize) -> Vec<TuningRow> {
    let mut groups: BTreeMap<&str, Vec<&TuningRow>> = BTreeMap::new();
    for r in rows {
        groups.entry(r.group.as_str()).or_default().push(r);
    }
    let mut out = Vec::new();
    for (_, mut g) in groups {
        g.sort_by(|a, b| {
            b.score
                .total_cmp(&a.score)
                .then_with(|| b.tiebreak.total_cmp(&a.tiebreak))
        });
        out.extend(g.into_iter().take(top).cloned());
    }
    out
}
