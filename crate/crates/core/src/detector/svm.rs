use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::mt_shuffle;
use crate::vsm::{sparse_dot, SparseVec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmConfig {
    pub lambda: f64,
    pub epochs: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            lambda: 1e-4,
            epochs: 30,
        }
    }
}

/// Linear decision function `w·x + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub w: Vec<f64>,
    pub b: f64,
}

impl SvmModel {
    pub fn margin(&self, x: &[(usize, f64)]) -> f64 {
        sparse_dot(x, &self.w) + self.b
    }

    /// `sign(w·x + b)` with `sign(0)` negative.
    pub fn predict(&self, x: &[(usize, f64)]) -> bool {
        self.margin(x) > 0.0
    }

    /// Regularized hinge objective `λ/2 ‖(w, b)‖² + mean(max(0, 1 - y f(x)))`.
    pub fn objective(&self, vectors: &[SparseVec], labels: &[bool], lambda: f64) -> f64 {
        let norm: f64 = self.w.iter().map(|v| v * v).sum::<f64>() + self.b * self.b;
        let hinge: f64 = vectors
            .iter()
            .zip(labels)
            .map(|(x, &y)| (1.0 - sign(y) * self.margin(x)).max(0.0))
            .sum();
        lambda / 2.0 * norm + hinge / vectors.len().max(1) as f64
    }
}

fn sign(y: bool) -> f64 {
    if y {
        1.0
    } else {
        -1.0
    }
}

/// Stochastic sub-gradient descent on the L2-regularized hinge loss with step
/// size `1 / (λ t)`.
///
/// The bias is the weight of an implicit constant feature and is shrunk along
/// with `w`; letting it escape regularization makes the early, very large
/// steps throw it far off.
pub fn train_linear_svm(
    vectors: &[SparseVec],
    labels: &[bool],
    dim: usize,
    config: SvmConfig,
    seed: u64,
) -> Result<SvmModel> {
    if vectors.len() != labels.len() {
        return Err(Error::invalid("vectors and labels differ in length"));
    }
    if config.lambda.is_nan() || config.lambda <= 0.0 {
        return Err(Error::invalid("SVM lambda must be positive"));
    }
    // w_true = scale * v, so shrinking is O(1)
    let mut v = vec![0.0; dim + 1];
    let mut scale = 1.0;
    let mut order: Vec<usize> = (0..vectors.len()).collect();
    let mut t = 0u64;
    for epoch in 0..config.epochs {
        order.sort_unstable();
        mt_shuffle(&mut order, seed.wrapping_add(epoch as u64));
        for &i in &order {
            t += 1;
            let eta = 1.0 / (config.lambda * t as f64);
            let x = &vectors[i];
            let y = sign(labels[i]);
            let margin = scale * (sparse_dot(x, &v[..dim]) + v[dim]);
            let shrink = 1.0 - eta * config.lambda;
            if shrink <= 0.0 {
                v.iter_mut().for_each(|a| *a = 0.0);
                scale = 1.0;
            } else {
                scale *= shrink;
            }
            if y * margin < 1.0 {
                let step = eta * y / scale;
                for &(j, xv) in x {
                    v[j] += step * xv;
                }
                v[dim] += step;
            }
            if scale < 1e-9 {
                v.iter_mut().for_each(|a| *a *= scale);
                scale = 1.0;
            }
        }
    }
    let b = v[dim] * scale;
    v.truncate(dim);
    v.iter_mut().for_each(|a| *a *= scale);
    Ok(SvmModel { w: v, b })
}
