use rand::Rng;

use super::params::Parameterized;
use super::tensor::{sigmoid, Matrix};

/// Affine layer `y = W x + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub w: Matrix,
    pub b: Matrix,
}

impl Dense {
    pub fn new<R: Rng + ?Sized>(input: usize, output: usize, scale: f64, rng: &mut R) -> Self {
        Dense {
            w: Matrix::glorot(output, input, scale, rng),
            b: Matrix::zeros(output, 1),
        }
    }

    pub fn input_size(&self) -> usize {
        self.w.cols
    }

    pub fn output_size(&self) -> usize {
        self.w.rows
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.b.data.clone();
        self.w.matvec_add(x, &mut y);
        y
    }

    /// Accumulates parameter gradients and returns `d_x`.
    pub fn backward(&self, x: &[f64], d_y: &[f64], grad: &mut Dense) -> Vec<f64> {
        grad.w.outer_add(d_y, x);
        for (g, d) in grad.b.data.iter_mut().zip(d_y) {
            *g += d;
        }
        let mut dx = vec![0.0; self.input_size()];
        self.w.matvec_t_add(d_y, &mut dx);
        dx
    }
}

impl Parameterized for Dense {
    fn blocks(&self) -> Vec<(String, &Matrix)> {
        vec![("w".into(), &self.w), ("b".into(), &self.b)]
    }

    fn blocks_mut(&mut self) -> Vec<(String, &mut Matrix)> {
        vec![("w".into(), &mut self.w), ("b".into(), &mut self.b)]
    }
}

const PROB_CLAMP: f64 = 1e-12;

/// Binary cross-entropy of probability `p` against label `y ∈ {0, 1}`.
///
/// `p` is clamped to `[1e-12, 1 - 1e-12]` before the log. Returns the loss
/// and `∂loss/∂p`.
pub fn bce_loss(p: f64, y: f64) -> (f64, f64) {
    let pc = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    let loss = -(y * pc.ln() + (1.0 - y) * (1.0 - pc).ln());
    let d_p = -(y / pc) + (1.0 - y) / (1.0 - pc);
    (loss, d_p)
}

pub struct SigmoidBce {
    pub prob: f64,
    pub loss: f64,
    /// Gradient w.r.t. the pre-sigmoid logit, `p - y`.
    pub d_logit: f64,
}

/// Sigmoid output unit with BCE loss; uses the fused `p - y` gradient.
pub fn sigmoid_bce(logit: f64, y: f64) -> SigmoidBce {
    let prob = sigmoid(logit);
    let (loss, _) = bce_loss(prob, y);
    SigmoidBce {
        prob,
        loss,
        d_logit: prob - y,
    }
}

pub fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    out.iter_mut().for_each(|v| *v /= sum);
    out
}

/// Softmax cross-entropy for one target index. Returns `(loss, ∂loss/∂z)`.
pub fn softmax_ce(z: &[f64], target: usize) -> (f64, Vec<f64>) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_sum = z.iter().map(|v| (v - max).exp()).sum::<f64>().ln() + max;
    let loss = log_sum - z[target];
    let mut d = softmax(z);
    d[target] -= 1.0;
    (loss, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bce_values() {
        let (l, d) = bce_loss(0.5, 1.0);
        assert!((l - 2f64.ln()).abs() < 1e-15);
        assert!((d + 2.0).abs() < 1e-15);
        let (l, _) = bce_loss(0.0, 1.0);
        assert!((l - (1e12f64).ln()).abs() < 1e-6);
        assert!(bce_loss(1.0, 1.0).0 < 1e-11);
    }

    #[test]
    fn softmax_handles_large_logits() {
        let p = softmax(&[1000.0, 1000.0]);
        assert_eq!(p, [0.5, 0.5]);
        let (l, d) = softmax_ce(&[1000.0, 0.0], 0);
        assert!(l.abs() < 1e-12);
        assert!(d.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn ce_uniform() {
        let (l, d) = softmax_ce(&[0.0; 4], 2);
        assert!((l - 4f64.ln()).abs() < 1e-15);
        assert_eq!(d, [0.25, 0.25, -0.75, 0.25]);
    }

    #[test]
    fn fused_gradient_matches_chain_rule() {
        for (z, y) in [(0.3, 1.0), (-2.0, 0.0), (4.0, 0.0)] {
            let out = sigmoid_bce(z, y);
            let (_, d_p) = bce_loss(out.prob, y);
            let chain = d_p * out.prob * (1.0 - out.prob);
            assert!((chain - out.d_logit).abs() < 1e-12);
        }
    }
}
