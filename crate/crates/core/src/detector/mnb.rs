use crate::error::{Error, Result};
use crate::vsm::SparseVec;

/// Multinomial naive Bayes over nonnegative term weights. Index 0 is the
/// negative class, 1 the positive class.
#[derive(Debug, Clone, PartialEq)]
pub struct MnbModel {
    pub alpha: f64,
    pub log_prior: [f64; 2],
    /// `log P(term | class)` for every feature.
    pub log_likelihood: [Vec<f64>; 2],
}

/// Fits class priors and Laplace-smoothed term likelihoods:
/// `P(t | c) = (N_tc + α) / (N_c + α |V|)` where `N_tc` sums the weight of
/// `t` over class-`c` documents.
pub fn train_mnb(
    vectors: &[SparseVec],
    labels: &[bool],
    dim: usize,
    alpha: f64,
) -> Result<MnbModel> {
    if alpha <= 0.0 || !alpha.is_finite() {
        return Err(Error::invalid(format!(
            "MNB smoothing must be positive, got {alpha}"
        )));
    }
    if vectors.len() != labels.len() {
        return Err(Error::invalid("vectors and labels differ in length"));
    }
    if vectors.is_empty() {
        return Err(Error::invalid("cannot fit MNB on zero documents"));
    }
    let mut docs = [0usize; 2];
    let mut term = [vec![0.0; dim], vec![0.0; dim]];
    for (x, &y) in vectors.iter().zip(labels) {
        let c = y as usize;
        docs[c] += 1;
        for &(i, v) in x {
            if v < 0.0 {
                return Err(Error::invalid("MNB features must be nonnegative"));
            }
            term[c][i] += v;
        }
    }
    let n = vectors.len() as f64;
    let log_prior = docs.map(|d| (d as f64 / n).ln());
    let log_likelihood = term.map(|t| {
        let total: f64 = t.iter().sum();
        let denom = total + alpha * dim as f64;
        t.iter().map(|&x| ((x + alpha) / denom).ln()).collect()
    });
    Ok(MnbModel {
        alpha,
        log_prior,
        log_likelihood,
    })
}

impl MnbModel {
    pub fn dim(&self) -> usize {
        self.log_likelihood[0].len()
    }

    /// Unnormalized log posterior of each class.
    pub fn joint_log_likelihood(&self, x: &[(usize, f64)]) -> [f64; 2] {
        [0, 1].map(|c| {
            self.log_prior[c]
                + x.iter()
                    .map(|&(i, v)| v * self.log_likelihood[c][i])
                    .sum::<f64>()
        })
    }

    /// `P(positive | x)`.
    pub fn posterior(&self, x: &[(usize, f64)]) -> f64 {
        let [neg, pos] = self.joint_log_likelihood(x);
        1.0 / (1.0 + (neg - pos).exp())
    }

    /// Positive only when its log posterior is strictly larger.
    pub fn predict(&self, x: &[(usize, f64)]) -> bool {
        let [neg, pos] = self.joint_log_likelihood(x);
        pos > neg
    }
}
