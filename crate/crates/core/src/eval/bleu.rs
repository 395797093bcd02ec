use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn ngrams<S: AsRef<str>>(words: &[S], n: usize) -> HashMap<Vec<&str>, usize> {
    let mut counts = HashMap::new();
    if words.len() >= n {
        for w in words.windows(n) {
            *counts
                .entry(w.iter().map(AsRef::as_ref).collect())
                .or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped n-gram matches and the number of hypothesis n-grams.
pub fn modified_precision<S: AsRef<str>>(
    hypothesis: &[S],
    reference: &[S],
    n: usize,
) -> (usize, usize) {
    let hyp = ngrams(hypothesis, n);
    let reference = ngrams(reference, n);
    let clipped = hyp
        .iter()
        .map(|(g, &c)| c.min(reference.get(g).copied().unwrap_or(0)))
        .sum();
    (clipped, hypothesis.len().saturating_sub(n - 1))
}

/// Sentence BLEU with uniform weights over orders `1..=n`.
///
/// A zero clipped count is replaced by `1 / (2 |hyp|)`. Orders for which
/// neither sentence has any n-gram are left out of the geometric mean, so
/// identical short sentences still score 1.
pub fn bleu_n<S: AsRef<str>>(hypothesis: &[S], reference: &[S], n: usize) -> Result<f64> {
    if !(1..=4).contains(&n) {
        return Err(Error::invalid(format!("BLEU order must be 1..=4, got {n}")));
    }
    if reference.is_empty() {
        return Err(Error::invalid("BLEU needs a nonempty reference"));
    }
    if hypothesis.is_empty() {
        return Ok(0.0);
    }
    let hyp_len = hypothesis.len() as f64;
    let mut log_sum = 0.0;
    let mut orders = 0;
    for k in 1..=n {
        let (clipped, total) = modified_precision(hypothesis, reference, k);
        if total == 0 && reference.len() < k {
            continue;
        }
        let p = if clipped == 0 {
            1.0 / (2.0 * hyp_len)
        } else {
            clipped as f64 / total as f64
        };
        log_sum += p.ln();
        orders += 1;
    }
    let bp = (1.0 - reference.len() as f64 / hyp_len).min(0.0).exp();
    Ok(bp * (log_sum / orders as f64).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BleuScores {
    pub bleu_1: f64,
    pub bleu_2: f64,
    pub bleu_3: f64,
    pub bleu_4: f64,
}

impl BleuScores {
    pub fn get(&self, n: usize) -> f64 {
        match n {
            1 => self.bleu_1,
            2 => self.bleu_2,
            3 => self.bleu_3,
            _ => self.bleu_4,
        }
    }

    pub fn mean(all: &[BleuScores]) -> BleuScores {
        let n = all.len().max(1) as f64;
        let mut m = BleuScores::default();
        for s in all {
            m.bleu_1 += s.bleu_1 / n;
            m.bleu_2 += s.bleu_2 / n;
            m.bleu_3 += s.bleu_3 / n;
            m.bleu_4 += s.bleu_4 / n;
        }
        m
    }
}

/// Mean sentence BLEU-1..4 over (hypothesis, reference) pairs.
pub fn corpus_bleu<S: AsRef<str>>(pairs: &[(Vec<S>, Vec<S>)]) -> Result<BleuScores> {
    let mut per = Vec::with_capacity(pairs.len());
    for (h, r) in pairs {
        per.push(BleuScores {
            bleu_1: bleu_n(h, r, 1)?,
            bleu_2: bleu_n(h, r, 2)?,
            bleu_3: bleu_n(h, r, 3)?,
            bleu_4: bleu_n(h, r, 4)?,
        });
    }
    Ok(BleuScores::mean(&per))
}
