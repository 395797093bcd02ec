use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Precision, recall and F1 of the positive (SATD) class.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
    /// Set when a zero denominator forced a score to 0.
    pub undefined: bool,
}

fn ratio(num: usize, den: usize, undefined: &mut bool) -> f64 {
    if den == 0 {
        *undefined = true;
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn prf1(predicted: &[bool], truth: &[bool]) -> Result<Metrics> {
    if predicted.len() != truth.len() {
        return Err(Error::invalid(format!(
            "{} predictions for {} labels",
            predicted.len(),
            truth.len()
        )));
    }
    if predicted.is_empty() {
        return Err(Error::invalid("no predictions to score"));
    }
    let mut m = Metrics::default();
    for (&p, &t) in predicted.iter().zip(truth) {
        match (p, t) {
            (true, true) => m.tp += 1,
            (true, false) => m.fp += 1,
            (false, true) => m.fn_ += 1,
            (false, false) => m.tn += 1,
        }
    }
    let mut undefined = false;
    m.precision = ratio(m.tp, m.tp + m.fp, &mut undefined);
    m.recall = ratio(m.tp, m.tp + m.fn_, &mut undefined);
    m.f1 = if m.precision + m.recall > 0.0 {
        2.0 * m.precision * m.recall / (m.precision + m.recall)
    } else {
        0.0
    };
    m.undefined = undefined;
    Ok(m)
}

/// Element-wise mean of precision, recall and F1; counts are summed.
pub fn mean_metrics(all: &[Metrics]) -> Metrics {
    let n = all.len().max(1) as f64;
    let mut m = Metrics::default();
    for x in all {
        m.precision += x.precision / n;
        m.recall += x.recall / n;
        m.f1 += x.f1 / n;
        m.tp += x.tp;
        m.fp += x.fp;
        m.fn_ += x.fn_;
        m.tn += x.tn;
        m.undefined |= x.undefined;
    }
    m
}

/// One line of a results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub name: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl ResultRow {
    pub fn new(name: impl Into<String>, m: &Metrics) -> Self {
        ResultRow {
            name: name.into(),
            precision: m.precision,
            recall: m.recall,
            f1: m.f1,
        }
    }
}

/// F1 descending, then precision descending; stable otherwise.
pub fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| {
        b.f1.total_cmp(&a.f1)
            .then_with(|| b.precision.total_cmp(&a.precision))
    });
}

/// Counts of each label value, for quick sanity output.
pub fn label_counts(labels: &[bool]) -> HashMap<bool, usize> {
    let mut c = HashMap::new();
    for &l in labels {
        *c.entry(l).or_insert(0) += 1;
    }
    c
}
