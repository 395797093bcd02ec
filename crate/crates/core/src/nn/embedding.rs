use rand::Rng;

use super::params::Parameterized;
use super::tensor::{axpy, Matrix};
use crate::error::{Error, Result};

/// Lookup table with one `dim`-vector per vocabulary index (row `i` is the
/// embedding of word `i`).
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub table: Matrix,
}

impl Embedding {
    pub fn new<R: Rng + ?Sized>(vocab: usize, dim: usize, scale: f64, rng: &mut R) -> Self {
        Embedding {
            table: Matrix::glorot(vocab, dim, scale, rng),
        }
    }

    pub fn vocab_size(&self) -> usize {
        self.table.rows
    }

    pub fn dim(&self) -> usize {
        self.table.cols
    }

    pub fn forward(&self, indices: &[usize]) -> Result<Vec<Vec<f64>>> {
        indices
            .iter()
            .map(|&i| {
                if i < self.table.rows {
                    Ok(self.table.row(i).to_vec())
                } else {
                    Err(Error::IndexOutOfRange {
                        index: i,
                        size: self.table.rows,
                    })
                }
            })
            .collect()
    }

    /// Adds `d_out[t]` into the gradient row of `indices[t]`; other rows are untouched.
    pub fn backward(&self, indices: &[usize], d_out: &[Vec<f64>], grad: &mut Embedding) {
        for (&i, d) in indices.iter().zip(d_out) {
            axpy(1.0, d, grad.table.row_mut(i));
        }
    }
}

impl Parameterized for Embedding {
    fn blocks(&self) -> Vec<(String, &Matrix)> {
        vec![("table".into(), &self.table)]
    }

    fn blocks_mut(&mut self) -> Vec<(String, &mut Matrix)> {
        vec![("table".into(), &mut self.table)]
    }
}
