use rand::{Rng, RngExt};

/// Inverted dropout mask: each entry is `0` with probability `rate`, otherwise
/// `1 / (1 - rate)`, so the expected activation is unchanged.
pub fn dropout_mask_with<R: Rng + ?Sized>(len: usize, rate: f64, rng: &mut R) -> Vec<f64> {
    if rate <= 0.0 {
        return vec![1.0; len];
    }
    let keep = 1.0 / (1.0 - rate);
    (0..len)
        .map(|_| {
            if rng.random::<f64>() < rate {
                0.0
            } else {
                keep
            }
        })
        .collect()
}

/// Applies a fresh mask to `x` in place and returns it for the backward pass.
pub fn apply_dropout<R: Rng + ?Sized>(x: &mut [f64], rate: f64, rng: &mut R) -> Vec<f64> {
    let mask = dropout_mask_with(x.len(), rate, rng);
    x.iter_mut().zip(&mask).for_each(|(v, m)| *v *= m);
    mask
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn zero_rate_is_identity() {
        let mut x = vec![1.0, 2.0];
        apply_dropout(&mut x, 0.0, &mut stream_rng(0, 0));
        assert_eq!(x, [1.0, 2.0]);
    }

    #[test]
    fn mask_preserves_expectation() {
        let m = dropout_mask_with(200_000, 0.2, &mut stream_rng(9, 1));
        let mean = m.iter().sum::<f64>() / m.len() as f64;
        assert!((mean - 1.0).abs() < 0.01, "{mean}");
        assert!(m.iter().all(|&v| v == 0.0 || (v - 1.25).abs() < 1e-12));
    }
}
