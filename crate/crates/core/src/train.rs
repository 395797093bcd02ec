//! Mini-batch training loop shared by the detector, generator and language
//! model.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::nn::{Optimizer, Parameterized};
use crate::rng::{mt_shuffle, stream_rng};

/// Examples per parallel work unit. Fixed so gradient sums are reduced in the
/// same order whatever the thread count.
const CHUNK: usize = 4;

/// Streams below this bit are per-example dropout streams.
const SHUFFLE_STREAM: u64 = 1 << 63;

#[derive(Debug, Clone, Copy)]
pub struct LoopConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

/// Runs `epochs` passes over `n` examples in seeded shuffled order.
///
/// `example` returns the loss and gradient of one example; it receives the
/// example index and a dropout RNG unique to (epoch, example). Batch
/// gradients are averaged before the optimizer step. Returns the mean loss of
/// every epoch.
pub fn run_epochs<M, O, F>(
    model: &mut M,
    optimizer: &mut O,
    n: usize,
    config: LoopConfig,
    example: F,
    mut on_epoch: impl FnMut(usize, f64),
) -> Result<Vec<f64>>
where
    M: Parameterized + Clone + Send + Sync,
    O: Optimizer,
    F: Fn(&M, usize, &mut ChaCha8Rng) -> Result<(f64, M)> + Sync,
{
    if config.batch_size == 0 {
        return Err(Error::invalid("batch size must be positive"));
    }
    let mut history = Vec::with_capacity(config.epochs);
    let mut order: Vec<usize> = (0..n).collect();
    for epoch in 0..config.epochs {
        order.sort_unstable();
        let mut shuffle_rng = stream_rng(config.seed, SHUFFLE_STREAM | epoch as u64);
        mt_shuffle(&mut order, rand::Rng::next_u64(&mut shuffle_rng));
        let mut total = 0.0;
        for (b, batch) in order.chunks(config.batch_size).enumerate() {
            let model_ref = &*model;
            let partials: Vec<Result<(f64, M)>> = batch
                .par_chunks(CHUNK)
                .map(|chunk| {
                    let mut acc: Option<(f64, M)> = None;
                    for &i in chunk {
                        let stream = ((epoch as u64) << 32) | i as u64;
                        let mut rng = stream_rng(config.seed, stream);
                        let (loss, grad) = example(model_ref, i, &mut rng)?;
                        match &mut acc {
                            None => acc = Some((loss, grad)),
                            Some((l, g)) => {
                                *l += loss;
                                g.accumulate(&grad);
                            }
                        }
                    }
                    Ok(acc.expect("chunks are non-empty"))
                })
                .collect();
            let mut batch_loss = 0.0;
            let mut grad: Option<M> = None;
            for p in partials {
                let (l, g) = p.map_err(|e| batch_error(e, epoch, b))?;
                batch_loss += l;
                match &mut grad {
                    None => grad = Some(g),
                    Some(acc) => acc.accumulate(&g),
                }
            }
            if !batch_loss.is_finite() {
                return Err(Error::Training(format!(
                    "non-finite loss in epoch {epoch}, batch {b}"
                )));
            }
            let mut grad = grad.expect("batches are non-empty");
            grad.scale_all(1.0 / batch.len() as f64);
            optimizer
                .step(model, &grad)
                .map_err(|e| batch_error(e, epoch, b))?;
            total += batch_loss;
        }
        let mean = if n == 0 { 0.0 } else { total / n as f64 };
        on_epoch(epoch, mean);
        history.push(mean);
    }
    Ok(history)
}

fn batch_error(e: Error, epoch: usize, batch: usize) -> Error {
    match e {
        Error::NonFinite(what) => Error::Training(format!("{what} (epoch {epoch}, batch {batch})")),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Adam, AdamConfig, Dense};

    fn fit(threads: usize) -> (Vec<f64>, Dense) {
        let xs: Vec<[f64; 2]> = (0..23)
            .map(|i| [i as f64 / 10.0, 1.0 - i as f64 / 20.0])
            .collect();
        let mut model = Dense::new(2, 1, 1.0, &mut stream_rng(1, 0));
        let mut opt = Adam::new(AdamConfig::default());
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        let cfg = LoopConfig {
            epochs: 5,
            batch_size: 7,
            seed: 3,
        };
        let hist = pool
            .install(|| {
                run_epochs(
                    &mut model,
                    &mut opt,
                    xs.len(),
                    cfg,
                    |m: &Dense, i, _| {
                        let y = m.forward(&xs[i])[0] - (2.0 * xs[i][0] - xs[i][1]);
                        let mut g = m.zeros_like();
                        m.backward(&xs[i], &[2.0 * y], &mut g);
                        Ok((y * y, g))
                    },
                    |_, _| {},
                )
            })
            .unwrap();
        (hist, model)
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let (h1, m1) = fit(1);
        let (h4, m4) = fit(4);
        assert_eq!(h1, h4);
        assert_eq!(m1, m4);
    }

    #[test]
    fn nan_loss_is_a_training_error() {
        let mut model = Dense::new(1, 1, 1.0, &mut stream_rng(0, 0));
        let mut opt = Adam::new(AdamConfig::default());
        let cfg = LoopConfig {
            epochs: 1,
            batch_size: 2,
            seed: 0,
        };
        let r = run_epochs(
            &mut model,
            &mut opt,
            3,
            cfg,
            |m: &Dense, _, _| Ok((f64::NAN, m.zeros_like())),
            |_, _| {},
        );
        assert!(matches!(r, Err(Error::Training(msg)) if msg.contains("batch")));
    }
}
