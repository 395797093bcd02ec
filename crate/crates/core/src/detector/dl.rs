use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::dropout::apply_dropout;
use crate::nn::params::{prefixed, prefixed_mut};
use crate::nn::{
    pool, pool_backward, sigmoid, sigmoid_bce, Adam, AdamConfig, Dense, DropoutCtx, Embedding,
    LstmStack, Matrix, Parameterized, Pooling,
};
use crate::rng::stream_rng;
use crate::text::{VocabKind, Vocabulary, MAX_CODE_TOKENS, PAD_INDEX};
use crate::train::{run_epochs, LoopConfig};

/// RNG stream used for weight initialization.
pub(crate) const INIT_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorHp {
    pub latent_dim: usize,
    pub layers: usize,
    pub batch_size: usize,
    pub pooling: Pooling,
    pub epochs: usize,
    pub dropout: f64,
    pub learning_rate: f64,
    /// Positive iff probability >= threshold.
    pub threshold: f64,
    /// Multiplier on the Glorot init range.
    pub init_scale: f64,
}

impl Default for DetectorHp {
    fn default() -> Self {
        DetectorHp {
            latent_dim: 32,
            layers: 1,
            batch_size: 32,
            pooling: Pooling::Last,
            epochs: 100,
            dropout: 0.2,
            learning_rate: 1e-3,
            threshold: 0.5,
            init_scale: 1.0,
        }
    }
}

/// LSTM sizes for a detector: one layer is `[L]`, two are `[L, L]`, three
/// are `[2L, L, L/2]`.
pub fn layer_plan(latent: usize, layers: usize) -> Result<Vec<usize>> {
    match layers {
        _ if latent == 0 => Err(Error::invalid("latent dimension must be positive")),
        1 => Ok(vec![latent]),
        2 => Ok(vec![latent, latent]),
        3 if latent >= 2 => Ok(vec![2 * latent, latent, latent / 2]),
        3 => Err(Error::invalid("three-layer detectors need latent >= 2")),
        n => Err(Error::invalid(format!("unsupported layer count {n}"))),
    }
}

/// Embedding, LSTM stack, pooling and a single sigmoid unit.
#[derive(Debug, Clone, PartialEq)]
pub struct DlNet {
    pub embedding: Embedding,
    pub lstm: LstmStack,
    pub head: Dense,
    pub pooling: Pooling,
}

impl DlNet {
    pub fn new<R: Rng + ?Sized>(
        vocab_size: usize,
        embed_dim: usize,
        sizes: &[usize],
        pooling: Pooling,
        scale: f64,
        rng: &mut R,
    ) -> Self {
        let embedding = Embedding::new(vocab_size, embed_dim, scale, rng);
        let lstm = LstmStack::new(embed_dim, sizes, scale, rng);
        let head = Dense::new(lstm.output_size(), 1, scale, rng);
        DlNet {
            embedding,
            lstm,
            head,
            pooling,
        }
    }

    /// Probability that the sequence is SATD. Masked positions are ignored.
    pub fn probability(&self, indices: &[usize], mask: &[bool]) -> Result<f64> {
        let x = self.embedding.forward(indices)?;
        let trace = self
            .lstm
            .forward::<rand_chacha::ChaCha8Rng>(x, mask, None, None)?;
        let (pooled, _) = pool(trace.outputs(), mask, self.pooling)?;
        Ok(sigmoid(self.head.forward(&pooled)[0]))
    }

    /// BCE loss and parameter gradients for one unpadded example.
    pub fn loss_and_grad<R: Rng + ?Sized>(
        &self,
        indices: &[usize],
        label: bool,
        dropout: Option<(f64, &mut R)>,
    ) -> Result<(f64, DlNet)> {
        let mask = vec![true; indices.len()];
        let x = self.embedding.forward(indices)?;
        let (trace, pooled, argmax, head_mask) = match dropout {
            Some((rate, rng)) if rate > 0.0 => {
                let mut ctx = DropoutCtx { rate, rng };
                let trace = self.lstm.forward(x, &mask, None, Some(&mut ctx))?;
                let (pooled, argmax) = pool(trace.outputs(), &mask, self.pooling)?;
                let mut pooled = pooled;
                let m = apply_dropout(&mut pooled, rate, ctx.rng);
                (trace, pooled, argmax, Some(m))
            }
            _ => {
                let trace = self.lstm.forward::<R>(x, &mask, None, None)?;
                let (pooled, argmax) = pool(trace.outputs(), &mask, self.pooling)?;
                (trace, pooled, argmax, None)
            }
        };
        let logit = self.head.forward(&pooled)[0];
        let out = sigmoid_bce(logit, if label { 1.0 } else { 0.0 });

        let mut grad = self.zeros_like();
        let mut d_pooled = self.head.backward(&pooled, &[out.d_logit], &mut grad.head);
        if let Some(m) = head_mask {
            d_pooled.iter_mut().zip(&m).for_each(|(d, k)| *d *= k);
        }
        let d_states = pool_backward(&d_pooled, indices.len(), &mask, self.pooling, &argmax);
        let g = self.lstm.backward(&trace, d_states, None, &mut grad.lstm);
        self.embedding
            .backward(indices, &g.d_inputs, &mut grad.embedding);
        Ok((out.loss, grad))
    }
}

impl Parameterized for DlNet {
    fn blocks(&self) -> Vec<(String, &Matrix)> {
        let mut v: Vec<_> = prefixed("embedding", self.embedding.blocks()).collect();
        v.extend(prefixed("lstm", self.lstm.blocks()));
        v.extend(prefixed("head", self.head.blocks()));
        v
    }

    fn blocks_mut(&mut self) -> Vec<(String, &mut Matrix)> {
        let mut v: Vec<_> = prefixed_mut("embedding", self.embedding.blocks_mut()).collect();
        v.extend(prefixed_mut("lstm", self.lstm.blocks_mut()));
        v.extend(prefixed_mut("head", self.head.blocks_mut()));
        v
    }
}

/// A trained (or initialized) LSTM detector with its vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct DlDetector {
    pub hp: DetectorHp,
    pub seed: u64,
    pub vocab: Vocabulary,
    pub net: DlNet,
}

/// Maps tokens to indices, standing in a single padding token for an empty
/// sequence so that every example has at least one step.
pub(crate) fn encode_nonempty<S: AsRef<str>>(vocab: &Vocabulary, tokens: &[S]) -> Vec<usize> {
    if tokens.is_empty() {
        vec![PAD_INDEX]
    } else {
        vocab.encode(tokens)
    }
}

pub(crate) fn check_classes(labels: &[bool]) -> Result<()> {
    if !labels.iter().any(|&l| l) {
        return Err(Error::EmptyClass("positive".into()));
    }
    if labels.iter().all(|&l| l) {
        return Err(Error::EmptyClass("negative".into()));
    }
    Ok(())
}

impl DlDetector {
    /// Untrained detector with freshly initialized weights for `seed`.
    pub fn skeleton(vocab: Vocabulary, hp: DetectorHp, seed: u64) -> Result<Self> {
        let sizes = layer_plan(hp.latent_dim, hp.layers)?;
        let mut rng = stream_rng(seed, INIT_STREAM);
        let net = DlNet::new(
            vocab.len(),
            hp.latent_dim,
            &sizes,
            hp.pooling,
            hp.init_scale,
            &mut rng,
        );
        Ok(DlDetector {
            hp,
            seed,
            vocab,
            net,
        })
    }

    /// Trains in place with BCE, Adam and dropout; returns per-epoch mean loss.
    pub fn fit<S: AsRef<str> + Sync>(
        &mut self,
        sequences: &[Vec<S>],
        labels: &[bool],
    ) -> Result<Vec<f64>> {
        if sequences.len() != labels.len() {
            return Err(Error::invalid("sequences and labels differ in length"));
        }
        check_classes(labels)?;
        let encoded: Vec<Vec<usize>> = sequences
            .iter()
            .map(|s| {
                if s.len() > MAX_CODE_TOKENS {
                    Err(Error::SequenceTooLong {
                        len: s.len(),
                        cap: MAX_CODE_TOKENS,
                    })
                } else {
                    Ok(encode_nonempty(&self.vocab, s))
                }
            })
            .collect::<Result<_>>()?;
        let mut opt = Adam::new(AdamConfig {
            lr: self.hp.learning_rate,
            ..AdamConfig::default()
        });
        let config = LoopConfig {
            epochs: self.hp.epochs,
            batch_size: self.hp.batch_size,
            seed: self.seed,
        };
        let rate = self.hp.dropout;
        run_epochs(
            &mut self.net,
            &mut opt,
            encoded.len(),
            config,
            |net: &DlNet, i, rng| net.loss_and_grad(&encoded[i], labels[i], Some((rate, rng))),
            |epoch, loss| log::debug!("detector epoch {epoch}: loss {loss:.6}"),
        )
    }

    pub fn probability<S: AsRef<str>>(&self, tokens: &[S]) -> Result<f64> {
        if tokens.is_empty() {
            return Err(Error::invalid("cannot classify an empty sequence"));
        }
        if tokens.len() > MAX_CODE_TOKENS {
            return Err(Error::SequenceTooLong {
                len: tokens.len(),
                cap: MAX_CODE_TOKENS,
            });
        }
        let idx = self.vocab.encode(tokens);
        self.net.probability(&idx, &vec![true; idx.len()])
    }

    pub(crate) fn probability_lenient<S: AsRef<str>>(&self, tokens: &[S]) -> Result<f64> {
        let idx = encode_nonempty(&self.vocab, tokens);
        self.net.probability(&idx, &vec![true; idx.len()])
    }
}

/// Builds a vocabulary from the training sequences and trains a detector.
pub fn train_dl_detector<S: AsRef<str> + Sync>(
    sequences: &[Vec<S>],
    labels: &[bool],
    hp: &DetectorHp,
    seed: u64,
) -> Result<(DlDetector, Vec<f64>)> {
    let vocab = Vocabulary::build(sequences, VocabKind::Code);
    let mut det = DlDetector::skeleton(vocab, hp.clone(), seed)?;
    let losses = det.fit(sequences, labels)?;
    Ok((det, losses))
}
