//! Next-token language model over SBT sequences, and transplanting its
//! weights into detectors.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::detector::{layer_plan, DetectorHp, DlDetector};
use crate::error::{Error, Result};
use crate::nn::dropout::apply_dropout;
use crate::nn::params::{prefixed, prefixed_mut};
use crate::nn::{
    load_checkpoint, restore_blocks, save_checkpoint, softmax_ce, Adam, AdamConfig, Checkpoint,
    CheckpointHeader, Dense, DropoutCtx, Embedding, LstmStack, Matrix, Parameterized,
};
use crate::rng::stream_rng;
use crate::text::{VocabKind, Vocabulary, MAX_CODE_TOKENS};
use crate::train::{run_epochs, LoopConfig};

const INIT_STREAM: u64 = u64::MAX;

/// Embedding and LSTM stack shaped like a detector's, plus a softmax over the
/// code vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct LmNet {
    pub embedding: Embedding,
    pub lstm: LstmStack,
    pub head: Dense,
}

impl LmNet {
    /// Mean next-token cross-entropy of one sequence (length ≥ 2).
    pub fn loss_and_grad<R: Rng + ?Sized>(
        &self,
        seq: &[usize],
        dropout: Option<(f64, &mut R)>,
    ) -> Result<(f64, LmNet)> {
        let inputs = &seq[..seq.len() - 1];
        let targets = &seq[1..];
        let mask = vec![true; inputs.len()];
        let x = self.embedding.forward(inputs)?;
        let (rate, mut rng) = match dropout {
            Some((r, rng)) if r > 0.0 => (r, Some(rng)),
            _ => (0.0, None),
        };
        let trace = match rng.as_deref_mut() {
            Some(r) => self
                .lstm
                .forward(x, &mask, None, Some(&mut DropoutCtx { rate, rng: r }))?,
            None => self.lstm.forward::<R>(x, &mask, None, None)?,
        };
        let k = targets.len() as f64;
        let mut loss = 0.0;
        let mut grad = self.zeros_like();
        let mut d_states = Vec::with_capacity(targets.len());
        for (t, &target) in targets.iter().enumerate() {
            let mut h = trace.outputs()[t].clone();
            let m = rng.as_deref_mut().map(|r| apply_dropout(&mut h, rate, r));
            let (l, d) = softmax_ce(&self.head.forward(&h), target);
            loss += l / k;
            let d: Vec<f64> = d.into_iter().map(|v| v / k).collect();
            let mut dh = self.head.backward(&h, &d, &mut grad.head);
            if let Some(m) = m {
                dh.iter_mut().zip(&m).for_each(|(a, b)| *a *= b);
            }
            d_states.push(dh);
        }
        let g = self.lstm.backward(&trace, d_states, None, &mut grad.lstm);
        self.embedding
            .backward(inputs, &g.d_inputs, &mut grad.embedding);
        Ok((loss, grad))
    }

    /// Number of positions whose argmax prediction equals the next token.
    fn correct(&self, seq: &[usize]) -> Result<usize> {
        let inputs = &seq[..seq.len() - 1];
        let x = self.embedding.forward(inputs)?;
        let mask = vec![true; inputs.len()];
        let trace = self
            .lstm
            .forward::<rand_chacha::ChaCha8Rng>(x, &mask, None, None)?;
        Ok(trace
            .outputs()
            .iter()
            .zip(&seq[1..])
            .filter(|(h, &target)| {
                let logits = self.head.forward(h);
                let best =
                    (0..logits.len()).fold(0, |b, i| if logits[i] > logits[b] { i } else { b });
                best == target
            })
            .count())
    }
}

impl Parameterized for LmNet {
    fn blocks(&self) -> Vec<(String, &Matrix)> {
        let mut v: Vec<_> = prefixed("embedding", self.embedding.blocks()).collect();
        v.extend(prefixed("lstm", self.lstm.blocks()));
        v.extend(prefixed("lm_head", self.head.blocks()));
        v
    }

    fn blocks_mut(&mut self) -> Vec<(String, &mut Matrix)> {
        let mut v: Vec<_> = prefixed_mut("embedding", self.embedding.blocks_mut()).collect();
        v.extend(prefixed_mut("lstm", self.lstm.blocks_mut()));
        v.extend(prefixed_mut("lm_head", self.head.blocks_mut()));
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LanguageModel {
    pub hp: DetectorHp,
    pub seed: u64,
    pub vocab: Vocabulary,
    pub net: LmNet,
}

impl LanguageModel {
    pub fn skeleton(vocab: Vocabulary, hp: DetectorHp, seed: u64) -> Result<Self> {
        let sizes = layer_plan(hp.latent_dim, hp.layers)?;
        let mut rng = stream_rng(seed, INIT_STREAM);
        let embedding = Embedding::new(vocab.len(), hp.latent_dim, hp.init_scale, &mut rng);
        let lstm = LstmStack::new(hp.latent_dim, &sizes, hp.init_scale, &mut rng);
        let head = Dense::new(lstm.output_size(), vocab.len(), hp.init_scale, &mut rng);
        Ok(LanguageModel {
            hp,
            seed,
            vocab,
            net: LmNet {
                embedding,
                lstm,
                head,
            },
        })
    }

    /// Fraction of positions in `sequences` where the next token is predicted
    /// exactly.
    pub fn next_token_accuracy<S: AsRef<str>>(&self, sequences: &[Vec<S>]) -> Result<f64> {
        let (mut hit, mut total) = (0usize, 0usize);
        for s in sequences.iter().filter(|s| s.len() >= 2) {
            hit += self.net.correct(&self.vocab.encode(s))?;
            total += s.len() - 1;
        }
        Ok(if total == 0 {
            0.0
        } else {
            hit as f64 / total as f64
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut h = CheckpointHeader::new("lm", self.seed, json!(self.hp));
        h.code_vocab = Some(self.vocab.words().to_vec());
        save_checkpoint(path, h, &self.net)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_checkpoint(&load_checkpoint(path)?)
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        let h = &ck.header;
        if h.kind != "lm" {
            return Err(Error::Checkpoint(format!(
                "{:?} is not a language model",
                h.kind
            )));
        }
        let words = h
            .code_vocab
            .clone()
            .ok_or_else(|| Error::Checkpoint("model file has no vocabulary".into()))?;
        let hp: DetectorHp = serde_json::from_value(h.config.clone())?;
        let mut lm = Self::skeleton(Vocabulary::from_words(words, VocabKind::Code)?, hp, h.seed)?;
        restore_blocks(&mut lm.net, &ck.blocks)?;
        Ok(lm)
    }
}

/// Trains a next-token model with teacher forcing and Adam. Sequences shorter
/// than two tokens carry no target and are skipped.
pub fn train_next_token_lm<S: AsRef<str> + Sync>(
    sequences: &[Vec<S>],
    hp: &DetectorHp,
    seed: u64,
) -> Result<(LanguageModel, Vec<f64>)> {
    let vocab = Vocabulary::build(sequences, VocabKind::Code);
    let encoded: Vec<Vec<usize>> = sequences
        .iter()
        .filter(|s| s.len() >= 2)
        .map(|s| {
            if s.len() > MAX_CODE_TOKENS {
                Err(Error::SequenceTooLong {
                    len: s.len(),
                    cap: MAX_CODE_TOKENS,
                })
            } else {
                Ok(vocab.encode(s))
            }
        })
        .collect::<Result<_>>()?;
    if encoded.len() < hp.batch_size {
        return Err(Error::invalid(format!(
            "pre-training corpus has {} usable sequences, fewer than one batch of {}",
            encoded.len(),
            hp.batch_size
        )));
    }
    let mut lm = LanguageModel::skeleton(vocab, hp.clone(), seed)?;
    let mut opt = Adam::new(AdamConfig {
        lr: hp.learning_rate,
        ..AdamConfig::default()
    });
    let config = LoopConfig {
        epochs: hp.epochs,
        batch_size: hp.batch_size,
        seed,
    };
    let rate = hp.dropout;
    let losses = run_epochs(
        &mut lm.net,
        &mut opt,
        encoded.len(),
        config,
        |net: &LmNet, i, rng| net.loss_and_grad(&encoded[i], Some((rate, rng))),
        |epoch, loss| log::debug!("lm epoch {epoch}: loss {loss:.6}"),
    )?;
    Ok((lm, losses))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PretrainMode {
    /// Embedding and LSTM stack.
    End2end,
    EmbeddingOnly,
}

/// Copies pre-trained weights into a detector built on the model's
/// vocabulary. Only the LSTM sizes and embedding must agree; the output head
/// stays as initialized.
pub fn init_from_pretrained(
    detector: &mut DlDetector,
    lm: &LanguageModel,
    mode: PretrainMode,
) -> Result<()> {
    if detector.vocab != lm.vocab {
        return Err(Error::invalid(
            "detector vocabulary differs from the pre-trained model's",
        ));
    }
    let source: Vec<(String, Matrix)> = lm
        .net
        .blocks()
        .into_iter()
        .filter(|(n, _)| !n.starts_with("lm_head."))
        .map(|(n, m)| (n, m.clone()))
        .collect();
    match mode {
        PretrainMode::End2end => {
            let mut targets = Transplant(&mut detector.net, true);
            restore_blocks(&mut targets, &source)
        }
        PretrainMode::EmbeddingOnly => {
            let mut targets = Transplant(&mut detector.net, false);
            restore_blocks(&mut targets, &source)
        }
    }
}

/// The detector blocks that receive pre-trained weights.
struct Transplant<'a>(&'a mut crate::detector::DlNet, bool);

impl Parameterized for Transplant<'_> {
    fn blocks(&self) -> Vec<(String, &Matrix)> {
        let mut v: Vec<_> = prefixed("embedding", self.0.embedding.blocks()).collect();
        if self.1 {
            v.extend(prefixed("lstm", self.0.lstm.blocks()));
        }
        v
    }

    fn blocks_mut(&mut self) -> Vec<(String, &mut Matrix)> {
        let with_lstm = self.1;
        let net = &mut *self.0;
        let mut v: Vec<_> = prefixed_mut("embedding", net.embedding.blocks_mut()).collect();
        if with_lstm {
            v.extend(prefixed_mut("lstm", net.lstm.blocks_mut()));
        }
        v
    }
}
