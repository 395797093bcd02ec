//! Encoder–decoder LSTM with global dot-product attention for SATD comment
//! generation.
//!
//! The encoder reads SBT tokens. Its top layer's final `(h, c)` seeds the
//! decoder's bottom layer (upper decoder layers start at zero). At each
//! decoder step `t`:
//!
//! ```text
//! a_j   = softmax_j(S_t · H_j)
//! ctx   = Σ_j a_j H_j
//! att_t = tanh(W_c [ctx; S_t])
//! P(w)  = softmax(W_o att_t + b_o)
//! ```

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::nn::dropout::apply_dropout;
use crate::nn::params::{prefixed, prefixed_mut};
use crate::nn::{
    load_checkpoint, restore_blocks, save_checkpoint, softmax, softmax_ce, Checkpoint,
    CheckpointHeader, Dense, DropoutCtx, Embedding, LstmStack, Matrix, Parameterized, RmsProp,
    RmsPropConfig,
};
use crate::rng::stream_rng;
use crate::text::{
    frame_comment, VocabKind, Vocabulary, EOS_INDEX, MAX_CODE_TOKENS, MAX_COMMENT_WORDS, SOS_INDEX,
};
use crate::train::{run_epochs, LoopConfig};

const INIT_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorHp {
    pub latent_dim: usize,
    pub layers: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub dropout: f64,
    pub learning_rate: f64,
    pub init_scale: f64,
}

impl Default for GeneratorHp {
    fn default() -> Self {
        GeneratorHp {
            latent_dim: 64,
            layers: 1,
            batch_size: 32,
            epochs: 300,
            dropout: 0.2,
            learning_rate: 1e-3,
            init_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Attention {
    /// Zero on masked positions; sums to 1.
    pub weights: Vec<f64>,
    pub context: Vec<f64>,
}

/// Dot-product attention of decoder state `s` over encoder states.
pub fn attention_context(s: &[f64], states: &[Vec<f64>], mask: &[bool]) -> Result<Attention> {
    let live: Vec<usize> = (0..states.len()).filter(|&j| mask[j]).collect();
    if live.is_empty() {
        return Err(Error::invalid("attention over an all-masked sequence"));
    }
    let scores: Vec<f64> = live.iter().map(|&j| dot(s, &states[j])).collect();
    let a = softmax(&scores);
    let mut weights = vec![0.0; states.len()];
    let mut context = vec![0.0; s.len()];
    for (&j, &w) in live.iter().zip(&a) {
        weights[j] = w;
        for (c, h) in context.iter_mut().zip(&states[j]) {
            *c += w * h;
        }
    }
    Ok(Attention { weights, context })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    crate::nn::tensor::dot(a, b)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenNet {
    pub enc_embedding: Embedding,
    pub encoder: LstmStack,
    pub dec_embedding: Embedding,
    pub decoder: LstmStack,
    /// `latent × 2·latent`, applied to `[ctx; S_t]`.
    pub attn: Matrix,
    pub out: Dense,
}

struct StepCache {
    attention: Attention,
    concat: Vec<f64>,
    attended: Vec<f64>,
    head_input: Vec<f64>,
    head_mask: Option<Vec<f64>>,
    d_logits: Vec<f64>,
}

impl GenNet {
    pub fn new<R: Rng + ?Sized>(
        code_vocab: usize,
        comment_vocab: usize,
        latent: usize,
        layers: usize,
        scale: f64,
        rng: &mut R,
    ) -> Self {
        let sizes = vec![latent; layers];
        let enc_embedding = Embedding::new(code_vocab, latent, scale, rng);
        let encoder = LstmStack::new(latent, &sizes, scale, rng);
        let dec_embedding = Embedding::new(comment_vocab, latent, scale, rng);
        let decoder = LstmStack::new(latent, &sizes, scale, rng);
        let attn = Matrix::glorot(latent, 2 * latent, scale, rng);
        let out = Dense::new(latent, comment_vocab, scale, rng);
        GenNet {
            enc_embedding,
            encoder,
            dec_embedding,
            decoder,
            attn,
            out,
        }
    }

    fn attend(
        &self,
        s: &[f64],
        enc: &[Vec<f64>],
        mask: &[bool],
    ) -> Result<(Attention, Vec<f64>, Vec<f64>)> {
        let attention = attention_context(s, enc, mask)?;
        let mut concat = attention.context.clone();
        concat.extend_from_slice(s);
        let mut attended = vec![0.0; self.attn.rows];
        self.attn.matvec_add(&concat, &mut attended);
        attended.iter_mut().for_each(|v| *v = v.tanh());
        Ok((attention, concat, attended))
    }

    /// Mean per-position cross-entropy of a framed comment (`<sos> … <eos>`)
    /// under teacher forcing, with parameter gradients.
    pub fn loss_and_grad<R: Rng + ?Sized>(
        &self,
        code: &[usize],
        framed: &[usize],
        dropout: Option<(f64, &mut R)>,
    ) -> Result<(f64, GenNet)> {
        if framed.len() < 2 {
            return Err(Error::invalid("framed comment needs <sos> and <eos>"));
        }
        let (rate, mut rng) = match dropout {
            Some((r, rng)) if r > 0.0 => (r, Some(rng)),
            _ => (0.0, None),
        };
        let enc_mask = vec![true; code.len()];
        let dec_in = &framed[..framed.len() - 1];
        let targets = &framed[1..];
        let dec_mask = vec![true; dec_in.len()];

        let x = self.enc_embedding.forward(code)?;
        let enc = match rng.as_deref_mut() {
            Some(r) => {
                self.encoder
                    .forward(x, &enc_mask, None, Some(&mut DropoutCtx { rate, rng: r }))?
            }
            None => self.encoder.forward::<R>(x, &enc_mask, None, None)?,
        };
        let (h_n, c_n) = (enc.top().final_h().to_vec(), enc.top().final_c().to_vec());
        let y = self.dec_embedding.forward(dec_in)?;
        let init = Some((h_n.as_slice(), c_n.as_slice()));
        let dec = match rng.as_deref_mut() {
            Some(r) => {
                self.decoder
                    .forward(y, &dec_mask, init, Some(&mut DropoutCtx { rate, rng: r }))?
            }
            None => self.decoder.forward::<R>(y, &dec_mask, init, None)?,
        };
        let h_enc = enc.outputs();
        let s_dec = dec.outputs();

        let k = targets.len() as f64;
        let mut loss = 0.0;
        let mut caches = Vec::with_capacity(targets.len());
        for (t, &target) in targets.iter().enumerate() {
            let (attention, concat, attended) = self.attend(&s_dec[t], h_enc, &enc_mask)?;
            let mut head_input = attended.clone();
            let head_mask = rng
                .as_deref_mut()
                .map(|r| apply_dropout(&mut head_input, rate, r));
            let logits = self.out.forward(&head_input);
            let (l, d) = softmax_ce(&logits, target);
            if !l.is_finite() {
                return Err(Error::NonFinite(format!("decoder loss at position {t}")));
            }
            loss += l / k;
            caches.push(StepCache {
                attention,
                concat,
                attended,
                head_input,
                head_mask,
                d_logits: d.into_iter().map(|v| v / k).collect(),
            });
        }

        let mut grad = self.zeros_like();
        let latent = self.attn.rows;
        let mut d_enc = vec![vec![0.0; latent]; code.len()];
        let mut d_dec = vec![vec![0.0; latent]; dec_in.len()];
        for (t, c) in caches.iter().enumerate() {
            let mut d_att = self.out.backward(&c.head_input, &c.d_logits, &mut grad.out);
            if let Some(m) = &c.head_mask {
                d_att.iter_mut().zip(m).for_each(|(d, k)| *d *= k);
            }
            let d_u: Vec<f64> = d_att
                .iter()
                .zip(&c.attended)
                .map(|(d, a)| d * (1.0 - a * a))
                .collect();
            grad.attn.outer_add(&d_u, &c.concat);
            let mut d_concat = vec![0.0; 2 * latent];
            self.attn.matvec_t_add(&d_u, &mut d_concat);
            let (d_ctx, d_s) = d_concat.split_at(latent);
            for (a, v) in d_dec[t].iter_mut().zip(d_s) {
                *a += v;
            }
            // ctx = Σ a_j H_j, a = softmax(S_t · H_j)
            let a = &c.attention.weights;
            let d_a: Vec<f64> = h_enc.iter().map(|h| dot(d_ctx, h)).collect();
            let mean: f64 = a.iter().zip(&d_a).map(|(x, y)| x * y).sum();
            for j in 0..h_enc.len() {
                let d_score = a[j] * (d_a[j] - mean);
                for q in 0..latent {
                    d_enc[j][q] += a[j] * d_ctx[q] + d_score * s_dec[t][q];
                    d_dec[t][q] += d_score * h_enc[j][q];
                }
            }
        }
        let g_dec = self.decoder.backward(&dec, d_dec, None, &mut grad.decoder);
        self.dec_embedding
            .backward(dec_in, &g_dec.d_inputs, &mut grad.dec_embedding);
        // the decoder's initial state is the encoder's final top-layer state
        if let Some(last) = d_enc.last_mut() {
            for (a, v) in last.iter_mut().zip(&g_dec.d_h0) {
                *a += v;
            }
        }
        let g_enc = self
            .encoder
            .backward(&enc, d_enc, Some(&g_dec.d_c0), &mut grad.encoder);
        self.enc_embedding
            .backward(code, &g_enc.d_inputs, &mut grad.enc_embedding);
        Ok((loss, grad))
    }

    /// Greedy decoding from `<sos>` until `<eos>` or `max_len` emitted words.
    pub fn greedy_decode(&self, code: &[usize], max_len: usize) -> Result<Vec<usize>> {
        let mask = vec![true; code.len()];
        let x = self.enc_embedding.forward(code)?;
        let enc = self
            .encoder
            .forward::<rand_chacha::ChaCha8Rng>(x, &mask, None, None)?;
        let top = enc.top();
        let mut state = self
            .decoder
            .initial_state(Some((top.final_h(), top.final_c())));
        let mut word = SOS_INDEX;
        let mut out = Vec::new();
        while out.len() < max_len {
            let emb = self.dec_embedding.table.row(word).to_vec();
            let s = self.decoder.step(&emb, &mut state);
            let (_, _, attended) = self.attend(&s, enc.outputs(), &mask)?;
            let logits = self.out.forward(&attended);
            word = argmax(&logits);
            if word == EOS_INDEX {
                break;
            }
            out.push(word);
        }
        Ok(out)
    }
}

/// First index of the largest value.
fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

impl Parameterized for GenNet {
    fn blocks(&self) -> Vec<(String, &Matrix)> {
        let mut v: Vec<_> = prefixed("enc_embedding", self.enc_embedding.blocks()).collect();
        v.extend(prefixed("encoder", self.encoder.blocks()));
        v.extend(prefixed("dec_embedding", self.dec_embedding.blocks()));
        v.extend(prefixed("decoder", self.decoder.blocks()));
        v.push(("attn".into(), &self.attn));
        v.extend(prefixed("out", self.out.blocks()));
        v
    }

    fn blocks_mut(&mut self) -> Vec<(String, &mut Matrix)> {
        let mut v: Vec<_> =
            prefixed_mut("enc_embedding", self.enc_embedding.blocks_mut()).collect();
        v.extend(prefixed_mut("encoder", self.encoder.blocks_mut()));
        v.extend(prefixed_mut(
            "dec_embedding",
            self.dec_embedding.blocks_mut(),
        ));
        v.extend(prefixed_mut("decoder", self.decoder.blocks_mut()));
        v.push(("attn".into(), &mut self.attn));
        v.extend(prefixed_mut("out", self.out.blocks_mut()));
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorModel {
    pub hp: GeneratorHp,
    pub seed: u64,
    pub code_vocab: Vocabulary,
    pub comment_vocab: Vocabulary,
    pub net: GenNet,
}

impl GeneratorModel {
    pub fn skeleton(
        code_vocab: Vocabulary,
        comment_vocab: Vocabulary,
        hp: GeneratorHp,
        seed: u64,
    ) -> Result<Self> {
        if hp.latent_dim == 0 || hp.layers == 0 {
            return Err(Error::invalid(
                "generator needs a positive latent size and layer count",
            ));
        }
        let mut rng = stream_rng(seed, INIT_STREAM);
        let net = GenNet::new(
            code_vocab.len(),
            comment_vocab.len(),
            hp.latent_dim,
            hp.layers,
            hp.init_scale,
            &mut rng,
        );
        Ok(GeneratorModel {
            hp,
            seed,
            code_vocab,
            comment_vocab,
            net,
        })
    }

    fn encode_pair<S: AsRef<str>>(
        &self,
        code: &[S],
        comment: &[S],
    ) -> Result<(Vec<usize>, Vec<usize>)> {
        check_code(code)?;
        if comment.len() > MAX_COMMENT_WORDS {
            return Err(Error::SequenceTooLong {
                len: comment.len(),
                cap: MAX_COMMENT_WORDS,
            });
        }
        let words: Vec<String> = comment.iter().map(|w| w.as_ref().to_string()).collect();
        Ok((
            self.code_vocab.encode(code),
            self.comment_vocab.encode(&frame_comment(&words)),
        ))
    }

    /// Trains with teacher forcing and RMSprop; returns per-epoch mean loss.
    pub fn fit<S: AsRef<str> + Sync>(
        &mut self,
        code: &[Vec<S>],
        comments: &[Vec<S>],
    ) -> Result<Vec<f64>> {
        if code.len() != comments.len() {
            return Err(Error::invalid("code and comment lists differ in length"));
        }
        let pairs: Vec<(Vec<usize>, Vec<usize>)> = code
            .iter()
            .zip(comments)
            .map(|(c, m)| self.encode_pair(c, m))
            .collect::<Result<_>>()?;
        let mut opt = RmsProp::new(RmsPropConfig {
            lr: self.hp.learning_rate,
            ..RmsPropConfig::default()
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
            pairs.len(),
            config,
            |net: &GenNet, i, rng| net.loss_and_grad(&pairs[i].0, &pairs[i].1, Some((rate, rng))),
            |epoch, loss| log::debug!("generator epoch {epoch}: loss {loss:.6}"),
        )
    }

    /// Mean per-position loss of one pair without dropout.
    pub fn loss<S: AsRef<str>>(&self, code: &[S], comment: &[S]) -> Result<f64> {
        let (c, m) = self.encode_pair(code, comment)?;
        Ok(self
            .net
            .loss_and_grad::<rand_chacha::ChaCha8Rng>(&c, &m, None)?
            .0)
    }

    /// Greedy comment for an SBT sequence, without `<sos>` / `<eos>`.
    pub fn generate_comment<S: AsRef<str>>(&self, code: &[S]) -> Result<Vec<String>> {
        if code.is_empty() {
            return Err(Error::invalid("cannot generate a comment for empty code"));
        }
        check_code(code)?;
        let idx = self
            .net
            .greedy_decode(&self.code_vocab.encode(code), MAX_COMMENT_WORDS)?;
        let words = self.comment_vocab.decode(&idx)?;
        Ok(words
            .into_iter()
            .filter(|w| w != crate::text::SOS)
            .collect())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut h = CheckpointHeader::new("generator", self.seed, json!(self.hp));
        h.code_vocab = Some(self.code_vocab.words().to_vec());
        h.comment_vocab = Some(self.comment_vocab.words().to_vec());
        save_checkpoint(path, h, &self.net)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_checkpoint(&load_checkpoint(path)?)
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        let h = &ck.header;
        if h.kind != "generator" {
            return Err(Error::Checkpoint(format!(
                "{:?} is not a generator model",
                h.kind
            )));
        }
        let vocab = |w: &Option<Vec<String>>, kind| {
            let words = w
                .clone()
                .ok_or_else(|| Error::Checkpoint("model file lacks a vocabulary".into()))?;
            Vocabulary::from_words(words, kind)
        };
        let hp: GeneratorHp = serde_json::from_value(h.config.clone())?;
        let mut m = GeneratorModel::skeleton(
            vocab(&h.code_vocab, VocabKind::Code)?,
            vocab(&h.comment_vocab, VocabKind::Comment)?,
            hp,
            h.seed,
        )?;
        restore_blocks(&mut m.net, &ck.blocks)?;
        Ok(m)
    }
}

fn check_code<S>(code: &[S]) -> Result<()> {
    if code.len() > MAX_CODE_TOKENS {
        return Err(Error::SequenceTooLong {
            len: code.len(),
            cap: MAX_CODE_TOKENS,
        });
    }
    if code.is_empty() {
        return Err(Error::invalid("empty code sequence"));
    }
    Ok(())
}

/// Builds both vocabularies from the training pairs and trains a generator.
pub fn train_generator<S: AsRef<str> + Sync>(
    code: &[Vec<S>],
    comments: &[Vec<S>],
    hp: &GeneratorHp,
    seed: u64,
) -> Result<(GeneratorModel, Vec<f64>)> {
    let code_vocab = Vocabulary::build(code, VocabKind::Code);
    let comment_vocab = Vocabulary::build(comments, VocabKind::Comment);
    let mut m = GeneratorModel::skeleton(code_vocab, comment_vocab, hp.clone(), seed)?;
    let losses = m.fit(code, comments)?;
    Ok((m, losses))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_states_attend_uniformly() {
        let h = vec![vec![0.5, -1.0]; 4];
        let a = attention_context(&[1.0, 2.0], &h, &[true; 4]).unwrap();
        for w in &a.weights {
            assert!((w - 0.25).abs() < 1e-15);
        }
        assert!((a.context[0] - 0.5).abs() < 1e-15 && (a.context[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn aligned_state_dominates() {
        let h = vec![vec![0.0, 10.0], vec![10.0, 0.0], vec![0.0, -10.0]];
        let a = attention_context(&[10.0, 0.0], &h, &[true; 3]).unwrap();
        assert!(a.weights[1] > 1.0 - 1e-12);
    }

    #[test]
    fn masked_positions_get_no_weight() {
        let h = vec![vec![1.0], vec![2.0], vec![3.0]];
        let a = attention_context(&[1.0], &h, &[true, false, true]).unwrap();
        assert_eq!(a.weights[1], 0.0);
        assert!((a.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(attention_context(&[1.0], &h, &[false; 3]).is_err());
    }

    fn tiny() -> GeneratorModel {
        let code = vec![vec!["(", "IfStatement", ")", "IfStatement"]];
        let comments = vec![vec!["todo", "fix"]];
        GeneratorModel::skeleton(
            Vocabulary::build(&code, VocabKind::Code),
            Vocabulary::build(&comments, VocabKind::Comment),
            GeneratorHp {
                latent_dim: 4,
                init_scale: 1e-6,
                ..GeneratorHp::default()
            },
            0,
        )
        .unwrap()
    }

    #[test]
    fn untrained_model_runs_to_the_cap() {
        let mut m = tiny();
        m.net.zero_grad();
        let out = m.generate_comment(&["IfStatement"]).unwrap();
        assert_eq!(out.len(), MAX_COMMENT_WORDS);
    }

    #[test]
    fn initial_loss_is_uniform() {
        let m = tiny();
        let l = m.loss(&["(", "IfStatement"], &["todo", "fix"]).unwrap();
        assert!((l - (m.comment_vocab.len() as f64).ln()).abs() < 1e-6);
    }

    #[test]
    fn gradients_match_finite_differences() {
        use crate::nn::gradcheck::{gradient_check, worst, DEFAULT_EPS};
        for layers in [1, 2] {
            let net = GenNet::new(5, 6, 4, layers, 1.0, &mut stream_rng(7, layers as u64));
            let code = [1, 3, 2, 4];
            let framed = [SOS_INDEX, 4, 5, 3, EOS_INDEX];
            let (_, g) = net
                .loss_and_grad::<rand_chacha::ChaCha8Rng>(&code, &framed, None)
                .unwrap();
            let checks = gradient_check(&net, &g, DEFAULT_EPS, |m| {
                m.loss_and_grad::<rand_chacha::ChaCha8Rng>(&code, &framed, None)
                    .unwrap()
                    .0
            });
            assert!(worst(&checks) < 1e-4, "{checks:?}");
        }
    }

    #[test]
    fn empty_code_is_rejected() {
        assert!(tiny().generate_comment::<&str>(&[]).is_err());
    }
}
