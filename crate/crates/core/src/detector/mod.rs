//! SATD detectors for SBT code sequences and comment word sequences.
//!
//! Four kinds share one container format: the LSTM detector, multinomial
//! naive Bayes and a linear SVM over TF-IDF vectors, and a linear SVM over
//! averaged pre-trained token embeddings.

mod dl;
mod mnb;
mod svm;

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;

pub use dl::{layer_plan, train_dl_detector, DetectorHp, DlDetector, DlNet};
pub use mnb::{train_mnb, MnbModel};
pub use svm::{train_linear_svm, SvmConfig, SvmModel};

use crate::error::{Error, Result};
use crate::nn::{
    load_checkpoint, restore_blocks, save_checkpoint, Checkpoint, CheckpointHeader, Embedding,
    Matrix, NamedBlocks,
};
use crate::text::{VocabKind, Vocabulary, PAD_INDEX};
use crate::vsm::{SparseVec, TfIdfModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorKind {
    Dl,
    Mnb,
    Svm,
    PretrainedEmbedSvm,
}

impl DetectorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DetectorKind::Dl => "dl",
            DetectorKind::Mnb => "mnb",
            DetectorKind::Svm => "svm",
            DetectorKind::PretrainedEmbedSvm => "pretrained_embed_svm",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "dl" => Ok(DetectorKind::Dl),
            "mnb" => Ok(DetectorKind::Mnb),
            "svm" => Ok(DetectorKind::Svm),
            "pretrained_embed_svm" => Ok(DetectorKind::PretrainedEmbedSvm),
            _ => Err(Error::invalid(format!("unknown detector kind {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    /// Probability for `dl` and `mnb`, signed margin for the SVMs.
    pub score: f64,
    pub positive: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MnbDetector {
    pub tfidf: TfIdfModel,
    pub model: MnbModel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmDetector {
    pub tfidf: TfIdfModel,
    pub model: SvmModel,
    pub config: SvmConfig,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbedSvmDetector {
    pub vocab: Vocabulary,
    pub embedding: Embedding,
    pub model: SvmModel,
    pub config: SvmConfig,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DetectorModel {
    Dl(DlDetector),
    Mnb(MnbDetector),
    Svm(SvmDetector),
    PretrainedEmbedSvm(EmbedSvmDetector),
}

fn tfidf_vectors<S: AsRef<str>>(tfidf: &TfIdfModel, sequences: &[Vec<S>]) -> Vec<SparseVec> {
    sequences.iter().map(|s| tfidf.transform(s)).collect()
}

pub fn fit_mnb_detector<S: AsRef<str>>(
    sequences: &[Vec<S>],
    labels: &[bool],
    alpha: f64,
) -> Result<MnbDetector> {
    dl::check_classes(labels)?;
    let tfidf = TfIdfModel::fit(sequences)?;
    let x = tfidf_vectors(&tfidf, sequences);
    let model = train_mnb(&x, labels, tfidf.dim(), alpha)?;
    Ok(MnbDetector { tfidf, model })
}

pub fn fit_svm_detector<S: AsRef<str>>(
    sequences: &[Vec<S>],
    labels: &[bool],
    config: SvmConfig,
    seed: u64,
) -> Result<SvmDetector> {
    dl::check_classes(labels)?;
    let tfidf = TfIdfModel::fit(sequences)?;
    let x = tfidf_vectors(&tfidf, sequences);
    let model = train_linear_svm(&x, labels, tfidf.dim(), config, seed)?;
    Ok(SvmDetector {
        tfidf,
        model,
        config,
        seed,
    })
}

/// Mean embedding of the in-vocabulary tokens; a zero vector (with a warning)
/// when no token is known.
pub fn embed_average<S: AsRef<str>>(
    tokens: &[S],
    vocab: &Vocabulary,
    embedding: &Embedding,
) -> Vec<f64> {
    let mut sum = vec![0.0; embedding.dim()];
    let mut n = 0usize;
    for t in tokens {
        if let Some(i) = vocab.index_of(t.as_ref()).filter(|&i| i != PAD_INDEX) {
            for (s, v) in sum.iter_mut().zip(embedding.table.row(i)) {
                *s += v;
            }
            n += 1;
        }
    }
    if n == 0 {
        log::warn!("sequence has no in-vocabulary token; using a zero embedding");
        return sum;
    }
    sum.iter_mut().for_each(|s| *s /= n as f64);
    sum
}

fn dense_to_sparse(v: Vec<f64>) -> SparseVec {
    v.into_iter().enumerate().collect()
}

/// SVM over averaged embeddings taken from a pre-trained language model.
pub fn fit_embed_svm_detector<S: AsRef<str>>(
    sequences: &[Vec<S>],
    labels: &[bool],
    vocab: Vocabulary,
    embedding: Embedding,
    config: SvmConfig,
    seed: u64,
) -> Result<EmbedSvmDetector> {
    dl::check_classes(labels)?;
    let x: Vec<SparseVec> = sequences
        .iter()
        .map(|s| dense_to_sparse(embed_average(s, &vocab, &embedding)))
        .collect();
    let model = train_linear_svm(&x, labels, embedding.dim(), config, seed)?;
    Ok(EmbedSvmDetector {
        vocab,
        embedding,
        model,
        config,
        seed,
    })
}

impl DetectorModel {
    pub fn kind(&self) -> DetectorKind {
        match self {
            DetectorModel::Dl(_) => DetectorKind::Dl,
            DetectorModel::Mnb(_) => DetectorKind::Mnb,
            DetectorModel::Svm(_) => DetectorKind::Svm,
            DetectorModel::PretrainedEmbedSvm(_) => DetectorKind::PretrainedEmbedSvm,
        }
    }

    /// Classifies one token sequence. Empty sequences are rejected.
    pub fn predict<S: AsRef<str>>(&self, tokens: &[S]) -> Result<Prediction> {
        if tokens.is_empty() {
            return Err(Error::invalid("cannot classify an empty sequence"));
        }
        self.predict_lenient(tokens)
    }

    /// Like [`predict`](Self::predict) but scores an empty sequence as a
    /// single padding token instead of failing, as training does.
    pub fn predict_lenient<S: AsRef<str>>(&self, tokens: &[S]) -> Result<Prediction> {
        Ok(match self {
            DetectorModel::Dl(d) => {
                let p = d.probability_lenient(tokens)?;
                Prediction {
                    score: p,
                    positive: p >= d.hp.threshold,
                }
            }
            DetectorModel::Mnb(d) => {
                let x = d.tfidf.transform(tokens);
                Prediction {
                    score: d.model.posterior(&x),
                    positive: d.model.predict(&x),
                }
            }
            DetectorModel::Svm(d) => {
                let x = d.tfidf.transform(tokens);
                let m = d.model.margin(&x);
                Prediction {
                    score: m,
                    positive: m > 0.0,
                }
            }
            DetectorModel::PretrainedEmbedSvm(d) => {
                let x = dense_to_sparse(embed_average(tokens, &d.vocab, &d.embedding));
                let m = d.model.margin(&x);
                Prediction {
                    score: m,
                    positive: m > 0.0,
                }
            }
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let (header, blocks) = self.to_parts();
        save_checkpoint(path, header, &blocks)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_checkpoint(&load_checkpoint(path)?)
    }

    fn to_parts(&self) -> (CheckpointHeader, NamedBlocks) {
        let kind = self.kind().as_str();
        match self {
            DetectorModel::Dl(d) => {
                let mut h = CheckpointHeader::new(kind, d.seed, json!(d.hp));
                h.code_vocab = Some(d.vocab.words().to_vec());
                (h, NamedBlocks(owned_blocks(&d.net)))
            }
            DetectorModel::Mnb(d) => {
                let mut h = CheckpointHeader::new(kind, 0, json!({ "alpha": d.model.alpha }));
                h.code_vocab = Some(d.tfidf.vocab.words().to_vec());
                h.extra = json!({ "df": d.tfidf.df, "n_docs": d.tfidf.n_docs });
                let dim = d.model.dim();
                let mut ll = d.model.log_likelihood[0].clone();
                ll.extend_from_slice(&d.model.log_likelihood[1]);
                let blocks = vec![
                    (
                        "log_prior".to_string(),
                        Matrix::from_vec(2, 1, d.model.log_prior.to_vec()),
                    ),
                    ("log_likelihood".to_string(), Matrix::from_vec(2, dim, ll)),
                ];
                (h, NamedBlocks(blocks))
            }
            DetectorModel::Svm(d) => {
                let mut h = CheckpointHeader::new(kind, d.seed, json!(d.config));
                h.code_vocab = Some(d.tfidf.vocab.words().to_vec());
                h.extra = json!({ "df": d.tfidf.df, "n_docs": d.tfidf.n_docs });
                (h, NamedBlocks(svm_blocks(&d.model)))
            }
            DetectorModel::PretrainedEmbedSvm(d) => {
                let mut h = CheckpointHeader::new(kind, d.seed, json!(d.config));
                h.code_vocab = Some(d.vocab.words().to_vec());
                let mut blocks = vec![("embedding.table".to_string(), d.embedding.table.clone())];
                blocks.extend(svm_blocks(&d.model));
                (h, NamedBlocks(blocks))
            }
        }
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        let h = &ck.header;
        let words = h
            .code_vocab
            .clone()
            .ok_or_else(|| Error::Checkpoint("model file has no vocabulary".into()))?;
        let vocab = Vocabulary::from_words(words, VocabKind::Code)?;
        let tfidf = |vocab: Vocabulary| -> Result<TfIdfModel> {
            let df: Vec<usize> = serde_json::from_value(h.extra["df"].clone())?;
            let n_docs: usize = serde_json::from_value(h.extra["n_docs"].clone())?;
            TfIdfModel::from_parts(vocab, df, n_docs)
        };
        match DetectorKind::parse(&h.kind)
            .map_err(|_| Error::Checkpoint(format!("{:?} is not a detector model", h.kind)))?
        {
            DetectorKind::Dl => {
                let hp: DetectorHp = serde_json::from_value(h.config.clone())?;
                let mut d = DlDetector::skeleton(vocab, hp, h.seed)?;
                restore_blocks(&mut d.net, &ck.blocks)?;
                Ok(DetectorModel::Dl(d))
            }
            DetectorKind::Mnb => {
                let alpha = h.config["alpha"]
                    .as_f64()
                    .ok_or_else(|| Error::Checkpoint("missing alpha".into()))?;
                let prior = ck.block("log_prior")?;
                let ll = ck.block("log_likelihood")?;
                let model = MnbModel {
                    alpha,
                    log_prior: [prior.data[0], prior.data[1]],
                    log_likelihood: [ll.row(0).to_vec(), ll.row(1).to_vec()],
                };
                Ok(DetectorModel::Mnb(MnbDetector {
                    tfidf: tfidf(vocab)?,
                    model,
                }))
            }
            DetectorKind::Svm => Ok(DetectorModel::Svm(SvmDetector {
                tfidf: tfidf(vocab)?,
                model: svm_from(ck)?,
                config: serde_json::from_value(h.config.clone())?,
                seed: h.seed,
            })),
            DetectorKind::PretrainedEmbedSvm => {
                let table = ck.block("embedding.table")?.clone();
                Ok(DetectorModel::PretrainedEmbedSvm(EmbedSvmDetector {
                    vocab,
                    embedding: Embedding { table },
                    model: svm_from(ck)?,
                    config: serde_json::from_value(h.config.clone())?,
                    seed: h.seed,
                }))
            }
        }
    }
}

pub(crate) fn owned_blocks<P: crate::nn::Parameterized>(p: &P) -> Vec<(String, Matrix)> {
    p.blocks()
        .into_iter()
        .map(|(n, m)| (n, m.clone()))
        .collect()
}

fn svm_blocks(m: &SvmModel) -> Vec<(String, Matrix)> {
    vec![
        (
            "svm.w".to_string(),
            Matrix::from_vec(1, m.w.len(), m.w.clone()),
        ),
        ("svm.b".to_string(), Matrix::from_vec(1, 1, vec![m.b])),
    ]
}

fn svm_from(ck: &Checkpoint) -> Result<SvmModel> {
    Ok(SvmModel {
        w: ck.block("svm.w")?.data.clone(),
        b: ck.block("svm.b")?.data[0],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Pooling;

    fn seqs(v: &[&str]) -> Vec<Vec<String>> {
        v.iter()
            .map(|s| s.split_whitespace().map(str::to_string).collect())
            .collect()
    }

    #[test]
    fn embed_average_cases() {
        let vocab = Vocabulary::build(&[vec!["a", "b"]], VocabKind::Code);
        let mut table = Matrix::zeros(3, 2);
        table.row_mut(1).copy_from_slice(&[1.0, -2.0]);
        table.row_mut(2).copy_from_slice(&[-1.0, 2.0]);
        let e = Embedding { table };
        assert_eq!(embed_average(&["a"], &vocab, &e), [1.0, -2.0]);
        assert_eq!(embed_average(&["a", "b"], &vocab, &e), [0.0, 0.0]);
        assert_eq!(
            embed_average(&["b", "a", "a"], &vocab, &e),
            embed_average(&["a", "b", "a"], &vocab, &e)
        );
        assert_eq!(embed_average(&["zz"], &vocab, &e), [0.0, 0.0]);
    }

    #[test]
    fn every_kind_round_trips_through_a_file() {
        let x = seqs(&["todo hack here", "fine code", "hack again", "nice code ok"]);
        let y = [true, false, true, false];
        let dir = std::env::temp_dir().join(format!("satd-det-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let hp = DetectorHp {
            latent_dim: 4,
            epochs: 2,
            batch_size: 2,
            pooling: Pooling::Mean,
            ..DetectorHp::default()
        };
        let vocab = Vocabulary::build(&x, VocabKind::Code);
        let emb = Embedding::new(vocab.len(), 3, 1.0, &mut crate::rng::stream_rng(0, 0));
        let models = vec![
            DetectorModel::Dl(train_dl_detector(&x, &y, &hp, 3).unwrap().0),
            DetectorModel::Mnb(fit_mnb_detector(&x, &y, 1.0).unwrap()),
            DetectorModel::Svm(fit_svm_detector(&x, &y, SvmConfig::default(), 1).unwrap()),
            DetectorModel::PretrainedEmbedSvm(
                fit_embed_svm_detector(&x, &y, vocab, emb, SvmConfig::default(), 1).unwrap(),
            ),
        ];
        for m in models {
            let path = dir.join(format!("{}.ckpt", m.kind().as_str()));
            m.save(&path).unwrap();
            let back = DetectorModel::load(&path).unwrap();
            assert_eq!(back.kind(), m.kind());
            for s in &x {
                let (a, b) = (m.predict(s).unwrap(), back.predict(s).unwrap());
                assert_eq!(a.positive, b.positive);
                assert!((a.score - b.score).abs() < 1e-4);
            }
            // saving the reloaded model reproduces the file exactly
            let again = dir.join("again.ckpt");
            back.save(&again).unwrap();
            assert_eq!(
                std::fs::read(&path).unwrap(),
                std::fs::read(&again).unwrap()
            );
        }
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn empty_sequence_is_rejected() {
        let x = seqs(&["a", "b"]);
        let m = DetectorModel::Mnb(fit_mnb_detector(&x, &[true, false], 1.0).unwrap());
        assert!(m.predict::<String>(&[]).is_err());
        assert!(m.predict_lenient::<String>(&[]).is_ok());
    }
}
