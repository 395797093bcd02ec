//! Ready-made training recipes over mined corpus records.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::cv::{DetectRecipe, GenerateRecipe};
use crate::detector::{
    fit_embed_svm_detector, fit_mnb_detector, fit_svm_detector, train_dl_detector, DetectorHp,
    DetectorModel, DlDetector, SvmConfig,
};
use crate::error::{Error, Result};
use crate::generator::{train_generator, GeneratorHp};
use crate::miner::CorpusRecord;
use crate::pretrain::{init_from_pretrained, LanguageModel, PretrainMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    /// Classify SBT code sequences.
    DetectCode,
    /// Classify comment word sequences.
    DetectComment,
    Generate,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::DetectCode => "detect-code",
            Task::DetectComment => "detect-comment",
            Task::Generate => "generate",
        })
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "detect-code" => Ok(Task::DetectCode),
            "detect-comment" => Ok(Task::DetectComment),
            "generate" => Ok(Task::Generate),
            _ => Err(Error::invalid(format!("unknown task {s:?}"))),
        }
    }
}

/// Detector input for each record: SBT tokens for code, normalized words
/// for comments. Generation consumes SBT tokens.
pub fn task_sequences(records: &[CorpusRecord], task: Task) -> Vec<Vec<String>> {
    records
        .iter()
        .map(|r| match task {
            Task::DetectComment => r.comment_words.clone(),
            Task::DetectCode | Task::Generate => r.sbt_tokens.clone(),
        })
        .collect()
}

pub fn record_labels(records: &[CorpusRecord]) -> Vec<bool> {
    records.iter().map(CorpusRecord::is_satd).collect()
}

/// Which detector to train, with its settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Dl(DetectorHp),
    Mnb {
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
    Svm(SvmConfig),
}

fn default_alpha() -> f64 {
    1.0
}

impl ModelSpec {
    pub fn label(&self) -> String {
        match self {
            ModelSpec::Dl(hp) => format!(
                "LSTM {} pooling, latent {}, {} layer(s), batch {}",
                hp.pooling, hp.latent_dim, hp.layers, hp.batch_size
            ),
            ModelSpec::Mnb { .. } => "MNB".into(),
            ModelSpec::Svm(_) => "SVM".into(),
        }
    }
}

/// Trains a detector, optionally starting from a pre-trained language model.
///
/// With a language model, the LSTM detector adopts its vocabulary and takes
/// weights per `mode`; the SVM switches to averaged pre-trained embeddings.
pub fn train_detector(
    spec: &ModelSpec,
    sequences: &[Vec<String>],
    labels: &[bool],
    seed: u64,
    pretrained: Option<(&LanguageModel, PretrainMode)>,
) -> Result<DetectorModel> {
    Ok(match (spec, pretrained) {
        (ModelSpec::Dl(hp), None) => {
            DetectorModel::Dl(train_dl_detector(sequences, labels, hp, seed)?.0)
        }
        (ModelSpec::Dl(hp), Some((lm, mode))) => {
            let mut det = DlDetector::skeleton(lm.vocab.clone(), hp.clone(), seed)?;
            init_from_pretrained(&mut det, lm, mode)?;
            det.fit(sequences, labels)?;
            DetectorModel::Dl(det)
        }
        (ModelSpec::Mnb { alpha }, None) => {
            DetectorModel::Mnb(fit_mnb_detector(sequences, labels, *alpha)?)
        }
        (ModelSpec::Mnb { .. }, Some(_)) => {
            return Err(Error::invalid(
                "naive Bayes cannot use pre-trained embeddings",
            ))
        }
        (ModelSpec::Svm(config), None) => {
            DetectorModel::Svm(fit_svm_detector(sequences, labels, *config, seed)?)
        }
        (ModelSpec::Svm(config), Some((lm, _))) => {
            DetectorModel::PretrainedEmbedSvm(fit_embed_svm_detector(
                sequences,
                labels,
                lm.vocab.clone(),
                lm.net.embedding.clone(),
                *config,
                seed,
            )?)
        }
    })
}

fn pick(all: &[Vec<String>], idx: &[usize]) -> Vec<Vec<String>> {
    idx.iter().map(|&i| all[i].clone()).collect()
}

pub struct DetectorRecipe<'a> {
    pub sequences: &'a [Vec<String>],
    pub labels: &'a [bool],
    pub spec: ModelSpec,
    pub seed: u64,
    pub pretrained: Option<(&'a LanguageModel, PretrainMode)>,
}

impl DetectRecipe for DetectorRecipe<'_> {
    fn fit_predict(&self, train: &[usize], test: &[usize]) -> Result<Vec<bool>> {
        let x = pick(self.sequences, train);
        let y: Vec<bool> = train.iter().map(|&i| self.labels[i]).collect();
        let model = train_detector(&self.spec, &x, &y, self.seed, self.pretrained)?;
        test.iter()
            .map(|&i| Ok(model.predict_lenient(&self.sequences[i])?.positive))
            .collect()
    }
}

pub struct GeneratorRecipe<'a> {
    pub code: &'a [Vec<String>],
    pub comments: &'a [Vec<String>],
    pub hp: GeneratorHp,
    pub seed: u64,
}

impl GenerateRecipe for GeneratorRecipe<'_> {
    fn fit_generate(&self, train: &[usize], test: &[usize]) -> Result<Vec<Vec<String>>> {
        let (model, _) = train_generator(
            &pick(self.code, train),
            &pick(self.comments, train),
            &self.hp,
            self.seed,
        )?;
        test.iter()
            .map(|&i| model.generate_comment(&self.code[i]))
            .collect()
    }
}
