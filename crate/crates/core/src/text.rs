//! Comment normalization, vocabularies and batch padding.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const UNK_PAD: &str = "<UNKN/PAD>";
pub const SOS: &str = "<sos>";
pub const EOS: &str = "<eos>";

pub const PAD_INDEX: usize = 0;
pub const SOS_INDEX: usize = 1;
pub const EOS_INDEX: usize = 2;

/// Longest SBT sequence kept in a dataset.
pub const MAX_CODE_TOKENS: usize = 1500;
/// Longest comment (in words) kept in a dataset.
pub const MAX_COMMENT_WORDS: usize = 150;

/// Strips delimiters and punctuation, lowercases, drops any word that is
/// not purely ASCII letters (numbers, non-English text), then stems.
pub fn normalize_comment(raw: &str) -> Vec<String> {
    let lowered: String = raw
        .chars()
        .map(|c| {
            if c.is_ascii_punctuation() {
                ' '
            } else {
                c.to_ascii_lowercase()
            }
        })
        .collect();
    lowered
        .split_whitespace()
        .filter(|w| w.chars().all(|c| c.is_ascii_lowercase()))
        .map(stem)
        .collect()
}

/// Porter stem, repeated until it stops changing so that normalizing an
/// already normalized comment is a no-op.
fn stem(word: &str) -> String {
    let mut current = word.to_string();
    loop {
        let next = porter_stemmer::stem(&current);
        if next == current {
            return current;
        }
        current = next;
    }
}

/// Wraps words in `<sos>` / `<eos>`.
pub fn frame_comment(words: &[String]) -> Vec<String> {
    let mut framed = Vec::with_capacity(words.len() + 2);
    framed.push(SOS.to_string());
    framed.extend(words.iter().cloned());
    framed.push(EOS.to_string());
    framed
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VocabKind {
    Code,
    Comment,
}

impl VocabKind {
    fn reserved(self) -> &'static [&'static str] {
        match self {
            VocabKind::Code => &[UNK_PAD],
            VocabKind::Comment => &[UNK_PAD, SOS, EOS],
        }
    }
}

/// Bidirectional word/index map. Index 0 is always `<UNKN/PAD>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    kind: VocabKind,
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Reserved tokens, then every corpus token in order of first appearance.
    pub fn build<S: AsRef<str>>(corpus: &[Vec<S>], kind: VocabKind) -> Self {
        let mut vocab = Vocabulary::empty(kind);
        for token in corpus.iter().flatten() {
            vocab.insert(token.as_ref());
        }
        if corpus.iter().all(Vec::is_empty) {
            log::warn!("vocabulary built from an empty corpus");
        }
        vocab
    }

    pub fn empty(kind: VocabKind) -> Self {
        let words: Vec<String> = kind.reserved().iter().map(|w| w.to_string()).collect();
        let index = words
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, w)| (w, i))
            .collect();
        Vocabulary { kind, words, index }
    }

    /// Rebuilds a vocabulary from its persisted word list.
    pub fn from_words(words: Vec<String>, kind: VocabKind) -> Result<Self> {
        let reserved = kind.reserved();
        if words.len() < reserved.len() || words[..reserved.len()] != *reserved {
            return Err(Error::invalid(
                "vocabulary does not start with the reserved tokens",
            ));
        }
        let mut vocab = Vocabulary::empty(kind);
        for w in &words[reserved.len()..] {
            if !vocab.insert(w) {
                return Err(Error::invalid(format!("duplicate vocabulary entry {w:?}")));
            }
        }
        Ok(vocab)
    }

    fn insert(&mut self, word: &str) -> bool {
        if self.index.contains_key(word) {
            return false;
        }
        self.index.insert(word.to_string(), self.words.len());
        self.words.push(word.to_string());
        true
    }

    pub fn kind(&self) -> VocabKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn word(&self, index: usize) -> Option<&str> {
        self.words.get(index).map(String::as_str)
    }

    /// Out-of-vocabulary tokens map to index 0.
    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<usize> {
        tokens
            .iter()
            .map(|t| self.index_of(t.as_ref()).unwrap_or(PAD_INDEX))
            .collect()
    }

    pub fn decode(&self, indices: &[usize]) -> Result<Vec<String>> {
        indices
            .iter()
            .map(|&i| {
                self.word(i)
                    .map(str::to_string)
                    .ok_or(Error::IndexOutOfRange {
                        index: i,
                        size: self.len(),
                    })
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.words).expect("string list serializes")
    }

    pub fn from_json(json: &str, kind: VocabKind) -> Result<Self> {
        Vocabulary::from_words(serde_json::from_str(json)?, kind)
    }
}

/// Right-padded index matrix plus a 0/1 mask of real positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaddedBatch {
    pub indices: Vec<Vec<usize>>,
    pub mask: Vec<Vec<u8>>,
}

/// Pads every sequence with index 0 up to the longest one in the batch.
/// Overlong sequences are an error: they must be dropped upstream, never cut.
pub fn pad_batch(sequences: &[Vec<usize>], cap: usize) -> Result<PaddedBatch> {
    if let Some(long) = sequences.iter().find(|s| s.len() > cap) {
        return Err(Error::SequenceTooLong {
            len: long.len(),
            cap,
        });
    }
    let width = sequences.iter().map(Vec::len).max().unwrap_or(0);
    let mut indices = Vec::with_capacity(sequences.len());
    let mut mask = Vec::with_capacity(sequences.len());
    for s in sequences {
        let mut row = s.clone();
        row.resize(width, PAD_INDEX);
        let mut m = vec![1u8; s.len()];
        m.resize(width, 0);
        indices.push(row);
        mask.push(m);
    }
    Ok(PaddedBatch { indices, mask })
}
