//! Bag-of-words and TF-IDF document vectors.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{VocabKind, Vocabulary, PAD_INDEX};

/// Sparse vector as `(index, value)` pairs in increasing index order.
pub type SparseVec = Vec<(usize, f64)>;

pub fn sparse_dot(x: &[(usize, f64)], dense: &[f64]) -> f64 {
    x.iter().map(|&(i, v)| v * dense[i]).sum()
}

/// Term counts of a document; tokens outside `vocab` are ignored.
pub fn bow_counts<S: AsRef<str>>(document: &[S], vocab: &Vocabulary) -> SparseVec {
    let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
    for token in document {
        if let Some(i) = vocab.index_of(token.as_ref()).filter(|&i| i != PAD_INDEX) {
            *counts.entry(i).or_insert(0.0) += 1.0;
        }
    }
    counts.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfIdfModel {
    #[serde(with = "vocab_words")]
    pub vocab: Vocabulary,
    /// Document frequency per vocabulary index (0 for the reserved slot).
    pub df: Vec<usize>,
    pub n_docs: usize,
    /// `ln(n_docs / df) + 1` per vocabulary index.
    pub idf: Vec<f64>,
}

mod vocab_words {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::text::{VocabKind, Vocabulary};

    pub fn serialize<S: Serializer>(v: &Vocabulary, s: S) -> Result<S::Ok, S::Error> {
        v.words().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vocabulary, D::Error> {
        let words = Vec::<String>::deserialize(d)?;
        Vocabulary::from_words(words, VocabKind::Code).map_err(serde::de::Error::custom)
    }
}

impl TfIdfModel {
    /// Fits vocabulary and document frequencies on training documents only.
    pub fn fit<S: AsRef<str>>(documents: &[Vec<S>]) -> Result<Self> {
        if documents.is_empty() {
            return Err(Error::invalid("cannot fit TF-IDF on zero documents"));
        }
        let vocab = Vocabulary::build(documents, VocabKind::Code);
        let mut df = vec![0usize; vocab.len()];
        for doc in documents {
            for (i, _) in bow_counts(doc, &vocab) {
                df[i] += 1;
            }
        }
        Self::from_parts(vocab, df, documents.len())
    }

    /// Rebuilds a model from its vocabulary and document frequencies.
    pub fn from_parts(vocab: Vocabulary, df: Vec<usize>, n_docs: usize) -> Result<Self> {
        if df.len() != vocab.len() {
            return Err(Error::invalid(
                "document frequencies do not match the vocabulary",
            ));
        }
        let n = n_docs as f64;
        let idf = df
            .iter()
            .map(|&d| {
                if d == 0 {
                    0.0
                } else {
                    (n / d as f64).ln() + 1.0
                }
            })
            .collect();
        Ok(TfIdfModel {
            vocab,
            df,
            n_docs,
            idf,
        })
    }

    pub fn dim(&self) -> usize {
        self.vocab.len()
    }

    /// `tf(t, d) * idf(t)` for every fitted term of the document.
    pub fn transform<S: AsRef<str>>(&self, document: &[S]) -> SparseVec {
        bow_counts(document, &self.vocab)
            .into_iter()
            .map(|(i, tf)| (i, tf * self.idf[i]))
            .collect()
    }
}

pub fn fit_tfidf<S: AsRef<str>>(documents: &[Vec<S>]) -> Result<TfIdfModel> {
    TfIdfModel::fit(documents)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn doc(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    #[test]
    fn counts() {
        let vocab = Vocabulary::build(&[doc("a b c")], VocabKind::Code);
        let a = vocab.index_of("a").unwrap();
        let b = vocab.index_of("b").unwrap();
        assert_eq!(
            bow_counts(&doc("a a b zz"), &vocab),
            vec![(a, 2.0), (b, 1.0)]
        );
        assert!(bow_counts::<String>(&[], &vocab).is_empty());
    }

    #[test]
    fn idf_values() {
        let docs = vec![doc("a b"), doc("a b"), doc("a c"), doc("a c")];
        let m = fit_tfidf(&docs).unwrap();
        let a = m.vocab.index_of("a").unwrap();
        let b = m.vocab.index_of("b").unwrap();
        assert_eq!(m.idf[a], 1.0);
        assert!((m.idf[b] - 1.6931).abs() < 1e-4);
        assert!((m.idf[b] - (2f64.ln() + 1.0)).abs() < 1e-15);
        let v = m.transform(&doc("b b b"));
        assert_eq!(v.len(), 1);
        assert!((v[0].1 - 5.0794).abs() < 1e-4);
    }

    #[test]
    fn unseen_terms_weigh_nothing() {
        let m = fit_tfidf(&[doc("a")]).unwrap();
        assert!(m.transform(&doc("q r")).is_empty());
    }

    #[test]
    fn empty_fit_is_an_error() {
        assert!(fit_tfidf::<String>(&[]).is_err());
    }

    #[test]
    fn fit_ignores_document_order() {
        let docs = vec![doc("a b"), doc("b c c"), doc("d")];
        let mut rev = docs.clone();
        rev.reverse();
        let (m1, m2) = (fit_tfidf(&docs).unwrap(), fit_tfidf(&rev).unwrap());
        for w in ["a", "b", "c", "d"] {
            let i1 = m1.vocab.index_of(w).unwrap();
            let i2 = m2.vocab.index_of(w).unwrap();
            assert_eq!(m1.idf[i1], m2.idf[i2]);
        }
    }

    #[test]
    fn serde_round_trip() {
        let m = fit_tfidf(&[doc("a b"), doc("b")]).unwrap();
        let back: TfIdfModel = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
    }

    proptest! {
        #[test]
        fn transform_is_linear_in_tf(k in 1usize..6) {
            let m = fit_tfidf(&[doc("a b"), doc("b c")]).unwrap();
            let once = m.transform(&doc("a c"));
            let repeated: Vec<String> = doc("a c").into_iter().cycle().take(2 * k).collect();
            let many = m.transform(&repeated);
            for (x, y) in once.iter().zip(&many) {
                prop_assert!((x.1 * k as f64 - y.1).abs() < 1e-12);
            }
        }

        #[test]
        fn idf_decreases_with_df(docs in proptest::collection::vec(proptest::collection::vec("[a-d]", 1..5), 1..8)) {
            let m = fit_tfidf(&docs).unwrap();
            for i in 1..m.dim() {
                for j in 1..m.dim() {
                    if m.df[i] < m.df[j] {
                        prop_assert!(m.idf[i] > m.idf[j]);
                    }
                }
                prop_assert!(m.df[i] >= 1 && m.df[i] <= m.n_docs);
            }
        }
    }
}
