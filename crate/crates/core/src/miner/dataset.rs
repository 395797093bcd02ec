use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::corpus::CorpusRecord;
use super::label::Label;
use crate::error::{Error, Result};
use crate::rng::mt_shuffle;
use crate::text::{MAX_CODE_TOKENS, MAX_COMMENT_WORDS};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub input: usize,
    pub labeled: usize,
    pub after_dedup: usize,
    pub after_length_filter: usize,
    pub satd: usize,
    pub non_satd: usize,
    pub after_balance: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    pub pairs: Vec<CorpusRecord>,
    /// Non-SATD records left over after balancing (unlabeled pre-training pool).
    pub pool: Vec<CorpusRecord>,
    pub shuffle_seed: u64,
    pub provenance: Provenance,
}

/// Deduplicates, length-filters, shuffles and optionally balances labeled records.
///
/// Only SATD / non-SATD records take part. Duplicates are detected on the
/// processed form (SBT tokens plus normalized comment words). Records over
/// the length caps are dropped, never truncated. With `balance`, the first
/// non-SATD records in shuffled order are kept up to the SATD count; the rest
/// go to `pool`.
pub fn build_dataset(records: Vec<CorpusRecord>, seed: u64, balance: bool) -> Result<Dataset> {
    let mut prov = Provenance {
        input: records.len(),
        ..Provenance::default()
    };
    let labeled: Vec<CorpusRecord> = records
        .into_iter()
        .filter(|r| matches!(r.label, Label::Satd | Label::NonSatd))
        .collect();
    prov.labeled = labeled.len();

    let mut seen = HashSet::new();
    let unique: Vec<CorpusRecord> = labeled
        .into_iter()
        .filter(|r| seen.insert((r.sbt_tokens.clone(), r.comment_words.clone())))
        .collect();
    prov.after_dedup = unique.len();

    let mut kept: Vec<CorpusRecord> = unique
        .into_iter()
        .filter(|r| {
            r.sbt_tokens.len() <= MAX_CODE_TOKENS && r.comment_words.len() <= MAX_COMMENT_WORDS
        })
        .collect();
    prov.after_length_filter = kept.len();

    mt_shuffle(&mut kept, seed);

    let satd = kept.iter().filter(|r| r.is_satd()).count();
    prov.satd = satd;
    prov.non_satd = kept.len() - satd;
    if satd == 0 {
        return Err(Error::EmptyPositiveClass);
    }

    let (pairs, pool) = if balance {
        let mut pairs = Vec::with_capacity(2 * satd);
        let mut pool = Vec::new();
        let mut negatives = 0;
        for r in kept {
            if r.is_satd() {
                pairs.push(r);
            } else if negatives < satd {
                negatives += 1;
                pairs.push(r);
            } else {
                pool.push(r);
            }
        }
        (pairs, pool)
    } else {
        (kept, Vec::new())
    };
    prov.after_balance = pairs.len();
    Ok(Dataset {
        pairs,
        pool,
        shuffle_seed: seed,
        provenance: prov,
    })
}
