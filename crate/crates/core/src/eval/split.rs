use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::mt_shuffle;

fn class_indices(labels: &[bool], class: bool) -> Vec<usize> {
    (0..labels.len()).filter(|&i| labels[i] == class).collect()
}

/// Splits off `fraction` of the items for hyper-parameter tuning.
///
/// The tuning size is `round(fraction · N)`. When stratified, it is shared
/// between the classes by largest remainder, so each class contributes its
/// proportional share within one item. Returns `(tuning, remainder)` as
/// sorted index lists.
pub fn tuning_split(
    labels: &[bool],
    fraction: f64,
    stratified: bool,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::invalid(format!(
            "tuning fraction must be in (0, 1), got {fraction}"
        )));
    }
    if labels.is_empty() {
        return Err(Error::invalid("cannot split an empty dataset"));
    }
    let target = (fraction * labels.len() as f64).round() as usize;
    let mut tuning = Vec::with_capacity(target);
    if stratified {
        let mut groups = [class_indices(labels, true), class_indices(labels, false)];
        let exact: Vec<f64> = groups.iter().map(|g| fraction * g.len() as f64).collect();
        let mut quota: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
        let mut left = target.saturating_sub(quota.iter().sum());
        let mut by_remainder = [0usize, 1];
        by_remainder.sort_by(|&a, &b| {
            (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor()))
        });
        for c in by_remainder {
            if left > 0 && quota[c] < groups[c].len() {
                quota[c] += 1;
                left -= 1;
            }
        }
        for (c, g) in groups.iter_mut().enumerate() {
            mt_shuffle(g, seed.wrapping_add(c as u64));
            tuning.extend_from_slice(&g[..quota[c]]);
        }
    } else {
        let mut all: Vec<usize> = (0..labels.len()).collect();
        mt_shuffle(&mut all, seed);
        tuning.extend_from_slice(&all[..target]);
    }
    tuning.sort_unstable();
    let chosen: BTreeSet<usize> = tuning.iter().copied().collect();
    let rest = (0..labels.len()).filter(|i| !chosen.contains(i)).collect();
    Ok((tuning, rest))
}

/// `k` disjoint folds covering every item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub folds: Vec<Vec<usize>>,
    pub stratified: bool,
    pub seed: u64,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.folds.len()
    }

    /// `(train, test)` for fold `i`: the fold itself is held out.
    pub fn split(&self, i: usize) -> (Vec<usize>, Vec<usize>) {
        let mut train: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .flat_map(|(_, f)| f.iter().copied())
            .collect();
        train.sort_unstable();
        (train, self.folds[i].clone())
    }
}

/// Deals shuffled items round-robin into `k` folds.
///
/// Stratified plans deal the positives first and continue with the
/// negatives where the positives stopped, so both the per-fold positive
/// counts and the fold sizes differ by at most one.
pub fn stratified_folds(
    labels: &[bool],
    k: usize,
    stratified: bool,
    seed: u64,
) -> Result<FoldPlan> {
    if k == 0 || k > labels.len() {
        return Err(Error::invalid(format!(
            "cannot make {k} folds from {} items",
            labels.len()
        )));
    }
    let mut folds = vec![Vec::new(); k];
    if stratified {
        let mut pos = class_indices(labels, true);
        let mut neg = class_indices(labels, false);
        mt_shuffle(&mut pos, seed);
        mt_shuffle(&mut neg, seed.wrapping_add(1));
        for (n, &i) in pos.iter().chain(&neg).enumerate() {
            folds[n % k].push(i);
        }
    } else {
        let mut all: Vec<usize> = (0..labels.len()).collect();
        mt_shuffle(&mut all, seed);
        for (n, &i) in all.iter().enumerate() {
            folds[n % k].push(i);
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(FoldPlan {
        folds,
        stratified,
        seed,
    })
}

/// One leave-one-project-out round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Round {
    pub project: String,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// A round per project: that project's items are the test set and every
/// other project's items the training set.
///
/// `only` restricts which projects get a round (order preserved); a listed
/// project without items is skipped with a warning.
pub fn cross_project_rounds(projects: &[String], only: Option<&[String]>) -> Result<Vec<Round>> {
    let present: BTreeSet<&str> = projects.iter().map(String::as_str).collect();
    if present.len() < 2 {
        return Err(Error::invalid(
            "cross-project evaluation needs at least two projects",
        ));
    }
    let chosen: Vec<String> = match only {
        Some(list) => list.to_vec(),
        None => present.iter().map(|s| s.to_string()).collect(),
    };
    let mut rounds = Vec::with_capacity(chosen.len());
    for p in chosen {
        let (test, train): (Vec<usize>, Vec<usize>) =
            (0..projects.len()).partition(|&i| projects[i] == p);
        if test.is_empty() {
            log::warn!("project {p:?} has no examples; skipping its round");
            continue;
        }
        rounds.push(Round {
            project: p,
            train,
            test,
        });
    }
    Ok(rounds)
}
