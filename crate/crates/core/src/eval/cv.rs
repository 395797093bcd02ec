use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bleu::{corpus_bleu, BleuScores};
use super::metrics::{mean_metrics, prf1, Metrics};
use super::split::{FoldPlan, Round};
use crate::error::{Error, Result};

/// Trains on one index set and labels another.
pub trait DetectRecipe: Sync {
    fn fit_predict(&self, train: &[usize], test: &[usize]) -> Result<Vec<bool>>;
}

impl<F> DetectRecipe for F
where
    F: Fn(&[usize], &[usize]) -> Result<Vec<bool>> + Sync,
{
    fn fit_predict(&self, train: &[usize], test: &[usize]) -> Result<Vec<bool>> {
        self(train, test)
    }
}

/// Trains on one index set and writes a comment for each item of another.
pub trait GenerateRecipe: Sync {
    fn fit_generate(&self, train: &[usize], test: &[usize]) -> Result<Vec<Vec<String>>>;
}

impl<F> GenerateRecipe for F
where
    F: Fn(&[usize], &[usize]) -> Result<Vec<Vec<String>>> + Sync,
{
    fn fit_generate(&self, train: &[usize], test: &[usize]) -> Result<Vec<Vec<String>>> {
        self(train, test)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub folds: Vec<FoldResult>,
    pub mean: Metrics,
}

fn score(labels: &[bool], test: &[usize], predicted: Vec<bool>) -> Result<Metrics> {
    if predicted.len() != test.len() {
        return Err(Error::invalid(
            "recipe returned the wrong number of predictions",
        ));
    }
    let truth: Vec<bool> = test.iter().map(|&i| labels[i]).collect();
    prf1(&predicted, &truth)
}

/// Trains and tests once per fold (folds run in parallel) and averages the
/// per-fold metrics.
pub fn run_cv<R: DetectRecipe>(labels: &[bool], recipe: &R, plan: &FoldPlan) -> Result<CvResult> {
    let folds = (0..plan.k())
        .into_par_iter()
        .map(|i| {
            let (train, test) = plan.split(i);
            let predicted = recipe.fit_predict(&train, &test)?;
            log::info!("fold {}/{} done", i + 1, plan.k());
            Ok(FoldResult {
                fold: i,
                train_size: train.len(),
                test_size: test.len(),
                metrics: score(labels, &test, predicted)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = mean_metrics(&folds.iter().map(|f| f.metrics).collect::<Vec<_>>());
    Ok(CvResult { folds, mean })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenFoldResult {
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub bleu: BleuScores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenCvResult {
    pub folds: Vec<GenFoldResult>,
    pub mean: BleuScores,
}

/// Cross-validation for generation, scored by mean sentence BLEU-1..4.
pub fn run_generation_cv<R: GenerateRecipe>(
    references: &[Vec<String>],
    recipe: &R,
    plan: &FoldPlan,
) -> Result<GenCvResult> {
    let folds = (0..plan.k())
        .into_par_iter()
        .map(|i| {
            let (train, test) = plan.split(i);
            let generated = recipe.fit_generate(&train, &test)?;
            if generated.len() != test.len() {
                return Err(Error::invalid(
                    "recipe returned the wrong number of comments",
                ));
            }
            let pairs: Vec<(Vec<String>, Vec<String>)> = generated
                .into_iter()
                .zip(&test)
                .map(|(h, &j)| (h, references[j].clone()))
                .collect();
            log::info!("fold {}/{} done", i + 1, plan.k());
            Ok(GenFoldResult {
                fold: i,
                train_size: train.len(),
                test_size: test.len(),
                bleu: corpus_bleu(&pairs)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = BleuScores::mean(&folds.iter().map(|f| f.bleu).collect::<Vec<_>>());
    Ok(GenCvResult { folds, mean })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectResult {
    pub project: String,
    pub train_size: usize,
    pub test_size: usize,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossProjectResult {
    pub rounds: Vec<ProjectResult>,
    pub mean: Metrics,
}

pub fn run_cross_project<R: DetectRecipe>(
    labels: &[bool],
    recipe: &R,
    rounds: &[Round],
) -> Result<CrossProjectResult> {
    let results = rounds
        .par_iter()
        .map(|r| {
            let predicted = recipe.fit_predict(&r.train, &r.test)?;
            log::info!("project round {} done", r.project);
            Ok(ProjectResult {
                project: r.project.clone(),
                train_size: r.train.len(),
                test_size: r.test.len(),
                metrics: score(labels, &r.test, predicted)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = mean_metrics(&results.iter().map(|r| r.metrics).collect::<Vec<_>>());
    Ok(CrossProjectResult {
        rounds: results,
        mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::split::stratified_folds;

    #[test]
    fn constant_positive_on_balanced_data() {
        let labels: Vec<bool> = (0..20).map(|i| i % 2 == 0).collect();
        let plan = stratified_folds(&labels, 10, true, 1).unwrap();
        let always = |_: &[usize], test: &[usize]| Ok(vec![true; test.len()]);
        let cv = run_cv(&labels, &always, &plan).unwrap();
        assert_eq!(cv.folds.len(), 10);
        for f in &cv.folds {
            assert_eq!(f.metrics.recall, 1.0);
            assert_eq!(f.metrics.precision, 0.5);
            assert!((f.metrics.f1 - 2.0 / 3.0).abs() < 1e-12);
        }
        let manual: f64 = cv.folds.iter().map(|f| f.metrics.f1).sum::<f64>() / 10.0;
        assert!((cv.mean.f1 - manual).abs() < 1e-15);
    }
}
