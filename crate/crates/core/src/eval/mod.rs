//! Metrics, data splits, cross-validation and report output.

pub mod bleu;
pub mod cv;
pub mod metrics;
pub mod recipes;
pub mod report;
pub mod split;
pub mod tuning;

pub use bleu::{bleu_n, corpus_bleu, modified_precision, BleuScores};
pub use cv::{
    run_cross_project, run_cv, run_generation_cv, CrossProjectResult, CvResult, DetectRecipe,
    FoldResult, GenCvResult, GenerateRecipe, ProjectResult,
};
pub use metrics::{mean_metrics, prf1, sort_rows, Metrics, ResultRow};
pub use recipes::{
    record_labels, task_sequences, train_detector, DetectorRecipe, GeneratorRecipe, ModelSpec, Task,
};
pub use split::{cross_project_rounds, stratified_folds, tuning_split, FoldPlan, Round};
pub use tuning::{select_top_per_group, DetectorGrid, GeneratorGrid, TuningRow};
