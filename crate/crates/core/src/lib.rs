//! Self-admitted technical debt (SATD) toolkit for Java conditionals.
//!
//! The pipeline mines outermost `if` statements and the comments linked to
//! them, labels comments with a keyword protocol, and trains detectors (LSTM,
//! multinomial naive Bayes, linear SVM) and an attention-based comment
//! generator on the resulting pairs. Evaluation helpers cover P/R/F1, BLEU,
//! stratified cross-validation and leave-one-project-out rounds.

pub mod detector;
pub mod error;
pub mod eval;
pub mod generator;
pub mod miner;
pub mod nn;
pub mod pretrain;
pub mod rng;
pub mod sbt;
pub mod text;
pub mod train;
pub mod vsm;

pub use error::{Error, Result};
