//! Per-style Bradley-Terry scoring of pairwise judgments.

mod bt;
mod matrix;

use thiserror::Error;

pub use bt::{bt_descriptives, fit_bradley_terry, BtDescriptives, BtOptions, BtResult};
pub use matrix::{check_connectivity, Connectivity, WinMatrix};

#[derive(Debug, Error)]
pub enum RankingError {
    #[error("judgment references unknown stimulus `{0}`")]
    UnknownStimulus(String),
    #[error("need at least two items, got {0}")]
    TooFewItems(usize),
    #[error("comparison graph has {} components", .0.len())]
    DisconnectedGraph(Vec<Vec<String>>),
    #[error("items never win or never lose, so the MLE is infinite: {0:?}")]
    DegenerateItem(Vec<String>),
    #[error("no convergence after {} iterations (max update {:.3e})", .0.iterations, .0.max_abs_update_at_exit)]
    NotConverged(Box<BtResult>),
}
