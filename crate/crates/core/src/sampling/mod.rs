//! Representative-design selection: exact t-SNE of supplied feature
//! vectors, k-means on the 2-D map, and centroid-nearest selection.

mod kmeans;
mod select;
mod tsne;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use kmeans::{kmeans, KMeansOptions, KMeansResult};
pub use select::{select_representatives, SelectionMode};
pub use tsne::{tsne_embed, TsneOptions, TsneResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddedPoint {
    pub id: String,
    pub position: [f64; 2],
}

#[derive(Debug, Error)]
pub enum SamplingError {
    #[error("need at least {min} points, got {n}")]
    TooFewPoints { n: usize, min: usize },
    #[error("vector `{id}` has dimension {found}, expected {expected}")]
    DimensionMismatch { id: String, expected: usize, found: usize },
    #[error("perplexity {perplexity} must be positive and below n − 1 = {}", .n - 1)]
    PerplexityTooLarge { perplexity: f64, n: usize },
    #[error("k = {k} clusters requested for {n} points")]
    KTooLarge { k: usize, n: usize },
    #[error("point {0} has a non-finite coordinate")]
    NonFinite(usize),
    #[error("cannot select {m} of {n}")]
    MTooLarge { m: usize, n: usize },
    #[error("{points} points but {assignments} cluster assignments")]
    AssignmentMismatch { points: usize, assignments: usize },
}
