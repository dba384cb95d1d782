//! Inference: OLS with t-based intervals, nested F-tests, correlation
//! matrices, Hartigan's dip test and the Shapiro-Wilk test.
//!
//! Every p-value comes from the self-contained incomplete beta and gamma
//! kernels in [`special`].

pub mod corr;
pub mod dip;
pub mod dist;
pub mod ols;
pub mod shapiro;
pub mod special;
pub mod summary;

use thiserror::Error;

pub use corr::{pearson, pearson_corr_matrix, CorrMatrix};
pub use dip::{dip_statistic, dip_test, DipResult};
pub use ols::{fit_table_model, nested_f_test, ols_fit, Coefficient, DesignMatrix, FTest, RegressionResult, INTERCEPT};
pub use shapiro::{shapiro_wilk, ShapiroWilk};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("need more rows than coefficients (n = {n}, k = {k})")]
    TooFewRows { n: usize, k: usize },
    #[error("design matrix is rank deficient (singular value ratio {ratio:.3e})")]
    RankDeficient { ratio: f64 },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("models are not nested: {0}")]
    NotNested(String),
    #[error("`{0}` has zero variance")]
    ZeroVariance(String),
    #[error("need at least {min} points, got {n}")]
    TooFewPoints { n: usize, min: usize },
    #[error("sample size {0} outside 3..=5000")]
    SampleSizeOutOfRange(usize),
    #[error("empty input")]
    EmptyInput,
}
