//! Core analysis toolkit for modelling consumer aesthetic perception.
//!
//! Pairwise style judgments become per-style Bradley-Terry scores
//! ([`ranking`]), designer annotations and machine-extracted features
//! become regression predictors ([`corpus`], [`stats`]), and captions and
//! free-text responses are compared through their embeddings
//! ([`semantics`]). [`sampling`] picks representative stimuli from a larger
//! pool before any judgments are collected.

pub mod corpus;
pub mod ranking;
pub mod sampling;
pub mod semantics;
pub mod stats;

pub use corpus::{
    AnnotationRecord, AnnotationValue, Corpus, FeatureTable, Judgment, ResponseText, Side, SplitType, Stimulus,
    StyleKeyword, StyleSet,
};
pub use ranking::{BtOptions, BtResult, WinMatrix};
pub use stats::{DesignMatrix, RegressionResult};
