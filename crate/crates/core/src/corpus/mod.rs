//! Stimuli, judgments, annotations, captions and embeddings: the data
//! model, file formats and integrity checks.
//!
//! File formats:
//! - judgments CSV: `judge_id,style,left_id,right_id,winner`
//! - annotations CSV: `annotator_id,stimulus_id,feature,value`
//! - stimuli CSV: `id,image_path`
//! - responses CSV: `respondent_id,style,text`
//! - embeddings JSON: `{"<id>": [f64, ...], ...}`
//! - captions JSON Lines: `{"id": "...", "caption": "..."}` per line
//! - corpus manifest JSON, see [`Manifest`]

mod annotations;
mod io;
mod manifest;
mod table;
mod types;
mod validate;

use std::path::PathBuf;

use thiserror::Error;

pub use annotations::{aggregate_annotations, AggregatedFeatures, AggregatedValue};
pub use io::{
    content_hash, load_annotations, load_captions, load_embeddings, load_judgments, load_judgments_checked,
    load_responses, load_stimuli, write_annotations, write_captions, write_embeddings, write_judgments,
    write_responses, write_stimuli, CaptionRecord,
};
pub use manifest::{Corpus, Manifest};
pub use table::FeatureTable;
pub use types::{
    registered_kind, AnnotationRecord, AnnotationValue, Judgment, ResponseText, Side, SplitType, Stimulus,
    StyleKeyword, StyleSet, ValueKind, DEFAULT_STYLES, FEATURE_REGISTRY,
};
pub use validate::{validate_corpus, Coverage, Finding, ValidationReport};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{path}: missing column `{column}`")]
    MissingColumn { path: PathBuf, column: String },
    #[error("unknown style keyword `{0}`")]
    UnknownStyle(String),
    #[error("invalid style keyword `{0}`")]
    InvalidStyle(String),
    #[error("invalid {field}: `{value}`")]
    InvalidValue { field: &'static str, value: String },
    #[error("row {row}: stimulus `{id}` compared with itself")]
    SelfComparison { row: usize, id: String },
    #[error("unknown stimulus `{0}`")]
    UnknownStimulus(String),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("`{id}`: expected dimension {expected}, found {found}")]
    DimensionMismatch { id: String, expected: usize, found: usize },
    #[error("`{id}`: non-finite value at index {index}")]
    NonFiniteValue { id: String, index: usize },
    #[error("row {row}: empty `{field}`")]
    EmptyField { row: usize, field: &'static str },
    #[error("no records to aggregate")]
    EmptyInput,
    #[error("feature `{0}` annotated with inconsistent value kinds")]
    MixedValueKinds(String),
}
