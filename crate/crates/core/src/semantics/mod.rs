//! Caption/response embeddings, cosine similarity and per-(stimulus, style)
//! semantic alignment, plus the provider contract used to obtain captions
//! and embeddings from an external service.

mod fetch;
mod provider;

use std::collections::BTreeMap;

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{CorpusError, ResponseText, StyleKeyword, StyleSet};

pub use fetch::{fetch_captions, fetch_embeddings, CaptionFetchReport, EmbeddingFetchReport, FetchOptions};
pub use provider::{
    CaptionProvider, CaptionRequest, EmbeddingProvider, FixedCaptioner, HashEmbedder, HttpProvider, ProviderFailure,
    CAPTION_PROMPT, TOKEN_ENV,
};

#[derive(Debug, Error)]
pub enum SemanticsError {
    #[error("zero vector")]
    ZeroVector,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("no caption embedding for stimulus `{0}`")]
    MissingCaptionEmbedding(String),
    #[error("response by `{respondent}` for style `{style}` has no embedding")]
    MissingResponseEmbedding { respondent: String, style: String },
    #[error("provider unreachable: {0}")]
    ProviderUnreachable(String),
    #[error("provider error: {0}")]
    ProviderError(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

/// a·b / (‖a‖‖b‖), clamped to [−1, 1].
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64, SemanticsError> {
    if a.len() != b.len() {
        return Err(SemanticsError::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(SemanticsError::ZeroVector);
    }
    Ok((dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentScore {
    pub stimulus_id: String,
    pub style: StyleKeyword,
    pub mean_cosine: f64,
    pub n_responses: usize,
}

/// Mean caption-to-response cosine for every (stimulus, style) pair, in
/// stimulus order then style order. Styles without responses are skipped
/// with a warning.
pub fn alignment_scores(
    stimulus_ids: &[String],
    captions: &BTreeMap<String, Vec<f64>>,
    responses: &[ResponseText],
    styles: &StyleSet,
) -> Result<Vec<AlignmentScore>, SemanticsError> {
    let mut by_style: BTreeMap<&StyleKeyword, Vec<&[f64]>> = BTreeMap::new();
    for r in responses {
        let v = r
            .embedding
            .as_deref()
            .ok_or_else(|| SemanticsError::MissingResponseEmbedding {
                respondent: r.respondent_id.clone(),
                style: r.style.to_string(),
            })?;
        by_style.entry(&r.style).or_default().push(v);
    }
    for style in styles.iter() {
        if !by_style.contains_key(style) {
            warn!("no responses for style `{style}`; its alignment rows are omitted");
        }
    }
    let mut out = Vec::new();
    for id in stimulus_ids {
        let caption = captions
            .get(id)
            .ok_or_else(|| SemanticsError::MissingCaptionEmbedding(id.clone()))?;
        for style in styles.iter() {
            let Some(vectors) = by_style.get(style) else {
                continue;
            };
            let mut sims = vectors
                .iter()
                .map(|v| cosine(caption, v))
                .collect::<Result<Vec<_>, _>>()?;
            // Summing in sorted order makes the mean independent of response order.
            sims.sort_by(f64::total_cmp);
            out.push(AlignmentScore {
                stimulus_id: id.clone(),
                style: style.clone(),
                mean_cosine: sims.iter().sum::<f64>() / sims.len() as f64,
                n_responses: sims.len(),
            });
        }
    }
    Ok(out)
}
