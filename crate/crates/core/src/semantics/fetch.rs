use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use super::provider::{CaptionProvider, CaptionRequest, EmbeddingProvider, ProviderFailure};
use super::SemanticsError;
use crate::corpus::{content_hash, load_captions, load_embeddings, write_captions, write_embeddings, Stimulus};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FetchOptions {
    pub max_in_flight: usize,
    pub attempts: usize,
    /// Delay before the first retry; doubles after each failure.
    pub backoff_ms: u64,
    pub batch_size: usize,
}

impl Default for FetchOptions {
    fn default() -> Self {
        Self {
            max_in_flight: 4,
            attempts: 3,
            backoff_ms: 250,
            batch_size: 32,
        }
    }
}

fn with_retry<R>(
    opts: &FetchOptions,
    mut call: impl FnMut() -> Result<R, ProviderFailure>,
) -> Result<R, ProviderFailure> {
    let mut delay = opts.backoff_ms;
    let mut attempt = 1;
    loop {
        match call() {
            Ok(r) => return Ok(r),
            Err(e) if attempt >= opts.attempts.max(1) => return Err(e),
            Err(e) => {
                warn!("provider attempt {attempt} failed ({e}); retrying in {delay} ms");
                std::thread::sleep(Duration::from_millis(delay));
                delay = delay.saturating_mul(2);
                attempt += 1;
            }
        }
    }
}

/// Runs `f` over `items` on at most `cap` threads; results keep item order.
fn bounded_map<T: Sync, R: Send>(items: &[T], cap: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..cap.max(1).min(items.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                slots.lock().expect("no panics while holding the lock")[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .expect("threads joined")
        .into_iter()
        .map(|r| r.expect("every slot filled"))
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CaptionFetchReport {
    /// Stimuli that already had a stored caption.
    pub skipped: usize,
    pub requested: usize,
    pub fetched: usize,
    pub failures: Vec<(String, String)>,
}

/// Captions every stimulus missing from the JSON Lines store at `store`,
/// then rewrites the store with old and new captions. Failures are
/// recorded per stimulus and do not stop the others.
pub fn fetch_captions(
    provider: &dyn CaptionProvider,
    stimuli: &[Stimulus],
    prompt: &str,
    store: &Path,
    opts: &FetchOptions,
) -> Result<CaptionFetchReport, SemanticsError> {
    let mut captions = if store.exists() {
        load_captions(store)?
    } else {
        BTreeMap::new()
    };
    let pending: Vec<&Stimulus> = stimuli.iter().filter(|s| !captions.contains_key(&s.id)).collect();
    let mut report = CaptionFetchReport {
        skipped: stimuli.len() - pending.len(),
        requested: pending.len(),
        ..Default::default()
    };
    let results = bounded_map(&pending, opts.max_in_flight, |s| {
        let image = std::fs::read(&s.image_path)
            .map_err(|e| ProviderFailure::Rejected(format!("cannot read {}: {e}", s.image_path.display())))?;
        let request = CaptionRequest {
            id: s.id.clone(),
            prompt: prompt.to_string(),
            image,
        };
        with_retry(opts, || provider.caption(&request))
    });
    let mut unreachable = 0;
    for (s, r) in pending.iter().zip(results) {
        match r {
            Ok(text) => {
                captions.insert(s.id.clone(), text);
                report.fetched += 1;
            }
            Err(e) => {
                if matches!(e, ProviderFailure::Unreachable(_)) {
                    unreachable += 1;
                }
                warn!("caption for `{}` failed: {e}", s.id);
                report.failures.push((s.id.clone(), e.to_string()));
            }
        }
    }
    if report.fetched > 0 || !store.exists() {
        write_captions(store, &captions)?;
    }
    info!(
        "captions: {} fetched, {} skipped, {} failed",
        report.fetched,
        report.skipped,
        report.failures.len()
    );
    if report.requested > 0 && unreachable == report.requested {
        return Err(SemanticsError::ProviderUnreachable(report.failures[0].1.clone()));
    }
    Ok(report)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingFetchReport {
    pub texts: usize,
    pub unique: usize,
    pub cached: usize,
    pub fetched: usize,
    pub requests: usize,
}

/// Embeds every distinct text whose content hash is missing from the JSON
/// store at `store`, in batches, and rewrites the store keyed by hash.
pub fn fetch_embeddings(
    provider: &dyn EmbeddingProvider,
    texts: &[String],
    dim: usize,
    store: &Path,
    opts: &FetchOptions,
) -> Result<EmbeddingFetchReport, SemanticsError> {
    let mut vectors = if store.exists() {
        load_embeddings(store, dim)?
    } else {
        BTreeMap::new()
    };
    let mut seen = BTreeSet::new();
    let unique: Vec<(String, &String)> = texts
        .iter()
        .map(|t| (content_hash(t), t))
        .filter(|(h, _)| seen.insert(h.clone()))
        .collect();
    let pending: Vec<&(String, &String)> = unique.iter().filter(|(h, _)| !vectors.contains_key(h)).collect();
    let batches: Vec<&[&(String, &String)]> = pending.chunks(opts.batch_size.max(1)).collect();
    let mut report = EmbeddingFetchReport {
        texts: texts.len(),
        unique: unique.len(),
        cached: unique.len() - pending.len(),
        fetched: 0,
        requests: batches.len(),
    };
    let results = bounded_map(&batches, opts.max_in_flight, |batch| {
        let inputs: Vec<String> = batch.iter().map(|(_, t)| (*t).clone()).collect();
        with_retry(opts, || provider.embed(&inputs))
    });
    let mut first_error = None;
    for (batch, r) in batches.iter().zip(results) {
        let result = r.map_err(|e| match e {
            ProviderFailure::Unreachable(m) => SemanticsError::ProviderUnreachable(m),
            ProviderFailure::Rejected(m) => SemanticsError::ProviderError(m),
        });
        let checked = result.and_then(|vs| {
            if vs.len() != batch.len() {
                return Err(SemanticsError::ProviderError(format!(
                    "{} vectors for {} inputs",
                    vs.len(),
                    batch.len()
                )));
            }
            if let Some(v) = vs.iter().find(|v| v.len() != dim) {
                return Err(SemanticsError::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
            if vs.iter().flatten().any(|x| !x.is_finite()) {
                return Err(SemanticsError::ProviderError("non-finite vector entry".into()));
            }
            Ok(vs)
        });
        match checked {
            Ok(vs) => {
                for ((h, _), v) in batch.iter().zip(vs) {
                    vectors.insert(h.clone(), v);
                    report.fetched += 1;
                }
            }
            Err(e) => {
                warn!("embedding batch failed: {e}");
                first_error.get_or_insert(e);
            }
        }
    }
    if report.fetched > 0 || !store.exists() {
        write_embeddings(store, &vectors)?;
    }
    match first_error {
        Some(e) => Err(e),
        None => Ok(report),
    }
}
