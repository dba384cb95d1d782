//! Ranked adjacent-word counts over free-text responses.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Result;
use tastekit_core::corpus::{ResponseText, StyleKeyword};

/// Bundled English stop words. A bigram is dropped when either word is on
/// the list.
pub const STOP_WORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "all", "also", "am", "an", "and", "any", "are", "as", "at", "be",
    "because", "been", "before", "being", "below", "between", "both", "but", "by", "can", "could", "did", "do", "does",
    "doing", "down", "during", "each", "few", "for", "from", "further", "had", "has", "have", "having", "he", "her",
    "here", "hers", "him", "his", "how", "i", "if", "in", "into", "is", "it", "its", "itself", "just", "me", "more",
    "most", "my", "no", "nor", "not", "of", "off", "on", "once", "only", "or", "other", "our", "ours", "out", "over",
    "own", "same", "she", "should", "so", "some", "such", "than", "that", "the", "their", "theirs", "them", "then",
    "there", "these", "they", "this", "those", "through", "to", "too", "under", "until", "up", "very", "was", "we",
    "were", "what", "when", "where", "which", "while", "who", "whom", "why", "will", "with", "would", "you", "your",
    "yours",
];

#[derive(Debug, thiserror::Error)]
#[error("no responses for style `{0}`")]
pub struct NoResponses(pub String);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BigramCount {
    pub bigram: String,
    pub count: u64,
}

/// Lowercased words with every non-alphanumeric character treated as a
/// separator.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(String::from)
        .collect()
}

fn is_stop(w: &str) -> bool {
    STOP_WORDS.binary_search(&w).is_ok()
}

/// Counts for one style, by descending count then ascending bigram.
pub fn bigram_frequencies(responses: &[ResponseText], style: &StyleKeyword) -> Result<Vec<BigramCount>, NoResponses> {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    let mut any = false;
    for r in responses.iter().filter(|r| &r.style == style) {
        any = true;
        let words = tokenize(&r.text);
        for pair in words.windows(2) {
            if is_stop(&pair[0]) || is_stop(&pair[1]) {
                continue;
            }
            *counts.entry(format!("{} {}", pair[0], pair[1])).or_default() += 1;
        }
    }
    if !any {
        return Err(NoResponses(style.to_string()));
    }
    let mut out: Vec<BigramCount> = counts
        .into_iter()
        .map(|(bigram, count)| BigramCount { bigram, count })
        .collect();
    out.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.bigram.cmp(&b.bigram)));
    Ok(out)
}

/// `style,rank,bigram,count` rows for every style that has responses.
pub fn write_bigrams(path: &Path, tables: &BTreeMap<String, Vec<BigramCount>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["style", "rank", "bigram", "count"])?;
    for (style, rows) in tables {
        for (i, b) in rows.iter().enumerate() {
            w.write_record([style.as_str(), &(i + 1).to_string(), &b.bigram, &b.count.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}
