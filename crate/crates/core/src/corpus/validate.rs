use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::manifest::Corpus;
use super::types::{registered_kind, ValueKind};
use crate::ranking::{check_connectivity, Connectivity, WinMatrix};

/// Caption lengths outside this word range are flagged.
pub const CAPTION_WORDS: (usize, usize) = (20, 400);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Finding {
    UnknownStimulus {
        context: String,
        id: String,
    },
    UnknownFeature {
        feature: String,
    },
    FeatureKindMismatch {
        feature: String,
        expected: ValueKind,
        found: ValueKind,
    },
    DisconnectedGraph {
        style: String,
        components: Vec<Vec<String>>,
    },
    CaptionLength {
        id: String,
        words: usize,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StyleCoverage {
    pub judgments: usize,
    pub pairs_covered: usize,
    pub pairs_total: usize,
    pub min_ratings_per_pair: usize,
    pub max_ratings_per_pair: usize,
    pub mean_ratings_per_pair: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub stimuli: usize,
    pub judgments: usize,
    pub annotations: usize,
    pub annotated_stimuli: usize,
    pub captioned_stimuli: usize,
    pub responses: usize,
    pub per_style: BTreeMap<String, StyleCoverage>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub issues: Vec<Finding>,
    pub coverage: Coverage,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Referential integrity, per-style comparison-graph connectivity and
/// coverage statistics. Reads only.
pub fn validate_corpus(corpus: &Corpus) -> ValidationReport {
    let mut issues = Vec::new();
    let ids: HashSet<&str> = corpus.stimuli.iter().map(|s| s.id.as_str()).collect();

    let unknown = |context: &str, id: &str, issues: &mut Vec<Finding>| {
        if !ids.contains(id) {
            let f = Finding::UnknownStimulus {
                context: context.to_string(),
                id: id.to_string(),
            };
            if !issues.contains(&f) {
                issues.push(f);
            }
        }
    };
    for j in &corpus.judgments {
        unknown("judgments", &j.left_id, &mut issues);
        unknown("judgments", &j.right_id, &mut issues);
    }
    for a in &corpus.annotations {
        unknown("annotations", &a.stimulus_id, &mut issues);
    }
    for (context, id) in &corpus.orphans {
        unknown(context, id, &mut issues);
    }

    let mut seen_features = BTreeMap::new();
    for a in &corpus.annotations {
        seen_features.entry(a.feature_name.clone()).or_insert(a.value.kind());
    }
    for (feature, found) in seen_features {
        match registered_kind(&feature) {
            None => issues.push(Finding::UnknownFeature { feature }),
            Some(expected) if expected != found => issues.push(Finding::FeatureKindMismatch {
                feature,
                expected,
                found,
            }),
            _ => {}
        }
    }

    let known_ids = corpus.stimulus_ids();
    let mut per_style = BTreeMap::new();
    for style in corpus.styles.iter() {
        let js: Vec<_> = corpus
            .judgments
            .iter()
            .filter(|j| &j.style == style && ids.contains(j.left_id.as_str()) && ids.contains(j.right_id.as_str()))
            .cloned()
            .collect();
        let m = WinMatrix::from_judgments(&js, &known_ids).expect("filtered to known ids");
        if let Connectivity::Components(components) = check_connectivity(&m) {
            issues.push(Finding::DisconnectedGraph {
                style: style.to_string(),
                components,
            });
        }
        per_style.insert(style.to_string(), style_coverage(&m, js.len()));
    }

    for s in &corpus.stimuli {
        if let Some(c) = &s.caption {
            let words = c.split_whitespace().count();
            if words < CAPTION_WORDS.0 || words > CAPTION_WORDS.1 {
                issues.push(Finding::CaptionLength {
                    id: s.id.clone(),
                    words,
                });
            }
        }
    }

    let annotated: HashSet<&str> = corpus.annotations.iter().map(|a| a.stimulus_id.as_str()).collect();
    ValidationReport {
        issues,
        coverage: Coverage {
            stimuli: corpus.stimuli.len(),
            judgments: corpus.judgments.len(),
            annotations: corpus.annotations.len(),
            annotated_stimuli: annotated.len(),
            captioned_stimuli: corpus.stimuli.iter().filter(|s| s.caption.is_some()).count(),
            responses: corpus.responses.len(),
            per_style,
        },
    }
}

fn style_coverage(m: &WinMatrix, judgments: usize) -> StyleCoverage {
    let n = m.len();
    let mut counts = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let c = m.comparisons(i, j);
            if c > 0 {
                counts.push(c as usize);
            }
        }
    }
    StyleCoverage {
        judgments,
        pairs_covered: counts.len(),
        pairs_total: n * n.saturating_sub(1) / 2,
        min_ratings_per_pair: counts.iter().copied().min().unwrap_or(0),
        max_ratings_per_pair: counts.iter().copied().max().unwrap_or(0),
        mean_ratings_per_pair: if counts.is_empty() {
            0.0
        } else {
            counts.iter().sum::<usize>() as f64 / counts.len() as f64
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{AnnotationRecord, AnnotationValue, Judgment, Side, Stimulus, StyleKeyword, StyleSet};

    fn stim(id: &str) -> Stimulus {
        Stimulus {
            id: id.into(),
            image_path: format!("{id}.png").into(),
            caption: None,
            embedding: None,
        }
    }

    fn judge(a: &str, b: &str, w: Side) -> Judgment {
        Judgment {
            judge_id: "j".into(),
            style: StyleKeyword::new("rugged").unwrap(),
            left_id: a.into(),
            right_id: b.into(),
            winner: w,
        }
    }

    fn corpus(ids: &[&str], judgments: Vec<Judgment>) -> Corpus {
        Corpus {
            styles: StyleSet::new(["rugged"]).unwrap(),
            embedding_dim: 3,
            stimuli: ids.iter().map(|i| stim(i)).collect(),
            judgments,
            annotations: vec![AnnotationRecord {
                annotator_id: "a".into(),
                stimulus_id: "a".into(),
                feature_name: "offset".into(),
                value: AnnotationValue::Presence(true),
            }],
            responses: vec![],
            orphans: vec![],
        }
    }

    #[test]
    fn consistent_corpus_has_no_issues() {
        let c = corpus(
            &["a", "b", "c"],
            vec![
                judge("a", "b", Side::Left),
                judge("b", "c", Side::Left),
                judge("c", "a", Side::Left),
            ],
        );
        let r = validate_corpus(&c);
        assert!(r.is_clean(), "{:?}", r.issues);
        assert_eq!(r.coverage.per_style["rugged"].pairs_covered, 3);
    }

    #[test]
    fn unknown_stimulus_reported_once() {
        let c = corpus(
            &["a", "b"],
            vec![judge("a", "b", Side::Left), judge("a", "zz", Side::Left)],
        );
        let r = validate_corpus(&c);
        let unknown: Vec<_> = r
            .issues
            .iter()
            .filter(|f| matches!(f, Finding::UnknownStimulus { .. }))
            .collect();
        assert_eq!(unknown.len(), 1);
    }

    #[test]
    fn disjoint_cliques_are_one_disconnected_finding() {
        let c = corpus(
            &["a", "b", "c", "d"],
            vec![
                judge("a", "b", Side::Left),
                judge("a", "b", Side::Right),
                judge("c", "d", Side::Left),
            ],
        );
        let r = validate_corpus(&c);
        assert_eq!(r.issues.len(), 1);
        match &r.issues[0] {
            Finding::DisconnectedGraph { style, components } => {
                assert_eq!(style, "rugged");
                assert_eq!(components.len(), 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_feature_and_caption_length() {
        let mut c = corpus(&["a", "b"], vec![judge("a", "b", Side::Left)]);
        c.annotations[0].feature_name = "chrome".into();
        c.stimuli[0].caption = Some("too short".into());
        let r = validate_corpus(&c);
        assert!(r.issues.contains(&Finding::UnknownFeature {
            feature: "chrome".into()
        }));
        assert!(r.issues.contains(&Finding::CaptionLength {
            id: "a".into(),
            words: 2
        }));
    }
}
