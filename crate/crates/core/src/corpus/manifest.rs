use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::io::{self, content_hash};
use super::types::{AnnotationRecord, Judgment, ResponseText, Stimulus, StyleSet, DEFAULT_STYLES};
use super::CorpusError;

fn default_styles() -> Vec<String> {
    DEFAULT_STYLES.iter().map(|s| s.to_string()).collect()
}

fn default_dim() -> usize {
    384
}

/// Corpus manifest. Relative paths resolve against the manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(default = "default_styles")]
    pub styles: Vec<String>,
    #[serde(default = "default_dim")]
    pub embedding_dim: usize,
    pub stimuli: PathBuf,
    pub judgments: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotations: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub captions: Option<PathBuf>,
    /// Caption embeddings keyed by stimulus id.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caption_embeddings: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub responses: Option<PathBuf>,
    /// Response embeddings keyed by the SHA-256 of the response text.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response_embeddings: Option<PathBuf>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let file = File::open(path).map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_reader(BufReader::new(file)).map_err(|source| CorpusError::Json {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// An immutable, fully loaded corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub styles: StyleSet,
    pub embedding_dim: usize,
    pub stimuli: Vec<Stimulus>,
    pub judgments: Vec<Judgment>,
    pub annotations: Vec<AnnotationRecord>,
    pub responses: Vec<ResponseText>,
    /// Ids found in caption or embedding files with no matching stimulus,
    /// as `(file kind, id)`.
    pub orphans: Vec<(String, String)>,
}

impl Corpus {
    pub fn load(manifest_path: &Path) -> Result<Self, CorpusError> {
        let manifest = Manifest::load(manifest_path)?;
        let base = manifest_path.parent().unwrap_or(Path::new("."));
        Self::from_manifest(&manifest, base)
    }

    pub fn from_manifest(m: &Manifest, base: &Path) -> Result<Self, CorpusError> {
        let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
        let styles = StyleSet::new(&m.styles)?;
        let mut stimuli = io::load_stimuli(&resolve(&m.stimuli), base)?;
        let judgments = io::load_judgments(&resolve(&m.judgments), &styles)?;
        let annotations = match &m.annotations {
            Some(p) => io::load_annotations(&resolve(p))?,
            None => Vec::new(),
        };
        let mut orphans = Vec::new();
        let index: BTreeMap<String, usize> = stimuli.iter().enumerate().map(|(i, s)| (s.id.clone(), i)).collect();
        if let Some(p) = &m.captions {
            for (id, caption) in io::load_captions(&resolve(p))? {
                match index.get(&id) {
                    Some(&i) => stimuli[i].caption = Some(caption),
                    None => orphans.push(("captions".to_string(), id)),
                }
            }
        }
        if let Some(p) = &m.caption_embeddings {
            for (id, v) in io::load_embeddings(&resolve(p), m.embedding_dim)? {
                match index.get(&id) {
                    Some(&i) => stimuli[i].embedding = Some(v),
                    None => orphans.push(("caption_embeddings".to_string(), id)),
                }
            }
        }
        let mut responses = match &m.responses {
            Some(p) => io::load_responses(&resolve(p), &styles)?,
            None => Vec::new(),
        };
        if let Some(p) = &m.response_embeddings {
            let by_hash = io::load_embeddings(&resolve(p), m.embedding_dim)?;
            for r in &mut responses {
                r.embedding = by_hash.get(&content_hash(&r.text)).cloned();
            }
        }
        Ok(Self {
            styles,
            embedding_dim: m.embedding_dim,
            stimuli,
            judgments,
            annotations,
            responses,
            orphans,
        })
    }

    pub fn stimulus(&self, id: &str) -> Option<&Stimulus> {
        self.stimuli.iter().find(|s| s.id == id)
    }

    pub fn stimulus_ids(&self) -> Vec<String> {
        self.stimuli.iter().map(|s| s.id.clone()).collect()
    }

    /// Writes every component under `dir` with standard file names and
    /// returns the manifest path.
    pub fn save(&self, dir: &Path) -> Result<PathBuf, CorpusError> {
        std::fs::create_dir_all(dir).map_err(|source| CorpusError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        io::write_stimuli(&dir.join("stimuli.csv"), &self.stimuli, dir)?;
        io::write_judgments(&dir.join("judgments.csv"), &self.judgments)?;
        let mut m = Manifest {
            styles: self.styles.iter().map(|s| s.to_string()).collect(),
            embedding_dim: self.embedding_dim,
            stimuli: "stimuli.csv".into(),
            judgments: "judgments.csv".into(),
            annotations: None,
            captions: None,
            caption_embeddings: None,
            responses: None,
            response_embeddings: None,
        };
        if !self.annotations.is_empty() {
            io::write_annotations(&dir.join("annotations.csv"), &self.annotations)?;
            m.annotations = Some("annotations.csv".into());
        }
        let captions: BTreeMap<String, String> = self
            .stimuli
            .iter()
            .filter_map(|s| s.caption.clone().map(|c| (s.id.clone(), c)))
            .collect();
        if !captions.is_empty() {
            io::write_captions(&dir.join("captions.jsonl"), &captions)?;
            m.captions = Some("captions.jsonl".into());
        }
        let cap_emb: BTreeMap<String, Vec<f64>> = self
            .stimuli
            .iter()
            .filter_map(|s| s.embedding.clone().map(|e| (s.id.clone(), e)))
            .collect();
        if !cap_emb.is_empty() {
            io::write_embeddings(&dir.join("caption_embeddings.json"), &cap_emb)?;
            m.caption_embeddings = Some("caption_embeddings.json".into());
        }
        if !self.responses.is_empty() {
            io::write_responses(&dir.join("responses.csv"), &self.responses)?;
            m.responses = Some("responses.csv".into());
            let resp_emb: BTreeMap<String, Vec<f64>> = self
                .responses
                .iter()
                .filter_map(|r| r.embedding.clone().map(|e| (content_hash(&r.text), e)))
                .collect();
            if !resp_emb.is_empty() {
                io::write_embeddings(&dir.join("response_embeddings.json"), &resp_emb)?;
                m.response_embeddings = Some("response_embeddings.json".into());
            }
        }
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&m).map_err(|source| CorpusError::Json {
            path: path.clone(),
            source,
        })?;
        std::fs::write(&path, text + "\n").map_err(|source| CorpusError::Io {
            path: path.clone(),
            source,
        })?;
        Ok(path)
    }
}
