use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};
use sha2::{Digest, Sha256};

use super::types::{AnnotationRecord, AnnotationValue, Judgment, ResponseText, Stimulus, StyleSet};
use super::CorpusError;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> CorpusError + '_ {
    move |source| CorpusError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// Hex SHA-256 of a text, used as the key for text embeddings.
pub fn content_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Reads a headed CSV and returns the column indices of `columns`, in order.
fn open_csv(path: &Path, columns: &[&str]) -> Result<(csv::Reader<File>, Vec<usize>), CorpusError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::Headers).from_reader(file);
    let headers = reader.headers().map_err(csv_err(path))?.clone();
    let idx = columns
        .iter()
        .map(|&c| {
            headers
                .iter()
                .position(|h| h == c)
                .ok_or_else(|| CorpusError::MissingColumn {
                    path: path.to_path_buf(),
                    column: c.to_string(),
                })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((reader, idx))
}

fn field<'r>(rec: &'r csv::StringRecord, idx: usize, row: usize, name: &'static str) -> Result<&'r str, CorpusError> {
    verbatim_field(rec, idx, row, name).map(str::trim)
}

/// Like [`field`] but keeps surrounding whitespace, for free text.
fn verbatim_field<'r>(
    rec: &'r csv::StringRecord,
    idx: usize,
    row: usize,
    name: &'static str,
) -> Result<&'r str, CorpusError> {
    match rec.get(idx) {
        Some(v) if !v.trim().is_empty() => Ok(v),
        _ => Err(CorpusError::EmptyField { row, field: name }),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CorpusError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(io_err(path))?;
        }
    }
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

/// Loads pairwise judgments. The whole file parses or the load fails.
pub fn load_judgments(path: &Path, styles: &StyleSet) -> Result<Vec<Judgment>, CorpusError> {
    let (mut reader, idx) = open_csv(path, &["judge_id", "style", "left_id", "right_id", "winner"])?;
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(csv_err(path))?;
        let left_id = field(&rec, idx[2], row, "left_id")?.to_string();
        let right_id = field(&rec, idx[3], row, "right_id")?.to_string();
        let style = styles.keyword(field(&rec, idx[1], row, "style")?)?;
        if left_id == right_id {
            return Err(CorpusError::SelfComparison { row, id: left_id });
        }
        out.push(Judgment {
            judge_id: field(&rec, idx[0], row, "judge_id")?.to_string(),
            style,
            left_id,
            right_id,
            winner: field(&rec, idx[4], row, "winner")?.parse()?,
        });
    }
    Ok(out)
}

/// [`load_judgments`], additionally rejecting references to stimuli not in `ids`.
pub fn load_judgments_checked(
    path: &Path,
    styles: &StyleSet,
    ids: &HashSet<&str>,
) -> Result<Vec<Judgment>, CorpusError> {
    let judgments = load_judgments(path, styles)?;
    for j in &judgments {
        for id in [&j.left_id, &j.right_id] {
            if !ids.contains(id.as_str()) {
                return Err(CorpusError::UnknownStimulus(id.clone()));
            }
        }
    }
    Ok(judgments)
}

pub fn write_judgments(path: &Path, judgments: &[Judgment]) -> Result<(), CorpusError> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["judge_id", "style", "left_id", "right_id", "winner"])
        .map_err(csv_err(path))?;
    for j in judgments {
        w.write_record([
            j.judge_id.as_str(),
            j.style.as_str(),
            &j.left_id,
            &j.right_id,
            &j.winner.to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn load_annotations(path: &Path) -> Result<Vec<AnnotationRecord>, CorpusError> {
    let (mut reader, idx) = open_csv(path, &["annotator_id", "stimulus_id", "feature", "value"])?;
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(csv_err(path))?;
        out.push(AnnotationRecord {
            annotator_id: field(&rec, idx[0], row, "annotator_id")?.to_string(),
            stimulus_id: field(&rec, idx[1], row, "stimulus_id")?.to_string(),
            feature_name: field(&rec, idx[2], row, "feature")?.to_lowercase(),
            value: AnnotationValue::parse(field(&rec, idx[3], row, "value")?)?,
        });
    }
    Ok(out)
}

pub fn write_annotations(path: &Path, records: &[AnnotationRecord]) -> Result<(), CorpusError> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["annotator_id", "stimulus_id", "feature", "value"])
        .map_err(csv_err(path))?;
    for r in records {
        w.write_record([
            r.annotator_id.as_str(),
            &r.stimulus_id,
            &r.feature_name,
            &r.value.to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Loads `id,image_path` rows. Relative image paths resolve against `base`.
pub fn load_stimuli(path: &Path, base: &Path) -> Result<Vec<Stimulus>, CorpusError> {
    let (mut reader, idx) = open_csv(path, &["id", "image_path"])?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(csv_err(path))?;
        let id = field(&rec, idx[0], row, "id")?.to_string();
        if !seen.insert(id.clone()) {
            return Err(CorpusError::DuplicateId(id));
        }
        let image = PathBuf::from(field(&rec, idx[1], row, "image_path")?);
        out.push(Stimulus {
            id,
            image_path: if image.is_absolute() { image } else { base.join(image) },
            caption: None,
            embedding: None,
        });
    }
    Ok(out)
}

/// Writes `id,image_path`, relativising paths under `base` where possible.
pub fn write_stimuli(path: &Path, stimuli: &[Stimulus], base: &Path) -> Result<(), CorpusError> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["id", "image_path"]).map_err(csv_err(path))?;
    for s in stimuli {
        let p = s.image_path.strip_prefix(base).unwrap_or(&s.image_path);
        w.write_record([s.id.as_str(), &p.to_string_lossy()])
            .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn load_responses(path: &Path, styles: &StyleSet) -> Result<Vec<ResponseText>, CorpusError> {
    let (mut reader, idx) = open_csv(path, &["respondent_id", "style", "text"])?;
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(csv_err(path))?;
        out.push(ResponseText {
            respondent_id: field(&rec, idx[0], row, "respondent_id")?.to_string(),
            style: styles.keyword(field(&rec, idx[1], row, "style")?)?,
            text: verbatim_field(&rec, idx[2], row, "text")?.to_string(),
            embedding: None,
        });
    }
    Ok(out)
}

pub fn write_responses(path: &Path, responses: &[ResponseText]) -> Result<(), CorpusError> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["respondent_id", "style", "text"])
        .map_err(csv_err(path))?;
    for r in responses {
        w.write_record([r.respondent_id.as_str(), r.style.as_str(), &r.text])
            .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Raw id → array entries in file order, so duplicate keys stay visible.
struct RawEntries(Vec<(String, Vec<serde_json::Value>)>);

impl<'de> Deserialize<'de> for RawEntries {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct EntriesVisitor;

        impl<'de> Visitor<'de> for EntriesVisitor {
            type Value = RawEntries;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object mapping ids to arrays of numbers")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<RawEntries, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, Vec<serde_json::Value>>()? {
                    out.push((k, v));
                }
                Ok(RawEntries(out))
            }
        }

        deserializer.deserialize_map(EntriesVisitor)
    }
}

/// Loads an id → vector map, checking dimension and finiteness of every entry.
pub fn load_embeddings(path: &Path, expected_dim: usize) -> Result<BTreeMap<String, Vec<f64>>, CorpusError> {
    let file = File::open(path).map_err(io_err(path))?;
    let raw: RawEntries = serde_json::from_reader(BufReader::new(file)).map_err(|source| CorpusError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = BTreeMap::new();
    for (id, values) in raw.0 {
        if values.len() != expected_dim {
            return Err(CorpusError::DimensionMismatch {
                id,
                expected: expected_dim,
                found: values.len(),
            });
        }
        let mut v = Vec::with_capacity(expected_dim);
        for (index, value) in values.iter().enumerate() {
            match value.as_f64() {
                Some(x) if x.is_finite() => v.push(x),
                _ => return Err(CorpusError::NonFiniteValue { id, index }),
            }
        }
        if out.insert(id.clone(), v).is_some() {
            return Err(CorpusError::DuplicateId(id));
        }
    }
    Ok(out)
}

pub fn write_embeddings(path: &Path, embeddings: &BTreeMap<String, Vec<f64>>) -> Result<(), CorpusError> {
    let mut w = create(path)?;
    serde_json::to_writer(&mut w, embeddings).map_err(|source| CorpusError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    w.write_all(b"\n").map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaptionRecord {
    pub id: String,
    pub caption: String,
}

pub fn load_captions(path: &Path) -> Result<BTreeMap<String, String>, CorpusError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut out = BTreeMap::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: CaptionRecord = serde_json::from_str(&line).map_err(|source| CorpusError::Json {
            path: path.to_path_buf(),
            source,
        })?;
        if out.insert(rec.id.clone(), rec.caption).is_some() {
            return Err(CorpusError::DuplicateId(rec.id));
        }
    }
    Ok(out)
}

pub fn write_captions(path: &Path, captions: &BTreeMap<String, String>) -> Result<(), CorpusError> {
    let mut w = create(path)?;
    for (id, caption) in captions {
        let line = serde_json::to_string(&CaptionRecord {
            id: id.clone(),
            caption: caption.clone(),
        })
        .map_err(|source| CorpusError::Json {
            path: path.to_path_buf(),
            source,
        })?;
        writeln!(w, "{line}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}
