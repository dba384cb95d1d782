//! File formats of the run directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tastekit_core::stats::{Coefficient, CorrMatrix, FTest};
use tastekit_core::RegressionResult;

pub const VALIDATION: &str = "validation.json";
pub const DESIGNER_FEATURES: &str = "designer_features.csv";
pub const CV_FEATURES: &str = "cv_features.csv";
pub const BT_SCORES: &str = "bt_scores.csv";
pub const BT_FITS: &str = "bt_fits.json";
pub const BT_DESCRIPTIVES: &str = "bt_descriptives.csv";
pub const ALIGNMENT: &str = "alignment.csv";
pub const REGRESSION_DIR: &str = "regression";
pub const REGRESSIONS: &str = "regressions.json";
pub const ALIGNMENT_MODELS: &str = "alignment_models.json";
pub const ALIGNMENT_SLOPES: &str = "alignment_slopes.csv";
pub const CORRELATION: &str = "bt_correlation.csv";
pub const DISTRIBUTION: &str = "distribution_tests.csv";
pub const BIGRAMS: &str = "bigrams.csv";
pub const REPORT_JSON: &str = "report.json";
pub const REPORT_TXT: &str = "report.txt";
pub const FIGURES_DIR: &str = "figures";
pub const SAMPLING_DIR: &str = "sampling";
pub const MANIFEST: &str = "manifest.json";

/// Raised when a stage needs an output that an earlier stage has not
/// written yet.
#[derive(Debug, thiserror::Error)]
#[error("missing `{file}`; run the `{stage}` stage first")]
pub struct MissingStage {
    pub file: String,
    pub stage: &'static str,
}

pub fn require(dir: &Path, file: &str, stage: &'static str) -> Result<PathBuf> {
    let p = dir.join(file);
    if p.is_file() {
        Ok(p)
    } else {
        Err(MissingStage {
            file: file.to_string(),
            stage,
        }
        .into())
    }
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("cannot write {}", path.display()))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("cannot parse {}", path.display()))
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))
}

fn reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    csv::Reader::from_path(path).with_context(|| format!("cannot read {}", path.display()))
}

fn num(v: f64) -> String {
    v.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_else(|| "NA".into())
}

fn parse_opt(s: &str) -> Result<Option<f64>> {
    if s == "NA" {
        Ok(None)
    } else {
        Ok(Some(s.parse()?))
    }
}

fn check_header(path: &Path, r: &mut csv::Reader<fs::File>, expected: &[&str]) -> Result<()> {
    let h = r.headers()?;
    if h.iter().ne(expected.iter().copied()) {
        bail!("{}: expected header {}", path.display(), expected.join(","));
    }
    Ok(())
}

/// style → stimulus id → score.
pub type ScoreTable = BTreeMap<String, BTreeMap<String, f64>>;

/// Rows in style order, then in the order of `ids`.
pub fn write_scores(path: &Path, value_column: &str, ids: &[String], scores: &ScoreTable) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["stimulus_id", "style", value_column])?;
    for (style, m) in scores {
        for id in ids {
            if let Some(v) = m.get(id) {
                w.write_record([id.as_str(), style, &num(*v)])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_scores(path: &Path, value_column: &str) -> Result<ScoreTable> {
    let mut r = reader(path)?;
    check_header(path, &mut r, &["stimulus_id", "style", value_column])?;
    let mut out = ScoreTable::new();
    for rec in r.records() {
        let rec = rec?;
        let v: f64 = rec[2]
            .parse()
            .with_context(|| format!("{}: bad value `{}`", path.display(), &rec[2]))?;
        out.entry(rec[1].to_string()).or_default().insert(rec[0].to_string(), v);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentRow {
    pub stimulus_id: String,
    pub style: String,
    pub mean_cosine: f64,
    pub n_responses: usize,
}

pub fn write_alignment(path: &Path, rows: &[AlignmentRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["stimulus_id", "style", "mean_cosine", "n_responses"])?;
    for a in rows {
        w.write_record([
            a.stimulus_id.as_str(),
            &a.style,
            &num(a.mean_cosine),
            &a.n_responses.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_alignment(path: &Path) -> Result<Vec<AlignmentRow>> {
    let mut r = reader(path)?;
    check_header(path, &mut r, &["stimulus_id", "style", "mean_cosine", "n_responses"])?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        out.push(AlignmentRow {
            stimulus_id: rec[0].to_string(),
            style: rec[1].to_string(),
            mean_cosine: rec[2].parse()?,
            n_responses: rec[3].parse()?,
        });
    }
    Ok(out)
}

pub fn write_descriptives(path: &Path, rows: &BTreeMap<String, tastekit_core::ranking::BtDescriptives>) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "style", "count", "mean", "std", "min", "q25", "median", "q75", "max", "range",
    ])?;
    for (style, d) in rows {
        w.write_record([
            style.clone(),
            d.count.to_string(),
            num(d.mean),
            if d.std_defined { num(d.std) } else { "NA".into() },
            num(d.min),
            num(d.q25),
            num(d.median),
            num(d.q75),
            num(d.max),
            num(d.range),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub const COEFFICIENT_HEADER: [&str; 7] = ["term", "beta", "std_err", "t", "p", "ci_lo", "ci_hi"];

pub fn write_coefficients(path: &Path, coefficients: &[Coefficient]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(COEFFICIENT_HEADER)?;
    for c in coefficients {
        w.write_record([
            c.name.clone(),
            num(c.beta),
            num(c.std_err),
            num(c.t),
            num(c.p),
            num(c.ci_lo),
            num(c.ci_hi),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_coefficients(path: &Path) -> Result<Vec<Coefficient>> {
    let mut r = reader(path)?;
    check_header(path, &mut r, &COEFFICIENT_HEADER)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let f = |i: usize| -> Result<f64> { Ok(rec[i].parse()?) };
        out.push(Coefficient {
            name: rec[0].to_string(),
            beta: f(1)?,
            std_err: f(2)?,
            t: f(3)?,
            p: f(4)?,
            ci_lo: f(5)?,
            ci_hi: f(6)?,
        });
    }
    Ok(out)
}

/// A per-style fit of one model family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFit {
    pub family: String,
    pub style: String,
    pub result: RegressionResult,
}

impl ModelFit {
    pub fn file_name(&self) -> String {
        format!("{}_{}.csv", self.family, self.style)
    }
}

pub fn write_fit_summary(path: &Path, fits: &[ModelFit]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "family", "style", "n", "k", "r2", "adj_r2", "df_resid", "dropped", "excluded",
    ])?;
    for f in fits {
        let r = &f.result;
        w.write_record([
            f.family.clone(),
            f.style.clone(),
            r.n.to_string(),
            r.k.to_string(),
            num(r.r2),
            num(r.adj_r2),
            r.df_resid.to_string(),
            r.dropped_columns.join(";"),
            r.excluded_rows.len().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleSlope {
    pub style: String,
    pub slope: Coefficient,
}

/// Pooled BT ~ style + alignment (additive) and BT ~ style × alignment
/// (interaction) over every (stimulus, style) row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentModels {
    pub baseline_style: String,
    pub additive: RegressionResult,
    pub interaction: RegressionResult,
    pub f_test: FTest,
    pub slopes: Vec<StyleSlope>,
}

pub fn write_slopes(path: &Path, slopes: &[StyleSlope]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["style", "beta", "std_err", "t", "p", "ci_lo", "ci_hi"])?;
    for s in slopes {
        let c = &s.slope;
        w.write_record([
            s.style.clone(),
            num(c.beta),
            num(c.std_err),
            num(c.t),
            num(c.p),
            num(c.ci_lo),
            num(c.ci_hi),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_corr(path: &Path, m: &CorrMatrix) -> Result<()> {
    let mut w = writer(path)?;
    let mut header = vec!["style".to_string()];
    header.extend(m.names.iter().cloned());
    w.write_record(&header)?;
    for (name, row) in m.names.iter().zip(&m.values) {
        let mut rec = vec![name.clone()];
        rec.extend(row.iter().map(|v| num(*v)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_corr(path: &Path) -> Result<CorrMatrix> {
    let mut r = reader(path)?;
    let names: Vec<String> = r.headers()?.iter().skip(1).map(String::from).collect();
    let mut values = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.get(0) != names.get(i).map(String::as_str) {
            bail!(
                "{}: row {} is not `{}`",
                path.display(),
                i + 1,
                names.get(i).map(String::as_str).unwrap_or("?")
            );
        }
        values.push(
            rec.iter()
                .skip(1)
                .map(|s| s.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()?,
        );
    }
    if values.len() != names.len() || values.iter().any(|r| r.len() != names.len()) {
        bail!("{}: correlation matrix is not square", path.display());
    }
    Ok(CorrMatrix { names, values })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionRow {
    pub style: String,
    pub n: usize,
    pub dip: Option<f64>,
    pub dip_p: Option<f64>,
    pub sw_w: Option<f64>,
    pub sw_p: Option<f64>,
}

const DIST_HEADER: [&str; 6] = ["style", "n", "dip", "dip_p", "sw_w", "sw_p"];

pub fn write_distribution(path: &Path, rows: &[DistributionRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(DIST_HEADER)?;
    for d in rows {
        w.write_record([
            d.style.clone(),
            d.n.to_string(),
            opt(d.dip),
            opt(d.dip_p),
            opt(d.sw_w),
            opt(d.sw_p),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_distribution(path: &Path) -> Result<Vec<DistributionRow>> {
    let mut r = reader(path)?;
    check_header(path, &mut r, &DIST_HEADER)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        out.push(DistributionRow {
            style: rec[0].to_string(),
            n: rec[1].parse()?,
            dip: parse_opt(&rec[2])?,
            dip_p: parse_opt(&rec[3])?,
            sw_w: parse_opt(&rec[4])?,
            sw_p: parse_opt(&rec[5])?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

fn walk(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    for entry in fs::read_dir(dir).with_context(|| format!("cannot list {}", dir.display()))? {
        let p = entry?.path();
        if p.is_dir() {
            walk(root, &p, out)?;
        } else {
            out.push(p.strip_prefix(root)?.to_path_buf());
        }
    }
    Ok(())
}

/// Lists every file under `dir` except the manifest itself, sorted by
/// `/`-separated relative path.
pub fn list_files(dir: &Path) -> Result<Vec<ManifestEntry>> {
    let mut files = Vec::new();
    walk(dir, dir, &mut files)?;
    let mut out: Vec<ManifestEntry> = files
        .into_iter()
        .map(|rel| {
            let name = rel
                .components()
                .map(|c| c.as_os_str().to_string_lossy())
                .collect::<Vec<_>>()
                .join("/");
            (name, rel)
        })
        .filter(|(name, _)| name != MANIFEST)
        .map(|(name, rel)| -> Result<ManifestEntry> {
            let bytes = fs::read(dir.join(&rel))?;
            Ok(ManifestEntry {
                path: name,
                bytes: bytes.len() as u64,
                sha256: hex::encode(Sha256::digest(&bytes)),
            })
        })
        .collect::<Result<_>>()?;
    out.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(out)
}

pub fn write_manifest(dir: &Path) -> Result<Vec<ManifestEntry>> {
    let entries = list_files(dir)?;
    write_json(&dir.join(MANIFEST), &entries)?;
    Ok(entries)
}
