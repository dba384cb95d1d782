use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tastekit_core::corpus::{
    aggregate_annotations, content_hash, validate_corpus, write_embeddings, Corpus, FeatureTable, Finding, Manifest,
    StyleKeyword, StyleSet,
};
use tastekit_core::ranking::{bt_descriptives, fit_bradley_terry, RankingError, WinMatrix};
use tastekit_core::sampling::{kmeans, select_representatives, tsne_embed};
use tastekit_core::semantics::{alignment_scores, fetch_captions, fetch_embeddings, HttpProvider, CAPTION_PROMPT};
use tastekit_core::stats::{
    dip_test, fit_table_model, nested_f_test, ols_fit, pearson_corr_matrix, shapiro_wilk, DesignMatrix,
};
use tastekit_vision::{extract_cv_features, load_gray, CV_FEATURE_COLUMNS};

use crate::artifacts::{self as art, AlignmentModels, AlignmentRow, ManifestEntry, ModelFit, StyleSlope};
use crate::config::{derive_seed, PipelineConfig};
use crate::{bigrams, figures, report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Validate,
    Annotations,
    Vision,
    Bt,
    Captions,
    Embed,
    Alignment,
    Regression,
    Report,
    Figures,
    Sample,
}

impl Stage {
    /// Execution order of `run`. Sampling is standalone.
    pub const PIPELINE: [Stage; 10] = [
        Stage::Validate,
        Stage::Annotations,
        Stage::Vision,
        Stage::Bt,
        Stage::Captions,
        Stage::Embed,
        Stage::Alignment,
        Stage::Regression,
        Stage::Report,
        Stage::Figures,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Validate => "validate",
            Stage::Annotations => "annotations",
            Stage::Vision => "vision",
            Stage::Bt => "bt",
            Stage::Captions => "captions",
            Stage::Embed => "embed",
            Stage::Alignment => "alignment",
            Stage::Regression => "regression",
            Stage::Report => "report",
            Stage::Figures => "figures",
            Stage::Sample => "sample",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = anyhow::Error;

    /// Accepts stage names and the matching subcommand names.
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "validate" => Stage::Validate,
            "annotations" => Stage::Annotations,
            "vision" | "extract" => Stage::Vision,
            "bt" | "fit-bt" => Stage::Bt,
            "captions" => Stage::Captions,
            "embed" => Stage::Embed,
            "alignment" | "align" => Stage::Alignment,
            "regression" | "regress" => Stage::Regression,
            "report" => Stage::Report,
            "figures" => Stage::Figures,
            "sample" => Stage::Sample,
            _ => bail!("unknown stage `{s}`"),
        })
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{stage} stage failed: {cause:#}")]
pub struct PipelineError {
    pub stage: Stage,
    pub cause: anyhow::Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub run_dir: PathBuf,
    pub stages: Vec<Stage>,
    pub files: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BtFitInfo {
    pub style: String,
    pub items: usize,
    pub comparisons: u64,
    pub iterations: usize,
    pub converged: bool,
    pub max_abs_update_at_exit: f64,
    pub max_abs_gradient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingSummary {
    pub n: usize,
    pub k: usize,
    pub kl: f64,
    pub inertia: f64,
    pub kmeans_iterations: usize,
    pub selected: Vec<String>,
}

/// One pipeline execution over a seed-stamped run directory. Every stage
/// reads its inputs from files written by earlier stages, so any stage can
/// be rerun alone on persisted intermediates.
pub struct Run {
    pub config: PipelineConfig,
    pub dir: PathBuf,
    corpus: Option<Corpus>,
}

pub fn run_pipeline(config: &PipelineConfig) -> Result<RunReport, PipelineError> {
    Run::new(config.clone()).run(None)
}

fn family_stage(family: &str) -> &'static str {
    match family {
        "designer" => "annotations",
        "cv" => "vision",
        _ => "alignment",
    }
}

fn select_columns(table: FeatureTable, columns: Option<&[String]>) -> Result<FeatureTable> {
    let Some(columns) = columns else {
        return Ok(table);
    };
    let idx = columns
        .iter()
        .map(|c| table.column_index(c).ok_or_else(|| anyhow!("no feature column `{c}`")))
        .collect::<Result<Vec<_>>>()?;
    let mut out = FeatureTable::new(columns.to_vec());
    for (id, row) in table.rows {
        out.rows.insert(id, idx.iter().map(|&j| row[j]).collect());
    }
    Ok(out)
}

fn write_manifest_file(path: &Path, m: &Manifest) -> Result<()> {
    art::write_json(path, m)
}

impl Run {
    pub fn new(config: PipelineConfig) -> Self {
        let dir = config.run_dir();
        Self {
            config,
            dir,
            corpus: None,
        }
    }

    fn corpus(&mut self) -> Result<&Corpus> {
        if self.corpus.is_none() {
            let c = Corpus::load(&self.config.corpus)
                .with_context(|| format!("cannot load corpus {}", self.config.corpus.display()))?;
            for (kind, id) in &c.orphans {
                warn!("{kind} entry `{id}` has no matching stimulus");
            }
            self.corpus = Some(c);
        }
        Ok(self.corpus.as_ref().expect("loaded above"))
    }

    /// Styles under analysis: the config's list, or every corpus style.
    fn styles(&mut self) -> Result<StyleSet> {
        let wanted = self.config.styles.clone();
        let corpus = self.corpus()?;
        match wanted {
            None => Ok(corpus.styles.clone()),
            Some(names) => {
                for n in &names {
                    corpus
                        .styles
                        .keyword(n)
                        .with_context(|| format!("style `{n}` is not in the corpus"))?;
                }
                Ok(StyleSet::new(names.iter().map(String::as_str))?)
            }
        }
    }

    fn path(&self, file: &str) -> PathBuf {
        self.dir.join(file)
    }

    /// Runs the pipeline stages in order, stopping after `until` when
    /// given. Provider stages run only when their endpoint is configured.
    pub fn run(&mut self, until: Option<Stage>) -> Result<RunReport, PipelineError> {
        let mut done = Vec::new();
        for stage in Stage::PIPELINE {
            let skip = match stage {
                Stage::Captions => self.config.providers.captions.is_none(),
                Stage::Embed => self.config.providers.embeddings.is_none(),
                Stage::Figures => !self.config.figures,
                _ => false,
            };
            if !skip {
                self.stage(stage)?;
                done.push(stage);
            }
            if until == Some(stage) {
                break;
            }
        }
        let files = art::list_files(&self.dir).map_err(|cause| PipelineError {
            stage: *done.last().unwrap_or(&Stage::Validate),
            cause,
        })?;
        Ok(RunReport {
            run_dir: self.dir.clone(),
            stages: done,
            files,
        })
    }

    /// Runs one stage and refreshes the run manifest.
    pub fn stage(&mut self, stage: Stage) -> Result<(), PipelineError> {
        info!("stage {stage}");
        let result = std::fs::create_dir_all(&self.dir)
            .with_context(|| format!("cannot create {}", self.dir.display()))
            .and_then(|_| match stage {
                Stage::Validate => self.validate(),
                Stage::Annotations => self.annotations(),
                Stage::Vision => self.vision(),
                Stage::Bt => self.bt(),
                Stage::Captions => self.captions(),
                Stage::Embed => self.embed(),
                Stage::Alignment => self.alignment(),
                Stage::Regression => self.regression(),
                Stage::Report => self.report(),
                Stage::Figures => self.figures(),
                Stage::Sample => self.sample().map(|_| ()),
            })
            .and_then(|_| art::write_manifest(&self.dir).map(|_| ()));
        result.map_err(|cause| {
            // Completed outputs stay listed even when this stage fails.
            let _ = art::write_manifest(&self.dir);
            PipelineError { stage, cause }
        })
    }

    fn validate(&mut self) -> Result<()> {
        let report = validate_corpus(self.corpus()?);
        art::write_json(&self.path(art::VALIDATION), &report)?;
        let mut blocking = Vec::new();
        for f in &report.issues {
            match f {
                Finding::CaptionLength { id, words } => {
                    warn!("caption of `{id}` has {words} words")
                }
                Finding::UnknownFeature { feature } => warn!("unregistered feature `{feature}`"),
                other => blocking.push(other),
            }
        }
        if let Some(first) = blocking.first() {
            bail!(
                "{} blocking finding(s), first: {}",
                blocking.len(),
                serde_json::to_string(first)?
            );
        }
        Ok(())
    }

    fn annotations(&mut self) -> Result<()> {
        if !self.config.models.designer.enabled {
            return Ok(());
        }
        let corpus = self.corpus()?;
        if corpus.annotations.is_empty() {
            bail!("corpus has no annotations; set models.designer.enabled = false to skip");
        }
        let table = aggregate_annotations(&corpus.annotations)?.to_feature_table();
        table.write_csv(&self.path(art::DESIGNER_FEATURES))?;
        Ok(())
    }

    fn vision(&mut self) -> Result<()> {
        if !self.config.models.cv.enabled {
            return Ok(());
        }
        let cfg = self.config.vision_config();
        let corpus = self.corpus()?;
        let rows: Vec<Result<(String, Vec<Option<f64>>)>> = corpus
            .stimuli
            .par_iter()
            .map(|s| {
                let img = load_gray(&s.image_path)
                    .with_context(|| format!("stimulus `{}`: cannot load {}", s.id, s.image_path.display()))?;
                let f = extract_cv_features(&img, &cfg).with_context(|| format!("stimulus `{}`", s.id))?;
                Ok((s.id.clone(), f.values().to_vec()))
            })
            .collect();
        let mut table = FeatureTable::new(CV_FEATURE_COLUMNS.iter().map(|c| c.to_string()).collect());
        for r in rows {
            let (id, values) = r?;
            table.rows.insert(id, values);
        }
        table.write_csv(&self.path(art::CV_FEATURES))?;
        Ok(())
    }

    fn bt(&mut self) -> Result<()> {
        let styles: Vec<StyleKeyword> = self.styles()?.iter().cloned().collect();
        let opts = self.config.bt;
        let corpus = self.corpus()?;
        let ids = corpus.stimulus_ids();
        let fits: Vec<Result<_>> = styles
            .par_iter()
            .map(|style| {
                let m = WinMatrix::for_style(&corpus.judgments, style, &ids)?;
                let r = fit_bradley_terry(&m, &opts).map_err(|e| match e {
                    RankingError::NotConverged(r) => anyhow!(
                        "style `{style}`: not converged after {} iterations (max update {:.3e}, max gradient {:.3e})",
                        r.iterations,
                        r.max_abs_update_at_exit,
                        r.max_abs_gradient
                    ),
                    other => anyhow!("style `{style}`: {other}"),
                })?;
                Ok((m.total(), r))
            })
            .collect();
        let mut scores = art::ScoreTable::new();
        let mut info = Vec::new();
        let mut desc = BTreeMap::new();
        for (style, fit) in styles.iter().zip(fits) {
            let (comparisons, r) = fit?;
            info.push(BtFitInfo {
                style: style.to_string(),
                items: r.ids.len(),
                comparisons,
                iterations: r.iterations,
                converged: r.converged,
                max_abs_update_at_exit: r.max_abs_update_at_exit,
                max_abs_gradient: r.max_abs_gradient,
            });
            desc.insert(style.to_string(), bt_descriptives(&r));
            scores.insert(style.to_string(), r.score_map());
        }
        art::write_scores(&self.path(art::BT_SCORES), "bt_score", &ids, &scores)?;
        art::write_json(&self.path(art::BT_FITS), &info)?;
        art::write_descriptives(&self.path(art::BT_DESCRIPTIVES), &desc)?;
        Ok(())
    }

    fn corpus_dir(&self) -> PathBuf {
        self.config.corpus.parent().unwrap_or(Path::new(".")).to_path_buf()
    }

    fn reload_corpus(&mut self) {
        self.corpus = None;
    }

    fn captions(&mut self) -> Result<()> {
        let endpoint = self
            .config
            .providers
            .captions
            .clone()
            .ok_or_else(|| anyhow!("no caption provider configured (providers.captions or --provider-captions)"))?;
        let manifest_path = self.config.corpus.clone();
        let mut manifest = Manifest::load(&manifest_path)?;
        let dir = self.corpus_dir();
        let store_rel = manifest.captions.clone().unwrap_or_else(|| "captions.jsonl".into());
        let store = dir.join(&store_rel);
        let opts = self.config.providers.fetch;
        let provider = HttpProvider::from_env(&endpoint);
        let stimuli = self.corpus()?.stimuli.clone();
        let report = fetch_captions(&provider, &stimuli, CAPTION_PROMPT, &store, &opts)?;
        info!(
            "captions: {} fetched, {} already stored",
            report.fetched, report.skipped
        );
        if manifest.captions.is_none() && store.exists() {
            manifest.captions = Some(store_rel);
            write_manifest_file(&manifest_path, &manifest)?;
        }
        self.reload_corpus();
        if let Some((id, e)) = report.failures.first() {
            bail!("{} caption request(s) failed, first `{id}`: {e}", report.failures.len());
        }
        Ok(())
    }

    fn embed(&mut self) -> Result<()> {
        let endpoint = self.config.providers.embeddings.clone().ok_or_else(|| {
            anyhow!("no embedding provider configured (providers.embeddings or --provider-embeddings)")
        })?;
        let manifest_path = self.config.corpus.clone();
        let mut manifest = Manifest::load(&manifest_path)?;
        let dir = self.corpus_dir();
        let opts = self.config.providers.fetch;
        let corpus = self.corpus()?.clone();
        let captions: Vec<(String, String)> = corpus
            .stimuli
            .iter()
            .filter_map(|s| s.caption.clone().map(|c| (s.id.clone(), c)))
            .collect();
        if captions.len() < corpus.stimuli.len() {
            warn!("{} stimuli have no caption", corpus.stimuli.len() - captions.len());
        }
        let mut texts: Vec<String> = captions.iter().map(|(_, c)| c.clone()).collect();
        texts.extend(corpus.responses.iter().map(|r| r.text.clone()));
        let cache = dir.join("embedding_cache.json");
        let provider = HttpProvider::from_env(&endpoint);
        let report = fetch_embeddings(&provider, &texts, corpus.embedding_dim, &cache, &opts)?;
        info!("embeddings: {} fetched, {} cached", report.fetched, report.cached);
        let vectors = tastekit_core::corpus::load_embeddings(&cache, corpus.embedding_dim)?;
        let get = |text: &str| {
            vectors.get(&content_hash(text)).cloned().ok_or_else(|| {
                anyhow!(
                    "no embedding returned for text `{}`",
                    text.chars().take(40).collect::<String>()
                )
            })
        };
        let mut by_id = BTreeMap::new();
        for (id, c) in &captions {
            by_id.insert(id.clone(), get(c)?);
        }
        let mut by_hash = BTreeMap::new();
        for r in &corpus.responses {
            by_hash.insert(content_hash(&r.text), get(&r.text)?);
        }
        if !by_id.is_empty() {
            let rel = manifest
                .caption_embeddings
                .clone()
                .unwrap_or_else(|| "caption_embeddings.json".into());
            write_embeddings(&dir.join(&rel), &by_id)?;
            manifest.caption_embeddings = Some(rel);
        }
        if !by_hash.is_empty() {
            let rel = manifest
                .response_embeddings
                .clone()
                .unwrap_or_else(|| "response_embeddings.json".into());
            write_embeddings(&dir.join(&rel), &by_hash)?;
            manifest.response_embeddings = Some(rel);
        }
        write_manifest_file(&manifest_path, &manifest)?;
        self.reload_corpus();
        Ok(())
    }

    fn alignment(&mut self) -> Result<()> {
        if !self.config.models.alignment {
            return Ok(());
        }
        let styles = self.styles()?;
        let corpus = self.corpus()?;
        let ids = corpus.stimulus_ids();
        let mut captions = BTreeMap::new();
        for s in &corpus.stimuli {
            let e = s.embedding.clone().ok_or_else(|| {
                anyhow!(
                    "stimulus `{}` has no caption embedding; run `embed` with a provider",
                    s.id
                )
            })?;
            captions.insert(s.id.clone(), e);
        }
        let responses: Vec<_> = corpus
            .responses
            .iter()
            .filter(|r| styles.contains(&r.style))
            .cloned()
            .collect();
        if responses.is_empty() {
            bail!("corpus has no responses for the analysed styles");
        }
        let scores = alignment_scores(&ids, &captions, &responses, &styles)?;
        let rows: Vec<AlignmentRow> = scores
            .into_iter()
            .map(|a| AlignmentRow {
                stimulus_id: a.stimulus_id,
                style: a.style.to_string(),
                mean_cosine: a.mean_cosine,
                n_responses: a.n_responses,
            })
            .collect();
        art::write_alignment(&self.path(art::ALIGNMENT), &rows)?;
        Ok(())
    }

    fn family_tables(&mut self) -> Result<Vec<(String, Option<FeatureTable>)>> {
        let models = self.config.models.clone();
        let mut out = Vec::new();
        if models.designer.enabled {
            let p = art::require(&self.dir, art::DESIGNER_FEATURES, "annotations")?;
            let t = select_columns(FeatureTable::read_csv(&p)?, models.designer.columns.as_deref())
                .context("designer model")?;
            out.push(("designer".to_string(), Some(t)));
        }
        if models.cv.enabled {
            let p = art::require(&self.dir, art::CV_FEATURES, "vision")?;
            let t = select_columns(FeatureTable::read_csv(&p)?, models.cv.columns.as_deref()).context("cv model")?;
            out.push(("cv".to_string(), Some(t)));
        }
        if models.alignment {
            art::require(&self.dir, art::ALIGNMENT, "alignment")?;
            out.push(("alignment".to_string(), None));
        }
        Ok(out)
    }

    fn regression(&mut self) -> Result<()> {
        let bt = art::read_scores(&art::require(&self.dir, art::BT_SCORES, "bt")?, "bt_score")?;
        let styles: Vec<StyleKeyword> = self.styles()?.iter().cloned().collect();
        let ids = self.corpus()?.stimulus_ids();
        let families = self.family_tables()?;
        let alignment = if self.config.models.alignment {
            art::read_alignment(&self.path(art::ALIGNMENT))?
        } else {
            Vec::new()
        };
        let score = |style: &StyleKeyword| -> Result<&BTreeMap<String, f64>> {
            bt.get(style.as_str())
                .ok_or_else(|| anyhow!("no BT scores for style `{style}`"))
        };

        let mut fits = Vec::new();
        for (family, table) in &families {
            for style in &styles {
                let table = match table {
                    Some(t) => t.clone(),
                    None => {
                        let mut t = FeatureTable::new(vec!["alignment".into()]);
                        for a in alignment.iter().filter(|a| a.style == style.as_str()) {
                            t.rows.insert(a.stimulus_id.clone(), vec![Some(a.mean_cosine)]);
                        }
                        t
                    }
                };
                let result = fit_table_model(Some(style), &table, &ids, score(style)?)
                    .map_err(|e| anyhow!("{family} model for `{style}`: {e}"))?;
                if !result.excluded_rows.is_empty() {
                    warn!(
                        "{family}/{style}: {} rows excluded for missing values",
                        result.excluded_rows.len()
                    );
                }
                fits.push(ModelFit {
                    family: family.clone(),
                    style: style.to_string(),
                    result,
                });
            }
        }
        let reg_dir = self.path(art::REGRESSION_DIR);
        if reg_dir.exists() {
            std::fs::remove_dir_all(&reg_dir)?;
        }
        std::fs::create_dir_all(&reg_dir)?;
        for f in &fits {
            art::write_coefficients(&reg_dir.join(f.file_name()), &f.result.coefficients)?;
        }
        art::write_fit_summary(&reg_dir.join("summary.csv"), &fits)?;
        art::write_json(&self.path(art::REGRESSIONS), &fits)?;

        let models_path = self.path(art::ALIGNMENT_MODELS);
        let slopes_path = self.path(art::ALIGNMENT_SLOPES);
        if self.config.models.alignment {
            let m = alignment_models(&styles, &ids, &bt, &alignment)?;
            art::write_json(&models_path, &m)?;
            art::write_slopes(&slopes_path, &m.slopes)?;
        } else {
            for p in [&models_path, &slopes_path] {
                if p.exists() {
                    std::fs::remove_file(p)?;
                }
            }
        }

        let columns: Vec<(String, Vec<f64>)> = styles
            .iter()
            .map(|s| {
                let m = score(s)?;
                let v = ids
                    .iter()
                    .map(|id| {
                        m.get(id)
                            .copied()
                            .ok_or_else(|| anyhow!("no BT score for `{id}` under `{s}`"))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok((s.to_string(), v))
            })
            .collect::<Result<_>>()?;
        if columns.len() >= 2 {
            art::write_corr(&self.path(art::CORRELATION), &pearson_corr_matrix(&columns)?)?;
        } else {
            warn!("one style only; no correlation matrix");
        }

        let tests = self.config.tests;
        let seed = self.config.seed;
        let rows = columns
            .iter()
            .map(|(style, v)| -> Result<art::DistributionRow> {
                let dip = if tests.dip && v.len() >= 4 {
                    Some(dip_test(v, tests.dip_reps, derive_seed(seed, &format!("dip:{style}")))?)
                } else {
                    None
                };
                let sw = if tests.shapiro && v.len() >= 3 {
                    Some(shapiro_wilk(v)?)
                } else {
                    None
                };
                Ok(art::DistributionRow {
                    style: style.clone(),
                    n: v.len(),
                    dip: dip.as_ref().map(|d| d.statistic),
                    dip_p: dip.as_ref().map(|d| d.p_value),
                    sw_w: sw.map(|s| s.w),
                    sw_p: sw.map(|s| s.p),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        art::write_distribution(&self.path(art::DISTRIBUTION), &rows)?;
        Ok(())
    }

    fn report(&mut self) -> Result<()> {
        let alpha = self.config.report.alpha;
        let top_n = self.config.report.top_n;
        let seed = self.config.seed;
        let dir = self.dir.clone();
        let styles = self.styles()?;
        let corpus = self.corpus()?;
        let ids = corpus.stimulus_ids();
        let inputs = report::ReportInputs {
            validation: art::read_json(&art::require(&dir, art::VALIDATION, "validate")?)?,
            bt: art::read_scores(&art::require(&dir, art::BT_SCORES, "bt")?, "bt_score")?,
            fits: art::read_json(&art::require(&dir, art::REGRESSIONS, "regression")?)?,
            alignment: match dir.join(art::ALIGNMENT_MODELS) {
                p if p.is_file() => Some(art::read_json(&p)?),
                _ => None,
            },
            distribution: art::read_distribution(&art::require(&dir, art::DISTRIBUTION, "regression")?)?,
        };
        let summary = report::summarize(&inputs, &ids, seed, alpha, top_n);
        art::write_json(&dir.join(art::REPORT_JSON), &summary)?;
        std::fs::write(dir.join(art::REPORT_TXT), report::render_text(&summary))?;

        let mut tables = BTreeMap::new();
        for style in styles.iter() {
            match bigrams::bigram_frequencies(&corpus.responses, style) {
                Ok(t) => {
                    tables.insert(style.to_string(), t);
                }
                Err(e) => warn!("{e}"),
            }
        }
        let path = dir.join(art::BIGRAMS);
        if tables.is_empty() {
            if path.exists() {
                std::fs::remove_file(&path)?;
            }
        } else {
            bigrams::write_bigrams(&path, &tables)?;
        }
        Ok(())
    }

    fn figures(&mut self) -> Result<()> {
        let alpha = self.config.report.alpha;
        let ids = self.corpus()?.stimulus_ids();
        let bt = art::read_scores(&art::require(&self.dir, art::BT_SCORES, "bt")?, "bt_score")?;
        let fits: Vec<ModelFit> = art::read_json(&art::require(&self.dir, art::REGRESSIONS, "regression")?)?;
        let fig_dir = self.path(art::FIGURES_DIR);
        if fig_dir.exists() {
            std::fs::remove_dir_all(&fig_dir)?;
        }
        std::fs::create_dir_all(&fig_dir)?;
        for f in &fits {
            let svg = figures::forest_plot(
                &format!("{} features: {}", f.family, f.style),
                &f.result.coefficients,
                alpha,
            );
            std::fs::write(fig_dir.join(format!("forest_{}_{}.svg", f.family, f.style)), svg)?;
        }
        std::fs::write(fig_dir.join("bt_distributions.svg"), figures::box_plot(&bt))?;
        let corr_path = self.path(art::CORRELATION);
        if corr_path.is_file() {
            std::fs::write(
                fig_dir.join("bt_correlation.svg"),
                figures::heatmap(&art::read_corr(&corr_path)?),
            )?;
        }
        if self.config.models.alignment {
            let rows = art::read_alignment(&art::require(&self.dir, art::ALIGNMENT, "alignment")?)?;
            let mut panels = Vec::new();
            for (style, scores) in &bt {
                let fit = fits
                    .iter()
                    .find(|f| f.family == "alignment" && &f.style == style)
                    .ok_or_else(|| art::MissingStage {
                        file: format!("alignment fit for `{style}`"),
                        stage: family_stage("alignment"),
                    })?;
                let points: Vec<(f64, f64)> = ids
                    .iter()
                    .filter_map(|id| {
                        let a = rows.iter().find(|r| &r.stimulus_id == id && &r.style == style)?;
                        Some((a.mean_cosine, *scores.get(id)?))
                    })
                    .collect();
                let c = |n: &str| fit.result.coefficient(n).map(|c| c.beta).unwrap_or(0.0);
                panels.push(figures::ScatterPanel {
                    style: style.clone(),
                    points,
                    intercept: c(tastekit_core::stats::INTERCEPT),
                    slope: c("alignment"),
                });
            }
            std::fs::write(fig_dir.join("alignment_scatter.svg"), figures::scatter(&panels))?;
        }
        Ok(())
    }

    /// t-SNE → k-means → representatives over the configured vectors, or
    /// the corpus caption embeddings. Writes under `sampling/`.
    pub fn sample(&mut self) -> Result<SamplingSummary> {
        let vectors: BTreeMap<String, Vec<f64>> = match self.config.sampling.vectors.clone() {
            Some(p) => art::read_json(&p)?,
            None => {
                let corpus = self.corpus()?;
                corpus
                    .stimuli
                    .iter()
                    .map(|s| {
                        s.embedding
                            .clone()
                            .map(|e| (s.id.clone(), e))
                            .ok_or_else(|| anyhow!("stimulus `{}` has no embedding to sample from", s.id))
                    })
                    .collect::<Result<_>>()?
            }
        };
        let s = &self.config.sampling;
        let tsne = tsne_embed(&vectors, &self.config.tsne_options())?;
        let positions: Vec<[f64; 2]> = tsne.points.iter().map(|p| p.position).collect();
        let km = kmeans(&positions, s.k, &self.config.kmeans_options())?;
        let selected = select_representatives(&tsne.points, &km, s.m_total, s.mode)?;
        let dir = self.path(art::SAMPLING_DIR);
        std::fs::create_dir_all(&dir)?;
        let mut w = csv::Writer::from_path(dir.join("tsne.csv"))?;
        w.write_record(["id", "x", "y", "cluster"])?;
        for (p, c) in tsne.points.iter().zip(&km.assignments) {
            w.write_record([
                p.id.clone(),
                p.position[0].to_string(),
                p.position[1].to_string(),
                c.to_string(),
            ])?;
        }
        w.flush()?;
        let cluster_of: BTreeMap<&str, usize> = tsne
            .points
            .iter()
            .zip(&km.assignments)
            .map(|(p, c)| (p.id.as_str(), *c))
            .collect();
        let mut w = csv::Writer::from_path(dir.join("selected.csv"))?;
        w.write_record(["rank", "id", "cluster"])?;
        for (i, id) in selected.iter().enumerate() {
            w.write_record([(i + 1).to_string(), id.clone(), cluster_of[id.as_str()].to_string()])?;
        }
        w.flush()?;
        let summary = SamplingSummary {
            n: vectors.len(),
            k: s.k,
            kl: tsne.kl,
            inertia: km.inertia,
            kmeans_iterations: km.iterations,
            selected,
        };
        art::write_json(&dir.join("summary.json"), &summary)?;
        Ok(summary)
    }
}

fn style_dummy(style: &str) -> String {
    format!("style[{style}]")
}

fn interaction_term(style: &str) -> String {
    format!("alignment:style[{style}]")
}

/// Pooled additive and interaction models over (stimulus, style) rows, the
/// nested F-test between them, and per-style slopes from the interaction
/// model. The first style is the baseline level.
pub fn alignment_models(
    styles: &[StyleKeyword],
    ids: &[String],
    bt: &art::ScoreTable,
    alignment: &[AlignmentRow],
) -> Result<AlignmentModels> {
    let baseline = styles.first().ok_or_else(|| anyhow!("no styles"))?.to_string();
    let others: Vec<&str> = styles[1..].iter().map(|s| s.as_str()).collect();
    let lookup: BTreeMap<(&str, &str), f64> = alignment
        .iter()
        .map(|a| ((a.stimulus_id.as_str(), a.style.as_str()), a.mean_cosine))
        .collect();
    let mut row_ids = Vec::new();
    let mut add_rows = Vec::new();
    let mut int_rows = Vec::new();
    let mut y = Vec::new();
    for style in styles {
        let s = style.as_str();
        for id in ids {
            let (Some(a), Some(score)) = (lookup.get(&(id.as_str(), s)), bt.get(s).and_then(|m| m.get(id))) else {
                continue;
            };
            let dummies: Vec<f64> = others.iter().map(|o| f64::from(u8::from(*o == s))).collect();
            let mut add = dummies.clone();
            add.push(*a);
            let mut int = add.clone();
            int.extend(dummies.iter().map(|d| d * a));
            row_ids.push(format!("{id}|{s}"));
            add_rows.push(add);
            int_rows.push(int);
            y.push(*score);
        }
    }
    let mut add_cols: Vec<String> = others.iter().map(|o| style_dummy(o)).collect();
    add_cols.push("alignment".into());
    let mut int_cols = add_cols.clone();
    int_cols.extend(others.iter().map(|o| interaction_term(o)));
    let additive = ols_fit(&DesignMatrix::new(row_ids.clone(), add_cols, &add_rows, true)?, &y)
        .context("additive alignment model")?;
    let interaction =
        ols_fit(&DesignMatrix::new(row_ids, int_cols, &int_rows, true)?, &y).context("interaction alignment model")?;
    let f_test = nested_f_test(&additive, &interaction)?;
    let mut slopes = Vec::new();
    for style in styles {
        let s = style.as_str();
        let term = interaction_term(s);
        let weights: Vec<(&str, f64)> = if s == baseline {
            vec![("alignment", 1.0)]
        } else {
            vec![("alignment", 1.0), (term.as_str(), 1.0)]
        };
        let slope = interaction
            .linear_combination(s, &weights)
            .ok_or_else(|| anyhow!("slope terms for `{s}` missing from the interaction model"))?;
        slopes.push(StyleSlope {
            style: s.to_string(),
            slope,
        });
    }
    Ok(AlignmentModels {
        baseline_style: baseline,
        additive,
        interaction,
        f_test,
        slopes,
    })
}
