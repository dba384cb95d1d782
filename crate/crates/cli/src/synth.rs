//! Synthetic corpus with planted Bradley-Terry strengths.
//!
//! Each wheel gets latent design attributes. Annotators report them with
//! flip noise, captions describe them, and per-style strengths are a
//! linear function of the attributes plus a planted slope on the
//! standardized caption↔response alignment. Judgments are then simulated
//! from those strengths.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tastekit_core::corpus::{
    AnnotationRecord, AnnotationValue, Corpus, Judgment, ResponseText, Side, SplitType, Stimulus, StyleSet, ValueKind,
    DEFAULT_STYLES, FEATURE_REGISTRY,
};
use tastekit_core::semantics::{alignment_scores, HashEmbedder};
use tastekit_vision::fixtures::{wheel, WheelSpec};
use tastekit_vision::GrayImage;

use crate::config::{derive_seed, PipelineConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub stimuli: usize,
    pub styles: Vec<String>,
    pub annotators: usize,
    pub judges: usize,
    pub comparisons_per_pair: u32,
    pub responses_per_style: usize,
    pub image_size: u32,
    pub embedding_dim: usize,
    /// Probability that an annotator misreports a presence feature.
    pub flip_rate: f64,
    /// Standard deviation of the per-style designer-feature effects.
    pub effect_sd: f64,
    pub noise_sd: f64,
    /// Planted magnitude of the alignment slope, per standard deviation of
    /// alignment.
    pub slope: f64,
    pub positive_styles: Vec<String>,
    pub negative_styles: Vec<String>,
    pub seed: u64,
    /// Written into the generated `config.toml`.
    pub designer_columns: Option<Vec<String>>,
    pub cv_columns: Option<Vec<String>>,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            stimuli: 80,
            styles: DEFAULT_STYLES.iter().map(|s| s.to_string()).collect(),
            annotators: 3,
            judges: 100,
            comparisons_per_pair: 20,
            responses_per_style: 20,
            image_size: 128,
            embedding_dim: 384,
            flip_rate: 0.1,
            effect_sd: 0.15,
            noise_sd: 0.2,
            slope: 0.6,
            positive_styles: vec!["aerodynamic".into(), "futuristic".into(), "sporty".into()],
            negative_styles: vec!["classic".into()],
            seed: 0,
            designer_columns: None,
            cv_columns: None,
        }
    }
}

impl SynthSpec {
    /// 12 wheels, 3 styles, 3 annotators; small enough for a full run in
    /// seconds.
    pub fn mini() -> Self {
        Self {
            stimuli: 12,
            styles: vec!["aerodynamic".into(), "classic".into(), "sporty".into()],
            judges: 30,
            responses_per_style: 6,
            embedding_dim: 64,
            designer_columns: Some(vec!["directional".into(), "hollowed".into(), "spokes".into()]),
            cv_columns: Some(vec!["value".into(), "keypoints".into(), "glcm.contrast".into()]),
            ..Self::default()
        }
    }

    pub fn planted_slope(&self, style: &str) -> f64 {
        if self.positive_styles.iter().any(|s| s == style) {
            self.slope
        } else if self.negative_styles.iter().any(|s| s == style) {
            -self.slope
        } else {
            0.0
        }
    }
}

/// Ground truth behind a generated wheel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentWheel {
    pub id: String,
    pub spokes: u32,
    pub split: SplitType,
    pub presence: BTreeMap<String, bool>,
    pub image: WheelSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthTruth {
    pub wheels: Vec<LatentWheel>,
    /// style → planted slope per standard deviation of alignment.
    pub slopes: BTreeMap<String, f64>,
    /// style → feature → effect on the centred feature.
    pub designer_effects: BTreeMap<String, BTreeMap<String, f64>>,
    /// style → stimulus id → planted BT strength (mean zero).
    pub lambda: BTreeMap<String, BTreeMap<String, f64>>,
}

pub struct Synthetic {
    pub spec: SynthSpec,
    pub corpus: Corpus,
    pub truth: SynthTruth,
}

fn presence_features() -> Vec<&'static str> {
    FEATURE_REGISTRY
        .iter()
        .filter(|(_, k)| *k == ValueKind::Presence)
        .map(|(n, _)| *n)
        .collect()
}

fn rng_for(seed: u64, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, label))
}

fn caption_for(w: &LatentWheel, rng: &mut ChaCha8Rng) -> String {
    let split = match w.split {
        SplitType::None => "solid",
        SplitType::Single => "single",
        SplitType::Split => "split",
    };
    let sweep = if w.presence["directional"] {
        "swept in one rotational direction"
    } else {
        "straight and mirror symmetric"
    };
    let pockets = if w.presence["hollowed"] {
        "deep hollowed pockets between them"
    } else {
        "flat faces between them"
    };
    let finish = ["gloss black", "brushed silver", "matte graphite", "polished chrome"]
        .choose(rng)
        .unwrap();
    let mood = ["restrained", "bold", "technical", "understated"].choose(rng).unwrap();
    format!(
        "This alloy wheel has {} {split} spokes running from a compact centre hub out to the rim. \
         The spokes are {sweep}, with {pockets}. The finish is {finish}, and the overall \
         impression is {mood} with a clean outer lip.",
        w.spokes
    )
}

fn response_for(style: &str, rng: &mut ChaCha8Rng) -> String {
    let pick = |rng: &mut ChaCha8Rng, xs: &[&'static str]| *xs.choose(rng).unwrap();
    if style == "aerodynamic" {
        let adj = pick(rng, &["smooth", "clean", "channelled", "directed", "quiet"]);
        let link = pick(rng, &["past", "around", "along", "across"]);
        let noun = pick(
            rng,
            &[
                "thin blades",
                "closed faces",
                "curved spokes",
                "flush covers",
                "narrow gaps",
            ],
        );
        return format!("{adj} air flow {link} {noun}");
    }
    let (adjs, nouns): (&[&str], &[&str]) = match style {
        "classic" => (
            &["simple", "timeless", "traditional", "chrome"],
            &["spokes", "mesh", "lip", "design"],
        ),
        "dynamic" => (
            &["angled", "twisting", "moving", "asymmetric"],
            &["lines", "spokes", "shapes", "cuts"],
        ),
        "elegant" => (
            &["fine", "slender", "refined", "polished"],
            &["spokes", "details", "finish", "curves"],
        ),
        "futuristic" => (
            &["sharp", "unusual", "geometric", "layered"],
            &["shapes", "blades", "cutouts", "surfaces"],
        ),
        "luxury" => (
            &["polished", "intricate", "many", "deep"],
            &["spokes", "finish", "details", "chrome"],
        ),
        "rugged" => (
            &["thick", "heavy", "chunky", "dark"],
            &["spokes", "bolts", "rim", "blocks"],
        ),
        "sleek" => (
            &["thin", "smooth", "minimal", "flush"],
            &["spokes", "surfaces", "profile", "lines"],
        ),
        "sporty" => (
            &["open", "thin", "aggressive", "split"],
            &["spokes", "design", "brakes", "rim"],
        ),
        _ => (
            &["distinct", "visible", "strong", "clear"],
            &["shapes", "spokes", "details", "lines"],
        ),
    };
    format!(
        "{} {} and {} {}",
        pick(rng, adjs),
        pick(rng, nouns),
        pick(rng, adjs),
        pick(rng, nouns)
    )
}

fn annotate(w: &LatentWheel, annotator: &str, flip: f64, rng: &mut ChaCha8Rng) -> Vec<AnnotationRecord> {
    let mut out = Vec::new();
    let rec = |feature: &str, value| AnnotationRecord {
        annotator_id: annotator.to_string(),
        stimulus_id: w.id.clone(),
        feature_name: feature.to_string(),
        value,
    };
    for (name, kind) in FEATURE_REGISTRY {
        let value = match kind {
            ValueKind::Presence => {
                let truth = w.presence[name];
                AnnotationValue::Presence(if rng.random_bool(flip) { !truth } else { truth })
            }
            ValueKind::SpokeCount => {
                let off = if rng.random_bool(flip) {
                    *[-1i32, 1].choose(rng).unwrap()
                } else {
                    0
                };
                AnnotationValue::SpokeCount((w.spokes as i32 + off).max(3) as u32)
            }
            ValueKind::Split => AnnotationValue::Split(if rng.random_bool(flip) {
                *SplitType::ALL.choose(rng).unwrap()
            } else {
                w.split
            }),
        };
        out.push(rec(name, value));
    }
    out
}

fn standardize(v: &[f64]) -> Vec<f64> {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let sd = (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    v.iter().map(|x| if sd > 0.0 { (x - m) / sd } else { 0.0 }).collect()
}

/// Draws the corpus in memory. Image paths are `images/<id>.png`,
/// relative; [`write`] makes them absolute and renders them.
pub fn generate(spec: &SynthSpec) -> Result<Synthetic> {
    anyhow::ensure!(spec.stimuli >= 3, "need at least 3 stimuli");
    anyhow::ensure!(spec.comparisons_per_pair >= 1, "comparisons_per_pair must be positive");
    let styles = StyleSet::new(spec.styles.iter().map(String::as_str))?;
    let seed = spec.seed;
    let presence = presence_features();

    let mut rng = rng_for(seed, "latent");
    let wheels: Vec<LatentWheel> = (0..spec.stimuli)
        .map(|i| {
            let id = format!("w{:03}", i + 1);
            let spokes = rng.random_range(4..=10u32);
            let split = *SplitType::ALL.choose(&mut rng).unwrap();
            let p: BTreeMap<String, bool> = presence.iter().map(|f| (f.to_string(), rng.random_bool(0.4))).collect();
            let image = WheelSpec {
                size: spec.image_size,
                spokes,
                phase_deg: rng.random_range(0.0..360.0 / spokes as f64),
                spoke_width: if p["hollowed"] { 0.014 } else { 0.024 },
                intensity: rng.random_range(150..=240),
                noise: 0,
                seed: derive_seed(seed, &format!("image:{id}")),
                ..WheelSpec::default()
            };
            LatentWheel {
                id,
                spokes,
                split,
                presence: p,
                image,
            }
        })
        .collect();

    let mut annotations = Vec::new();
    let mut arng = rng_for(seed, "annotations");
    for w in &wheels {
        for a in 0..spec.annotators {
            annotations.extend(annotate(w, &format!("a{}", a + 1), spec.flip_rate, &mut arng));
        }
    }

    let embedder = HashEmbedder {
        dim: spec.embedding_dim,
        seed: derive_seed(seed, "embeddings"),
    };
    let mut crng = rng_for(seed, "captions");
    let stimuli: Vec<Stimulus> = wheels
        .iter()
        .map(|w| {
            let caption = caption_for(w, &mut crng);
            Stimulus {
                id: w.id.clone(),
                image_path: PathBuf::from(format!("images/{}.png", w.id)),
                embedding: Some(embedder.vector(&caption)),
                caption: Some(caption),
            }
        })
        .collect();

    let mut rrng = rng_for(seed, "responses");
    let mut responses = Vec::new();
    for style in styles.iter() {
        for r in 0..spec.responses_per_style {
            let text = response_for(style.as_str(), &mut rrng);
            responses.push(ResponseText {
                respondent_id: format!("r{:03}", r + 1),
                style: style.clone(),
                embedding: Some(embedder.vector(&text)),
                text,
            });
        }
    }

    let ids: Vec<String> = wheels.iter().map(|w| w.id.clone()).collect();
    let captions: BTreeMap<String, Vec<f64>> = stimuli
        .iter()
        .map(|s| (s.id.clone(), s.embedding.clone().expect("set above")))
        .collect();
    let align = alignment_scores(&ids, &captions, &responses, &styles)?;

    let mut feature_cols: Vec<(String, Vec<f64>)> = presence
        .iter()
        .map(|f| {
            (
                f.to_string(),
                wheels.iter().map(|w| f64::from(u8::from(w.presence[*f]))).collect(),
            )
        })
        .collect();
    feature_cols.push(("spokes".into(), wheels.iter().map(|w| w.spokes as f64).collect()));
    let feature_cols: Vec<(String, Vec<f64>)> = feature_cols.into_iter().map(|(n, v)| (n, standardize(&v))).collect();

    let effect = Normal::new(0.0, spec.effect_sd)?;
    let noise = Normal::new(0.0, spec.noise_sd)?;
    let mut erng = rng_for(seed, "effects");
    let mut designer_effects: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for style in styles.iter() {
        let e = feature_cols
            .iter()
            .map(|(n, _)| (n.clone(), effect.sample(&mut erng)))
            .collect();
        designer_effects.insert(style.to_string(), e);
    }
    // Classic mirrors futuristic when both are present.
    if let Some(f) = designer_effects.get("futuristic").cloned() {
        if let Some(c) = designer_effects.get_mut("classic") {
            *c = f.into_iter().map(|(k, v)| (k, -v)).collect();
        }
    }

    let mut lambda = BTreeMap::new();
    let mut slopes = BTreeMap::new();
    let mut nrng = rng_for(seed, "lambda");
    for style in styles.iter() {
        let a: Vec<f64> = ids
            .iter()
            .map(|id| {
                align
                    .iter()
                    .find(|r| &r.stimulus_id == id && &r.style == style)
                    .map(|r| r.mean_cosine)
                    .unwrap_or(0.0)
            })
            .collect();
        let za = standardize(&a);
        let slope = spec.planted_slope(style.as_str());
        slopes.insert(style.to_string(), slope);
        let eff = &designer_effects[style.as_str()];
        let mut l: Vec<f64> = (0..ids.len())
            .map(|i| {
                let d: f64 = feature_cols.iter().map(|(n, v)| eff[n] * v[i]).sum();
                d + slope * za[i] + noise.sample(&mut nrng)
            })
            .collect();
        let m = l.iter().sum::<f64>() / l.len() as f64;
        l.iter_mut().for_each(|x| *x -= m);
        lambda.insert(
            style.to_string(),
            ids.iter().cloned().zip(l).collect::<BTreeMap<_, _>>(),
        );
    }

    let mut judgments = Vec::new();
    let judge_ids: Vec<String> = (0..spec.judges.max(1)).map(|j| format!("j{:03}", j + 1)).collect();
    for style in styles.iter() {
        let mut jrng = rng_for(seed, &format!("judgments:{style}"));
        let l = &lambda[style.as_str()];
        for i in 0..ids.len() {
            for j in i + 1..ids.len() {
                let p_i = 1.0 / (1.0 + (l[&ids[j]] - l[&ids[i]]).exp());
                for _ in 0..spec.comparisons_per_pair {
                    let i_wins = jrng.random_bool(p_i);
                    let i_left = jrng.random_bool(0.5);
                    let (left, right) = if i_left { (i, j) } else { (j, i) };
                    judgments.push(Judgment {
                        judge_id: judge_ids.choose(&mut jrng).unwrap().clone(),
                        style: style.clone(),
                        left_id: ids[left].clone(),
                        right_id: ids[right].clone(),
                        winner: if i_wins == i_left { Side::Left } else { Side::Right },
                    });
                }
            }
        }
    }

    Ok(Synthetic {
        spec: spec.clone(),
        corpus: Corpus {
            styles,
            embedding_dim: spec.embedding_dim,
            stimuli,
            judgments,
            annotations,
            responses,
            orphans: Vec::new(),
        },
        truth: SynthTruth {
            wheels,
            slopes,
            designer_effects,
            lambda,
        },
    })
}

/// Renders a latent wheel: split spokes are drawn as two bars a few
/// degrees apart, and seeded pixel noise is added last.
pub fn render(w: &LatentWheel) -> GrayImage {
    let mut img = wheel(&w.image);
    if w.split == SplitType::Split {
        let twin = wheel(&WheelSpec {
            phase_deg: w.image.phase_deg + 7.0,
            ..w.image
        });
        img = GrayImage::from_fn(img.width(), img.height(), |x, y| img.get(x, y).max(twin.get(x, y)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(w.image.seed);
    for y in 0..img.height() {
        for x in 0..img.width() {
            let v = img.get(x, y) as i32 + rng.random_range(-6..=6);
            img.set(x, y, v.clamp(0, 255) as u8);
        }
    }
    img
}

/// Pipeline config for a generated corpus, with paths relative to `dir`.
pub fn default_config(spec: &SynthSpec) -> PipelineConfig {
    let mut c = PipelineConfig::new("manifest.json".into(), spec.seed, "out".into());
    c.models.designer.columns = spec.designer_columns.clone();
    c.models.cv.columns = spec.cv_columns.clone();
    c
}

/// Writes the corpus under `dir` (images optional), plus `truth.json`,
/// `synth.toml` and `config.toml`. Returns the manifest path.
pub fn write(syn: &mut Synthetic, dir: &Path, images: bool) -> Result<PathBuf> {
    std::fs::create_dir_all(dir.join("images"))?;
    for s in &mut syn.corpus.stimuli {
        if s.image_path.is_relative() {
            s.image_path = dir.join(&s.image_path);
        }
    }
    if images {
        syn.truth
            .wheels
            .par_iter()
            .zip(syn.corpus.stimuli.par_iter())
            .try_for_each(|(w, s)| {
                render(w)
                    .save_png(&s.image_path)
                    .with_context(|| format!("cannot write {}", s.image_path.display()))
            })?;
    }
    let manifest = syn.corpus.save(dir)?;
    crate::artifacts::write_json(&dir.join("truth.json"), &syn.truth)?;
    std::fs::write(dir.join("synth.toml"), toml::to_string(&syn.spec)?)?;
    std::fs::write(dir.join("config.toml"), default_config(&syn.spec).to_toml()?)?;
    Ok(manifest)
}
