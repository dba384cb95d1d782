//! JSON and plain-text run summaries.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};
use tastekit_core::corpus::ValidationReport;
use tastekit_core::stats::{FTest, INTERCEPT};

use crate::artifacts::{AlignmentModels, DistributionRow, ModelFit, ScoreTable, StyleSlope};

pub struct ReportInputs {
    pub validation: ValidationReport,
    pub bt: ScoreTable,
    pub fits: Vec<ModelFit>,
    pub alignment: Option<AlignmentModels>,
    pub distribution: Vec<DistributionRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    pub stimuli: usize,
    pub judgments: usize,
    pub annotations: usize,
    pub responses: usize,
    /// Judgments per compared pair, over every analysed style.
    pub mean_ratings_per_pair: f64,
    pub min_ratings_per_pair: usize,
    pub max_ratings_per_pair: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedStimulus {
    pub id: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub name: String,
    pub beta: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub family: String,
    pub style: String,
    pub n: usize,
    pub r2: f64,
    pub adj_r2: f64,
    /// Non-intercept terms with p below alpha.
    pub significant: Vec<Term>,
    pub dropped_columns: Vec<String>,
    pub excluded_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentSummary {
    pub baseline_style: String,
    pub additive_adj_r2: f64,
    pub interaction_adj_r2: f64,
    pub f_test: FTest,
    pub slopes: Vec<StyleSlope>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub alpha: f64,
    pub counts: Counts,
    pub top_stimuli: BTreeMap<String, Vec<RankedStimulus>>,
    pub models: Vec<ModelSummary>,
    pub distribution: Vec<DistributionRow>,
    pub alignment: Option<AlignmentSummary>,
}

pub fn summarize(inputs: &ReportInputs, ids: &[String], seed: u64, alpha: f64, top_n: usize) -> RunSummary {
    let cov = &inputs.validation.coverage;
    let analysed: Vec<_> = cov
        .per_style
        .iter()
        .filter(|(s, _)| inputs.bt.contains_key(*s))
        .map(|(_, c)| c)
        .collect();
    let judgments: usize = analysed.iter().map(|c| c.judgments).sum();
    let pairs: usize = analysed.iter().map(|c| c.pairs_covered).sum();
    let counts = Counts {
        stimuli: cov.stimuli,
        judgments,
        annotations: cov.annotations,
        responses: cov.responses,
        mean_ratings_per_pair: if pairs > 0 {
            judgments as f64 / pairs as f64
        } else {
            0.0
        },
        min_ratings_per_pair: analysed.iter().map(|c| c.min_ratings_per_pair).min().unwrap_or(0),
        max_ratings_per_pair: analysed.iter().map(|c| c.max_ratings_per_pair).max().unwrap_or(0),
    };

    let mut top_stimuli = BTreeMap::new();
    for (style, scores) in &inputs.bt {
        let mut ranked: Vec<RankedStimulus> = ids
            .iter()
            .filter_map(|id| {
                scores.get(id).map(|s| RankedStimulus {
                    id: id.clone(),
                    score: *s,
                })
            })
            .collect();
        ranked.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.id.cmp(&b.id)));
        ranked.truncate(top_n);
        top_stimuli.insert(style.clone(), ranked);
    }

    let models = inputs
        .fits
        .iter()
        .map(|f| ModelSummary {
            family: f.family.clone(),
            style: f.style.clone(),
            n: f.result.n,
            r2: f.result.r2,
            adj_r2: f.result.adj_r2,
            significant: f
                .result
                .coefficients
                .iter()
                .filter(|c| c.name != INTERCEPT && c.p < alpha)
                .map(|c| Term {
                    name: c.name.clone(),
                    beta: c.beta,
                    p: c.p,
                })
                .collect(),
            dropped_columns: f.result.dropped_columns.clone(),
            excluded_rows: f.result.excluded_rows.len(),
        })
        .collect();

    RunSummary {
        seed,
        alpha,
        counts,
        top_stimuli,
        models,
        distribution: inputs.distribution.clone(),
        alignment: inputs.alignment.as_ref().map(|a| AlignmentSummary {
            baseline_style: a.baseline_style.clone(),
            additive_adj_r2: a.additive.adj_r2,
            interaction_adj_r2: a.interaction.adj_r2,
            f_test: a.f_test.clone(),
            slopes: a.slopes.clone(),
        }),
    }
}

/// `.05` style: no leading zero.
pub fn format_level(alpha: f64) -> String {
    let s = format!("{alpha}");
    s.strip_prefix('0').map(String::from).unwrap_or(s)
}

pub fn format_p(p: f64) -> String {
    if p < 0.001 {
        "p < .001".into()
    } else {
        format!("p = {p:.3}")
    }
}

pub fn render_text(s: &RunSummary) -> String {
    let mut out = String::new();
    let c = &s.counts;
    let level = format_level(s.alpha);
    let _ = writeln!(out, "Run seed {}", s.seed);
    let _ = writeln!(
        out,
        "{} stimuli, {} judgments across {} styles, an average of {:.2} ratings per pair (range {}-{}).",
        c.stimuli,
        c.judgments,
        s.top_stimuli.len(),
        c.mean_ratings_per_pair,
        c.min_ratings_per_pair,
        c.max_ratings_per_pair
    );
    let _ = writeln!(
        out,
        "{} annotation records, {} free-text responses.",
        c.annotations, c.responses
    );

    let n_top = s.top_stimuli.values().map(Vec::len).max().unwrap_or(0);
    let _ = writeln!(out, "\nTop {n_top} stimuli by BT score");
    for (style, ranked) in &s.top_stimuli {
        let list: Vec<String> = ranked.iter().map(|r| format!("{} ({:.3})", r.id, r.score)).collect();
        let _ = writeln!(out, "  {style}: {}", list.join(", "));
    }

    let _ = writeln!(out, "\nSignificant coefficients (p < {level})");
    for m in &s.models {
        let head = format!("  {} / {} (n = {}, adj. R² = {:.3})", m.family, m.style, m.n, m.adj_r2);
        if m.significant.is_empty() {
            let _ = writeln!(out, "{head}: none at p<{level}");
        } else {
            let _ = writeln!(out, "{head}:");
            for t in &m.significant {
                let _ = writeln!(out, "    {} β = {:.3}, {}", t.name, t.beta, format_p(t.p));
            }
        }
        if !m.dropped_columns.is_empty() {
            let _ = writeln!(out, "    dropped constant predictors: {}", m.dropped_columns.join(", "));
        }
        if m.excluded_rows > 0 {
            let _ = writeln!(out, "    rows excluded for missing values: {}", m.excluded_rows);
        }
    }

    let _ = writeln!(out, "\nDistribution tests");
    for d in &s.distribution {
        let mut parts = Vec::new();
        if let (Some(dip), Some(p)) = (d.dip, d.dip_p) {
            parts.push(format!("dip = {dip:.4}, {}", format_p(p)));
        }
        if let (Some(w), Some(p)) = (d.sw_w, d.sw_p) {
            parts.push(format!("Shapiro-Wilk W = {w:.4}, {}", format_p(p)));
        }
        let body = if parts.is_empty() {
            "not run".to_string()
        } else {
            parts.join("; ")
        };
        let _ = writeln!(out, "  {} (n = {}): {body}", d.style, d.n);
    }
    let dip_ps: Vec<f64> = s.distribution.iter().filter_map(|d| d.dip_p).collect();
    if !dip_ps.is_empty() {
        let min = dip_ps.iter().copied().fold(f64::INFINITY, f64::min);
        let floor = (min * 100.0).floor() / 100.0;
        let _ = writeln!(out, "  all dip p > {floor:.2}");
    }

    if let Some(a) = &s.alignment {
        let f = &a.f_test;
        let _ = writeln!(out, "\nSemantic alignment (baseline style {})", a.baseline_style);
        let _ = writeln!(
            out,
            "  additive adj. R² = {:.3}, interaction adj. R² = {:.3}",
            a.additive_adj_r2, a.interaction_adj_r2
        );
        let _ = writeln!(
            out,
            "  interaction vs additive: F({}, {}) = {:.2}, {}",
            f.df1,
            f.df2,
            f.f,
            format_p(f.p)
        );
        for sl in &a.slopes {
            let _ = writeln!(
                out,
                "  {} slope β = {:.3} [{:.3}, {:.3}], {}",
                sl.style,
                sl.slope.beta,
                sl.slope.ci_lo,
                sl.slope.ci_hi,
                format_p(sl.slope.p)
            );
        }
    }
    out
}
