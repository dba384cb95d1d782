use std::collections::BTreeMap;
use std::path::Path;

use proptest::prelude::*;
use tastekit_cli::artifacts as art;
use tastekit_cli::bigrams::{bigram_frequencies, tokenize, BigramCount};
use tastekit_cli::figures::{coefficient_class, forest_plot, heatmap, slope_label};
use tastekit_cli::report::{render_text, Counts, ModelSummary, RankedStimulus, RunSummary, Term};
use tastekit_cli::synth::{self, SynthSpec};
use tastekit_cli::Run;
use tastekit_core::corpus::{ResponseText, StyleKeyword};
use tastekit_core::stats::{Coefficient, CorrMatrix};

fn responses(style: &str, texts: &[&str]) -> Vec<ResponseText> {
    texts
        .iter()
        .enumerate()
        .map(|(i, t)| ResponseText {
            respondent_id: format!("r{i}"),
            style: StyleKeyword::new(style).unwrap(),
            text: t.to_string(),
            embedding: None,
        })
        .collect()
}

fn as_map(counts: &[BigramCount]) -> BTreeMap<String, u64> {
    counts.iter().map(|b| (b.bigram.clone(), b.count)).collect()
}

#[test]
fn bigram_examples() {
    let style = StyleKeyword::new("rugged").unwrap();
    let got = bigram_frequencies(&responses("rugged", &["Thick dark spokes"]), &style).unwrap();
    assert_eq!(
        as_map(&got),
        BTreeMap::from([("dark spokes".to_string(), 1), ("thick dark".to_string(), 1)])
    );
    let got = bigram_frequencies(
        &responses("rugged", &["the spokes of a wheel", "heavy spokes, heavy spokes"]),
        &style,
    )
    .unwrap();
    assert_eq!(
        as_map(&got),
        BTreeMap::from([("heavy spokes".to_string(), 2), ("spokes heavy".to_string(), 1)])
    );
    assert_eq!(got[0].bigram, "heavy spokes");
    let other = StyleKeyword::new("sleek").unwrap();
    assert!(bigram_frequencies(&responses("rugged", &["x y"]), &other).is_err());
}

#[test]
fn synthetic_aerodynamic_responses_rank_air_flow_first() {
    let syn = synth::generate(&SynthSpec::mini()).unwrap();
    let style = StyleKeyword::new("aerodynamic").unwrap();
    let got = bigram_frequencies(&syn.corpus.responses, &style).unwrap();
    assert_eq!(got[0].bigram, "air flow");
    assert_eq!(got[0].count as usize, SynthSpec::mini().responses_per_style);
}

fn word() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["sharp", "the", "spokes", "rim", "of", "bold", "Fast", "a", "hub"]).prop_map(String::from)
}

fn text() -> impl Strategy<Value = String> {
    prop::collection::vec((word(), prop::sample::select(vec![" ", ", ", "! ", "-"])), 0..12)
        .prop_map(|ws| ws.into_iter().map(|(w, sep)| format!("{w}{sep}")).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn duplicating_responses_doubles_counts(texts in prop::collection::vec(text(), 1..6)) {
        let style = StyleKeyword::new("bold").unwrap();
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        let once = as_map(&bigram_frequencies(&responses("bold", &refs), &style).unwrap());
        let twice_refs: Vec<&str> = refs.iter().chain(refs.iter()).copied().collect();
        let twice = as_map(&bigram_frequencies(&responses("bold", &twice_refs), &style).unwrap());
        prop_assert_eq!(once.keys().collect::<Vec<_>>(), twice.keys().collect::<Vec<_>>());
        for (k, v) in &once {
            prop_assert_eq!(twice[k], 2 * v);
        }
    }

    #[test]
    fn bigram_totals_match_adjacent_content_words(texts in prop::collection::vec(text(), 1..6)) {
        let style = StyleKeyword::new("bold").unwrap();
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        let got = bigram_frequencies(&responses("bold", &refs), &style).unwrap();
        let stop = ["the", "of", "a"];
        let expected: u64 = texts
            .iter()
            .map(|t| {
                tokenize(t).windows(2).filter(|w| !stop.contains(&w[0].as_str()) && !stop.contains(&w[1].as_str())).count() as u64
            })
            .sum();
        prop_assert_eq!(got.iter().map(|b| b.count).sum::<u64>(), expected);
        for w in got.windows(2) {
            prop_assert!(w[0].count > w[1].count || (w[0].count == w[1].count && w[0].bigram < w[1].bigram));
        }
    }

    #[test]
    fn significance_class_follows_interval(beta in -3.0f64..3.0, half in 0.01f64..3.0, p in 0.0f64..1.0) {
        let c = Coefficient { name: "x".into(), beta, std_err: half / 1.96, t: 0.0, p, ci_lo: beta - half, ci_hi: beta + half };
        let class = coefficient_class(&c, 0.05);
        if c.ci_lo <= 0.0 && c.ci_hi >= 0.0 || p >= 0.05 {
            prop_assert_eq!(class, "ns");
        } else {
            prop_assert_eq!(class, if beta > 0.0 { "pos-sig" } else { "neg-sig" });
        }
    }
}

fn coef(name: &str, beta: f64, lo: f64, hi: f64, p: f64) -> Coefficient {
    Coefficient {
        name: name.into(),
        beta,
        std_err: (hi - lo) / 3.92,
        t: 0.0,
        p,
        ci_lo: lo,
        ci_hi: hi,
    }
}

#[test]
fn forest_plot_classes() {
    let svg = forest_plot(
        "designer / sporty",
        &[
            coef("intercept", 0.1, -0.1, 0.3, 0.3),
            coef("hollowed", 0.8, 0.3, 1.3, 0.002),
            coef("spokes", -0.5, -0.9, -0.1, 0.02),
            coef("directional", 0.4, -0.05, 0.85, 0.08),
            coef("odd", 0.4, -0.05, 0.85, 0.04),
        ],
        0.05,
    );
    assert!(svg.contains(r#"<g class="pos-sig" data-term="hollowed">"#));
    assert!(svg.contains(r#"<g class="neg-sig" data-term="spokes">"#));
    assert!(svg.contains(r#"<g class="ns" data-term="directional">"#));
    assert!(svg.contains(r#"<g class="ns" data-term="odd">"#));
    assert!(!svg.contains(r#"data-term="intercept""#));
    assert_well_formed(&svg);
}

#[test]
fn heatmap_prints_cells() {
    let m = CorrMatrix {
        names: vec!["a".into(), "b".into()],
        values: vec![vec![1.0, -0.256], vec![-0.256, 1.0]],
    };
    let svg = heatmap(&m);
    assert!(svg.contains(r#"class="cell" data-row="0" data-col="0">1.00</text>"#));
    assert!(svg.contains(r#"class="cell" data-row="0" data-col="1">-0.26</text>"#));
    assert_well_formed(&svg);
}

fn assert_well_formed(svg: &str) {
    assert!(svg.starts_with("<?xml"));
    assert!(svg.ends_with("</svg>\n"));
    assert_eq!(svg.matches("<svg").count(), 1);
    assert_eq!(svg.matches("<g ").count(), svg.matches("</g>").count());
    assert_eq!(svg.matches("<text").count(), svg.matches("</text>").count());
}

fn summary(top: BTreeMap<String, Vec<RankedStimulus>>, models: Vec<ModelSummary>) -> RunSummary {
    RunSummary {
        seed: 1,
        alpha: 0.05,
        counts: Counts {
            stimuli: 3,
            judgments: 30,
            annotations: 9,
            responses: 0,
            mean_ratings_per_pair: 10.0,
            min_ratings_per_pair: 10,
            max_ratings_per_pair: 10,
        },
        top_stimuli: top,
        models,
        distribution: vec![],
        alignment: None,
    }
}

#[test]
fn report_text_lines() {
    let model = |significant: Vec<Term>| ModelSummary {
        family: "designer".into(),
        style: "sporty".into(),
        n: 3,
        r2: 0.5,
        adj_r2: 0.2,
        significant,
        dropped_columns: vec!["mesh".into()],
        excluded_rows: 0,
    };
    let top = BTreeMap::from([(
        "sporty".to_string(),
        vec![
            RankedStimulus {
                id: "w2".into(),
                score: 0.75,
            },
            RankedStimulus {
                id: "w1".into(),
                score: -0.1,
            },
        ],
    )]);
    let text = render_text(&summary(
        top,
        vec![
            model(vec![]),
            model(vec![Term {
                name: "hollowed".into(),
                beta: 0.4321,
                p: 0.0004,
            }]),
        ],
    ));
    assert!(text.contains("an average of 10.00 ratings per pair"), "{text}");
    assert!(text.contains("sporty: w2 (0.750), w1 (-0.100)"), "{text}");
    assert!(
        text.contains("designer / sporty (n = 3, adj. R² = 0.200): none at p<.05"),
        "{text}"
    );
    assert!(text.contains("hollowed β = 0.432, p < .001"), "{text}");
    assert!(text.contains("dropped constant predictors: mesh"), "{text}");
}

fn mini_run(dir: &Path, top_n: usize) -> Run {
    let spec = SynthSpec::mini();
    let mut syn = synth::generate(&spec).unwrap();
    let manifest = synth::write(&mut syn, &dir.join("corpus"), true).unwrap();
    let mut cfg = synth::default_config(&spec);
    cfg.corpus = manifest;
    cfg.output = dir.join("out");
    cfg.tests.dip_reps = 200;
    cfg.report.top_n = top_n;
    let mut run = Run::new(cfg);
    run.run(None).unwrap();
    run
}

#[test]
fn figures_agree_with_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let run = mini_run(tmp.path(), 5);
    let fig = |name: &str| std::fs::read_to_string(run.dir.join(art::FIGURES_DIR).join(name)).unwrap();

    let scatter = fig("alignment_scatter.svg");
    for style in ["aerodynamic", "classic", "sporty"] {
        let coefs = art::read_coefficients(&run.dir.join(format!("regression/alignment_{style}.csv"))).unwrap();
        let beta = coefs.iter().find(|c| c.name == "alignment").unwrap().beta;
        let label = format!(r#"class="slope">{}</text>"#, slope_label(beta));
        assert!(scatter.contains(&label), "{style}: {label}");
        assert_eq!(slope_label(beta), format!("β = {beta:.3}"));
    }

    let heat = fig("bt_correlation.svg");
    for i in 0..3 {
        assert!(heat.contains(&format!(r#"data-row="{i}" data-col="{i}">1.00</text>"#)));
    }
    let corr = art::read_corr(&run.dir.join(art::CORRELATION)).unwrap();
    let v = corr.values[0][1];
    assert!(heat.contains(&format!(r#"data-row="0" data-col="1">{v:.2}</text>"#)));

    for style in ["aerodynamic", "classic", "sporty"] {
        let svg = fig(&format!("forest_designer_{style}.svg"));
        let coefs = art::read_coefficients(&run.dir.join(format!("regression/designer_{style}.csv"))).unwrap();
        for c in coefs.iter().filter(|c| c.name != "intercept") {
            let tag = format!(r#"<g class="{}" data-term="{}">"#, coefficient_class(c, 0.05), c.name);
            assert!(svg.contains(&tag), "{tag}");
        }
        assert_well_formed(&svg);
    }
    assert_well_formed(&fig("bt_distributions.svg"));
}

#[test]
fn report_agrees_with_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let run = mini_run(tmp.path(), 2);
    let summary: RunSummary = art::read_json(&run.dir.join(art::REPORT_JSON)).unwrap();
    let scores = art::read_scores(&run.dir.join(art::BT_SCORES), "bt_score").unwrap();
    for (style, ranked) in &summary.top_stimuli {
        assert_eq!(ranked.len(), 2);
        let mut all: Vec<(&String, &f64)> = scores[style].iter().collect();
        all.sort_by(|a, b| b.1.total_cmp(a.1));
        assert_eq!(ranked[0].id, *all[0].0);
        assert_eq!(ranked[1].id, *all[1].0);
    }
    assert_eq!(
        summary.counts.judgments,
        3 * 66 * SynthSpec::mini().comparisons_per_pair as usize
    );
    assert!((summary.counts.mean_ratings_per_pair - SynthSpec::mini().comparisons_per_pair as f64).abs() < 1e-12);
    let text = std::fs::read_to_string(run.dir.join(art::REPORT_TXT)).unwrap();
    assert_eq!(text, render_text(&summary));
    assert_eq!(summary.models.len(), 9);
    let a = summary.alignment.as_ref().unwrap();
    assert_eq!(a.slopes.len(), 3);
    let bigrams = std::fs::read_to_string(run.dir.join(art::BIGRAMS)).unwrap();
    assert!(bigrams.lines().any(|l| l == "aerodynamic,1,air flow,6"), "{bigrams}");
}
