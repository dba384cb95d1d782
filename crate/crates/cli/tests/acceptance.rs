//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always printed.

#[path = "../../core/tests/common/mod.rs"]
mod core_oracles;
#[path = "../../vision/tests/common/mod.rs"]
mod vision_oracles;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use tastekit_cli::artifacts::{self as art, AlignmentModels};
use tastekit_cli::synth::{self, SynthSpec};
use tastekit_cli::{PipelineConfig, Run, Stage};
use tastekit_core::ranking::{bt_descriptives, fit_bradley_terry, BtOptions, WinMatrix};
use tastekit_core::sampling::{
    kmeans, select_representatives, tsne_embed, EmbeddedPoint, KMeansOptions, SelectionMode, TsneOptions,
};
use tastekit_core::stats::dip::{dip_null_distribution, dip_p_value};
use tastekit_core::stats::{dip_statistic, nested_f_test, ols_fit, DesignMatrix};
use tastekit_vision::fixtures::{horizontal_line, star};
use tastekit_vision::glcm::glcm_features;
use tastekit_vision::lines::orientation_histogram;
use tastekit_vision::{detect_line_segments, dominant_orientation_count, CannyParams, GrayImage, HoughParams};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ids(n: usize, prefix: &str) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i:03}")).collect()
}

fn within(elapsed: Duration, limit_s: u64) -> bool {
    elapsed < Duration::from_secs(limit_s)
}

fn bt_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let mut w = [[0.0; 3]; 3];
        let mut rows = vec![vec![0u64; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    let v = rng.random_range(1..=9u64);
                    w[i][j] = v as f64;
                    rows[i][j] = v;
                }
            }
        }
        let fit = fit_bradley_terry(&WinMatrix::from_rows(ids(3, "w"), &rows), &BtOptions::default())
            .map_err(|e| e.to_string())?;
        let oracle = core_oracles::bt_grid_oracle(&w);
        for k in 0..3 {
            worst = worst.max((fit.scores[k] - oracle[k]).abs());
        }
    }
    let t = start.elapsed();
    check(
        worst < 1e-3 && within(t, 30),
        format!(
            "max |Δλ| = {worst:.2e} (tol 1e-3), {:.2} s (limit 30 s)",
            t.as_secs_f64()
        ),
    )
}

fn bt_recovery() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let normal = Normal::new(0.0, 0.65).unwrap();
    let truth: Vec<f64> = (0..80).map(|_| normal.sample(&mut rng)).collect();
    let m = WinMatrix::from_rows(ids(80, "w"), &core_oracles::simulate_wins(&truth, 20, 7));
    let fit = fit_bradley_terry(&m, &BtOptions::default()).map_err(|e| e.to_string())?;
    let r = core_oracles::pearson(&truth, &fit.scores);
    let sd = bt_descriptives(&fit).std;
    let t = start.elapsed();
    check(
        r >= 0.97 && (sd / 0.65 - 1.0).abs() <= 0.2 && within(t, 60),
        format!(
            "r = {r:.4} (≥ 0.97), std = {sd:.3} (0.52..0.78), {:.2} s (limit 60 s)",
            t.as_secs_f64()
        ),
    )
}

fn ols_oracle_equivalence() -> Outcome {
    let mut worst = [0.0f64; 4];
    let u = Uniform::new(-2.0, 2.0).unwrap();
    let noise = Normal::new(0.0, 0.8).unwrap();
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.random_range(1..=10usize);
        let rows: Vec<Vec<f64>> = (0..80).map(|_| (0..k).map(|_| u.sample(&mut rng)).collect()).collect();
        let betas: Vec<f64> = (0..=k).map(|_| u.sample(&mut rng)).collect();
        let y: Vec<f64> = rows
            .iter()
            .map(|r| betas[0] + r.iter().zip(&betas[1..]).map(|(a, b)| a * b).sum::<f64>() + noise.sample(&mut rng))
            .collect();
        let names: Vec<String> = (0..k).map(|j| format!("x{j}")).collect();
        let fit = ols_fit(
            &DesignMatrix::new(ids(80, "r"), names, &rows, true).map_err(|e| e.to_string())?,
            &y,
        )
        .map_err(|e| e.to_string())?;
        let with_one: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| std::iter::once(1.0).chain(r.iter().copied()).collect())
            .collect();
        let o = core_oracles::ols_normal_equations(&with_one, &y);
        for (j, c) in fit.coefficients.iter().enumerate() {
            worst[0] = worst[0].max((c.beta - o.beta[j]).abs());
            worst[1] = worst[1].max((c.std_err - o.se[j]).abs());
            worst[2] = worst[2].max((c.t - o.t[j]).abs() / o.t[j].abs().max(1.0));
            worst[3] = worst[3].max((c.p - o.p[j]).abs());
        }
    }
    let mut r2_gap: f64 = 0.0;
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let rows: Vec<Vec<f64>> = (0..80).map(|_| (0..4).map(|_| u.sample(&mut rng)).collect()).collect();
        let y: Vec<f64> = rows
            .iter()
            .map(|r| 1.5 - 2.0 * r[0] + 0.5 * r[1] + 3.0 * r[3])
            .collect();
        let fit = ols_fit(
            &DesignMatrix::new(ids(80, "r"), (0..4).map(|j| format!("x{j}")).collect(), &rows, true)
                .map_err(|e| e.to_string())?,
            &y,
        )
        .map_err(|e| e.to_string())?;
        r2_gap = r2_gap.max((fit.r2 - 1.0).abs());
    }
    check(
        worst.iter().all(|w| *w <= 1e-8) && r2_gap <= 1e-12,
        format!(
            "max diff β {:.1e}, se {:.1e}, t (relative) {:.1e}, p {:.1e} (tol 1e-8); noiseless |R²-1| = {r2_gap:.1e} (tol 1e-12)",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
}

fn nested_f() -> Outcome {
    let xs = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];
    let ys = [3.1, 4.8, 7.4, 8.1, 11.9, 12.2, 15.8, 15.9, 19.7, 21.4];
    let rid = ids(10, "r");
    let x1: Vec<Vec<f64>> = xs.iter().map(|v| vec![*v]).collect();
    let x2: Vec<Vec<f64>> = xs.iter().map(|v| vec![*v, v * v]).collect();
    let restricted = ols_fit(
        &DesignMatrix::new(rid.clone(), vec!["x".into()], &x1, true).unwrap(),
        &ys,
    )
    .unwrap();
    let full = ols_fit(
        &DesignMatrix::new(rid.clone(), vec!["x".into(), "x2".into()], &x2, true).unwrap(),
        &ys,
    )
    .unwrap();
    let t = nested_f_test(&restricted, &full).map_err(|e| e.to_string())?;

    // Closed-form simple regression RSS, and the quadratic fit's RSS from
    // centred 2×2 normal equations solved by Cramer's rule.
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (mx, my) = (mean(&xs), mean(&ys));
    let qs: Vec<f64> = xs.iter().map(|v| v * v).collect();
    let mq = mean(&qs);
    let s = |a: &[f64], ma: f64, b: &[f64], mb: f64| a.iter().zip(b).map(|(p, q)| (p - ma) * (q - mb)).sum::<f64>();
    let (sxx, sxy, syy) = (s(&xs, mx, &xs, mx), s(&xs, mx, &ys, my), s(&ys, my, &ys, my));
    let (sxq, sqq, sqy) = (s(&xs, mx, &qs, mq), s(&qs, mq, &qs, mq), s(&qs, mq, &ys, my));
    let rss_r = syy - sxy * sxy / sxx;
    let det = sxx * sqq - sxq * sxq;
    let b1 = (sxy * sqq - sqy * sxq) / det;
    let b2 = (sxx * sqy - sxq * sxy) / det;
    let rss_f = syy - b1 * sxy - b2 * sqy;
    let f = (rss_r - rss_f) / (rss_f / 7.0);
    let diff = (t.f - f).abs();

    let same = nested_f_test(&full, &full).map_err(|e| e.to_string())?;
    check(
        diff <= 1e-10 && (t.df1, t.df2) == (1, 7) && same.f == 0.0 && same.p == 1.0,
        format!(
            "F = {:.6} vs hand {f:.6}, |Δ| = {diff:.1e} (tol 1e-10); identical models F = {}, p = {}",
            t.f, same.f, same.p
        ),
    )
}

fn glcm_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut failures = Vec::new();
    let mut checked = 0;
    for i in 0..50 {
        let (w, h) = (rng.random_range(2..=16u32), rng.random_range(2..=16u32));
        let px: Vec<u8> = (0..w * h).map(|_| rng.random()).collect();
        let img = GrayImage::new(w, h, px).map_err(|e| e.to_string())?;
        for levels in [8u32, 64, 256] {
            let got = glcm_features(&img, levels, 1).map_err(|e| e.to_string())?;
            let (c, r, e, hom) = vision_oracles::glcm_oracle(&img, levels, 1);
            let corr_ok = match (got.correlation, r) {
                (Some(a), Some(b)) => vision_oracles::close(a, b),
                (None, None) => true,
                _ => false,
            };
            checked += 1;
            if !(vision_oracles::close(got.contrast, c)
                && vision_oracles::close(got.energy, e)
                && vision_oracles::close(got.homogeneity, hom)
                && corr_ok)
            {
                failures.push(format!("image {i} ({w}×{h}) levels {levels}"));
            }
        }
    }
    check(
        failures.is_empty(),
        format!(
            "{checked} image/level cases, {} mismatches beyond 1e-12 {failures:?}",
            failures.len()
        ),
    )
}

fn orientation() -> Outcome {
    let (canny, hough) = (CannyParams::default(), HoughParams::default());
    let mut counts = Vec::new();
    let mut ok = true;
    for k in 3..=8usize {
        // Arm orientations spaced 180/k apart mod 180, alternating sides
        // of the centre so the star is not lopsided.
        let angles: Vec<f64> = (0..k)
            .map(|i| 7.0 + i as f64 * 180.0 / k as f64 + 180.0 * (i % 2) as f64)
            .collect();
        let img = star(256, &angles, 2.5);
        let n = dominant_orientation_count(&detect_line_segments(&img, &canny, &hough));
        ok &= n + 2 >= k && n <= k;
        counts.push(format!("k={k}:{n}"));
    }
    let mut line_report = Vec::new();
    let lines: [(GrayImage, f64); 2] = [
        (horizontal_line(160, 128, 100, 3), 0.0),
        (star(256, &[30.0, 210.0], 1.5), 30.0),
    ];
    for (img, angle) in &lines {
        let hist = orientation_histogram(&detect_line_segments(img, &canny, &hough));
        let bins: Vec<usize> = (0..hist.len()).filter(|&b| hist[b] >= 2).collect();
        let good = bins.len() == 1 && {
            let centre = bins[0] as f64 * 2.0 + 1.0;
            let d = (centre - angle).rem_euclid(180.0);
            d.min(180.0 - d) <= 2.0
        };
        ok &= good;
        line_report.push(format!(
            "{angle}°→bins {:?}",
            bins.iter()
                .map(|b| format!("[{},{})", 2 * b, 2 * b + 2))
                .collect::<Vec<_>>()
        ));
    }
    // Same construction over 40 further rotations, reported only.
    let mut in_window = 0;
    for step in 0..40 {
        let offset = 0.37 + step as f64 * 4.5;
        for k in 3..=8usize {
            let angles: Vec<f64> = (0..k)
                .map(|i| offset + i as f64 * 180.0 / k as f64 + 180.0 * (i % 2) as f64)
                .collect();
            let n = dominant_orientation_count(&detect_line_segments(&star(256, &angles, 2.5), &canny, &hough));
            in_window += usize::from(n + 2 >= k && n <= k);
        }
    }
    check(
        ok,
        format!(
            "stars {} (each in [k-2, k]); lines {}; rotation sweep {in_window}/240 in window",
            counts.join(" "),
            line_report.join(", ")
        ),
    )
}

fn dip() -> Outcome {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let null80 = dip_null_distribution(80, 5000, 11);
    let null200 = dip_null_distribution(200, 5000, 12);
    let (mut uni, mut bi) = (0, 0);
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x: Vec<f64> = (0..80).map(|_| normal.sample(&mut rng)).collect();
        x.sort_by(f64::total_cmp);
        if dip_p_value(&null80, dip_statistic(&x)) > 0.05 {
            uni += 1;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(10_000 + seed);
        let mut y: Vec<f64> = (0..200)
            .map(|_| normal.sample(&mut rng) + if rng.random::<bool>() { 6.0 } else { 0.0 })
            .collect();
        y.sort_by(f64::total_cmp);
        if dip_p_value(&null200, dip_statistic(&y)) < 0.01 {
            bi += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let u = Uniform::new(0.0, 1.0).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let mut x: Vec<f64> = (0..5).map(|_| u.sample(&mut rng)).collect();
        x.sort_by(f64::total_cmp);
        worst = worst.max((dip_statistic(&x) - core_oracles::dip_lp(&x)).abs());
    }
    check(
        uni >= 90 && bi >= 95 && worst < 1e-9,
        format!("unimodal p > .05 in {uni}/100 (≥ 90); bimodal p < .01 in {bi}/100 (≥ 95); 5-point oracle max |Δ| = {worst:.1e}"),
    )
}

fn alignment_recovery() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let spec = SynthSpec::default();
    let mut syn = synth::generate(&spec).map_err(|e| format!("{e:#}"))?;
    let manifest = synth::write(&mut syn, &tmp.path().join("corpus"), false).map_err(|e| format!("{e:#}"))?;
    let mut cfg = synth::default_config(&spec);
    cfg.corpus = manifest;
    cfg.output = tmp.path().join("out");
    cfg.models.cv.enabled = false;
    cfg.tests.dip = false;
    let mut run = Run::new(cfg);
    run.run(Some(Stage::Regression)).map_err(|e| e.to_string())?;
    let models: AlignmentModels = art::read_json(&run.dir.join(art::ALIGNMENT_MODELS)).map_err(|e| format!("{e:#}"))?;
    let mut ok = models.f_test.p < 0.01;
    let mut parts = Vec::new();
    for s in &models.slopes {
        let planted = spec.planted_slope(&s.style);
        let c = &s.slope;
        let good = if planted > 0.0 {
            c.beta > 0.0 && c.ci_lo > 0.0
        } else if planted < 0.0 {
            c.beta < 0.0 && c.ci_hi < 0.0
        } else {
            c.p > 0.01
        };
        ok &= good;
        let sign = if planted > 0.0 {
            '+'
        } else if planted < 0.0 {
            '-'
        } else {
            '0'
        };
        parts.push(format!(
            "{}[{sign}] {:+.1} (p={:.3}){}",
            s.style,
            c.beta,
            c.p,
            if good { "" } else { " ✗" }
        ));
    }
    let f = &models.f_test;
    check(
        ok,
        format!(
            "F({}, {}) = {:.2}, p = {:.1e} (< .01); {}",
            f.df1,
            f.df2,
            f.f,
            f.p,
            parts.join(", ")
        ),
    )
}

fn mini_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mini/config.toml")
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let base = PipelineConfig::load(&mini_config()).map_err(|e| format!("{e:#}"))?;
    let mut runs = Vec::new();
    let mut slowest = Duration::ZERO;
    for name in ["a", "b"] {
        let mut cfg = base.clone();
        cfg.output = tmp.path().join(name);
        let start = Instant::now();
        let report = tastekit_cli::run_pipeline(&cfg).map_err(|e| e.to_string())?;
        slowest = slowest.max(start.elapsed());
        runs.push(report);
    }
    let (a, b) = (&runs[0], &runs[1]);
    let mut differing = Vec::new();
    for e in &a.files {
        let x = std::fs::read(a.run_dir.join(&e.path)).map_err(|e| e.to_string())?;
        let y = std::fs::read(b.run_dir.join(&e.path)).unwrap_or_default();
        if x != y {
            differing.push(e.path.clone());
        }
    }
    let kinds: BTreeMap<String, usize> = a.files.iter().fold(BTreeMap::new(), |mut m, e| {
        *m.entry(e.path.rsplit('.').next().unwrap_or("").to_string())
            .or_default() += 1;
        m
    });
    check(
        differing.is_empty() && a.files.len() == b.files.len() && within(slowest, 120),
        format!(
            "{} files {kinds:?}, {} differ; slowest run {:.2} s (limit 120 s)",
            a.files.len(),
            differing.len(),
            slowest.as_secs_f64()
        ),
    )
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

fn sampling() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let mut data = BTreeMap::new();
    for c in 0..2 {
        for i in 0..10 {
            let v: Vec<f64> = (0..16)
                .map(|d| noise.sample(&mut rng) + if d == 0 { 20.0 * c as f64 } else { 0.0 })
                .collect();
            data.insert(format!("c{c}_{i:02}"), v);
        }
    }
    let emb = tsne_embed(
        &data,
        &TsneOptions {
            perplexity: 5.0,
            ..TsneOptions::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let pure = emb
        .points
        .iter()
        .filter(|p| {
            let nearest = emb
                .points
                .iter()
                .filter(|q| q.id != p.id)
                .min_by(|a, b| dist2(a.position, p.position).total_cmp(&dist2(b.position, p.position)))
                .unwrap();
            nearest.id[..2] == p.id[..2]
        })
        .count();

    let line = [[0.0, 0.0], [1.0, 0.0], [10.0, 0.0], [11.0, 0.0]];
    let km = kmeans(&line, 2, &KMeansOptions::default()).map_err(|e| e.to_string())?;
    let mut best = f64::INFINITY;
    for mask in 1..(1u32 << 4) - 1 {
        let mut inertia = 0.0;
        for side in [true, false] {
            let members: Vec<[f64; 2]> = (0..4)
                .filter(|i| (mask >> i & 1 == 1) == side)
                .map(|i| line[i])
                .collect();
            let c = [
                members.iter().map(|p| p[0]).sum::<f64>() / members.len() as f64,
                members.iter().map(|p| p[1]).sum::<f64>() / members.len() as f64,
            ];
            inertia += members.iter().map(|p| dist2(*p, c)).sum::<f64>();
        }
        best = best.min(inertia);
    }
    let mut centroids = km.centroids.clone();
    centroids.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let line_ok = (km.inertia - best).abs() < 1e-12 && centroids == vec![[0.5, 0.0], [10.5, 0.0]];

    let u = Uniform::new(-50.0, 50.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let pts: Vec<EmbeddedPoint> = (0..1000)
        .map(|i| EmbeddedPoint {
            id: format!("w{i:04}"),
            position: [u.sample(&mut rng), u.sample(&mut rng)],
        })
        .collect();
    let xy: Vec<[f64; 2]> = pts.iter().map(|p| p.position).collect();
    let km80 = kmeans(&xy, 80, &KMeansOptions::default()).map_err(|e| e.to_string())?;
    let chosen = select_representatives(&pts, &km80, 80, SelectionMode::GlobalWithFloor).map_err(|e| e.to_string())?;
    let unique: BTreeSet<&String> = chosen.iter().collect();
    let index: BTreeMap<&str, usize> = pts.iter().enumerate().map(|(i, p)| (p.id.as_str(), i)).collect();
    let covered: BTreeSet<usize> = chosen.iter().map(|id| km80.assignments[index[id.as_str()]]).collect();
    let nonempty: BTreeSet<usize> = km80.assignments.iter().copied().collect();

    check(
        pure == 20 && line_ok && chosen.len() == 80 && unique.len() == 80 && covered == nonempty,
        format!(
            "t-SNE neighbour purity {pure}/20; 4-point k-means inertia {} vs optimum {best}, centroids {centroids:?}; selection {} ids, {} unique, {}/{} clusters covered",
            km.inertia,
            chosen.len(),
            unique.len(),
            covered.len(),
            nonempty.len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("BT oracle equivalence", bt_oracle_equivalence),
        ("BT recovery at 80 items", bt_recovery),
        ("OLS oracle equivalence", ols_oracle_equivalence),
        ("nested F-test", nested_f),
        ("GLCM brute-force equivalence", glcm_equivalence),
        ("orientation counts", orientation),
        ("dip test", dip),
        ("alignment slope recovery", alignment_recovery),
        ("end-to-end determinism", determinism),
        ("sampling", sampling),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
