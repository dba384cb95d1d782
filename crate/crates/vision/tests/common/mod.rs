//! Brute-force references shared by the vision tests.
#![allow(dead_code)]

use std::collections::HashMap;

use tastekit_vision::glcm::quantize;
use tastekit_vision::GrayImage;

pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// Enumerates every ordered pixel pair whose displacement is ±offset and
/// derives the statistics from pair lists directly.
pub fn glcm_oracle(img: &GrayImage, levels: u32, d: i64) -> (f64, Option<f64>, f64, f64) {
    let offsets = [(d, 0), (d, -d), (0, -d), (-d, -d)];
    let (w, h) = (img.width() as i64, img.height() as i64);
    let mut acc = (0.0, Some(0.0), 0.0, 0.0);
    for (ox, oy) in offsets {
        let mut pairs: Vec<(f64, f64)> = Vec::new();
        for y1 in 0..h {
            for x1 in 0..w {
                for y2 in 0..h {
                    for x2 in 0..w {
                        let (dx, dy) = (x2 - x1, y2 - y1);
                        if (dx, dy) == (ox, oy) || (dx, dy) == (-ox, -oy) {
                            let a = quantize(img.get(x1 as u32, y1 as u32), levels) as f64;
                            let b = quantize(img.get(x2 as u32, y2 as u32), levels) as f64;
                            pairs.push((a, b));
                        }
                    }
                }
            }
        }
        let n = pairs.len() as f64;
        let contrast = pairs.iter().map(|(a, b)| (a - b).powi(2)).sum::<f64>() / n;
        let homogeneity = pairs.iter().map(|(a, b)| 1.0 / (1.0 + (a - b).powi(2))).sum::<f64>() / n;
        let mut cells: HashMap<(u64, u64), f64> = HashMap::new();
        for (a, b) in &pairs {
            *cells.entry((*a as u64, *b as u64)).or_default() += 1.0;
        }
        let energy = cells.values().map(|c| (c / n).powi(2)).sum::<f64>();
        let ma = pairs.iter().map(|p| p.0).sum::<f64>() / n;
        let mb = pairs.iter().map(|p| p.1).sum::<f64>() / n;
        let sab = pairs.iter().map(|(a, b)| (a - ma) * (b - mb)).sum::<f64>();
        let saa = pairs.iter().map(|(a, _)| (a - ma).powi(2)).sum::<f64>();
        let sbb = pairs.iter().map(|(_, b)| (b - mb).powi(2)).sum::<f64>();
        let corr = (saa > 0.0 && sbb > 0.0).then(|| sab / (saa * sbb).sqrt());
        acc.0 += contrast / 4.0;
        acc.1 = match (acc.1, corr) {
            (Some(x), Some(c)) => Some(x + c / 4.0),
            _ => None,
        };
        acc.2 += energy / 4.0;
        acc.3 += homogeneity / 4.0;
    }
    acc
}
