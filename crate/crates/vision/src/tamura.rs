use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{require_side, GrayImage, VisionError};

pub const TAMURA_MIN_SIDE: u32 = 32;
pub const DIRECTION_BINS: usize = 16;
/// Prewitt magnitude below which a pixel does not vote for a direction.
pub const DIRECTION_THRESHOLD: f64 = 12.0;
const PEAK_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TamuraFeatures {
    pub coarseness: f64,
    pub contrast: f64,
    pub directionality: f64,
}

pub fn tamura_features(img: &GrayImage) -> Result<TamuraFeatures, VisionError> {
    require_side(img, TAMURA_MIN_SIDE)?;
    Ok(TamuraFeatures {
        coarseness: coarseness(img),
        contrast: contrast(img),
        directionality: directionality(img),
    })
}

struct Integral {
    w: usize,
    sums: Vec<u64>,
}

impl Integral {
    fn new(img: &GrayImage) -> Self {
        let (w, h) = (img.width() as usize, img.height() as usize);
        let mut sums = vec![0u64; (w + 1) * (h + 1)];
        for y in 0..h {
            let mut row = 0u64;
            for x in 0..w {
                row += img.get(x as u32, y as u32) as u64;
                sums[(y + 1) * (w + 1) + x + 1] = sums[y * (w + 1) + x + 1] + row;
            }
        }
        Self { w, sums }
    }

    /// Sum over `[x0, x1) × [y0, y1)`.
    fn sum(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> u64 {
        let s = |x: usize, y: usize| self.sums[y * (self.w + 1) + x];
        s(x1, y1) + s(x0, y0) - s(x0, y1) - s(x1, y0)
    }
}

/// Mean over pixels of `2^k*`, where `k*` ∈ 1..=5 maximizes the difference
/// between averages of `2^k`-wide windows on opposite sides of the pixel.
/// Only scales whose windows lie fully inside the image are considered, and
/// pixels within 2 px of the border are skipped. Ties go to the smaller `k`.
pub fn coarseness(img: &GrayImage) -> f64 {
    const K: usize = 5;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let integral = Integral::new(img);
    // Average of the `2^k × 2^k` window whose top-left corner is (x0, y0).
    let window = |k: usize, x0: usize, y0: usize| {
        let s = 1usize << k;
        integral.sum(x0, y0, x0 + s, y0 + s) as f64 / (s * s) as f64
    };
    let mut total = 0.0;
    let mut counted = 0usize;
    for y in 0..h {
        for x in 0..w {
            let mut best = (f64::NEG_INFINITY, 0usize);
            for k in 1..=K {
                let (s, half) = (1usize << k, 1usize << (k - 1));
                if x < s || y < s || x + s > w || y + s > h {
                    break;
                }
                let eh = (window(k, x, y - half) - window(k, x - s, y - half)).abs();
                let ev = (window(k, x - half, y) - window(k, x - half, y - s)).abs();
                let e = eh.max(ev);
                if e > best.0 {
                    best = (e, k);
                }
            }
            if best.1 > 0 {
                total += (1usize << best.1) as f64;
                counted += 1;
            }
        }
    }
    total / counted as f64
}

/// `σ / α₄^{1/4}` with `α₄ = μ₄ / σ⁴`; 0 for a constant image.
pub fn contrast(img: &GrayImage) -> f64 {
    let n = img.pixels().len() as f64;
    let mean = img.pixels().iter().map(|&p| p as f64).sum::<f64>() / n;
    let (mut m2, mut m4) = (0.0, 0.0);
    for &p in img.pixels() {
        let d = p as f64 - mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m4 /= n;
    if m2 == 0.0 || m4 == 0.0 {
        return 0.0;
    }
    m2 / m4.powf(0.25)
}

/// Normalized 16-bin histogram of Prewitt gradient directions in `[0, π)`
/// over interior pixels whose magnitude reaches the threshold. All zeros
/// when no pixel qualifies.
pub fn direction_histogram(img: &GrayImage) -> [f64; DIRECTION_BINS] {
    let (w, h) = (img.width(), img.height());
    let mut hist = [0.0; DIRECTION_BINS];
    let mut votes = 0usize;
    let p = |x: u32, y: u32| img.get(x, y) as f64;
    for y in 1..h.saturating_sub(1) {
        for x in 1..w.saturating_sub(1) {
            let dh =
                (p(x + 1, y - 1) + p(x + 1, y) + p(x + 1, y + 1) - p(x - 1, y - 1) - p(x - 1, y) - p(x - 1, y + 1))
                    / 3.0;
            let dv =
                (p(x - 1, y + 1) + p(x, y + 1) + p(x + 1, y + 1) - p(x - 1, y - 1) - p(x, y - 1) - p(x + 1, y - 1))
                    / 3.0;
            if (dh.abs() + dv.abs()) / 2.0 < DIRECTION_THRESHOLD {
                continue;
            }
            let theta = if dh == 0.0 {
                PI / 2.0
            } else {
                (dv / dh).atan() + PI / 2.0
            };
            let bin = ((theta / PI * DIRECTION_BINS as f64) as usize).min(DIRECTION_BINS - 1);
            hist[bin] += 1.0;
            votes += 1;
        }
    }
    if votes > 0 {
        hist.iter_mut().for_each(|v| *v /= votes as f64);
    }
    hist
}

/// `1 − n_peaks · Σ_p Σ_{φ ∈ w_p} (φ − φ_p)² H(φ)`, clamped to [0, 1].
///
/// Peaks are circular local maxima holding at least a fifth of the largest
/// bin; on a plateau the last bin counts. Every bin belongs to its nearest
/// peak (lower index on ties) and distances wrap around π.
pub fn directionality_from_histogram(hist: &[f64; DIRECTION_BINS]) -> f64 {
    let nb = DIRECTION_BINS;
    let max = hist.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    let peaks: Vec<usize> = (0..nb)
        .filter(|&i| {
            let prev = hist[(i + nb - 1) % nb];
            let next = hist[(i + 1) % nb];
            hist[i] >= PEAK_FRACTION * max && hist[i] >= prev && hist[i] > next
        })
        .collect();
    let peaks = if peaks.is_empty() {
        // Flat histogram: every bin equal.
        vec![0]
    } else {
        peaks
    };
    let bin_width = PI / nb as f64;
    let circ = |a: usize, b: usize| {
        let d = a.abs_diff(b);
        d.min(nb - d)
    };
    let mut spread = 0.0;
    for (i, &hv) in hist.iter().enumerate() {
        let nearest = peaks
            .iter()
            .copied()
            .min_by_key(|&p| (circ(i, p), p))
            .expect("at least one peak");
        let dphi = circ(i, nearest) as f64 * bin_width;
        spread += dphi * dphi * hv;
    }
    (1.0 - peaks.len() as f64 * spread).clamp(0.0, 1.0)
}

pub fn directionality(img: &GrayImage) -> f64 {
    directionality_from_histogram(&direction_histogram(img))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_image() {
        let t = tamura_features(&GrayImage::filled(40, 40, 90)).unwrap();
        assert_eq!(t.contrast, 0.0);
        assert_eq!(t.directionality, 0.0);
        assert_eq!(t.coarseness, 2.0);
    }

    #[test]
    fn too_small() {
        assert!(matches!(
            tamura_features(&GrayImage::filled(31, 40, 0)),
            Err(VisionError::ImageTooSmall { min: 32, .. })
        ));
    }

    #[test]
    fn two_level_contrast() {
        // Half 0, half 255: σ = 127.5, μ₄ = σ⁴, so contrast = σ.
        let img = GrayImage::from_fn(32, 32, |x, _| if x < 16 { 0 } else { 255 });
        assert!((contrast(&img) - 127.5).abs() < 1e-12);
    }

    #[test]
    fn single_direction_is_sharp() {
        let mut h = [0.0; DIRECTION_BINS];
        h[3] = 1.0;
        assert_eq!(directionality_from_histogram(&h), 1.0);
        let flat = [1.0 / DIRECTION_BINS as f64; DIRECTION_BINS];
        assert!(directionality_from_histogram(&flat) < 0.3);
    }
}
