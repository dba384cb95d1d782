use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::filter::{convolve_separable, gaussian_blur, Plane};
use crate::GrayImage;

pub const ORIENTATION_BINS: usize = 90;
pub const ORIENTATION_BIN_DEG: f64 = 2.0;
/// A bin is dominant when it holds at least this many segments.
pub const DOMINANT_MIN_SEGMENTS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CannyParams {
    pub sigma: f64,
    /// Hysteresis thresholds on the Sobel gradient magnitude.
    pub low: f64,
    pub high: f64,
}

impl Default for CannyParams {
    fn default() -> Self {
        Self {
            sigma: 1.4,
            low: 50.0,
            high: 150.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HoughParams {
    /// Accumulator votes needed before a line is traced.
    pub threshold: u32,
    /// Minimum segment extent as a fraction of the shorter image side.
    pub min_length_fraction: f64,
    pub max_gap: u32,
    pub max_lines: usize,
    /// Seeds the order in which edge pixels are visited.
    pub seed: u64,
}

impl Default for HoughParams {
    fn default() -> Self {
        Self {
            threshold: 30,
            min_length_fraction: 0.1,
            max_gap: 4,
            max_lines: 10_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMap {
    pub width: usize,
    pub height: usize,
    pub edges: Vec<bool>,
}

impl EdgeMap {
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.edges[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.edges.iter().filter(|e| **e).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSegment {
    pub x1: i32,
    pub y1: i32,
    pub x2: i32,
    pub y2: i32,
    /// Degrees in [0, 180).
    pub theta: f64,
}

impl LineSegment {
    pub fn new(x1: i32, y1: i32, x2: i32, y2: i32) -> Self {
        Self {
            x1,
            y1,
            x2,
            y2,
            theta: segment_theta((x2 - x1) as f64, (y2 - y1) as f64),
        }
    }

    pub fn length(&self) -> f64 {
        (((self.x2 - self.x1) as f64).powi(2) + ((self.y2 - self.y1) as f64).powi(2)).sqrt()
    }
}

/// `atan2(Δy, Δx)` in degrees, folded into [0, 180).
pub fn segment_theta(dx: f64, dy: f64) -> f64 {
    let t = dy.atan2(dx).to_degrees().rem_euclid(180.0);
    if t >= 180.0 {
        0.0
    } else {
        t
    }
}

/// Gaussian smoothing, Sobel gradients, non-maximum suppression and
/// 8-connected hysteresis. The one-pixel border never holds an edge.
pub fn canny(img: &GrayImage, params: &CannyParams) -> EdgeMap {
    let smooth = gaussian_blur(&Plane::from_gray(img, 1.0), params.sigma);
    let gx = convolve_separable(&smooth, &[-1.0, 0.0, 1.0], &[1.0, 2.0, 1.0]);
    let gy = convolve_separable(&smooth, &[1.0, 2.0, 1.0], &[-1.0, 0.0, 1.0]);
    let (w, h) = (smooth.w, smooth.h);
    let mag: Vec<f64> = gx.data.iter().zip(&gy.data).map(|(a, b)| a.hypot(*b)).collect();

    // 0 = none, 1 = weak, 2 = strong.
    let mut class = vec![0u8; w * h];
    let tan22 = std::f64::consts::FRAC_PI_8.tan();
    for y in 1..h.saturating_sub(1) {
        for x in 1..w.saturating_sub(1) {
            let i = y * w + x;
            let m = mag[i];
            if m <= params.low {
                continue;
            }
            let (ax, ay) = (gx.data[i].abs(), gy.data[i].abs());
            let (a, b) = if ay <= ax * tan22 {
                (mag[i - 1], mag[i + 1])
            } else if ax <= ay * tan22 {
                (mag[i - w], mag[i + w])
            } else if (gx.data[i] > 0.0) == (gy.data[i] > 0.0) {
                (mag[i - w - 1], mag[i + w + 1])
            } else {
                (mag[i - w + 1], mag[i + w - 1])
            };
            if m > a && m >= b {
                class[i] = if m > params.high { 2 } else { 1 };
            }
        }
    }
    let mut edges = vec![false; w * h];
    let mut stack: Vec<usize> = (0..w * h).filter(|&i| class[i] == 2).collect();
    for &i in &stack {
        edges[i] = true;
    }
    while let Some(i) = stack.pop() {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if class[j] == 1 && !edges[j] {
                    edges[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    EdgeMap {
        width: w,
        height: h,
        edges,
    }
}

const NUM_ANGLES: usize = 180;
const SHIFT: u32 = 16;

/// Progressive probabilistic Hough transform with 1 px / 1° resolution.
///
/// Edge pixels are visited in a seeded random order. Each vote that pushes
/// an accumulator cell past the threshold triggers a walk along that line
/// in both directions, bridging gaps up to `max_gap`; the walked pixels
/// are removed and their votes withdrawn, and the segment is kept when it
/// spans at least the minimum length along x or y.
pub fn probabilistic_hough(edges: &EdgeMap, params: &HoughParams) -> Vec<LineSegment> {
    let (w, h) = (edges.width as i64, edges.height as i64);
    let min_len = ((params.min_length_fraction * w.min(h) as f64).round() as i64).max(1);
    let num_rho = (2 * (w + h) + 1) as usize;
    let rho_off = (num_rho as i64 - 1) / 2;
    let trig: Vec<(f64, f64)> = (0..NUM_ANGLES)
        .map(|n| {
            let t = (n as f64).to_radians();
            (t.cos(), t.sin())
        })
        .collect();
    let rho =
        |n: usize, x: i64, y: i64| ((x as f64 * trig[n].0 + y as f64 * trig[n].1).round() as i64 + rho_off) as usize;

    let mut accum = vec![0u32; NUM_ANGLES * num_rho];
    let mut mask = edges.edges.clone();
    let mut voted = vec![false; mask.len()];
    let mut pending: Vec<(i64, i64)> = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .filter(|&(x, y)| mask[(y * w + x) as usize])
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut lines = Vec::new();

    while !pending.is_empty() {
        let idx = rng.random_range(0..pending.len());
        let (px, py) = pending.swap_remove(idx);
        let pi = (py * w + px) as usize;
        if !mask[pi] {
            continue;
        }
        let mut best = (params.threshold.saturating_sub(1), None);
        for n in 0..NUM_ANGLES {
            let cell = &mut accum[n * num_rho + rho(n, px, py)];
            *cell += 1;
            if *cell > best.0 {
                best = (*cell, Some(n));
            }
        }
        voted[pi] = true;
        let Some(n) = best.1 else {
            continue;
        };

        // Walk direction is perpendicular to the normal (cos θ, sin θ).
        let (a, b) = (-trig[n].1, trig[n].0);
        let x_major = a.abs() > b.abs();
        let (x0, y0, dx0, dy0) = if x_major {
            let dy = (b * (1i64 << SHIFT) as f64 / a.abs()).round() as i64;
            (px, (py << SHIFT) + (1 << (SHIFT - 1)), if a > 0.0 { 1 } else { -1 }, dy)
        } else {
            let dx = (a * (1i64 << SHIFT) as f64 / b.abs()).round() as i64;
            ((px << SHIFT) + (1 << (SHIFT - 1)), py, dx, if b > 0.0 { 1 } else { -1 })
        };
        let to_pixel = |x: i64, y: i64| {
            if x_major {
                (x, y >> SHIFT)
            } else {
                (x >> SHIFT, y)
            }
        };

        let mut ends = [(px, py); 2];
        for (k, end) in ends.iter_mut().enumerate() {
            let (dx, dy) = if k == 0 { (dx0, dy0) } else { (-dx0, -dy0) };
            let (mut x, mut y, mut gap) = (x0, y0, 0);
            loop {
                let (j, i) = to_pixel(x, y);
                if j < 0 || j >= w || i < 0 || i >= h {
                    break;
                }
                if mask[(i * w + j) as usize] {
                    gap = 0;
                    *end = (j, i);
                } else {
                    gap += 1;
                    if gap > params.max_gap {
                        break;
                    }
                }
                x += dx;
                y += dy;
            }
        }
        let good = (ends[1].0 - ends[0].0).abs() >= min_len || (ends[1].1 - ends[0].1).abs() >= min_len;

        for (k, end) in ends.iter().enumerate() {
            let (dx, dy) = if k == 0 { (dx0, dy0) } else { (-dx0, -dy0) };
            let (mut x, mut y) = (x0, y0);
            loop {
                let (j, i) = to_pixel(x, y);
                if j < 0 || j >= w || i < 0 || i >= h {
                    break;
                }
                let q = (i * w + j) as usize;
                if mask[q] {
                    if good && voted[q] {
                        for m in 0..NUM_ANGLES {
                            accum[m * num_rho + rho(m, j, i)] -= 1;
                        }
                        voted[q] = false;
                    }
                    mask[q] = false;
                }
                if (j, i) == *end {
                    break;
                }
                x += dx;
                y += dy;
            }
        }
        if good {
            lines.push(LineSegment::new(
                ends[0].0 as i32,
                ends[0].1 as i32,
                ends[1].0 as i32,
                ends[1].1 as i32,
            ));
            if lines.len() >= params.max_lines {
                break;
            }
        }
    }
    lines
}

pub fn detect_line_segments(img: &GrayImage, canny_params: &CannyParams, hough: &HoughParams) -> Vec<LineSegment> {
    probabilistic_hough(&canny(img, canny_params), hough)
}

/// Segment counts per 2° bin over [0, 180).
pub fn orientation_histogram(segments: &[LineSegment]) -> [usize; ORIENTATION_BINS] {
    let mut hist = [0; ORIENTATION_BINS];
    for s in segments {
        let t = s.theta.rem_euclid(180.0);
        let bin = ((t / ORIENTATION_BIN_DEG) as usize).min(ORIENTATION_BINS - 1);
        hist[bin] += 1;
    }
    hist
}

/// Number of 2° bins holding at least two segments.
pub fn dominant_orientation_count(segments: &[LineSegment]) -> usize {
    orientation_histogram(segments)
        .iter()
        .filter(|&&c| c >= DOMINANT_MIN_SEGMENTS)
        .count()
}
