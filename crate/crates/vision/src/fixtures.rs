//! Synthetic test images with known structure.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::GrayImage;

pub fn checkerboard(size: u32, cell: u32) -> GrayImage {
    GrayImage::from_fn(size, size, |x, y| {
        if (x / cell + y / cell).is_multiple_of(2) {
            0
        } else {
            255
        }
    })
}

/// Columns alternate between black and white every `period / 2` pixels.
pub fn vertical_stripes(width: u32, height: u32, period: u32) -> GrayImage {
    GrayImage::from_fn(width, height, |x, _| if (x % period) < period / 2 { 0 } else { 255 })
}

pub fn uniform_noise(width: u32, height: u32, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pixels = (0..width * height).map(|_| rng.random()).collect();
    GrayImage::new(width, height, pixels).expect("dimensions match buffer")
}

/// Bright Gaussian bump of peak 255 on black.
pub fn gaussian_blob(size: u32, sigma: f64, cx: f64, cy: f64) -> GrayImage {
    GrayImage::from_fn(size, size, |x, y| {
        let d2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
        (255.0 * (-d2 / (2.0 * sigma * sigma)).exp()).round() as u8
    })
}

fn distance_to_segment(px: f64, py: f64, a: (f64, f64), b: (f64, f64)) -> f64 {
    let (vx, vy) = (b.0 - a.0, b.1 - a.1);
    let len2 = vx * vx + vy * vy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((px - a.0) * vx + (py - a.1) * vy) / len2).clamp(0.0, 1.0)
    };
    (px - a.0 - t * vx).hypot(py - a.1 - t * vy)
}

/// Paints every pixel within `half_width` of the segment `a`–`b`.
pub fn draw_bar(img: &mut GrayImage, a: (f64, f64), b: (f64, f64), half_width: f64, value: u8) {
    let (w, h) = (img.width(), img.height());
    let pad = half_width.ceil() as i64 + 1;
    let x0 = (a.0.min(b.0).floor() as i64 - pad).max(0);
    let x1 = (a.0.max(b.0).ceil() as i64 + pad).min(w as i64 - 1);
    let y0 = (a.1.min(b.1).floor() as i64 - pad).max(0);
    let y1 = (a.1.max(b.1).ceil() as i64 + pad).min(h as i64 - 1);
    for y in y0..=y1 {
        for x in x0..=x1 {
            if distance_to_segment(x as f64, y as f64, a, b) <= half_width {
                img.set(x as u32, y as u32, value);
            }
        }
    }
}

/// Rays from the image centre in the given directions (degrees, y down).
pub fn star(size: u32, angles_deg: &[f64], half_width: f64) -> GrayImage {
    let mut img = GrayImage::filled(size, size, 0);
    let c = (size as f64 - 1.0) / 2.0;
    let r = 0.45 * size as f64;
    for a in angles_deg {
        let t = a.to_radians();
        draw_bar(&mut img, (c, c), (c + r * t.cos(), c + r * t.sin()), half_width, 255);
    }
    img
}

/// One horizontal bar of the given length, centred.
pub fn horizontal_line(width: u32, height: u32, length: u32, thickness: u32) -> GrayImage {
    let x0 = (width - length) / 2;
    let y0 = (height - thickness) / 2;
    GrayImage::from_fn(width, height, |x, y| {
        if x >= x0 && x < x0 + length && y >= y0 && y < y0 + thickness {
            255
        } else {
            0
        }
    })
}

/// Parametric wheel: rim ring, hub disc and straight spokes through the
/// centre, with optional seeded pixel noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WheelSpec {
    pub size: u32,
    pub spokes: u32,
    pub phase_deg: f64,
    /// Spoke half-width as a fraction of the image side.
    pub spoke_width: f64,
    pub rim_inner: f64,
    pub rim_outer: f64,
    pub hub: f64,
    pub intensity: u8,
    pub background: u8,
    pub noise: u8,
    pub seed: u64,
}

impl Default for WheelSpec {
    fn default() -> Self {
        Self {
            size: 256,
            spokes: 6,
            phase_deg: 15.0,
            spoke_width: 0.02,
            rim_inner: 0.38,
            rim_outer: 0.46,
            hub: 0.09,
            intensity: 210,
            background: 0,
            noise: 0,
            seed: 0,
        }
    }
}

pub fn wheel(spec: &WheelSpec) -> GrayImage {
    let n = spec.size as f64;
    let c = (n - 1.0) / 2.0;
    let mut img = GrayImage::filled(spec.size, spec.size, spec.background);
    for y in 0..spec.size {
        for x in 0..spec.size {
            let d = (x as f64 - c).hypot(y as f64 - c) / n;
            if (d >= spec.rim_inner && d <= spec.rim_outer) || d <= spec.hub {
                img.set(x, y, spec.intensity);
            }
        }
    }
    let r = spec.rim_inner * n;
    for i in 0..spec.spokes {
        let t = (spec.phase_deg + 360.0 * i as f64 / spec.spokes as f64).to_radians();
        draw_bar(
            &mut img,
            (c, c),
            (c + r * t.cos(), c + r * t.sin()),
            spec.spoke_width * n,
            spec.intensity,
        );
    }
    if spec.noise > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let amp = spec.noise as i32;
        for y in 0..spec.size {
            for x in 0..spec.size {
                let v = img.get(x, y) as i32 + rng.random_range(-amp..=amp);
                img.set(x, y, v.clamp(0, 255) as u8);
            }
        }
    }
    img
}

/// Copies `img` onto a `width × height` canvas of `fill` at offset `(dx, dy)`.
pub fn place(img: &GrayImage, width: u32, height: u32, dx: u32, dy: u32, fill: u8) -> GrayImage {
    GrayImage::from_fn(width, height, |x, y| {
        if x >= dx && y >= dy && x - dx < img.width() && y - dy < img.height() {
            img.get(x - dx, y - dy)
        } else {
            fill
        }
    })
}
