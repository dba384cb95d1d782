use serde::{Deserialize, Serialize};

use crate::{GrayImage, VisionError};

/// The four Haralick statistics used as features.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlcmStats {
    pub contrast: f64,
    /// `None` when the marginal variance is zero.
    pub correlation: Option<f64>,
    pub energy: f64,
    pub homogeneity: f64,
}

impl GlcmStats {
    pub fn correlation(&self) -> Result<f64, VisionError> {
        self.correlation.ok_or(VisionError::DegenerateImage)
    }
}

/// Pixel displacements `(dx, dy)` for 0°, 45°, 90° and 135°; y grows
/// downward, so 45° points up and to the right.
pub fn offsets(distance: u32) -> [(i64, i64); 4] {
    let d = distance as i64;
    [(d, 0), (d, -d), (0, -d), (-d, -d)]
}

fn check(levels: u32, distance: u32) -> Result<(), VisionError> {
    if !(2..=256).contains(&levels) {
        return Err(VisionError::InvalidParameter(format!(
            "GLCM levels must lie in [2, 256], got {levels}"
        )));
    }
    if distance == 0 {
        return Err(VisionError::InvalidParameter("GLCM distance must be ≥ 1".into()));
    }
    Ok(())
}

pub fn quantize(v: u8, levels: u32) -> usize {
    (v as u32 * levels / 256) as usize
}

/// Symmetric co-occurrence matrix for one offset, normalized to sum 1,
/// row-major `levels × levels`.
pub fn cooccurrence(img: &GrayImage, levels: u32, dx: i64, dy: i64) -> Result<Vec<f64>, VisionError> {
    let l = levels as usize;
    let (w, h) = (img.width() as i64, img.height() as i64);
    let mut counts = vec![0u64; l * l];
    let mut total = 0u64;
    for y in 0..h {
        let y2 = y + dy;
        if y2 < 0 || y2 >= h {
            continue;
        }
        for x in 0..w {
            let x2 = x + dx;
            if x2 < 0 || x2 >= w {
                continue;
            }
            let a = quantize(img.get(x as u32, y as u32), levels);
            let b = quantize(img.get(x2 as u32, y2 as u32), levels);
            counts[a * l + b] += 1;
            counts[b * l + a] += 1;
            total += 2;
        }
    }
    if total == 0 {
        let min = dx.unsigned_abs().max(dy.unsigned_abs()) as u32 + 1;
        return Err(VisionError::ImageTooSmall {
            width: img.width(),
            height: img.height(),
            min,
        });
    }
    Ok(counts.into_iter().map(|c| c as f64 / total as f64).collect())
}

pub fn matrix_stats(p: &[f64], levels: u32) -> GlcmStats {
    let l = levels as usize;
    let (mut contrast, mut energy, mut homogeneity, mut mu) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..l {
        for j in 0..l {
            let v = p[i * l + j];
            if v == 0.0 {
                continue;
            }
            let d = i as f64 - j as f64;
            contrast += v * d * d;
            energy += v * v;
            homogeneity += v / (1.0 + d * d);
            mu += v * i as f64;
        }
    }
    let (mut var, mut cov) = (0.0, 0.0);
    for i in 0..l {
        for j in 0..l {
            let v = p[i * l + j];
            if v != 0.0 {
                var += v * (i as f64 - mu).powi(2);
                cov += v * (i as f64 - mu) * (j as f64 - mu);
            }
        }
    }
    // Symmetric matrix: both marginals share μ and σ.
    let correlation = (var > 0.0).then(|| (cov / var).clamp(-1.0, 1.0));
    GlcmStats {
        contrast,
        correlation,
        energy,
        homogeneity,
    }
}

/// Statistics for a single offset.
pub fn glcm_offset_stats(img: &GrayImage, levels: u32, dx: i64, dy: i64) -> Result<GlcmStats, VisionError> {
    check(levels, 1)?;
    Ok(matrix_stats(&cooccurrence(img, levels, dx, dy)?, levels))
}

/// Statistics averaged over the four offsets at `distance`.
pub fn glcm_features(img: &GrayImage, levels: u32, distance: u32) -> Result<GlcmStats, VisionError> {
    check(levels, distance)?;
    let mut acc = GlcmStats {
        contrast: 0.0,
        correlation: Some(0.0),
        energy: 0.0,
        homogeneity: 0.0,
    };
    for (dx, dy) in offsets(distance) {
        let s = matrix_stats(&cooccurrence(img, levels, dx, dy)?, levels);
        acc.contrast += s.contrast / 4.0;
        acc.energy += s.energy / 4.0;
        acc.homogeneity += s.homogeneity / 4.0;
        acc.correlation = match (acc.correlation, s.correlation) {
            (Some(a), Some(c)) => Some(a + c / 4.0),
            _ => None,
        };
    }
    Ok(acc)
}
