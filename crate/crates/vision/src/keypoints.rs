use serde::{Deserialize, Serialize};

use crate::filter::{gaussian_blur, Plane};
use crate::{require_side, GrayImage, VisionError};

pub const KEYPOINT_MIN_SIDE: u32 = 32;
/// Blur assumed to be present in the input image.
const INPUT_SIGMA: f64 = 0.5;
/// Extrema closer than this to an octave border are ignored.
const BORDER: usize = 5;
const MAX_REFINE_STEPS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DogParams {
    pub sigma: f64,
    pub intervals: usize,
    /// Minimum |D| at the refined extremum, intensities in [0, 1].
    pub contrast_threshold: f64,
    /// Principal-curvature ratio limit.
    pub edge_ratio: f64,
    /// Octaves are built while the shorter side is at least this long.
    pub min_octave_side: usize,
}

impl Default for DogParams {
    fn default() -> Self {
        Self {
            sigma: 1.6,
            intervals: 3,
            contrast_threshold: 0.03,
            edge_ratio: 10.0,
            min_octave_side: 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Keypoint {
    /// Refined position in input-image pixels.
    pub x: f64,
    pub y: f64,
    pub octave: usize,
    /// Scale in input-image pixels.
    pub sigma: f64,
    /// Interpolated DoG value.
    pub response: f64,
}

fn check(p: &DogParams) -> Result<(), VisionError> {
    let ok = p.sigma > INPUT_SIGMA
        && p.sigma.is_finite()
        && p.intervals >= 1
        && p.contrast_threshold >= 0.0
        && p.edge_ratio >= 1.0
        && p.min_octave_side >= 2 * BORDER + 3;
    if ok {
        Ok(())
    } else {
        Err(VisionError::InvalidParameter(format!("DoG parameters {p:?}")))
    }
}

fn solve3(h: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(h);
    if d.abs() < 1e-15 {
        return None;
    }
    let mut out = [0.0; 3];
    for (c, o) in out.iter_mut().enumerate() {
        let mut m = h;
        for r in 0..3 {
            m[r][c] = b[r];
        }
        *o = det(m) / d;
    }
    Some(out)
}

struct Octave<'a> {
    dog: &'a [Plane],
    w: usize,
    h: usize,
}

impl Octave<'_> {
    fn d(&self, s: usize, x: usize, y: usize) -> f64 {
        self.dog[s].at(x, y)
    }

    fn is_extremum(&self, s: usize, x: usize, y: usize) -> bool {
        let v = self.d(s, x, y);
        let mut is_max = true;
        let mut is_min = true;
        for ds in [s - 1, s, s + 1] {
            for yy in y - 1..=y + 1 {
                for xx in x - 1..=x + 1 {
                    if ds == s && yy == y && xx == x {
                        continue;
                    }
                    let n = self.d(ds, xx, yy);
                    is_max &= v > n;
                    is_min &= v < n;
                }
            }
            if !is_max && !is_min {
                return false;
            }
        }
        is_max || is_min
    }

    fn derivatives(&self, s: usize, x: usize, y: usize) -> ([f64; 3], [[f64; 3]; 3]) {
        let d = |ds: isize, dx: isize, dy: isize| {
            self.d(
                (s as isize + ds) as usize,
                (x as isize + dx) as usize,
                (y as isize + dy) as usize,
            )
        };
        let v = d(0, 0, 0);
        let g = [
            (d(0, 1, 0) - d(0, -1, 0)) / 2.0,
            (d(0, 0, 1) - d(0, 0, -1)) / 2.0,
            (d(1, 0, 0) - d(-1, 0, 0)) / 2.0,
        ];
        let dxx = d(0, 1, 0) + d(0, -1, 0) - 2.0 * v;
        let dyy = d(0, 0, 1) + d(0, 0, -1) - 2.0 * v;
        let dss = d(1, 0, 0) + d(-1, 0, 0) - 2.0 * v;
        let dxy = (d(0, 1, 1) - d(0, -1, 1) - d(0, 1, -1) + d(0, -1, -1)) / 4.0;
        let dxs = (d(1, 1, 0) - d(1, -1, 0) - d(-1, 1, 0) + d(-1, -1, 0)) / 4.0;
        let dys = (d(1, 0, 1) - d(1, 0, -1) - d(-1, 0, 1) + d(-1, 0, -1)) / 4.0;
        (g, [[dxx, dxy, dxs], [dxy, dyy, dys], [dxs, dys, dss]])
    }

    /// Quadratic refinement; `None` if the extremum drifts away, stays
    /// unstable, or fails the contrast or edge tests.
    fn refine(&self, p: &DogParams, mut s: usize, mut x: usize, mut y: usize) -> Option<(f64, f64, f64, f64)> {
        for _ in 0..MAX_REFINE_STEPS {
            let (g, hm) = self.derivatives(s, x, y);
            let off = solve3(hm, [-g[0], -g[1], -g[2]])?;
            if off.iter().all(|o| o.abs() < 0.5) {
                let value = self.d(s, x, y) + 0.5 * (g[0] * off[0] + g[1] * off[1] + g[2] * off[2]);
                if value.abs() < p.contrast_threshold {
                    return None;
                }
                let tr = hm[0][0] + hm[1][1];
                let det = hm[0][0] * hm[1][1] - hm[0][1] * hm[0][1];
                let r = p.edge_ratio;
                if det <= 0.0 || tr * tr * r >= (r + 1.0) * (r + 1.0) * det {
                    return None;
                }
                return Some((x as f64 + off[0], y as f64 + off[1], s as f64 + off[2], value));
            }
            if off.iter().any(|o| o.abs() > 1e6) {
                return None;
            }
            let step = |v: usize, o: f64| (v as f64 + o.round()) as isize;
            let (nx, ny, ns) = (step(x, off[0]), step(y, off[1]), step(s, off[2]));
            if ns < 1
                || ns > p.intervals as isize
                || nx < BORDER as isize
                || ny < BORDER as isize
                || nx >= (self.w - BORDER) as isize
                || ny >= (self.h - BORDER) as isize
            {
                return None;
            }
            (x, y, s) = (nx as usize, ny as usize, ns as usize);
        }
        None
    }
}

/// Difference-of-Gaussians scale-space extrema with sub-pixel refinement,
/// contrast and edge-response rejection. Detection only: no orientation
/// or descriptor.
pub fn detect_keypoints(img: &GrayImage, params: &DogParams) -> Result<Vec<Keypoint>, VisionError> {
    require_side(img, KEYPOINT_MIN_SIDE)?;
    check(params)?;
    let s = params.intervals;
    let k = 2f64.powf(1.0 / s as f64);
    let sigmas: Vec<f64> = (0..s + 3).map(|i| params.sigma * k.powi(i as i32)).collect();
    let increments: Vec<f64> = (1..s + 3)
        .map(|i| (sigmas[i].powi(2) - sigmas[i - 1].powi(2)).sqrt())
        .collect();
    let prefilter = 0.5 * params.contrast_threshold / s as f64;

    let mut base = gaussian_blur(
        &Plane::from_gray(img, 1.0 / 255.0),
        (params.sigma.powi(2) - INPUT_SIGMA.powi(2)).sqrt(),
    );
    let mut out = Vec::new();
    let mut octave = 0;
    while base.w.min(base.h) >= params.min_octave_side {
        let mut gauss = vec![base.clone()];
        for inc in &increments {
            let next = gaussian_blur(gauss.last().expect("nonempty"), *inc);
            gauss.push(next);
        }
        let dog: Vec<Plane> = gauss
            .windows(2)
            .map(|pair| Plane {
                w: pair[0].w,
                h: pair[0].h,
                data: pair[1].data.iter().zip(&pair[0].data).map(|(b, a)| b - a).collect(),
            })
            .collect();
        let oct = Octave {
            dog: &dog,
            w: base.w,
            h: base.h,
        };
        let scale = (1usize << octave) as f64;
        for layer in 1..=s {
            for y in BORDER..base.h - BORDER {
                for x in BORDER..base.w - BORDER {
                    if oct.d(layer, x, y).abs() <= prefilter || !oct.is_extremum(layer, x, y) {
                        continue;
                    }
                    if let Some((rx, ry, rs, value)) = oct.refine(params, layer, x, y) {
                        out.push(Keypoint {
                            x: rx * scale,
                            y: ry * scale,
                            octave,
                            sigma: params.sigma * k.powf(rs) * scale,
                            response: value,
                        });
                    }
                }
            }
        }
        base = gauss[s].downsample();
        octave += 1;
    }
    Ok(out)
}

pub fn keypoint_count(img: &GrayImage, params: &DogParams) -> Result<usize, VisionError> {
    detect_keypoints(img, params).map(|k| k.len())
}
