use std::collections::BTreeMap;

use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EmbeddedPoint, SamplingError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TsneOptions {
    pub perplexity: f64,
    pub iters: usize,
    pub learning_rate: f64,
    pub early_exaggeration: f64,
    /// Iterations run with exaggerated P; momentum also switches here.
    pub exaggeration_iters: usize,
    pub seed: u64,
}

impl Default for TsneOptions {
    fn default() -> Self {
        Self {
            perplexity: 30.0,
            iters: 1000,
            learning_rate: 200.0,
            early_exaggeration: 12.0,
            exaggeration_iters: 250,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TsneResult {
    pub points: Vec<EmbeddedPoint>,
    /// KL(P‖Q) at the final iterate.
    pub kl: f64,
    /// `(iteration, KL)` every 50 iterations, against the unexaggerated P.
    pub kl_history: Vec<(usize, f64)>,
}

const PERPLEXITY_TOL: f64 = 1e-5;
const KL_EVERY: usize = 50;

/// Row-conditional probabilities p(j|i) whose perplexity matches the target,
/// found by bisection on the Gaussian precision β = 1/(2σ²).
fn conditional_p(d2: &[f64], n: usize, perplexity: f64) -> Vec<f64> {
    let target = perplexity.ln();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let row = &d2[i * n..(i + 1) * n];
            let mut beta = 1.0;
            let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
            let mut p = vec![0.0; n];
            for _ in 0..200 {
                let dmin = row
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, d)| *d)
                    .fold(f64::INFINITY, f64::min);
                let mut sum = 0.0;
                for j in 0..n {
                    p[j] = if j == i { 0.0 } else { (-(row[j] - dmin) * beta).exp() };
                    sum += p[j];
                }
                let mut h = 0.0;
                for j in 0..n {
                    if j != i {
                        p[j] /= sum;
                        if p[j] > 0.0 {
                            h -= p[j] * p[j].ln();
                        }
                    }
                }
                let diff = h - target;
                if diff.abs() < PERPLEXITY_TOL {
                    break;
                }
                if diff > 0.0 {
                    lo = beta;
                    beta = if hi.is_finite() { (beta + hi) / 2.0 } else { beta * 2.0 };
                } else {
                    hi = beta;
                    beta = if lo.is_finite() { (beta + lo) / 2.0 } else { beta / 2.0 };
                }
            }
            p
        })
        .collect();
    rows.concat()
}

fn kl_divergence(p: &[f64], y: &[[f64; 2]]) -> f64 {
    let n = y.len();
    let (num, z) = student_kernel(y);
    let mut kl = 0.0;
    for i in 0..n {
        for j in 0..n {
            let pij = p[i * n + j];
            if i != j && pij > 0.0 {
                let q = (num[i * n + j] / z).max(1e-300);
                kl += pij * (pij / q).ln();
            }
        }
    }
    kl
}

/// Unnormalized Student-t affinities 1/(1+‖yᵢ−yⱼ‖²) and their sum.
fn student_kernel(y: &[[f64; 2]]) -> (Vec<f64>, f64) {
    let n = y.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        0.0
                    } else {
                        let dx = y[i][0] - y[j][0];
                        let dy = y[i][1] - y[j][1];
                        1.0 / (1.0 + dx * dx + dy * dy)
                    }
                })
                .collect()
        })
        .collect();
    let row_sums: Vec<f64> = rows.iter().map(|r| r.iter().sum()).collect();
    (rows.concat(), row_sums.iter().sum())
}

/// ∂KL/∂yᵢ = 4 Σⱼ (s·pᵢⱼ − qᵢⱼ)(yᵢ − yⱼ)/(1 + ‖yᵢ − yⱼ‖²), with P scaled by `s`.
fn kl_gradient(p: &[f64], y: &[[f64; 2]], scale: f64) -> Vec<[f64; 2]> {
    let n = y.len();
    let (num, z) = student_kernel(y);
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut g = [0.0; 2];
            for j in 0..n {
                if i == j {
                    continue;
                }
                let w = num[i * n + j];
                let mult = (scale * p[i * n + j] - w / z) * w;
                g[0] += mult * (y[i][0] - y[j][0]);
                g[1] += mult * (y[i][1] - y[j][1]);
            }
            [4.0 * g[0], 4.0 * g[1]]
        })
        .collect()
}

/// Exact t-SNE of `vectors` into two dimensions. Output order follows the
/// map's key order.
pub fn tsne_embed(vectors: &BTreeMap<String, Vec<f64>>, opts: &TsneOptions) -> Result<TsneResult, SamplingError> {
    let n = vectors.len();
    if n < 5 {
        return Err(SamplingError::TooFewPoints { n, min: 5 });
    }
    let ids: Vec<&String> = vectors.keys().collect();
    let x: Vec<&Vec<f64>> = vectors.values().collect();
    let dim = x[0].len();
    if let Some((id, v)) = vectors.iter().find(|(_, v)| v.len() != dim) {
        return Err(SamplingError::DimensionMismatch {
            id: id.clone(),
            expected: dim,
            found: v.len(),
        });
    }
    if !(opts.perplexity > 0.0 && opts.perplexity < (n - 1) as f64) {
        return Err(SamplingError::PerplexityTooLarge {
            perplexity: opts.perplexity,
            n,
        });
    }
    if (n as f64) < 3.0 * opts.perplexity {
        warn!(
            "t-SNE with {n} points and perplexity {}: fewer than 3 × perplexity points",
            opts.perplexity
        );
    }

    let d2: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let xi = x[i];
            x.iter()
                .map(move |xj| xi.iter().zip(xj.iter()).map(|(a, b)| (a - b) * (a - b)).sum())
        })
        .collect();
    let cond = conditional_p(&d2, n, opts.perplexity);
    let mut p = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                p[i * n + j] = ((cond[i * n + j] + cond[j * n + i]) / (2.0 * n as f64)).max(1e-12);
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let init = Normal::new(0.0, 1e-4).expect("valid normal");
    let mut y: Vec<[f64; 2]> = (0..n).map(|_| [init.sample(&mut rng), init.sample(&mut rng)]).collect();
    let mut velocity = vec![[0.0; 2]; n];
    let mut gains = vec![[1.0f64; 2]; n];
    let mut kl_history = Vec::new();

    for iter in 0..opts.iters {
        let exaggerate = iter < opts.exaggeration_iters;
        let scale = if exaggerate { opts.early_exaggeration } else { 1.0 };
        let momentum = if exaggerate { 0.5 } else { 0.8 };
        let grad = kl_gradient(&p, &y, scale);
        for i in 0..n {
            for d in 0..2 {
                let same_sign = (grad[i][d] > 0.0) == (velocity[i][d] > 0.0);
                gains[i][d] = if same_sign {
                    gains[i][d] * 0.8
                } else {
                    gains[i][d] + 0.2
                }
                .max(0.01);
                velocity[i][d] = momentum * velocity[i][d] - opts.learning_rate * gains[i][d] * grad[i][d];
                y[i][d] += velocity[i][d];
            }
        }
        for d in 0..2 {
            let mean = y.iter().map(|p| p[d]).sum::<f64>() / n as f64;
            y.iter_mut().for_each(|p| p[d] -= mean);
        }
        if (iter + 1) % KL_EVERY == 0 {
            kl_history.push((iter + 1, kl_divergence(&p, &y)));
        }
    }
    let kl = kl_divergence(&p, &y);
    Ok(TsneResult {
        points: ids
            .into_iter()
            .zip(y)
            .map(|(id, position)| EmbeddedPoint {
                id: id.clone(),
                position,
            })
            .collect(),
        kl,
        kl_history,
    })
}
