use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::matrix::{check_connectivity, Connectivity, WinMatrix};
use super::RankingError;
use crate::corpus::StyleKeyword;
use crate::stats::summary::quantile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BtOptions {
    /// Stop once the largest absolute change in any score falls below this.
    pub tol: f64,
    pub max_iters: usize,
    /// Convergence also requires the largest absolute gradient component to
    /// be at most this.
    pub grad_tol: f64,
    /// Added to every off-diagonal win count before fitting.
    pub pseudo_count: f64,
}

impl Default for BtOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iters: 100_000,
            grad_tol: 1e-6,
            pseudo_count: 0.0,
        }
    }
}

/// Fitted log-strengths, centred to mean zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BtResult {
    pub style: Option<StyleKeyword>,
    pub ids: Vec<String>,
    pub scores: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub max_abs_update_at_exit: f64,
    /// Largest absolute log-likelihood gradient component at exit.
    pub max_abs_gradient: f64,
}

impl BtResult {
    pub fn score_map(&self) -> BTreeMap<String, f64> {
        self.ids.iter().cloned().zip(self.scores.iter().copied()).collect()
    }

    pub fn score(&self, id: &str) -> Option<f64> {
        self.ids.iter().position(|i| i == id).map(|k| self.scores[k])
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

struct Counts {
    n: usize,
    /// Symmetric comparison totals.
    pairs: Vec<f64>,
    total_wins: Vec<f64>,
}

impl Counts {
    fn new(m: &WinMatrix, pseudo: f64) -> Self {
        let n = m.len();
        let mut wins = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    wins[i * n + j] = m.wins(i, j) as f64 + pseudo;
                }
            }
        }
        let mut pairs = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                pairs[i * n + j] = wins[i * n + j] + wins[j * n + i];
            }
        }
        let total_wins = (0..n).map(|i| wins[i * n..(i + 1) * n].iter().sum()).collect();
        Self { n, pairs, total_wins }
    }

    fn gradient(&self, lambda: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let expected: f64 = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| self.pairs[i * n + j] * sigmoid(lambda[i] - lambda[j]))
                    .sum();
                self.total_wins[i] - expected
            })
            .collect()
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc: f64, g| acc.max(g.abs()))
}

fn centre(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
}

/// Maximum-likelihood Bradley-Terry fit by minorization-maximization.
///
/// Each sweep sets `π_i ← W_i / Σ_j n_ij / (π_i + π_j)` for all items at
/// once, then recentres `λ = ln π` to mean zero.
pub fn fit_bradley_terry(m: &WinMatrix, opts: &BtOptions) -> Result<BtResult, RankingError> {
    let n = m.len();
    if n < 2 {
        return Err(RankingError::TooFewItems(n));
    }
    if opts.pseudo_count <= 0.0 {
        if let Connectivity::Components(c) = check_connectivity(m) {
            return Err(RankingError::DisconnectedGraph(c));
        }
        let degenerate: Vec<String> = (0..n)
            .filter(|&i| m.total_wins(i) == 0 || m.total_losses(i) == 0)
            .map(|i| m.ids()[i].clone())
            .collect();
        if !degenerate.is_empty() {
            return Err(RankingError::DegenerateItem(degenerate));
        }
    }
    let counts = Counts::new(m, opts.pseudo_count.max(0.0));

    let mut lambda = vec![0.0f64; n];
    let mut next = vec![0.0; n];
    let mut update = f64::INFINITY;
    let mut iterations = 0;
    while iterations < opts.max_iters {
        iterations += 1;
        let strength: Vec<f64> = lambda.iter().map(|l| l.exp()).collect();
        for i in 0..n {
            let mut denom = 0.0;
            for j in 0..n {
                let nij = counts.pairs[i * n + j];
                if j != i && nij > 0.0 {
                    denom += nij / (strength[i] + strength[j]);
                }
            }
            next[i] = (counts.total_wins[i] / denom).ln();
        }
        centre(&mut next);
        update = lambda.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        std::mem::swap(&mut lambda, &mut next);
        if update < opts.tol && max_abs(&counts.gradient(&lambda)) <= opts.grad_tol {
            break;
        }
    }
    let max_abs_gradient = max_abs(&counts.gradient(&lambda));
    let converged = update < opts.tol && max_abs_gradient <= opts.grad_tol && lambda.iter().all(|l| l.is_finite());
    let result = BtResult {
        style: m.style.clone(),
        ids: m.ids().to_vec(),
        scores: lambda,
        iterations,
        converged,
        max_abs_update_at_exit: update,
        max_abs_gradient,
    };
    if converged {
        Ok(result)
    } else {
        Err(RankingError::NotConverged(Box::new(result)))
    }
}

/// Summary row over the fitted scores; `std` uses the n−1 denominator and
/// quantiles interpolate linearly between order statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BtDescriptives {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    /// False for a single item, where `std` is reported as 0.
    pub std_defined: bool,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
    pub range: f64,
}

pub fn bt_descriptives(r: &BtResult) -> BtDescriptives {
    let mut v = r.scores.clone();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let mean = v.iter().sum::<f64>() / n as f64;
    let (std, std_defined) = if n > 1 {
        let ss: f64 = v.iter().map(|x| (x - mean).powi(2)).sum();
        ((ss / (n - 1) as f64).sqrt(), true)
    } else {
        (0.0, false)
    };
    BtDescriptives {
        count: n,
        mean,
        std,
        std_defined,
        min: v[0],
        q25: quantile(&v, 0.25),
        median: quantile(&v, 0.5),
        q75: quantile(&v, 0.75),
        max: v[n - 1],
        range: v[n - 1] - v[0],
    }
}
