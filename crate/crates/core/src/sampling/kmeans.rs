use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SamplingError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct KMeansOptions {
    pub seed: u64,
    pub max_iters: usize,
    pub restarts: usize,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            max_iters: 300,
            restarts: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansResult {
    pub centroids: Vec<[f64; 2]>,
    /// Cluster index per input point, in input order.
    pub assignments: Vec<usize>,
    pub inertia: f64,
    pub iterations: usize,
    /// Inertia after every assignment step of the winning restart.
    pub inertia_history: Vec<f64>,
}

fn dist2(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

fn nearest(p: &[f64; 2], centroids: &[[f64; 2]]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, ctr) in centroids.iter().enumerate() {
        let d = dist2(p, ctr);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus(points: &[[f64; 2]], k: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; 2]> {
    let n = points.len();
    let mut centroids = vec![points[rng.random_range(0..n)]];
    let mut d: Vec<f64> = points.iter().map(|p| dist2(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, di) in d.iter().enumerate() {
                if *di > 0.0 && target < *di {
                    chosen = i;
                    break;
                }
                target -= di;
            }
            if d[chosen] == 0.0 {
                chosen = d.iter().rposition(|v| *v > 0.0).expect("positive total");
            }
            chosen
        } else {
            // Every point coincides with a centroid already.
            0
        };
        let c = points[pick];
        for (i, p) in points.iter().enumerate() {
            d[i] = d[i].min(dist2(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

struct Run {
    centroids: Vec<[f64; 2]>,
    assignments: Vec<usize>,
    inertia: f64,
    iterations: usize,
    history: Vec<f64>,
}

fn lloyd(points: &[[f64; 2]], mut centroids: Vec<[f64; 2]>, max_iters: usize) -> Run {
    let n = points.len();
    let k = centroids.len();
    let mut assignments = vec![usize::MAX; n];
    let mut history = Vec::<f64>::new();
    let mut iterations = 0;
    loop {
        let mut changed = false;
        let mut inertia = 0.0;
        let mut cost = vec![0.0; n];
        for (i, p) in points.iter().enumerate() {
            let (c, d) = nearest(p, &centroids);
            if assignments[i] != c {
                assignments[i] = c;
                changed = true;
            }
            cost[i] = d;
            inertia += d;
        }
        // An empty cluster takes over the point farthest from its centroid.
        let mut sizes = vec![0usize; k];
        for &a in &assignments {
            sizes[a] += 1;
        }
        for c in 0..k {
            if sizes[c] == 0 {
                let far = (0..n)
                    .filter(|&i| sizes[assignments[i]] > 1)
                    .max_by(|&a, &b| cost[a].total_cmp(&cost[b]).then(b.cmp(&a)));
                if let Some(i) = far {
                    inertia -= cost[i];
                    cost[i] = 0.0;
                    sizes[assignments[i]] -= 1;
                    sizes[c] += 1;
                    assignments[i] = c;
                    centroids[c] = points[i];
                    changed = true;
                }
            }
        }
        if let Some(prev) = history.last() {
            debug_assert!(inertia <= prev + 1e-9 * prev.max(1.0), "inertia increased");
        }
        history.push(inertia);
        if !changed || iterations >= max_iters {
            return Run {
                centroids,
                assignments,
                inertia,
                iterations,
                history,
            };
        }
        iterations += 1;
        let mut sums = vec![[0.0; 2]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assignments) {
            sums[a][0] += p[0];
            sums[a][1] += p[1];
            counts[a] += 1;
        }
        for c in 0..k {
            if counts[c] > 0 {
                centroids[c] = [sums[c][0] / counts[c] as f64, sums[c][1] / counts[c] as f64];
            }
        }
    }
}

/// k-means with k-means++ seeding, best of `restarts` by inertia.
///
/// Points are processed in lexicographic coordinate order, so the result
/// does not depend on input order beyond the mapping of assignments.
pub fn kmeans(points: &[[f64; 2]], k: usize, opts: &KMeansOptions) -> Result<KMeansResult, SamplingError> {
    let n = points.len();
    if k == 0 || k > n {
        return Err(SamplingError::KTooLarge { k, n });
    }
    if let Some(i) = points.iter().position(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err(SamplingError::NonFinite(i));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        points[a][0]
            .total_cmp(&points[b][0])
            .then(points[a][1].total_cmp(&points[b][1]))
    });
    let sorted: Vec<[f64; 2]> = order.iter().map(|&i| points[i]).collect();

    let mut best: Option<Run> = None;
    for r in 0..opts.restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(r as u64);
        let run = lloyd(&sorted, plus_plus(&sorted, k, &mut rng), opts.max_iters);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one restart");
    let mut assignments = vec![0; n];
    for (pos, &orig) in order.iter().enumerate() {
        assignments[orig] = best.assignments[pos];
    }
    Ok(KMeansResult {
        centroids: best.centroids,
        assignments,
        inertia: best.inertia,
        iterations: best.iterations,
        inertia_history: best.history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_equals_n() {
        let pts = [[0.0, 0.0], [1.0, 2.0], [5.0, 1.0], [3.0, 3.0]];
        let r = kmeans(&pts, 4, &KMeansOptions::default()).unwrap();
        assert_eq!(r.inertia, 0.0);
        let mut a = r.assignments.clone();
        a.sort_unstable();
        a.dedup();
        assert_eq!(a.len(), 4);
    }

    #[test]
    fn line_instance() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [10.0, 0.0], [11.0, 0.0]];
        let r = kmeans(&pts, 2, &KMeansOptions::default()).unwrap();
        let mut c = r.centroids.clone();
        c.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert_eq!(c, vec![[0.5, 0.0], [10.5, 0.0]]);
        assert_eq!(r.inertia, 1.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            kmeans(&[[0.0, 0.0]], 2, &KMeansOptions::default()),
            Err(SamplingError::KTooLarge { k: 2, n: 1 })
        ));
        assert!(kmeans(&[[0.0, 0.0]], 0, &KMeansOptions::default()).is_err());
    }

    #[test]
    fn duplicate_points() {
        let pts = [[1.0, 1.0]; 5];
        let r = kmeans(&pts, 3, &KMeansOptions::default()).unwrap();
        assert_eq!(r.inertia, 0.0);
    }
}
