use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::kmeans::KMeansResult;
use super::{EmbeddedPoint, SamplingError};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMode {
    /// The `m_total` points closest to their own centroid, guaranteeing one
    /// point per nonempty cluster whenever `m_total` is at least the number
    /// of clusters.
    #[default]
    GlobalWithFloor,
    /// Only the single closest point of each cluster, clusters ranked by
    /// that distance.
    PerCluster,
}

/// Picks representative ids from a clustering of `points`. Ranking is by
/// distance to the assigned centroid, ties broken by id. The output is in
/// rank order.
pub fn select_representatives(
    points: &[EmbeddedPoint],
    clustering: &KMeansResult,
    m_total: usize,
    mode: SelectionMode,
) -> Result<Vec<String>, SamplingError> {
    let n = points.len();
    if clustering.assignments.len() != n {
        return Err(SamplingError::AssignmentMismatch {
            points: n,
            assignments: clustering.assignments.len(),
        });
    }
    if m_total > n {
        return Err(SamplingError::MTooLarge { m: m_total, n });
    }
    let dist = |i: usize| {
        let c = clustering.centroids[clustering.assignments[i]];
        let p = points[i].position;
        ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt()
    };
    let mut ranked: Vec<(f64, &str, usize)> = (0..n).map(|i| (dist(i), points[i].id.as_str(), i)).collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(b.1)));

    // Best point of each nonempty cluster, in rank order.
    let mut seen = BTreeSet::new();
    let heads: Vec<usize> = ranked
        .iter()
        .filter(|(_, _, i)| seen.insert(clustering.assignments[*i]))
        .map(|(_, _, i)| *i)
        .collect();

    let chosen: Vec<usize> = match mode {
        SelectionMode::PerCluster => {
            if m_total > heads.len() {
                return Err(SamplingError::MTooLarge {
                    m: m_total,
                    n: heads.len(),
                });
            }
            heads.into_iter().take(m_total).collect()
        }
        SelectionMode::GlobalWithFloor => {
            if m_total < heads.len() {
                ranked.iter().take(m_total).map(|r| r.2).collect()
            } else {
                let mut picked: BTreeSet<usize> = heads.iter().copied().collect();
                for r in &ranked {
                    if picked.len() >= m_total {
                        break;
                    }
                    picked.insert(r.2);
                }
                ranked.iter().filter(|r| picked.contains(&r.2)).map(|r| r.2).collect()
            }
        }
    };
    Ok(chosen.into_iter().map(|i| points[i].id.clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(id: &str, x: f64, y: f64) -> EmbeddedPoint {
        EmbeddedPoint {
            id: id.into(),
            position: [x, y],
        }
    }

    fn clustering(centroids: Vec<[f64; 2]>, assignments: Vec<usize>) -> KMeansResult {
        KMeansResult {
            centroids,
            assignments,
            inertia: 0.0,
            iterations: 0,
            inertia_history: vec![],
        }
    }

    #[test]
    fn floor_keeps_far_cluster() {
        let pts = vec![
            pt("a", 0.0, 0.0),
            pt("b", 0.1, 0.0),
            pt("c", 0.2, 0.0),
            pt("d", 10.0, 0.0),
            pt("e", 12.0, 0.0),
        ];
        let c = clustering(vec![[0.1, 0.0], [11.0, 0.0]], vec![0, 0, 0, 1, 1]);
        let global = select_representatives(&pts, &c, 2, SelectionMode::GlobalWithFloor).unwrap();
        assert_eq!(global, vec!["b", "d"]);
        let three = select_representatives(&pts, &c, 3, SelectionMode::GlobalWithFloor).unwrap();
        assert_eq!(three, vec!["b", "a", "d"]);
        let per = select_representatives(&pts, &c, 2, SelectionMode::PerCluster).unwrap();
        assert_eq!(per, vec!["b", "d"]);
        assert!(select_representatives(&pts, &c, 3, SelectionMode::PerCluster).is_err());
        assert!(select_representatives(&pts, &c, 6, SelectionMode::GlobalWithFloor).is_err());
        let all = select_representatives(&pts, &c, 5, SelectionMode::GlobalWithFloor).unwrap();
        assert_eq!(all.len(), 5);
    }
}
