use serde::{Deserialize, Serialize};

use super::StatsError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrMatrix {
    pub names: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl CorrMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.names.iter().position(|n| n == a)?;
        let j = self.names.iter().position(|n| n == b)?;
        Some(self.values[i][j])
    }
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    (sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0)
}

/// Pairwise Pearson correlations with an exact unit diagonal.
pub fn pearson_corr_matrix(columns: &[(String, Vec<f64>)]) -> Result<CorrMatrix, StatsError> {
    let Some((_, first)) = columns.first() else {
        return Err(StatsError::EmptyInput);
    };
    let len = first.len();
    if len < 3 {
        return Err(StatsError::TooFewPoints { n: len, min: 3 });
    }
    for (name, col) in columns {
        if col.len() != len {
            return Err(StatsError::LengthMismatch {
                expected: len,
                found: col.len(),
            });
        }
        if col.iter().any(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite(format!("column `{name}`")));
        }
        if col.iter().all(|v| *v == col[0]) {
            return Err(StatsError::ZeroVariance(name.clone()));
        }
    }
    let k = columns.len();
    let mut values = vec![vec![1.0; k]; k];
    for i in 0..k {
        for j in (i + 1)..k {
            let r = pearson(&columns[i].1, &columns[j].1);
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    Ok(CorrMatrix {
        names: columns.iter().map(|(n, _)| n.clone()).collect(),
        values,
    })
}
