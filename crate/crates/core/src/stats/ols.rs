use std::collections::BTreeMap;

use log::warn;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::dist::{f_sf, t_quantile, t_two_sided_p};
use super::StatsError;
use crate::corpus::{FeatureTable, StyleKeyword};

pub const INTERCEPT: &str = "intercept";

/// Singular-value ratio below which a design is treated as rank deficient.
pub const RANK_TOL: f64 = 1e-10;

/// Predictors for one fit, row-major. The intercept column is implicit and
/// prepended at fit time when `intercept` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignMatrix {
    pub row_ids: Vec<String>,
    pub column_names: Vec<String>,
    values: Vec<f64>,
    pub intercept: bool,
}

impl DesignMatrix {
    pub fn new(
        row_ids: Vec<String>,
        column_names: Vec<String>,
        rows: &[Vec<f64>],
        intercept: bool,
    ) -> Result<Self, StatsError> {
        if rows.len() != row_ids.len() {
            return Err(StatsError::LengthMismatch {
                expected: row_ids.len(),
                found: rows.len(),
            });
        }
        let k = column_names.len();
        let mut values = Vec::with_capacity(rows.len() * k);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(StatsError::LengthMismatch {
                    expected: k,
                    found: row.len(),
                });
            }
            if let Some(c) = row.iter().position(|v| !v.is_finite()) {
                return Err(StatsError::NonFinite(format!(
                    "row `{}`, column `{}`",
                    row_ids[r], column_names[c]
                )));
            }
            values.extend_from_slice(row);
        }
        Ok(Self {
            row_ids,
            column_names,
            values,
            intercept,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.row_ids.len()
    }

    /// Number of explicit predictor columns, not counting the intercept.
    pub fn n_cols(&self) -> usize {
        self.column_names.len()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n_cols() + col]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|r| self.get(r, col)).collect()
    }

    /// Names of columns whose values are all identical.
    pub fn zero_variance_columns(&self) -> Vec<String> {
        (0..self.n_cols())
            .filter(|&c| {
                let col = self.column(c);
                col.iter().all(|v| *v == col[0])
            })
            .map(|c| self.column_names[c].clone())
            .collect()
    }

    pub fn without_columns(&self, drop: &[String]) -> Self {
        let keep: Vec<usize> = (0..self.n_cols())
            .filter(|&c| !drop.contains(&self.column_names[c]))
            .collect();
        let mut values = Vec::with_capacity(self.n_rows() * keep.len());
        for r in 0..self.n_rows() {
            values.extend(keep.iter().map(|&c| self.get(r, c)));
        }
        Self {
            row_ids: self.row_ids.clone(),
            column_names: keep.iter().map(|&c| self.column_names[c].clone()).collect(),
            values,
            intercept: self.intercept,
        }
    }

    /// Names of all fitted coefficients in order.
    pub fn coefficient_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.n_cols() + 1);
        if self.intercept {
            names.push(INTERCEPT.to_string());
        }
        names.extend(self.column_names.iter().cloned());
        names
    }

    fn to_matrix(&self) -> DMatrix<f64> {
        let off = usize::from(self.intercept);
        let k = self.n_cols() + off;
        DMatrix::from_fn(self.n_rows(), k, |r, c| {
            if self.intercept && c == 0 {
                1.0
            } else {
                self.get(r, c - off)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub beta: f64,
    pub std_err: f64,
    pub t: f64,
    pub p: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl Coefficient {
    fn new(name: String, beta: f64, std_err: f64, df: usize) -> Self {
        let t = if std_err > 0.0 {
            beta / std_err
        } else if beta == 0.0 {
            0.0
        } else {
            beta.signum() * f64::INFINITY
        };
        let p = t_two_sided_p(t, df as f64);
        let half = t_quantile(0.975, df as f64) * std_err;
        Self {
            name,
            beta,
            std_err,
            t,
            p,
            ci_lo: beta - half,
            ci_hi: beta + half,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub style: Option<StyleKeyword>,
    pub coefficients: Vec<Coefficient>,
    pub r2: f64,
    pub adj_r2: f64,
    pub rss: f64,
    pub tss: f64,
    pub df_resid: usize,
    pub n: usize,
    pub k: usize,
    pub intercept: bool,
    /// σ̂²(XᵀX)⁻¹, in coefficient order.
    pub covariance: Vec<Vec<f64>>,
    /// Predictors removed before fitting because they were constant.
    pub dropped_columns: Vec<String>,
    /// Row ids removed before fitting because a value was missing.
    pub excluded_rows: Vec<String>,
    /// Hash of the response vector, used to check that two fits are nested.
    pub response_digest: String,
}

impl RegressionResult {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.coefficients.iter().map(|c| c.name.as_str())
    }

    /// Inference for Σ wᵢβᵢ, e.g. a per-group slope in an interaction model.
    pub fn linear_combination(&self, name: &str, weights: &[(&str, f64)]) -> Option<Coefficient> {
        let mut idx = Vec::with_capacity(weights.len());
        for (n, w) in weights {
            idx.push((self.coefficients.iter().position(|c| c.name == *n)?, *w));
        }
        let beta = idx.iter().map(|&(i, w)| w * self.coefficients[i].beta).sum();
        let mut var = 0.0;
        for &(i, wi) in &idx {
            for &(j, wj) in &idx {
                var += wi * wj * self.covariance[i][j];
            }
        }
        Some(Coefficient::new(
            name.to_string(),
            beta,
            var.max(0.0).sqrt(),
            self.df_resid,
        ))
    }
}

fn digest(y: &[f64]) -> String {
    let mut h = Sha256::new();
    for v in y {
        h.update(v.to_bits().to_le_bytes());
    }
    hex::encode(h.finalize())
}

/// Ordinary least squares via a Householder QR decomposition.
pub fn ols_fit(x: &DesignMatrix, y: &[f64]) -> Result<RegressionResult, StatsError> {
    let n = x.n_rows();
    if y.len() != n {
        return Err(StatsError::LengthMismatch {
            expected: n,
            found: y.len(),
        });
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite(format!("response row `{}`", x.row_ids[i])));
    }
    let names = x.coefficient_names();
    let k = names.len();
    if k == 0 || n <= k {
        return Err(StatsError::TooFewRows { n, k });
    }
    let xm = x.to_matrix();
    let sv = xm.clone().svd(false, false).singular_values;
    let smax = sv.max();
    let smin = sv.min();
    if smax == 0.0 || smin / smax <= RANK_TOL {
        return Err(StatsError::RankDeficient {
            ratio: if smax == 0.0 { 0.0 } else { smin / smax },
        });
    }

    let yv = DVector::from_column_slice(y);
    let qr = xm.clone().qr();
    let q = qr.q();
    let r = qr.r();
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or(StatsError::RankDeficient { ratio: 0.0 })?;
    let beta = &r_inv * (q.transpose() * &yv);
    let resid = &yv - &xm * &beta;
    let rss = resid.norm_squared();
    let df = n - k;
    let sigma2 = rss / df as f64;
    let cov = (&r_inv * r_inv.transpose()) * sigma2;

    let mean_y = y.iter().sum::<f64>() / n as f64;
    let tss = if x.intercept {
        y.iter().map(|v| (v - mean_y).powi(2)).sum::<f64>()
    } else {
        y.iter().map(|v| v * v).sum::<f64>()
    };
    let r2 = if tss > 0.0 { 1.0 - rss / tss } else { 1.0 };
    let dof_total = if x.intercept { n - 1 } else { n } as f64;
    let adj_r2 = 1.0 - (1.0 - r2) * dof_total / df as f64;

    let coefficients = names
        .into_iter()
        .enumerate()
        .map(|(i, name)| Coefficient::new(name, beta[i], cov[(i, i)].max(0.0).sqrt(), df))
        .collect();
    Ok(RegressionResult {
        style: None,
        coefficients,
        r2,
        adj_r2,
        rss,
        tss,
        df_resid: df,
        n,
        k,
        intercept: x.intercept,
        covariance: (0..k).map(|i| (0..k).map(|j| cov[(i, j)]).collect()).collect(),
        dropped_columns: Vec::new(),
        excluded_rows: Vec::new(),
        response_digest: digest(y),
    })
}

/// Fits `y ~ table columns` over `ids` with listwise deletion of rows with
/// a missing predictor or response, after dropping constant predictors.
pub fn fit_table_model(
    style: Option<&StyleKeyword>,
    table: &FeatureTable,
    ids: &[String],
    y: &BTreeMap<String, f64>,
) -> Result<RegressionResult, StatsError> {
    let mut row_ids = Vec::new();
    let mut rows = Vec::new();
    let mut response = Vec::new();
    let mut excluded = Vec::new();
    for id in ids {
        let row = table.rows.get(id);
        match (row, y.get(id)) {
            (Some(row), Some(v)) if row.iter().all(|c| c.is_some()) => {
                row_ids.push(id.clone());
                rows.push(row.iter().map(|c| c.unwrap()).collect());
                response.push(*v);
            }
            _ => excluded.push(id.clone()),
        }
    }
    let x = DesignMatrix::new(row_ids, table.columns.clone(), &rows, true)?;
    let dropped = x.zero_variance_columns();
    if !dropped.is_empty() {
        warn!(
            "{}: dropping constant predictors {:?}",
            style.map(|s| s.as_str()).unwrap_or("model"),
            dropped
        );
    }
    let x = x.without_columns(&dropped);
    let mut fit = ols_fit(&x, &response)?;
    fit.style = style.cloned();
    fit.dropped_columns = dropped;
    fit.excluded_rows = excluded;
    Ok(fit)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FTest {
    pub f: f64,
    pub df1: usize,
    pub df2: usize,
    pub p: f64,
    pub rss_restricted: f64,
    pub rss_full: f64,
}

/// F-test of a restricted model against a full model that contains it.
pub fn nested_f_test(restricted: &RegressionResult, full: &RegressionResult) -> Result<FTest, StatsError> {
    if restricted.response_digest != full.response_digest {
        return Err(StatsError::NotNested(
            "models were fitted to different responses".into(),
        ));
    }
    let full_names: Vec<&str> = full.names().collect();
    if let Some(extra) = restricted.names().find(|n| !full_names.contains(n)) {
        return Err(StatsError::NotNested(format!(
            "restricted term `{extra}` is absent from the full model"
        )));
    }
    let df1 = full.k - restricted.k;
    let df2 = full.df_resid;
    if df1 == 0 {
        return Ok(FTest {
            f: 0.0,
            df1,
            df2,
            p: 1.0,
            rss_restricted: restricted.rss,
            rss_full: full.rss,
        });
    }
    let f = (((restricted.rss - full.rss) / df1 as f64) / (full.rss / df2 as f64)).max(0.0);
    Ok(FTest {
        f,
        df1,
        df2,
        p: f_sf(f, df1 as f64, df2 as f64),
        rss_restricted: restricted.rss,
        rss_full: full.rss,
    })
}
