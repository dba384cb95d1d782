//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

/// Dense two-phase simplex: maximize cᵀx subject to Ax ≤ b, x ≥ 0.
/// Returns `None` when infeasible or unbounded.
pub fn simplex_max(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Option<(f64, Vec<f64>)> {
    const EPS: f64 = 1e-12;
    let (m, n) = (b.len(), c.len());
    let mut d = vec![vec![0.0; n + 2]; m + 2];
    let mut basis: Vec<isize> = (0..m).map(|i| (n + i) as isize).collect();
    let mut nonbasis: Vec<isize> = (0..n as isize).collect();
    nonbasis.push(-1);
    for i in 0..m {
        d[i][..n].copy_from_slice(&a[i]);
        d[i][n] = -1.0;
        d[i][n + 1] = b[i];
    }
    for j in 0..n {
        d[m][j] = -c[j];
    }
    d[m + 1][n] = 1.0;

    let pivot = |d: &mut Vec<Vec<f64>>, basis: &mut Vec<isize>, nonbasis: &mut Vec<isize>, r: usize, s: usize| {
        let inv = 1.0 / d[r][s];
        for i in 0..m + 2 {
            if i == r {
                continue;
            }
            for j in 0..n + 2 {
                if j != s {
                    d[i][j] -= d[r][j] * d[i][s] * inv;
                }
            }
        }
        for j in 0..n + 2 {
            if j != s {
                d[r][j] *= inv;
            }
        }
        for i in 0..m + 2 {
            if i != r {
                d[i][s] *= -inv;
            }
        }
        d[r][s] = inv;
        std::mem::swap(&mut basis[r], &mut nonbasis[s]);
    };
    let run = |d: &mut Vec<Vec<f64>>, basis: &mut Vec<isize>, nonbasis: &mut Vec<isize>, phase: u8| -> bool {
        let x = if phase == 1 { m + 1 } else { m };
        loop {
            let mut s: Option<usize> = None;
            for j in 0..=n {
                if phase == 2 && nonbasis[j] == -1 {
                    continue;
                }
                let better = match s {
                    None => true,
                    Some(t) => d[x][j] < d[x][t] || (d[x][j] == d[x][t] && nonbasis[j] < nonbasis[t]),
                };
                if better {
                    s = Some(j);
                }
            }
            let s = s.expect("at least one column");
            if d[x][s] > -EPS {
                return true;
            }
            let mut r: Option<usize> = None;
            for i in 0..m {
                if d[i][s] < EPS {
                    continue;
                }
                let better = match r {
                    None => true,
                    Some(t) => {
                        let (lhs, rhs) = (d[i][n + 1] / d[i][s], d[t][n + 1] / d[t][s]);
                        lhs < rhs || (lhs == rhs && basis[i] < basis[t])
                    }
                };
                if better {
                    r = Some(i);
                }
            }
            let Some(r) = r else {
                return false;
            };
            pivot(d, basis, nonbasis, r, s);
        }
    };

    let r = (0..m).min_by(|&i, &j| d[i][n + 1].total_cmp(&d[j][n + 1]))?;
    if d[r][n + 1] < -EPS {
        pivot(&mut d, &mut basis, &mut nonbasis, r, n);
        if !run(&mut d, &mut basis, &mut nonbasis, 1) || d[m + 1][n + 1] < -1e-9 {
            return None;
        }
        for i in 0..m {
            if basis[i] == -1 {
                let mut s = 0;
                for j in 1..=n {
                    if d[i][j] < d[i][s] || (d[i][j] == d[i][s] && nonbasis[j] < nonbasis[s]) {
                        s = j;
                    }
                }
                pivot(&mut d, &mut basis, &mut nonbasis, i, s);
            }
        }
    }
    if !run(&mut d, &mut basis, &mut nonbasis, 2) {
        return None;
    }
    let mut x = vec![0.0; n];
    for i in 0..m {
        if basis[i] >= 0 && (basis[i] as usize) < n {
            x[basis[i] as usize] = d[i][n + 1];
        }
    }
    Some((d[m][n + 1], x))
}

/// Dip of a sample with distinct values: the smallest sup-distance between
/// the empirical CDF and a piecewise-linear unimodal CDF through the
/// sample points, minimized over the mode position by linear programming.
pub fn dip_lp(sample: &[f64]) -> f64 {
    let mut x = sample.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len();
    let nf = n as f64;
    let mut best = 1.0f64;
    // Variables g_0..g_{n-1}, t; maximize −t.
    for mode in 0..n {
        let mut a: Vec<Vec<f64>> = Vec::new();
        let mut b: Vec<f64> = Vec::new();
        let row = |pairs: &[(usize, f64)]| {
            let mut r = vec![0.0; n + 1];
            for &(i, v) in pairs {
                r[i] += v;
            }
            r
        };
        for i in 0..n {
            a.push(row(&[(i, -1.0), (n, -1.0)]));
            b.push(-((i + 1) as f64) / nf);
            a.push(row(&[(i, 1.0), (n, -1.0)]));
            b.push(i as f64 / nf);
        }
        for v in 0..=n {
            a.push(row(&[(v, 1.0)]));
            b.push(1.0);
        }
        let slope = |j: usize| {
            let dx = x[j + 1] - x[j];
            row(&[(j + 1, 1.0 / dx), (j, -1.0 / dx)])
        };
        for j in 0..n - 1 {
            a.push(slope(j).iter().map(|v| -v).collect());
            b.push(0.0);
        }
        for j in 0..n.saturating_sub(2) {
            let (s0, s1) = (slope(j), slope(j + 1));
            let r: Vec<f64> = if j + 1 < mode {
                s0.iter().zip(&s1).map(|(p, q)| p - q).collect()
            } else {
                s1.iter().zip(&s0).map(|(p, q)| p - q).collect()
            };
            a.push(r);
            b.push(0.0);
        }
        let mut c = vec![0.0; n + 1];
        c[n] = -1.0;
        if let Some((v, _)) = simplex_max(&a, &b, &c) {
            best = best.min(-v);
        }
    }
    best
}

/// Γ((ν+1)/2) / Γ(ν/2) for integer ν by the two-step recurrence.
fn gamma_ratio(df: usize) -> f64 {
    let mut r = if df % 2 == 1 {
        1.0 / std::f64::consts::PI.sqrt()
    } else {
        std::f64::consts::PI.sqrt() / 2.0
    };
    let mut v = if df % 2 == 1 { 1 } else { 2 };
    while v < df {
        r *= (v as f64 + 1.0) / v as f64;
        v += 2;
    }
    r
}

/// Two-sided Student-t p-value by composite Simpson integration of the
/// density over [0, |t|].
pub fn t_p_simpson(t: f64, df: usize) -> f64 {
    let t = t.abs();
    if !t.is_finite() {
        return 0.0;
    }
    let nu = df as f64;
    let k = gamma_ratio(df) / (nu * std::f64::consts::PI).sqrt();
    let f = |u: f64| k * (1.0 + u * u / nu).powf(-(nu + 1.0) / 2.0);
    let steps = 20_000;
    let h = t / steps as f64;
    let mut s = f(0.0) + f(t);
    for i in 1..steps {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    (1.0 - 2.0 * s * h / 3.0).clamp(0.0, 1.0)
}

/// Solves `m x = rhs` for several right-hand sides by Gauss-Jordan
/// elimination with partial pivoting.
pub fn gauss_jordan(mut m: Vec<Vec<f64>>, mut rhs: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let n = m.len();
    for col in 0..n {
        let p = (col..n)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        m.swap(col, p);
        rhs.swap(col, p);
        let piv = m[col][col];
        for j in 0..n {
            m[col][j] /= piv;
        }
        for v in rhs[col].iter_mut() {
            *v /= piv;
        }
        for r in 0..n {
            if r != col {
                let f = m[r][col];
                if f != 0.0 {
                    for j in 0..n {
                        m[r][j] -= f * m[col][j];
                    }
                    let src = rhs[col].clone();
                    for (v, s) in rhs[r].iter_mut().zip(src) {
                        *v -= f * s;
                    }
                }
            }
        }
    }
    rhs
}

pub struct OlsOracle {
    pub beta: Vec<f64>,
    pub se: Vec<f64>,
    pub t: Vec<f64>,
    pub p: Vec<f64>,
    pub rss: f64,
    pub r2: f64,
}

/// `β = (XᵀX)⁻¹Xᵀy` by the normal equations. `x` rows include any
/// intercept column explicitly.
pub fn ols_normal_equations(x: &[Vec<f64>], y: &[f64]) -> OlsOracle {
    let (n, k) = (x.len(), x[0].len());
    let mut xtx = vec![vec![0.0; k]; k];
    let mut xty = vec![0.0; k];
    for (row, yi) in x.iter().zip(y) {
        for a in 0..k {
            xty[a] += row[a] * yi;
            for b in 0..k {
                xtx[a][b] += row[a] * row[b];
            }
        }
    }
    // Columns of the identity plus Xᵀy, so one elimination gives both the
    // inverse and β.
    let mut rhs: Vec<Vec<f64>> = (0..k)
        .map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for (i, r) in rhs.iter_mut().enumerate() {
        r.push(xty[i]);
    }
    let sol = gauss_jordan(xtx, rhs);
    let beta: Vec<f64> = sol.iter().map(|r| r[k]).collect();
    let resid: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(row, yi)| yi - row.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>())
        .collect();
    let rss: f64 = resid.iter().map(|r| r * r).sum();
    let ybar = y.iter().sum::<f64>() / n as f64;
    let tss: f64 = y.iter().map(|v| (v - ybar).powi(2)).sum();
    let df = n - k;
    let s2 = rss / df as f64;
    let se: Vec<f64> = (0..k).map(|i| (s2 * sol[i][i]).sqrt()).collect();
    let t: Vec<f64> = beta.iter().zip(&se).map(|(b, s)| b / s).collect();
    let p = t.iter().map(|tv| t_p_simpson(*tv, df)).collect();
    OlsOracle {
        beta,
        se,
        t,
        p,
        rss,
        r2: 1.0 - rss / tss,
    }
}

/// Bradley-Terry log-likelihood for a 3×3 win matrix.
fn bt_loglik(w: &[[f64; 3]; 3], l: [f64; 3]) -> f64 {
    let mut ll = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            if i != j && w[i][j] > 0.0 {
                ll += w[i][j] * (l[i] - (l[i].exp() + l[j].exp()).ln());
            }
        }
    }
    ll
}

/// Maximizes the 3-item likelihood over (λ₂, λ₃) with λ₁ = −λ₂ − λ₃ by a
/// dense grid refined around the best cell.
pub fn bt_grid_oracle(w: &[[f64; 3]; 3]) -> [f64; 3] {
    let (mut c2, mut c3) = (0.0, 0.0);
    let mut half: f64 = 6.0;
    let mut step: f64 = 0.05;
    while step >= 1e-5 {
        let steps = (half / step).round() as i64;
        let mut best = (f64::NEG_INFINITY, c2, c3);
        for a in -steps..=steps {
            for b in -steps..=steps {
                let l2 = c2 + a as f64 * step;
                let l3 = c3 + b as f64 * step;
                let ll = bt_loglik(w, [-l2 - l3, l2, l3]);
                if ll > best.0 {
                    best = (ll, l2, l3);
                }
            }
        }
        (c2, c3) = (best.1, best.2);
        half = 3.0 * step;
        step /= 10.0;
    }
    [-c2 - c3, c2, c3]
}

/// Win counts for `per_pair` simulated comparisons of every pair under
/// true log-strengths `lambda`.
pub fn simulate_wins(lambda: &[f64], per_pair: u64, seed: u64) -> Vec<Vec<u64>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = lambda.len();
    let mut w = vec![vec![0u64; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let p = 1.0 / (1.0 + (lambda[j] - lambda[i]).exp());
            for _ in 0..per_pair {
                if rng.random::<f64>() < p {
                    w[i][j] += 1;
                } else {
                    w[j][i] += 1;
                }
            }
        }
    }
    w
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    sab / (saa * sbb).sqrt()
}
