use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::StatsError;

pub const DEFAULT_REPS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DipResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
    pub monte_carlo_reps: usize,
    pub seed: u64,
}

/// Hartigan's dip of an ascending sample: the sup distance between the
/// empirical CDF and the nearest unimodal CDF, at least 1/(2n).
///
/// Follows the greatest-convex-minorant / least-concave-majorant cycling
/// of Hartigan & Hartigan's AS 217, with all distances kept in units of
/// 1/n until the end.
pub fn dip_statistic(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n < 2 || sorted[n - 1] == sorted[0] {
        return 1.0 / (2.0 * n.max(1) as f64);
    }
    // 1-based views keep the index arithmetic identical to the published form.
    let x = |i: usize| sorted[i - 1];
    let mut mn = vec![0usize; n + 1];
    let mut mj = vec![0usize; n + 1];
    let mut gcm = vec![0usize; n + 2];
    let mut lcm = vec![0usize; n + 2];

    mn[1] = 1;
    for j in 2..=n {
        mn[j] = j - 1;
        loop {
            let mnj = mn[j];
            let mnmnj = mn[mnj];
            if mnj == 1 || (x(j) - x(mnj)) * ((mnj - mnmnj) as f64) < (x(mnj) - x(mnmnj)) * ((j - mnj) as f64) {
                break;
            }
            mn[j] = mnmnj;
        }
    }
    mj[n] = n;
    for k in (1..n).rev() {
        mj[k] = k + 1;
        loop {
            let mjk = mj[k];
            let mjmjk = mj[mjk];
            if mjk == n || (x(k) - x(mjk)) * (mjk as f64 - mjmjk as f64) < (x(mjk) - x(mjmjk)) * (k as f64 - mjk as f64)
            {
                break;
            }
            mj[k] = mjmjk;
        }
    }

    let mut low = 1;
    let mut high = n;
    let mut dip = 1.0f64;
    loop {
        gcm[1] = high;
        let mut i = 1;
        while gcm[i] > low {
            gcm[i + 1] = mn[gcm[i]];
            i += 1;
        }
        let l_gcm = i;
        let mut ig = l_gcm;
        let mut ix = ig - 1;

        lcm[1] = low;
        let mut i = 1;
        while lcm[i] < high {
            lcm[i + 1] = mj[lcm[i]];
            i += 1;
        }
        let l_lcm = i;
        let mut ih = l_lcm;
        let mut iv = 2;

        let mut d = 0.0f64;
        if l_gcm != 2 || l_lcm != 2 {
            loop {
                let gcmix = gcm[ix];
                let lcmiv = lcm[iv];
                if gcmix > lcmiv {
                    let gcmi1 = gcm[ix + 1];
                    let dx = (lcmiv as f64 - gcmi1 as f64 + 1.0)
                        - (x(lcmiv) - x(gcmi1)) * (gcmix - gcmi1) as f64 / (x(gcmix) - x(gcmi1));
                    iv += 1;
                    if dx >= d {
                        d = dx;
                        ig = ix + 1;
                        ih = iv - 1;
                    }
                } else {
                    let lcmiv1 = lcm[iv - 1];
                    let dx = (x(gcmix) - x(lcmiv1)) * (lcmiv - lcmiv1) as f64 / (x(lcmiv) - x(lcmiv1))
                        - (gcmix as f64 - lcmiv1 as f64 - 1.0);
                    ix -= 1;
                    if dx >= d {
                        d = dx;
                        ig = ix + 1;
                        ih = iv;
                    }
                }
                ix = ix.max(1);
                iv = iv.min(l_lcm);
                if gcm[ix] == lcm[iv] {
                    break;
                }
            }
        } else {
            d = 1.0;
        }
        if d < dip {
            break;
        }

        let mut dip_l = 0.0f64;
        for j in ig..l_gcm {
            let mut max_t = 1.0f64;
            let (jb, je) = (gcm[j + 1], gcm[j]);
            if je - jb > 1 && x(je) != x(jb) {
                let c = (je - jb) as f64 / (x(je) - x(jb));
                for jj in jb..=je {
                    let t = (jj - jb + 1) as f64 - (x(jj) - x(jb)) * c;
                    max_t = max_t.max(t);
                }
            }
            dip_l = dip_l.max(max_t);
        }
        let mut dip_u = 0.0f64;
        for j in ih..l_lcm {
            let mut max_t = 1.0f64;
            let (jb, je) = (lcm[j], lcm[j + 1]);
            if je - jb > 1 && x(je) != x(jb) {
                let c = (je - jb) as f64 / (x(je) - x(jb));
                for jj in jb..=je {
                    let t = (x(jj) - x(jb)) * c - (jj as f64 - jb as f64 - 1.0);
                    max_t = max_t.max(t);
                }
            }
            dip_u = dip_u.max(max_t);
        }
        dip = dip.max(dip_u.max(dip_l));

        if low == gcm[ig] && high == lcm[ih] {
            break;
        }
        low = gcm[ig];
        high = lcm[ih];
    }
    dip / (2.0 * n as f64)
}

/// Sorted dip statistics of `reps` uniform(0,1) samples of size `n`.
/// Replicate `r` draws from its own ChaCha stream, so the result does not
/// depend on thread scheduling.
pub fn dip_null_distribution(n: usize, reps: usize, seed: u64) -> Vec<f64> {
    let mut out: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let mut s: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            s.sort_by(f64::total_cmp);
            dip_statistic(&s)
        })
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Fraction of a sorted null distribution at or above `statistic`.
pub fn dip_p_value(null_sorted: &[f64], statistic: f64) -> f64 {
    let below = null_sorted.partition_point(|d| *d < statistic);
    (null_sorted.len() - below) as f64 / null_sorted.len() as f64
}

/// Dip statistic with a seeded Monte-Carlo p-value against the uniform null.
pub fn dip_test(sample: &[f64], reps: usize, seed: u64) -> Result<DipResult, StatsError> {
    let n = sample.len();
    if n < 4 {
        return Err(StatsError::TooFewPoints { n, min: 4 });
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite("dip sample".into()));
    }
    if reps == 0 {
        return Err(StatsError::EmptyInput);
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let statistic = dip_statistic(&sorted);
    let null = dip_null_distribution(n, reps, seed);
    Ok(DipResult {
        statistic,
        p_value: dip_p_value(&null, statistic),
        n,
        monte_carlo_reps: reps,
        seed,
    })
}
