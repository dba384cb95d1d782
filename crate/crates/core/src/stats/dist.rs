//! Normal, Student-t and F distribution functions.

use super::special::{beta_inc, erfc};

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Upper tail 1 − Φ(z), accurate far into the tail.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// Φ⁻¹(p) by Wichura's PPND16 rational approximations.
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let num = ((((((r * 2509.080_928_730_122_7 + 33430.575_583_588_128) * r + 67265.770_927_008_7) * r
            + 45921.953_931_549_87)
            * r
            + 13731.693_765_509_461)
            * r
            + 1971.590_950_306_551_4)
            * r
            + 133.141_667_891_784_38)
            * r
            + 3.387_132_872_796_366_6;
        let den = ((((((r * 5226.495_278_852_546 + 28729.085_735_721_943) * r + 39307.895_800_092_71) * r
            + 21213.794_301_586_596)
            * r
            + 5394.196_021_424_751)
            * r
            + 687.187_007_492_057_9)
            * r
            + 42.313_330_701_600_91)
            * r
            + 1.0;
        return q * num / den;
    }
    let mut r = if q < 0.0 { p } else { 1.0 - p };
    r = (-r.ln()).sqrt();
    let val = if r <= 5.0 {
        r -= 1.6;
        let num = ((((((r * 7.745_450_142_783_414e-4 + 0.022_723_844_989_269_184) * r + 0.241_780_725_177_450_6)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_545)
            * r
            + 1.423_437_110_749_683_5;
        let den = ((((((r * 1.050_750_071_644_416_9e-9 + 5.475_938_084_995_345e-4) * r + 0.015_198_666_563_616_457)
            * r
            + 0.148_103_976_427_480_08)
            * r
            + 0.689_767_334_985_1)
            * r
            + 1.676_384_830_183_803_8)
            * r
            + 2.053_191_626_637_759)
            * r
            + 1.0;
        num / den
    } else {
        r -= 5.0;
        let num =
            ((((((r * 2.010_334_399_292_288e-7 + 2.711_555_568_743_487_6e-5) * r + 0.001_242_660_947_388_078_4) * r
                + 0.026_532_189_526_576_124)
                * r
                + 0.296_560_571_828_504_9)
                * r
                + 1.784_826_539_917_291_3)
                * r
                + 5.463_784_911_164_114)
                * r
                + 6.657_904_643_501_103;
        let den =
            ((((((r * 2.044_263_103_389_939_8e-15 + 1.421_511_758_316_446e-7) * r + 1.846_318_317_510_054_8e-5) * r
                + 7.868_691_311_456_133e-4)
                * r
                + 0.014_875_361_290_850_615)
                * r
                + 0.136_929_880_922_735_8)
                * r
                + 0.599_832_206_555_888)
                * r
                + 1.0;
        num / den
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// Student-t CDF with `df` degrees of freedom.
pub fn t_cdf(t: f64, df: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return if t > 0.0 { 1.0 } else { 0.0 };
    }
    let tail = 0.5 * beta_inc(df / 2.0, 0.5, df / (df + t * t));
    if t > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// P(|T| ≥ |t|).
pub fn t_two_sided_p(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    beta_inc(df / 2.0, 0.5, df / (df + t * t)).clamp(0.0, 1.0)
}

/// Inverse of [`t_cdf`] by bisection.
pub fn t_quantile(p: f64, df: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    if p == 0.5 {
        return 0.0;
    }
    let (target, sign) = if p > 0.5 { (p, 1.0) } else { (1.0 - p, -1.0) };
    let mut lo = 0.0;
    let mut hi = 1.0;
    while t_cdf(hi, df) < target {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if t_cdf(mid, df) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    sign * 0.5 * (lo + hi)
}

pub fn f_cdf(f: f64, df1: f64, df2: f64) -> f64 {
    if f <= 0.0 {
        return 0.0;
    }
    beta_inc(df1 / 2.0, df2 / 2.0, df1 * f / (df1 * f + df2))
}

/// Upper tail P(F ≥ f).
pub fn f_sf(f: f64, df1: f64, df2: f64) -> f64 {
    if f <= 0.0 {
        return 1.0;
    }
    beta_inc(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_quantile_inverts_cdf() {
        for i in 1..1000 {
            let p = i as f64 / 1000.0;
            assert!((normal_cdf(normal_quantile(p)) - p).abs() < 1e-14, "p={p}");
        }
        for &p in &[1e-10, 1e-6, 1e-3] {
            let z = normal_quantile(p);
            assert!(((normal_cdf(z) - p) / p).abs() < 1e-10);
        }
        assert!((normal_quantile(0.975) - 1.959_963_984_540_054).abs() < 1e-14);
    }

    #[test]
    fn t_known_values() {
        assert_eq!(t_cdf(0.0, 3.0), 0.5);
        // Cauchy: F(1) = 3/4.
        assert!((t_cdf(1.0, 1.0) - 0.75).abs() < 1e-14);
        // df = 2: F(t) = 1/2 + t / (2 sqrt(t² + 2)).
        for &t in &[-3.0, -0.4, 0.7, 5.0] {
            let exact = 0.5 + t / (2.0 * (t * t + 2.0f64).sqrt());
            assert!((t_cdf(t, 2.0) - exact).abs() < 1e-14);
        }
        assert!((t_quantile(0.975, 1.0) - 12.706_204_736_174_705).abs() < 1e-9);
        assert!((t_quantile(0.975, 10.0) - 2.228_138_851_986_274_7).abs() < 1e-12);
        assert!((t_quantile(0.025, 10.0) + 2.228_138_851_986_274_7).abs() < 1e-12);
        assert!((t_two_sided_p(2.228_138_851_986_274_7, 10.0) - 0.05).abs() < 1e-13);
    }

    #[test]
    fn t_cdf_monotone() {
        for df in [1.0, 2.5, 7.0, 70.0, 702.0] {
            let mut prev = 0.0;
            for i in -400..=400 {
                let c = t_cdf(i as f64 * 0.05, df);
                assert!(c >= prev, "df={df} i={i}");
                prev = c;
            }
        }
    }

    #[test]
    fn f_distribution() {
        // F(2, d2): sf(f) = (1 + 2f/d2)^(−d2/2).
        for &f in &[0.1, 1.0, 4.6] {
            let exact = (1.0 + 2.0 * f / 9.0f64).powf(-4.5);
            assert!((f_sf(f, 2.0, 9.0) - exact).abs() < 1e-14);
            assert!((f_cdf(f, 2.0, 9.0) + exact - 1.0).abs() < 1e-14);
        }
        assert_eq!(f_sf(0.0, 8.0, 702.0), 1.0);
        let mut prev = 0.0;
        for i in 0..200 {
            let c = f_cdf(i as f64 * 0.05, 8.0, 702.0);
            assert!(c >= prev);
            prev = c;
        }
    }
}
