//! Scalar statistics helpers: the standard normal CDF and quantile at
//! reference accuracy, compensated summation, and rank correlation.
//!
//! Every error-rate formula in this crate funnels through [`normal_cdf`], so
//! its accuracy contract (absolute error below 1e-12, in practice ~1e-15) is
//! load-bearing and pinned by tests against externally computed references.

/// Standard normal CDF Φ(x), accurate to better than 1e-12 absolute.
///
/// Uses the complementary error function on the half-axis away from the mass
/// so extreme tails keep full relative precision.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal density φ(x).
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal quantile Φ⁻¹(p) for p in (0,1), accurate to better than
/// 1e-12 absolute.
///
/// A rational approximation (Acklam's, ~1e-9 relative) seeds two Halley
/// corrections against [`normal_cdf`], which polish the root to within a few
/// ulp.
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile requires p in (0,1), got {p}");
    // Work on the lower half only: Φ(x) keeps full relative precision for
    // x ≤ 0, and 1−p is exact in f64 for p ≥ 0.5, so the reflection loses
    // nothing while avoiding the catastrophic cancellation of Φ(x)−p near 1.
    if p > 0.5 {
        -quantile_lower_half(1.0 - p)
    } else {
        quantile_lower_half(p)
    }
}

/// Quantile for p in (0, 0.5]; root is ≤ 0 where Φ is well conditioned.
fn quantile_lower_half(p: f64) -> f64 {
    let mut x = quantile_seed(p);
    for _ in 0..2 {
        let err = normal_cdf(x) - p;
        let r = err / normal_pdf(x);
        // Halley step for Φ(x) − p = 0 (second derivative −x·φ).
        x -= r / (1.0 + r * x / 2.0);
    }
    x
}

/// Acklam's rational approximation to Φ⁻¹; relative error below 1.2e-9.
fn quantile_seed(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Sum with Neumaier compensation; keeps replicate aggregation exact enough
/// that mean-of-replicates identities hold to 1e-12 regardless of order.
pub fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Arithmetic mean via compensated summation; 0 for an empty slice.
pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    compensated_sum(values) / values.len() as f64
}

/// Sample standard deviation (divisor n−1); 0 when fewer than two values.
pub fn sample_sd(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(values);
    let centered: Vec<f64> = values.iter().map(|v| (v - m) * (v - m)).collect();
    (compensated_sum(&centered) / (n - 1) as f64).sqrt()
}

/// Spearman rank correlation between two equal-length sequences.
///
/// Ties receive average ranks. Returns 0 when either sequence is constant
/// (correlation undefined); used for monotone-trend checks where a constant
/// sequence should count as "no trend".
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len(), "spearman requires equal lengths");
    let rx = ranks(xs);
    let ry = ranks(ys);
    pearson(&rx, &ry)
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("rank of NaN"));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let mx = mean(xs);
    let my = mean(ys);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values computed with 30-digit arbitrary-precision arithmetic
    // (mpmath ncdf / erfinv), rounded to 20 significant digits.
    const CDF_REFS: &[(f64, f64)] = &[
        (-8.0, 6.2209605742717841235e-16),
        (-5.0, 2.8665157187919391167e-7),
        (-3.0, 1.3498980316300945267e-3),
        (-2.0, 2.27501319481792072e-2),
        (-1.5, 6.6807201268858066004e-2),
        (-1.0, 0.15865525393145705141),
        (-0.5, 0.30853753872598689636),
        (0.0, 0.5),
        (0.3, 0.61791142218895263731),
        (1.0, 0.84134474606854294859),
        (2.0, 0.9772498680518207928),
        (5.0, 0.99999971334842812081),
        (8.0, 0.9999999999999993779),
    ];

    // Quantile references are evaluated at the exact f64 nearest each listed
    // probability (matters near p→1 where the quantile is ill conditioned in
    // the decimal literal but exact in the stored double).
    const QUANTILE_REFS: &[(f64, f64)] = &[
        (0.5, 0.0),
        (0.9, 1.2815515655446005935),
        (0.1, -1.2815515655446004353),
        (0.025, -1.9599639845400542118),
        (0.975, 1.9599639845400538556),
        (1e-6, -4.7534243088228989573),
        (0.3, -0.52440051270804081597),
        (0.999999, 4.7534243088170877657),
    ];

    #[test]
    fn cdf_matches_high_precision_references() {
        for &(x, want) in CDF_REFS {
            let got = normal_cdf(x);
            assert!(
                (got - want).abs() < 1e-12,
                "cdf({x}): got {got}, want {want}"
            );
        }
    }

    #[test]
    fn quantile_matches_high_precision_references() {
        for &(p, want) in QUANTILE_REFS {
            let got = normal_quantile(p);
            assert!(
                (got - want).abs() < 1e-12,
                "quantile({p}): got {got}, want {want}"
            );
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        for i in 1..200 {
            let p = i as f64 / 200.0;
            let x = normal_quantile(p);
            assert!((normal_cdf(x) - p).abs() < 1e-13, "round trip at p={p}");
        }
    }

    #[test]
    fn ten_percent_separation_constant() {
        // 2·Φ⁻¹(0.9): the Mahalanobis separation giving a 10% optimal error.
        let delta = 2.0 * normal_quantile(0.9);
        assert!((delta - 2.5631031310892009).abs() < 1e-12);
        assert!((normal_cdf(-delta / 2.0) - 0.1).abs() < 1e-14);
    }

    #[test]
    fn compensated_sum_handles_cancellation() {
        let vals = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(&vals), 2.0);
        assert_eq!(mean(&[0.25; 7]), 0.25);
    }

    #[test]
    fn sample_sd_matches_two_point_case() {
        assert!((sample_sd(&[1.0, 3.0]) - std::f64::consts::SQRT_2).abs() < 1e-15);
        assert_eq!(sample_sd(&[5.0]), 0.0);
    }

    #[test]
    fn spearman_detects_monotone_and_constant() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert!((spearman(&xs, &[10.0, 20.0, 25.0, 90.0]) - 1.0).abs() < 1e-12);
        assert!((spearman(&xs, &[9.0, 7.0, 5.0, 1.0]) + 1.0).abs() < 1e-12);
        assert_eq!(spearman(&xs, &[2.0, 2.0, 2.0, 2.0]), 0.0);
        // Average ranks for ties: (1,1,3,4) vs (1,2,3,4) still positive.
        assert!(spearman(&[1.0, 1.0, 2.0, 3.0], &xs) > 0.9);
    }
}
