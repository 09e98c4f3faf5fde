//! Fitting of the six linear classifiers and exact conditional error rates
//! of arbitrary linear rules under a known Gaussian model.
//!
//! Every fitter is a pure function of its inputs. Fitters that share the
//! pooled sample statistics accept a precomputed [`PooledStats`] via the
//! `*_from` variants so a simulation replicate pays for the O(np²) moment
//! pass only once.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::stats::normal_cdf;
use crate::types::{FittedLinearClassifier, LabeledDataset, Method, ProblemSpec};

/// Exact conditional misclassification probabilities of a linear rule under
/// a two-class Gaussian model with equal class weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalErrorReport {
    /// P(classified 2 | X ~ N(μ₁, Σ)).
    pub err_class1: f64,
    /// P(classified 1 | X ~ N(μ₂, Σ)).
    pub err_class2: f64,
    /// Equal-weight mean of the class errors.
    pub err_total: f64,
}

impl ConditionalErrorReport {
    fn new(err_class1: f64, err_class2: f64) -> Result<Self> {
        let report = Self {
            err_class1,
            err_class2,
            err_total: (err_class1 + err_class2) / 2.0,
        };
        for v in [report.err_class1, report.err_class2, report.err_total] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Numerical(format!(
                    "error probability {v} outside [0,1]"
                )));
            }
        }
        Ok(report)
    }
}

/// Class means and the pooled covariance Sₙ (divisor n−2) of a two-class
/// sample; the shared input of all data-driven fitters.
#[derive(Debug, Clone)]
pub struct PooledStats {
    xbar1: DVector<f64>,
    xbar2: DVector<f64>,
    pooled: DMatrix<f64>,
    n1: usize,
    n2: usize,
}

impl PooledStats {
    pub fn from_dataset(data: &LabeledDataset) -> Result<Self> {
        data.validate()?;
        let (n1, n2, p) = (data.n1(), data.n2(), data.p());
        let xbar1 = data.x1().row_mean().transpose();
        let xbar2 = data.x2().row_mean().transpose();
        let mut scatter = DMatrix::<f64>::zeros(p, p);
        for (block, xbar) in [(data.x1(), &xbar1), (data.x2(), &xbar2)] {
            let mut centered = block.clone();
            for mut row in centered.row_iter_mut() {
                row -= xbar.transpose();
            }
            scatter += centered.transpose() * centered;
        }
        let pooled = scatter / (n1 + n2 - 2) as f64;
        Ok(Self {
            xbar1,
            xbar2,
            pooled,
            n1,
            n2,
        })
    }

    pub fn xbar1(&self) -> &DVector<f64> {
        &self.xbar1
    }

    pub fn xbar2(&self) -> &DVector<f64> {
        &self.xbar2
    }

    /// Pooled covariance Sₙ with divisor n−2.
    pub fn pooled(&self) -> &DMatrix<f64> {
        &self.pooled
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn n(&self) -> usize {
        self.n1 + self.n2
    }

    pub fn p(&self) -> usize {
        self.xbar1.len()
    }

    fn mean_diff(&self) -> DVector<f64> {
        &self.xbar1 - &self.xbar2
    }

    /// Plug-in intercept −½(x̄₁+x̄₂)ᵀw.
    fn plug_in_alpha(&self, w: &DVector<f64>) -> f64 {
        -0.5 * (&self.xbar1 + &self.xbar2).dot(w)
    }
}

// ---------------------------------------------------------------------------
// Fitters
// ---------------------------------------------------------------------------

/// Optimal rule from the true model: w = Σ⁻¹(μ₁−μ₂), α = −½(μ₁+μ₂)ᵀw.
pub fn fit_bayes(spec: &ProblemSpec) -> Result<FittedLinearClassifier> {
    spec.validate()?;
    if !(spec.delta() > 0.0) {
        return Err(Error::Validation(
            "optimal rule undefined: means coincide (delta = 0)".into(),
        ));
    }
    let w = spec.covariance().solve(&spec.mean_diff())?;
    let alpha = -0.5 * (spec.mu1() + spec.mu2()).dot(&w);
    FittedLinearClassifier::new(w, alpha, Method::Bayes, 0.0, 0, 0)
}

/// Classical rule with the pooled covariance: w = Sₙ⁻¹(x̄₁−x̄₂).
pub fn fit_lda(data: &LabeledDataset) -> Result<FittedLinearClassifier> {
    fit_lda_from(&PooledStats::from_dataset(data)?)
}

pub fn fit_lda_from(stats: &PooledStats) -> Result<FittedLinearClassifier> {
    let (w, alpha) = lda_direction(stats)?;
    FittedLinearClassifier::new(w, alpha, Method::Lda, 0.0, stats.n1, stats.n2)
}

fn lda_direction(stats: &PooledStats) -> Result<(DVector<f64>, f64)> {
    if stats.p() >= stats.n() - 2 {
        return Err(Error::Validation(format!(
            "pooled covariance is singular for p = {} ≥ n − 2 = {}; use the ridge-regularized fit instead",
            stats.p(),
            stats.n() - 2
        )));
    }
    let w = crate::linalg::solve_spd(&stats.pooled, &stats.mean_diff(), "pooled covariance")?;
    let alpha = stats.plug_in_alpha(&w);
    Ok((w, alpha))
}

/// LDA with the intercept shifted by ((n−2)/(n−p−3))·(p/(2n₁) − p/(2n₂)),
/// the bias correction that recenters the rule under unequal sample sizes.
pub fn fit_corrected_lda(data: &LabeledDataset) -> Result<FittedLinearClassifier> {
    fit_corrected_lda_from(&PooledStats::from_dataset(data)?)
}

pub fn fit_corrected_lda_from(stats: &PooledStats) -> Result<FittedLinearClassifier> {
    let (n, p) = (stats.n(), stats.p());
    if n < p + 4 {
        return Err(Error::Domain(format!(
            "intercept correction needs n − p − 3 > 0, got n = {n}, p = {p}"
        )));
    }
    let (w, alpha) = lda_direction(stats)?;
    let correction = ((n - 2) as f64 / (n - p - 3) as f64)
        * (p as f64 / (2.0 * stats.n1 as f64) - p as f64 / (2.0 * stats.n2 as f64));
    FittedLinearClassifier::new(
        w,
        alpha + correction,
        Method::CorrectedLda,
        0.0,
        stats.n1,
        stats.n2,
    )
}

/// Ridge-regularized rule: w = (Sₙ + λI)⁻¹(x̄₁−x̄₂), solved by Cholesky.
pub fn fit_rlda(data: &LabeledDataset, lambda: f64) -> Result<FittedLinearClassifier> {
    fit_rlda_from(&PooledStats::from_dataset(data)?, lambda)
}

pub fn fit_rlda_from(stats: &PooledStats, lambda: f64) -> Result<FittedLinearClassifier> {
    let (w, alpha, _) = ridge_direction(stats, lambda, false)?;
    FittedLinearClassifier::new(w, alpha, Method::Rlda, lambda, stats.n1, stats.n2)
}

/// RLDA with the intercept shifted by
/// (p/(2n₁) − p/(2n₂)) · [1 − tr((Sₙ/λ+I)⁻¹)/p] / [1 − p/(n−2) + tr((Sₙ/λ+I)⁻¹)/(n−2)].
pub fn fit_corrected_rlda(data: &LabeledDataset, lambda: f64) -> Result<FittedLinearClassifier> {
    fit_corrected_rlda_from(&PooledStats::from_dataset(data)?, lambda)
}

pub fn fit_corrected_rlda_from(
    stats: &PooledStats,
    lambda: f64,
) -> Result<FittedLinearClassifier> {
    let (w, alpha, trace) = ridge_direction(stats, lambda, true)?;
    let corrected = alpha + rlda_intercept_correction(stats, trace.expect("trace requested"))?;
    FittedLinearClassifier::new(
        w,
        corrected,
        Method::CorrectedRlda,
        lambda,
        stats.n1,
        stats.n2,
    )
}

/// Fits plain and bias-corrected RLDA sharing one factorization of
/// (Sₙ + λI); the pair differs only in the intercept.
pub fn fit_rlda_pair_from(
    stats: &PooledStats,
    lambda: f64,
) -> Result<(FittedLinearClassifier, FittedLinearClassifier)> {
    let (w, alpha, trace) = ridge_direction(stats, lambda, true)?;
    let plain = FittedLinearClassifier::new(
        w.clone(),
        alpha,
        Method::Rlda,
        lambda,
        stats.n1,
        stats.n2,
    )?;
    let corrected = FittedLinearClassifier::new(
        w,
        alpha + rlda_intercept_correction(stats, trace.expect("trace requested"))?,
        Method::CorrectedRlda,
        lambda,
        stats.n1,
        stats.n2,
    )?;
    Ok((plain, corrected))
}

/// Solves the ridge system and optionally accumulates tr((Sₙ/λ + I)⁻¹)
/// from the same factorization (as λ · ‖L⁻¹‖²_F with L·Lᵀ = Sₙ + λI).
fn ridge_direction(
    stats: &PooledStats,
    lambda: f64,
    want_trace: bool,
) -> Result<(DVector<f64>, f64, Option<f64>)> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "ridge parameter must be positive and finite, got {lambda}"
        )));
    }
    let p = stats.p();
    let mut shifted = stats.pooled.clone();
    for i in 0..p {
        shifted[(i, i)] += lambda;
    }
    let chol = nalgebra::linalg::Cholesky::new(shifted).ok_or_else(|| {
        Error::Numerical("ridge-shifted pooled covariance not positive definite".into())
    })?;
    let w = chol.solve(&stats.mean_diff());
    let alpha = stats.plug_in_alpha(&w);
    let trace = if want_trace {
        let l_inv = chol
            .l()
            .solve_lower_triangular(&DMatrix::<f64>::identity(p, p))
            .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
        let inv_trace: f64 = l_inv.iter().map(|v| v * v).sum();
        Some(lambda * inv_trace)
    } else {
        None
    };
    Ok((w, alpha, trace))
}

/// Intercept shift of the bias-corrected ridge rule given
/// t = tr((Sₙ/λ + I)⁻¹).
fn rlda_intercept_correction(stats: &PooledStats, t: f64) -> Result<f64> {
    let (n, p) = (stats.n() as f64, stats.p() as f64);
    let denominator = 1.0 - p / (n - 2.0) + t / (n - 2.0);
    if denominator.abs() < 1e-10 {
        return Err(Error::Numerical(format!(
            "degenerate intercept correction: denominator {denominator:.3e}"
        )));
    }
    let imbalance = p / (2.0 * stats.n1 as f64) - p / (2.0 * stats.n2 as f64);
    Ok(imbalance * (1.0 - t / p) / denominator)
}

/// Mean-difference rule that ignores the covariance: w = x̄₁−x̄₂.
pub fn fit_naive_bayes(data: &LabeledDataset) -> Result<FittedLinearClassifier> {
    fit_naive_bayes_from(&PooledStats::from_dataset(data)?)
}

pub fn fit_naive_bayes_from(stats: &PooledStats) -> Result<FittedLinearClassifier> {
    let w = stats.mean_diff();
    let alpha = stats.plug_in_alpha(&w);
    FittedLinearClassifier::new(w, alpha, Method::NaiveBayes, 0.0, stats.n1, stats.n2)
}

/// Benchmark rule with the data-driven direction (LDA for λ=0, RLDA for
/// λ>0) but the intercept computed from the TRUE means, i.e. the best
/// intercept available for that direction.
pub fn fit_oracle_intercept(
    data: &LabeledDataset,
    spec: &ProblemSpec,
    lambda: f64,
) -> Result<FittedLinearClassifier> {
    fit_oracle_intercept_from(&PooledStats::from_dataset(data)?, spec, lambda)
}

pub fn fit_oracle_intercept_from(
    stats: &PooledStats,
    spec: &ProblemSpec,
    lambda: f64,
) -> Result<FittedLinearClassifier> {
    if spec.p() != stats.p() {
        return Err(Error::Validation(format!(
            "model dimension {} does not match data dimension {}",
            spec.p(),
            stats.p()
        )));
    }
    let (w, method) = if lambda == 0.0 {
        (lda_direction(stats)?.0, Method::Lda)
    } else {
        (ridge_direction(stats, lambda, false)?.0, Method::Rlda)
    };
    let alpha = -0.5 * (spec.mu1() + spec.mu2()).dot(&w);
    FittedLinearClassifier::new(w, alpha, method, lambda, stats.n1, stats.n2)
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Applies the rule to one observation: class 1 iff wᵀx + α > 0; ties go
/// to class 2.
pub fn predict(clf: &FittedLinearClassifier, x: &DVector<f64>) -> Result<u8> {
    if x.len() != clf.p() {
        return Err(Error::Domain(format!(
            "observation has {} features, classifier expects {}",
            x.len(),
            clf.p()
        )));
    }
    Ok(if clf.w().dot(x) + clf.alpha() > 0.0 { 1 } else { 2 })
}

/// Exact conditional misclassification probabilities of a linear rule under
/// the given Gaussian model:
/// err₁ = Φ(−(wᵀμ₁+α)/√(wᵀΣw)), err₂ = Φ((wᵀμ₂+α)/√(wᵀΣw)).
pub fn conditional_error(
    clf: &FittedLinearClassifier,
    spec: &ProblemSpec,
) -> Result<ConditionalErrorReport> {
    if clf.p() != spec.p() {
        return Err(Error::Domain(format!(
            "classifier dimension {} does not match model dimension {}",
            clf.p(),
            spec.p()
        )));
    }
    let w = clf.w();
    let q = spec.covariance().quadratic_form(w);
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::Numerical(format!(
            "projected variance wᵀΣw = {q} is not positive"
        )));
    }
    let sd = q.sqrt();
    let err1 = normal_cdf(-(w.dot(spec.mu1()) + clf.alpha()) / sd);
    let err2 = normal_cdf((w.dot(spec.mu2()) + clf.alpha()) / sd);
    ConditionalErrorReport::new(err1, err2)
}

/// Misclassified fraction per class on a held-out labeled sample.
pub fn empirical_error(
    clf: &FittedLinearClassifier,
    test: &LabeledDataset,
) -> Result<ConditionalErrorReport> {
    if clf.p() != test.p() {
        return Err(Error::Domain(format!(
            "classifier dimension {} does not match test dimension {}",
            clf.p(),
            test.p()
        )));
    }
    let errors_in = |block: &DMatrix<f64>, truth: u8| -> Result<f64> {
        let mut wrong = 0usize;
        for i in 0..block.nrows() {
            let x = block.row(i).transpose();
            if predict(clf, &x)? != truth {
                wrong += 1;
            }
        }
        Ok(wrong as f64 / block.nrows() as f64)
    };
    ConditionalErrorReport::new(errors_in(test.x1(), 1)?, errors_in(test.x2(), 2)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian_dataset(
        n1: usize,
        n2: usize,
        p: usize,
        shift: f64,
        seed: u64,
    ) -> LabeledDataset {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |n: usize, offset: f64| {
            DMatrix::from_fn(n, p, |_, j| {
                let z: f64 = StandardNormal.sample(&mut rng);
                z + if j == 0 { offset } else { 0.0 }
            })
        };
        let x1 = draw(n1, shift);
        let x2 = draw(n2, 0.0);
        LabeledDataset::new(x1, x2).unwrap()
    }

    fn identity_spec(p: usize, first: f64) -> ProblemSpec {
        let mut mu1 = DVector::zeros(p);
        mu1[0] = first;
        ProblemSpec::from_dense(mu1, DVector::zeros(p), DMatrix::identity(p, p)).unwrap()
    }

    #[test]
    fn bayes_identity_covariance() {
        let spec = identity_spec(2, 2.56);
        let clf = fit_bayes(&spec).unwrap();
        assert!((clf.w()[0] - 2.56).abs() < 1e-14);
        assert!(clf.w()[1].abs() < 1e-14);
        assert!((clf.alpha() + 3.2768).abs() < 1e-12);
    }

    #[test]
    fn bayes_diagonal_inversion() {
        let spec = ProblemSpec::from_dense(
            DVector::from_vec(vec![2.0, 0.0]),
            DVector::zeros(2),
            DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 1.0])),
        )
        .unwrap();
        let clf = fit_bayes(&spec).unwrap();
        assert!((clf.w()[0] - 0.5).abs() < 1e-14);
        assert!((clf.alpha() + 0.5).abs() < 1e-14);
    }

    #[test]
    fn bayes_error_is_phi_of_half_delta() {
        // Non-trivial covariance and means; optimal rule must hit Φ(−Δ/2).
        let sigma = DMatrix::from_row_slice(2, 2, &[2.0, 0.6, 0.6, 1.5]);
        let spec = ProblemSpec::from_dense(
            DVector::from_vec(vec![1.0, -0.5]),
            DVector::from_vec(vec![-0.2, 0.4]),
            sigma,
        )
        .unwrap();
        let report = conditional_error(&fit_bayes(&spec).unwrap(), &spec).unwrap();
        let want = normal_cdf(-spec.delta() / 2.0);
        assert!((report.err_total - want).abs() < 1e-14);
        assert!((report.err_class1 - report.err_class2).abs() < 1e-14);
    }

    #[test]
    fn lda_scalar_hand_oracle() {
        // x̄₁=1, x̄₂=5, pooled variance 2 → w = −2, α = 6.
        let ds = LabeledDataset::new(
            DMatrix::from_column_slice(2, 1, &[0.0, 2.0]),
            DMatrix::from_column_slice(2, 1, &[4.0, 6.0]),
        )
        .unwrap();
        let clf = fit_lda(&ds).unwrap();
        assert!((clf.w()[0] + 2.0).abs() < 1e-14);
        assert!((clf.alpha() - 6.0).abs() < 1e-14);
    }

    #[test]
    fn lda_rejects_singular_boundary() {
        // n − 2 = p = 2: pooled scatter cannot be full rank.
        let ds = gaussian_dataset(2, 2, 2, 1.0, 7);
        let err = fit_lda(&ds).unwrap_err();
        assert!(err.to_string().contains("singular"));
        assert!(err.to_string().contains("ridge"));
    }

    #[test]
    fn corrected_lda_shift_matches_hand_arithmetic() {
        // p=10, n₁=20, n₂=40: shift = (58/47)·(10/40 − 10/80).
        let ds = gaussian_dataset(20, 40, 10, 1.0, 11);
        let plain = fit_lda(&ds).unwrap();
        let corrected = fit_corrected_lda(&ds).unwrap();
        let want: f64 = 58.0 / 47.0 * 0.125;
        assert!((want - 0.15425531914893617).abs() < 1e-15);
        assert!(((corrected.alpha() - plain.alpha()) - want).abs() < 1e-12);
        assert_eq!(corrected.w(), plain.w());
    }

    #[test]
    fn corrected_lda_equals_lda_for_balanced_classes() {
        let ds = gaussian_dataset(25, 25, 5, 1.0, 3);
        let plain = fit_lda(&ds).unwrap();
        let corrected = fit_corrected_lda(&ds).unwrap();
        assert_eq!(plain.alpha(), corrected.alpha());
    }

    #[test]
    fn corrected_lda_needs_room_for_the_factor() {
        let ds = gaussian_dataset(5, 5, 7, 1.0, 5);
        assert!(fit_corrected_lda(&ds).is_err());
    }

    #[test]
    fn label_swap_negates_the_rule() {
        let ds = gaussian_dataset(20, 40, 10, 1.0, 11);
        let swapped = LabeledDataset::new(ds.x2().clone(), ds.x1().clone()).unwrap();
        let a = fit_corrected_lda(&ds).unwrap();
        let b = fit_corrected_lda(&swapped).unwrap();
        assert!((a.alpha() + b.alpha()).abs() < 1e-10);
        assert!((a.w() + b.w()).abs().max() < 1e-10);
    }

    #[test]
    fn rlda_scalar_hand_oracle() {
        // x̄₁=5, x̄₂=2, pooled variance 2, λ=1 → w = 3/(2+1) = 1, α = −3.5.
        let ds = LabeledDataset::new(
            DMatrix::from_column_slice(2, 1, &[4.0, 6.0]),
            DMatrix::from_column_slice(2, 1, &[1.0, 3.0]),
        )
        .unwrap();
        let clf = fit_rlda(&ds, 1.0).unwrap();
        assert!((clf.w()[0] - 1.0).abs() < 1e-14);
        assert!((clf.alpha() + 3.5).abs() < 1e-14);
    }

    #[test]
    fn rlda_limits() {
        let ds = gaussian_dataset(30, 30, 4, 1.0, 13);
        let stats = PooledStats::from_dataset(&ds).unwrap();
        let diff = stats.xbar1() - stats.xbar2();

        // Huge λ: λ·w approaches the raw mean difference.
        let heavy = fit_rlda(&ds, 1e8).unwrap();
        for i in 0..4 {
            assert!((1e8 * heavy.w()[i] - diff[i]).abs() / diff.abs().max() < 1e-6);
        }

        // Tiny λ: direction matches plain LDA.
        let light = fit_rlda(&ds, 1e-12).unwrap();
        let plain = fit_lda(&ds).unwrap();
        for i in 0..4 {
            assert!((light.w()[i] - plain.w()[i]).abs() / plain.w().abs().max() < 1e-4);
        }
    }

    #[test]
    fn rlda_rejects_nonpositive_lambda() {
        let ds = gaussian_dataset(10, 10, 3, 1.0, 17);
        assert!(fit_rlda(&ds, 0.0).is_err());
        assert!(fit_rlda(&ds, -1.0).is_err());
    }

    /// Rescales a dataset so its pooled covariance is exactly I (up to
    /// floating point), preserving per-class centering structure.
    fn whitened_dataset(n1: usize, n2: usize, p: usize, seed: u64) -> LabeledDataset {
        let raw = gaussian_dataset(n1, n2, p, 0.0, seed);
        let stats = PooledStats::from_dataset(&raw).unwrap();
        let chol = nalgebra::linalg::Cholesky::new(stats.pooled().clone()).unwrap();
        let l_inv_t = chol
            .l()
            .solve_lower_triangular(&DMatrix::<f64>::identity(p, p))
            .unwrap()
            .transpose();
        let x1 = raw.x1() * &l_inv_t;
        let mut x2 = raw.x2() * &l_inv_t;
        // Separate the classes a little so directions are nonzero.
        for mut row in x2.row_iter_mut() {
            row[0] += 1.0;
        }
        LabeledDataset::new(x1, x2).unwrap()
    }

    #[test]
    fn corrected_rlda_shift_matches_hand_arithmetic() {
        // Sₙ = I, p=4, n₁=10, n₂=30, λ=1 → shift ≈ 0.070370370…
        let ds = whitened_dataset(10, 30, 4, 23);
        let stats = PooledStats::from_dataset(&ds).unwrap();
        let defect = (stats.pooled() - DMatrix::<f64>::identity(4, 4)).abs().max();
        assert!(defect < 1e-10, "whitening failed: defect {defect}");
        let (plain, corrected) = fit_rlda_pair_from(&stats, 1.0).unwrap();
        let shift = corrected.alpha() - plain.alpha();
        assert!((shift - 0.07037037037037037).abs() < 1e-9);
        assert_eq!(plain.w(), corrected.w());
    }

    #[test]
    fn corrected_rlda_equals_rlda_for_balanced_classes() {
        let ds = gaussian_dataset(15, 15, 6, 1.0, 29);
        let (plain, corrected) =
            fit_rlda_pair_from(&PooledStats::from_dataset(&ds).unwrap(), 0.5).unwrap();
        assert_eq!(plain.alpha(), corrected.alpha());
    }

    #[test]
    fn corrected_rlda_shift_approaches_lda_shift_as_lambda_vanishes() {
        // The two correction factors (n−2)/(n−p−3) and, in the λ→0 limit,
        // (n−2)/(n−p−2) agree to o(1); n must dominate p for a 1e-3 match.
        let ds = gaussian_dataset(40, 160, 10, 1.0, 11);
        let stats = PooledStats::from_dataset(&ds).unwrap();
        let lda_shift =
            fit_corrected_lda_from(&stats).unwrap().alpha() - fit_lda_from(&stats).unwrap().alpha();
        let (plain, corrected) = fit_rlda_pair_from(&stats, 1e-8).unwrap();
        let rlda_shift = corrected.alpha() - plain.alpha();
        assert!((rlda_shift - lda_shift).abs() < 1e-3);
    }

    #[test]
    fn naive_bayes_hand_oracle_and_translation_equivariance() {
        let ds = LabeledDataset::new(
            DMatrix::from_row_slice(2, 2, &[0.5, 1.5, 1.5, 0.5]),
            DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 1.0, -1.0]),
        )
        .unwrap();
        let clf = fit_naive_bayes(&ds).unwrap();
        assert!((clf.w()[0] - 1.0).abs() < 1e-14);
        assert!((clf.w()[1] - 1.0).abs() < 1e-14);
        assert!((clf.alpha() + 1.0).abs() < 1e-14);

        // Shift every sample by a constant vector: predictions must agree.
        let c = DVector::from_vec(vec![3.0, -2.0]);
        let shift = |m: &DMatrix<f64>| {
            let mut out = m.clone();
            for mut row in out.row_iter_mut() {
                row += c.transpose();
            }
            out
        };
        let moved = LabeledDataset::new(shift(ds.x1()), shift(ds.x2())).unwrap();
        let clf2 = fit_naive_bayes(&moved).unwrap();
        for point in [[0.2, 0.9], [-1.0, 0.4], [2.0, -3.0]] {
            let x = DVector::from_row_slice(&point);
            assert_eq!(
                predict(&clf, &x).unwrap(),
                predict(&clf2, &(&x + &c)).unwrap()
            );
        }
    }

    #[test]
    fn oracle_intercept_beats_plug_in_given_the_direction() {
        let spec = identity_spec(6, 2.0);
        let ds = gaussian_dataset(12, 36, 6, 2.0, 31);
        let oracle = fit_oracle_intercept(&ds, &spec, 0.5).unwrap();
        let plugin = fit_rlda(&ds, 0.5).unwrap();
        assert_eq!(oracle.w(), plugin.w());
        let e_oracle = conditional_error(&oracle, &spec).unwrap().err_total;
        let e_plugin = conditional_error(&plugin, &spec).unwrap().err_total;
        assert!(e_oracle <= e_plugin + 1e-12);

        // 1-D scan over intercepts never beats the oracle value.
        for k in -40..=40 {
            let alpha = oracle.alpha() + k as f64 * 0.05;
            let probe = FittedLinearClassifier::new(
                oracle.w().clone(),
                alpha,
                Method::Rlda,
                0.5,
                12,
                36,
            )
            .unwrap();
            let e = conditional_error(&probe, &spec).unwrap().err_total;
            assert!(e + 1e-12 >= e_oracle);
        }
    }

    #[test]
    fn predict_conventions() {
        let clf = FittedLinearClassifier::new(
            DVector::from_vec(vec![1.0, 0.0]),
            0.0,
            Method::Bayes,
            0.0,
            0,
            0,
        )
        .unwrap();
        assert_eq!(predict(&clf, &DVector::from_vec(vec![0.5, 9.0])).unwrap(), 1);
        // Exact tie resolves to class 2.
        assert_eq!(predict(&clf, &DVector::from_vec(vec![0.0, -3.0])).unwrap(), 2);
        assert!(predict(&clf, &DVector::from_vec(vec![1.0])).is_err());

        let spec = identity_spec(2, 2.56);
        let bayes = fit_bayes(&spec).unwrap();
        assert_eq!(predict(&bayes, spec.mu1()).unwrap(), 1);
    }

    #[test]
    fn conditional_error_no_separation_is_half() {
        let spec = ProblemSpec::from_dense(
            DVector::zeros(2),
            DVector::zeros(2),
            DMatrix::identity(2, 2),
        )
        .unwrap();
        let clf = FittedLinearClassifier::new(
            DVector::from_vec(vec![1.0, 0.0]),
            0.0,
            Method::Bayes,
            0.0,
            0,
            0,
        )
        .unwrap();
        let report = conditional_error(&clf, &spec).unwrap();
        assert_eq!(report.err_total, 0.5);
    }

    #[test]
    fn conditional_error_frozen_unit_case() {
        // w = e₁, α = 0, μ₁ = (1,0), μ₂ = (−1,0), Σ = I:
        // both class errors are Φ(−1).
        let spec = ProblemSpec::from_dense(
            DVector::from_vec(vec![1.0, 0.0]),
            DVector::from_vec(vec![-1.0, 0.0]),
            DMatrix::identity(2, 2),
        )
        .unwrap();
        let clf = FittedLinearClassifier::new(
            DVector::from_vec(vec![1.0, 0.0]),
            0.0,
            Method::Bayes,
            0.0,
            0,
            0,
        )
        .unwrap();
        let report = conditional_error(&clf, &spec).unwrap();
        let phi_m1 = 0.15865525393145705;
        assert!((report.err_class1 - phi_m1).abs() < 1e-14);
        assert!((report.err_class2 - phi_m1).abs() < 1e-14);
    }

    #[test]
    fn empirical_error_toy_cases() {
        let ds = LabeledDataset::new(
            DMatrix::from_column_slice(2, 1, &[2.0, 3.0]),
            DMatrix::from_column_slice(2, 1, &[-2.0, -3.0]),
        )
        .unwrap();
        let clf = FittedLinearClassifier::new(
            DVector::from_vec(vec![1.0]),
            0.0,
            Method::Bayes,
            0.0,
            0,
            0,
        )
        .unwrap();
        let report = empirical_error(&clf, &ds).unwrap();
        assert_eq!(report.err_total, 0.0);

        let flipped = LabeledDataset::new(ds.x2().clone(), ds.x1().clone()).unwrap();
        let worst = empirical_error(&clf, &flipped).unwrap();
        assert_eq!(worst.err_total, 1.0 - report.err_total);
    }

    #[test]
    fn lda_consistency_toward_true_direction() {
        // Moderate-size smoke test of consistency: p=5, n=20000 per class.
        let spec = identity_spec(5, 1.5);
        let ds = gaussian_dataset(20_000, 20_000, 5, 1.5, 41);
        let clf = fit_lda(&ds).unwrap();
        let truth = fit_bayes(&spec).unwrap();
        for i in 0..5 {
            assert!((clf.w()[i] - truth.w()[i]).abs() < 0.05 * truth.w().abs().max().max(1.0));
        }
    }
}
