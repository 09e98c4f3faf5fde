//! Spectral-limit (random-matrix) theory: the Marčenko–Pastur fixed point
//! and its derivative, the R/h/H functionals built from it, and the limit
//! misclassification rates of every classifier in the suite.
//!
//! Conventions: y₁ = p/n₁, y₂ = p/n₂, y = y₁y₂/(y₁+y₂); m₀ denotes the
//! companion Stieltjes transform m(z) of the sample-covariance spectrum
//! evaluated at z = −λ, and m₀′ its z-derivative there.

use crate::error::{Error, Result};
use crate::stats::normal_cdf;
use crate::types::{ProblemSpec, SpectralModel};

/// Everything the ridge-rate formulas need at one (model, y₁, y₂, λ):
/// the fixed point, its derivative, and the derived functionals.
#[derive(Debug, Clone, Copy)]
pub struct TheoryPoint {
    /// Mahalanobis separation Δ of the model.
    pub delta: f64,
    /// Dimension-to-sample ratios p/n₁ and p/n₂.
    pub y1: f64,
    pub y2: f64,
    /// Combined ratio y = y₁y₂/(y₁+y₂).
    pub y: f64,
    /// Ridge parameter λ > 0.
    pub lambda: f64,
    /// Fixed point m₀(−λ) and derivative m₀′(−λ).
    pub m0: f64,
    pub m0_prime: f64,
    /// First and second resolvent functionals R₁(λ), R₂(λ).
    pub r1: f64,
    pub r2: f64,
    /// γ = 1 − y·(1 − λm₀) ∈ (0, 1]; equals 1/(1 + y·R₁).
    pub gamma: f64,
    /// ε = y·R₂/(1 + y·R₁)² (diagnostic concentration quantity).
    pub epsilon: f64,
    /// Mean-energy functionals h₁, h₂ evaluated at t = λ/γ.
    pub h1_at: f64,
    pub h2_at: f64,
    /// H₁(λ) = h₁(λ/γ)/γ and H₂(λ) = [(1+yR₁)² + yR₂]·h₂(λ/γ).
    pub big_h1: f64,
    pub big_h2: f64,
}

/// Per-class limit rates of a rule and their equal-weight mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSplit {
    pub class1: f64,
    pub class2: f64,
    pub total: f64,
}

impl RateSplit {
    fn from_args(arg1: f64, arg2: f64) -> Self {
        let class1 = normal_cdf(arg1);
        let class2 = normal_cdf(arg2);
        Self {
            class1,
            class2,
            total: (class1 + class2) / 2.0,
        }
    }
}

fn combined_ratio(y1: f64, y2: f64) -> Result<f64> {
    if !(y1 > 0.0) || !(y2 > 0.0) || !y1.is_finite() || !y2.is_finite() {
        return Err(Error::Domain(format!(
            "ratios must be positive and finite, got y1 = {y1}, y2 = {y2}"
        )));
    }
    Ok(y1 * y2 / (y1 + y2))
}

// ---------------------------------------------------------------------------
// Fixed point
// ---------------------------------------------------------------------------

/// Right-hand side of the fixed-point equation
/// m = Σᵢ wᵢ / (λᵢ·(1 − y + yλm) + λ).
fn fixed_point_rhs(model: &SpectralModel, y: f64, lambda: f64, m: f64) -> f64 {
    let gamma = 1.0 - y + y * lambda * m;
    model
        .atoms()
        .iter()
        .map(|a| a.weight / (a.eigenvalue * gamma + lambda))
        .sum()
}

/// Solves the spectral fixed-point equation at z = −λ on the admissible
/// branch (the one satisfying 1 − y + yλm ≥ 0) and returns (m₀, m₀′).
///
/// Damped iteration with θ = ½ from m = 1/(λ + mean eigenvalue); if it
/// stalls, bisection on the residual, which is strictly increasing in m on
/// the admissible branch. The derivative comes from implicit
/// differentiation of the fixed point (exact linear solve).
pub fn solve_mp(model: &SpectralModel, y: f64, lambda: f64) -> Result<(f64, f64)> {
    model.validate()?;
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "fixed point needs lambda > 0, got {lambda}"
        )));
    }
    if !(y > 0.0) || !y.is_finite() {
        return Err(Error::Domain(format!("fixed point needs y > 0, got {y}")));
    }

    // Admissible bracket: γ ≥ 0 forces m ≥ (y−1)/(yλ); m ≤ ∫dH/λ = 1/λ.
    let lower = ((y - 1.0) / (y * lambda)).max(0.0);
    let upper = 1.0 / lambda;

    let mut m = 1.0 / (lambda + model.mean_eigenvalue());
    let mut converged = false;
    for _ in 0..100_000 {
        let next = (0.5 * m + 0.5 * fixed_point_rhs(model, y, lambda, m)).clamp(lower, upper);
        let done = (next - m).abs() <= 1e-13 * m.abs().max(1.0);
        m = next;
        if done {
            converged = true;
            break;
        }
    }

    let residual = |m: f64| m - fixed_point_rhs(model, y, lambda, m);
    if !converged || residual(m).abs() > 1e-12 * m.abs().max(1.0) {
        // Bisection fallback on the monotone residual.
        let (mut lo, mut hi) = (lower, upper);
        if !(residual(lo) <= 0.0 && residual(hi) >= 0.0) {
            return Err(Error::Numerical(format!(
                "fixed-point bracket failed at y = {y}, lambda = {lambda}"
            )));
        }
        while hi - lo > 1e-15 * hi.abs().max(1.0) {
            let mid = 0.5 * (lo + hi);
            if residual(mid) >= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        m = 0.5 * (lo + hi);
    }

    let final_residual = residual(m);
    if final_residual.abs() > 1e-12 * m.abs().max(1.0) {
        return Err(Error::Numerical(format!(
            "fixed point did not converge: residual {final_residual:.3e} at y = {y}, lambda = {lambda}"
        )));
    }
    let gamma = 1.0 - y + y * lambda * m;
    if gamma < -1e-10 {
        return Err(Error::Numerical(format!(
            "fixed point violates the side condition: 1 − y + yλm = {gamma:.3e}"
        )));
    }

    // Implicit differentiation: m′ = A / (1 + yλB) with
    // A = Σ wᵢ(λᵢym + 1)/Dᵢ², B = Σ wᵢλᵢ/Dᵢ², Dᵢ = λᵢγ + λ.
    let (mut a, mut b) = (0.0, 0.0);
    for atom in model.atoms() {
        let d = atom.eigenvalue * gamma + lambda;
        a += atom.weight * (atom.eigenvalue * y * m + 1.0) / (d * d);
        b += atom.weight * atom.eigenvalue / (d * d);
    }
    let m_prime = a / (1.0 + y * lambda * b);
    Ok((m, m_prime))
}

/// Closed-form fixed point and derivative for the scaled-identity model
/// H = point mass at σ².
pub fn mp_closed_form_scaled_identity(sigma2: f64, y: f64, lambda: f64) -> Result<(f64, f64)> {
    if !(sigma2 > 0.0) || !(y > 0.0) || !(lambda > 0.0) {
        return Err(Error::Domain(format!(
            "closed form needs sigma2, y, lambda > 0; got ({sigma2}, {y}, {lambda})"
        )));
    }
    let c = sigma2 - y * sigma2 + lambda;
    let m0 = ((c * c + 4.0 * y * lambda * sigma2).sqrt() - c) / (2.0 * y * lambda * sigma2);
    // Differentiating σ²(1−y)m + σ²yλm² + λm = 1 in z = −λ.
    let m0_prime =
        (sigma2 * y * m0 * m0 + m0) / (sigma2 * (1.0 - y) + 2.0 * sigma2 * y * lambda * m0 + lambda);
    Ok((m0, m0_prime))
}

// ---------------------------------------------------------------------------
// Functionals
// ---------------------------------------------------------------------------

/// R₁(λ) = (1−λm₀)/γ and R₂(λ) = (1−λm₀)/γ³ − (λm₀ − λ²m₀′)/γ⁴
/// with γ = 1 − y(1−λm₀).
pub fn r_functionals(model: &SpectralModel, y: f64, lambda: f64) -> Result<(f64, f64)> {
    let (m0, m0_prime) = solve_mp(model, y, lambda)?;
    Ok(r_from_solution(y, lambda, m0, m0_prime))
}

fn r_from_solution(y: f64, lambda: f64, m0: f64, m0_prime: f64) -> (f64, f64) {
    let one_minus = 1.0 - lambda * m0;
    let gamma = 1.0 - y * one_minus;
    let r1 = one_minus / gamma;
    let r2 = one_minus / gamma.powi(3)
        - (lambda * m0 - lambda * lambda * m0_prime) / gamma.powi(4);
    (r1, r2)
}

/// Mean-energy resolvent profiles of the model at shift t ≥ 0:
/// h₁(t) = Δ⁻²·Σᵢ dᵢ²/(λᵢ+t), h₂(t) = Δ⁻²·Σᵢ λᵢdᵢ²/(λᵢ+t)².
pub fn h_functionals(model: &SpectralModel, t: f64) -> Result<(f64, f64)> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("shift t must be ≥ 0, got {t}")));
    }
    let delta_sq = model.delta() * model.delta();
    if !(delta_sq > 0.0) {
        return Err(Error::Domain(
            "mean-energy profile undefined for delta = 0".into(),
        ));
    }
    let (mut h1, mut h2) = (0.0, 0.0);
    for (atom, d_sq) in model.atoms().iter().zip(model.mean_proj_sq()) {
        let shifted = atom.eigenvalue + t;
        h1 += d_sq / shifted;
        h2 += atom.eigenvalue * d_sq / (shifted * shifted);
    }
    Ok((h1 / delta_sq, h2 / delta_sq))
}

/// The γ-rescaled functionals entering the ridge rate, plus diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct RidgeFunctionals {
    pub gamma: f64,
    pub epsilon: f64,
    pub h1_at: f64,
    pub h2_at: f64,
    pub big_h1: f64,
    pub big_h2: f64,
}

/// H₁(λ) = h₁(λ/γ)/γ and H₂(λ) = [(1+yR₁)² + yR₂]·h₂(λ/γ).
pub fn big_h_functionals(model: &SpectralModel, y: f64, lambda: f64) -> Result<RidgeFunctionals> {
    let (m0, m0_prime) = solve_mp(model, y, lambda)?;
    big_h_from_solution(model, y, lambda, m0, m0_prime)
}

fn big_h_from_solution(
    model: &SpectralModel,
    y: f64,
    lambda: f64,
    m0: f64,
    m0_prime: f64,
) -> Result<RidgeFunctionals> {
    let gamma = 1.0 - y * (1.0 - lambda * m0);
    if gamma <= 0.0 {
        return Err(Error::Numerical(format!(
            "degenerate rescaling: gamma = {gamma:.3e} at y = {y}, lambda = {lambda}"
        )));
    }
    let (r1, r2) = r_from_solution(y, lambda, m0, m0_prime);
    let (h1_at, h2_at) = h_functionals(model, lambda / gamma)?;
    let inflation = (1.0 + y * r1).powi(2);
    Ok(RidgeFunctionals {
        gamma,
        epsilon: y * r2 / inflation,
        h1_at,
        h2_at,
        big_h1: h1_at / gamma,
        big_h2: (inflation + y * r2) * h2_at,
    })
}

impl TheoryPoint {
    /// Evaluates the full functional stack at one (model, y₁, y₂, λ) and
    /// checks the solution identities.
    pub fn evaluate(model: &SpectralModel, y1: f64, y2: f64, lambda: f64) -> Result<Self> {
        let y = combined_ratio(y1, y2)?;
        let (m0, m0_prime) = solve_mp(model, y, lambda)?;
        let (r1, r2) = r_from_solution(y, lambda, m0, m0_prime);
        let ridge = big_h_from_solution(model, y, lambda, m0, m0_prime)?;
        let point = Self {
            delta: model.delta(),
            y1,
            y2,
            y,
            lambda,
            m0,
            m0_prime,
            r1,
            r2,
            gamma: ridge.gamma,
            epsilon: ridge.epsilon,
            h1_at: ridge.h1_at,
            h2_at: ridge.h2_at,
            big_h1: ridge.big_h1,
            big_h2: ridge.big_h2,
        };
        point.validate(model)?;
        Ok(point)
    }

    /// Solution identities: fixed-point residual, γ = 1/(1+yR₁), the side
    /// condition, and nonnegativity of the variance-like functionals.
    pub fn validate(&self, model: &SpectralModel) -> Result<()> {
        let residual = self.m0 - fixed_point_rhs(model, self.y, self.lambda, self.m0);
        if residual.abs() > 1e-10 * self.m0.abs().max(1.0) {
            return Err(Error::Numerical(format!(
                "fixed-point residual {residual:.3e} out of tolerance"
            )));
        }
        let gamma_alt = 1.0 / (1.0 + self.y * self.r1);
        if (self.gamma - gamma_alt).abs() > 1e-10 * self.gamma.abs().max(1e-30) {
            return Err(Error::Numerical(format!(
                "gamma identity broken: {} vs {}",
                self.gamma, gamma_alt
            )));
        }
        if 1.0 - self.y + self.y * self.lambda * self.m0 < -1e-10 {
            return Err(Error::Numerical("side condition violated".into()));
        }
        if self.r2 < 0.0 || self.big_h2 < 0.0 {
            return Err(Error::Numerical(format!(
                "variance functionals negative: R2 = {}, H2 = {}",
                self.r2, self.big_h2
            )));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Limit rates
// ---------------------------------------------------------------------------

/// Limit rate of the rule with the TRUE covariance but estimated means:
/// ½·Σⱼ Φ(−(Δ² + (−1)ʲ(y₁−y₂)) / (2√(Δ²+y₁+y₂))).
pub fn rate_known_cov(delta: f64, y1: f64, y2: f64) -> Result<RateSplit> {
    if !(delta > 0.0) || y1 < 0.0 || y2 < 0.0 {
        return Err(Error::Domain(format!(
            "need delta > 0 and y1, y2 ≥ 0; got ({delta}, {y1}, {y2})"
        )));
    }
    let denom = 2.0 * (delta * delta + y1 + y2).sqrt();
    Ok(RateSplit::from_args(
        -(delta * delta + (y2 - y1)) / denom,
        -(delta * delta + (y1 - y2)) / denom,
    ))
}

/// Limit rate of the rule with TRUE means but the pooled sample covariance:
/// Φ(−(Δ/2)·√(1−y)).
pub fn rate_known_means(delta: f64, y: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("need delta > 0, got {delta}")));
    }
    if !(0.0..1.0).contains(&y) {
        return Err(Error::Domain(format!(
            "sample-covariance rate needs 0 ≤ y < 1, got {y}"
        )));
    }
    Ok(normal_cdf(-(delta / 2.0) * (1.0 - y).sqrt()))
}

/// Limit rate of plain LDA (both means and covariance estimated):
/// ½·Σⱼ Φ(−(Δ² + (−1)ʲ(y₁−y₂))·√(1−y) / (2√(Δ²+y₁+y₂))), y = y₁y₂/(y₁+y₂).
pub fn rate_lda(delta: f64, y1: f64, y2: f64) -> Result<RateSplit> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("need delta > 0, got {delta}")));
    }
    let y = combined_ratio(y1, y2)?;
    if y >= 1.0 {
        return Err(Error::Domain(format!(
            "LDA limit needs y = y1·y2/(y1+y2) < 1, got {y}"
        )));
    }
    let shrink = (1.0 - y).sqrt();
    let denom = 2.0 * (delta * delta + y1 + y2).sqrt();
    Ok(RateSplit::from_args(
        -(delta * delta + (y2 - y1)) * shrink / denom,
        -(delta * delta + (y1 - y2)) * shrink / denom,
    ))
}

/// Limit rate of the intercept-corrected LDA:
/// Φ(−Δ²·√(1−y) / (2√(Δ²+y₁+y₂))).
pub fn rate_corrected_lda(delta: f64, y1: f64, y2: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("need delta > 0, got {delta}")));
    }
    let y = combined_ratio(y1, y2)?;
    if y >= 1.0 {
        return Err(Error::Domain(format!(
            "corrected-LDA limit needs y < 1, got {y}"
        )));
    }
    let arg = -delta * delta * (1.0 - y).sqrt() / (2.0 * (delta * delta + y1 + y2).sqrt());
    Ok(normal_cdf(arg))
}

fn check_delta_consistency(model: &SpectralModel, delta: f64) -> Result<()> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("need delta > 0, got {delta}")));
    }
    if (model.delta() - delta).abs() > 1e-8 * delta.max(1.0) {
        return Err(Error::Validation(format!(
            "model separation {} inconsistent with requested delta {}",
            model.delta(),
            delta
        )));
    }
    Ok(())
}

/// Limit rate of ridge-regularized LDA at λ > 0:
/// ½·Σⱼ Φ(−(H₁Δ² + (−1)ʲ(y₁−y₂)R₁) / (2√(H₂Δ² + (y₁+y₂)R₂))).
pub fn rate_rlda(
    model: &SpectralModel,
    delta: f64,
    y1: f64,
    y2: f64,
    lambda: f64,
) -> Result<RateSplit> {
    check_delta_consistency(model, delta)?;
    let point = TheoryPoint::evaluate(model, y1, y2, lambda)?;
    Ok(rate_rlda_from_point(&point))
}

/// Ridge rate from an already-evaluated [`TheoryPoint`].
pub fn rate_rlda_from_point(point: &TheoryPoint) -> RateSplit {
    let d2 = point.delta * point.delta;
    let denom = 2.0 * (point.big_h2 * d2 + (point.y1 + point.y2) * point.r2).sqrt();
    RateSplit::from_args(
        -(point.big_h1 * d2 + (point.y2 - point.y1) * point.r1) / denom,
        -(point.big_h1 * d2 + (point.y1 - point.y2) * point.r1) / denom,
    )
}

/// Limit rate of the intercept-corrected ridge rule:
/// Φ(−H₁Δ² / (2√(H₂Δ² + (y₁+y₂)R₂))).
pub fn rate_corrected_rlda(
    model: &SpectralModel,
    delta: f64,
    y1: f64,
    y2: f64,
    lambda: f64,
) -> Result<f64> {
    check_delta_consistency(model, delta)?;
    let point = TheoryPoint::evaluate(model, y1, y2, lambda)?;
    Ok(rate_corrected_rlda_from_point(&point))
}

/// Corrected ridge rate from an already-evaluated [`TheoryPoint`].
pub fn rate_corrected_rlda_from_point(point: &TheoryPoint) -> f64 {
    let d2 = point.delta * point.delta;
    let denom = 2.0 * (point.big_h2 * d2 + (point.y1 + point.y2) * point.r2).sqrt();
    normal_cdf(-point.big_h1 * d2 / denom)
}

/// Maximum relative deviation of the model from the aligned-energy
/// structure dᵢ² = Δ²·λᵢwᵢ (mean energy proportional to eigenvalue·weight).
fn aligned_structure_defect(model: &SpectralModel) -> f64 {
    let delta_sq = model.delta() * model.delta();
    model
        .atoms()
        .iter()
        .zip(model.mean_proj_sq())
        .map(|(atom, d_sq)| {
            let want = delta_sq * atom.eigenvalue * atom.weight;
            (d_sq - want).abs() / want.max(1e-300)
        })
        .fold(0.0, f64::max)
}

/// Simplified ridge rate valid when the mean-difference energy is
/// proportional to eigenvalue·weight (so H₁ = R₁ and H₂ = R₂):
/// ½·Σⱼ Φ(−(Δ² + (−1)ʲ(y₁−y₂))·R₁ / (2√((Δ²+y₁+y₂)·R₂))).
pub fn rate_rlda_isotropic(
    model: &SpectralModel,
    delta: f64,
    y1: f64,
    y2: f64,
    lambda: f64,
) -> Result<f64> {
    check_delta_consistency(model, delta)?;
    let defect = aligned_structure_defect(model);
    if defect > 1e-6 {
        return Err(Error::Domain(format!(
            "model violates the aligned-energy structure d² ∝ λ·w (relative deviation {defect:.3e})"
        )));
    }
    let y = combined_ratio(y1, y2)?;
    let (r1, r2) = r_functionals(model, y, lambda)?;
    let scale = r1 / r2.sqrt();
    let denom = 2.0 * (delta * delta + y1 + y2).sqrt();
    let split = RateSplit::from_args(
        -(delta * delta + (y2 - y1)) * scale / denom,
        -(delta * delta + (y1 - y2)) * scale / denom,
    );
    Ok(split.total)
}

/// Limit rate of the mean-difference (covariance-free) rule with balanced
/// classes n₁ = n₂ = n/2: Φ(−dᵀd / (2√(dᵀΣd + (4/n)·tr Σ²))).
pub fn rate_naive_bayes(spec: &ProblemSpec, n: usize) -> Result<f64> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::Domain(format!(
            "mean-difference rate assumes balanced classes; n must be even and positive, got {n}"
        )));
    }
    let d = spec.mean_diff();
    let signal = d.dot(&d);
    if !(signal > 0.0) {
        return Err(Error::Domain("means coincide (delta = 0)".into()));
    }
    let noise = spec.covariance().quadratic_form(&d) + 4.0 / n as f64 * spec.covariance().trace_sq();
    Ok(normal_cdf(-signal / (2.0 * noise.sqrt())))
}
