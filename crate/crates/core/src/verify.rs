//! Fast self-checks tying the spectral-theory implementation to
//! independent ground truth: closed-form fixed points, exact inverse-Wishart
//! moments, the aligned-energy shortcut, and the small-λ reduction of the
//! ridge rate to the pooled-inverse rate.

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, StandardNormal};

use crate::error::{Error, Result};
use crate::stats::{compensated_sum, sample_sd};
use crate::theory::{
    mp_closed_form_scaled_identity, rate_lda, rate_rlda, rate_rlda_isotropic, solve_mp,
};
use crate::types::{SpectralAtom, SpectralModel};

/// Outcome of one self-check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed residual / deviation (units depend on the check).
    pub observed: f64,
    pub tolerance: f64,
    /// Human-readable context for audit (worst grid point, estimates, …).
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Knobs for the self-check run. `m0_offset` is a test hook that perturbs
/// the solver output before the closed-form comparison, to exercise the
/// failure path end to end; it must be 0 in real use.
#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub m0_offset: f64,
    pub wishart_draws: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { m0_offset: 0.0, wishart_draws: 4000, seed: 0x5EED }
    }
}

/// Runs the full fast suite and reports per-check residuals.
pub fn run_verification(opts: &VerifyOptions) -> Result<VerificationReport> {
    Ok(VerificationReport {
        checks: vec![
            check_mp_closed_form(opts.m0_offset)?,
            check_mp_derivative()?,
            check_wishart_moments(opts.wishart_draws, opts.seed)?,
            check_aligned_shortcut()?,
            check_small_lambda_reduction()?,
        ],
    })
}

const SIGMA2_GRID: [f64; 3] = [0.5, 1.0, 2.0];
const Y_GRID: [f64; 3] = [0.25, 0.5, 2.0];
const LAMBDA_GRID: [f64; 3] = [0.1, 1.0, 5.0];

fn point_mass(sigma2: f64) -> SpectralModel {
    let delta = 2.0;
    SpectralModel::new(
        vec![SpectralAtom { eigenvalue: sigma2, weight: 1.0 }],
        vec![delta * delta * sigma2],
        delta,
    )
    .expect("point-mass model is always valid")
}

/// Fixed-point solver vs. the quadratic closed form on scaled identities,
/// over a 27-point (σ², y, λ) grid.
fn check_mp_closed_form(m0_offset: f64) -> Result<CheckResult> {
    let tolerance = 1e-10;
    let mut observed = 0.0_f64;
    let mut worst = String::new();
    for sigma2 in SIGMA2_GRID {
        let model = point_mass(sigma2);
        for y in Y_GRID {
            for lambda in LAMBDA_GRID {
                let (m_solver, _) = solve_mp(&model, y, lambda)?;
                let (m_exact, _) = mp_closed_form_scaled_identity(sigma2, y, lambda)?;
                let dev = (m_solver + m0_offset - m_exact).abs();
                if dev > observed {
                    observed = dev;
                    worst = format!("σ²={sigma2}, y={y}, λ={lambda}");
                }
            }
        }
    }
    Ok(CheckResult {
        name: "mp_fixed_point_closed_form",
        passed: observed <= tolerance,
        observed,
        tolerance,
        detail: format!("worst grid point: {worst}"),
    })
}

/// Implicit derivative of the fixed point vs. a central finite difference
/// of the solver itself (relative error).
fn check_mp_derivative() -> Result<CheckResult> {
    let tolerance = 1e-6;
    let mut observed = 0.0_f64;
    let mut worst = String::new();
    for sigma2 in SIGMA2_GRID {
        let model = point_mass(sigma2);
        for y in Y_GRID {
            for lambda in [0.5, 1.0, 5.0] {
                let (_, m_prime) = solve_mp(&model, y, lambda)?;
                let h = 1e-5 * lambda;
                let (plus, _) = solve_mp(&model, y, lambda + h)?;
                let (minus, _) = solve_mp(&model, y, lambda - h)?;
                // m₀(−λ) decreases in λ; m₀′ is reported for d/dz at z=−λ.
                let fd = (minus - plus) / (2.0 * h);
                let rel = ((m_prime - fd) / fd).abs();
                if rel > observed {
                    observed = rel;
                    worst = format!("σ²={sigma2}, y={y}, λ={lambda}");
                }
            }
        }
    }
    Ok(CheckResult {
        name: "mp_derivative_finite_difference",
        passed: observed <= tolerance,
        observed,
        tolerance,
        detail: format!("worst grid point: {worst}"),
    })
}

/// One draw of W ~ Wishart(I_p, m) through the triangular (Bartlett)
/// factorization W = AAᵀ; returns (e₁ᵀW⁻¹e₁, e₁ᵀW⁻²e₁).
pub fn wishart_inverse_forms(p: usize, m: usize, rng: &mut ChaCha8Rng) -> Result<(f64, f64)> {
    let mut a = DMatrix::<f64>::zeros(p, p);
    for i in 0..p {
        let chi2 = ChiSquared::new((m - i) as f64)
            .map_err(|e| Error::Numerical(format!("chi-squared setup failed: {e}")))?;
        a[(i, i)] = rng.sample::<f64, _>(chi2).sqrt();
        for j in 0..i {
            a[(i, j)] = rng.sample::<f64, _>(StandardNormal);
        }
    }
    let mut e1 = DVector::zeros(p);
    e1[0] = 1.0;
    let x = a
        .solve_lower_triangular(&e1)
        .and_then(|y| a.tr_solve_lower_triangular(&y))
        .ok_or_else(|| Error::Numerical("degenerate Wishart draw".into()))?;
    Ok((x[0], x.norm_squared()))
}

/// Monte Carlo moments of e₁ᵀW⁻¹e₁, e₁ᵀW⁻²e₁, (e₁ᵀW⁻¹e₁)² at (m,p)=(30,5)
/// against their exact inverse-Wishart values, in standard-error units.
fn check_wishart_moments(draws: usize, seed: u64) -> Result<CheckResult> {
    if draws < 100 {
        return Err(Error::Config(format!(
            "need ≥ 100 Wishart draws for a meaningful check, got {draws}"
        )));
    }
    let (m, p) = (30usize, 5usize);
    let mf = m as f64;
    let pf = p as f64;
    let exact = [
        1.0 / (mf - pf - 1.0),
        (mf - 1.0) / ((mf - pf) * (mf - pf - 1.0) * (mf - pf - 3.0)),
        1.0 / ((mf - pf - 1.0) * (mf - pf - 3.0)),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut first = Vec::with_capacity(draws);
    let mut second = Vec::with_capacity(draws);
    let mut first_sq = Vec::with_capacity(draws);
    for _ in 0..draws {
        let (q1, q2) = wishart_inverse_forms(p, m, &mut rng)?;
        first.push(q1);
        second.push(q2);
        first_sq.push(q1 * q1);
    }
    let names = ["E(eᵀW⁻¹e)", "E(eᵀW⁻²e)", "E((eᵀW⁻¹e)²)"];
    let mut observed = 0.0_f64;
    let mut details = Vec::new();
    for (i, sample) in [&first, &second, &first_sq].into_iter().enumerate() {
        let mean = compensated_sum(sample) / draws as f64;
        let se = sample_sd(sample) / (draws as f64).sqrt();
        let z = ((mean - exact[i]) / se).abs();
        observed = observed.max(z);
        details.push(format!("{}: {mean:.6} vs {:.6} ({z:.2} SE)", names[i], exact[i]));
    }
    Ok(CheckResult {
        name: "wishart_inverse_moments",
        passed: observed <= 4.0,
        observed,
        tolerance: 4.0,
        detail: details.join("; "),
    })
}

/// General ridge rate vs. the aligned-energy shortcut on a model whose
/// mean energies satisfy dᵢ² = Δ²λᵢwᵢ exactly.
fn check_aligned_shortcut() -> Result<CheckResult> {
    let tolerance = 1e-8;
    let delta = 2.5631031310892009;
    let atoms = vec![
        SpectralAtom { eigenvalue: 3.0, weight: 0.4 },
        SpectralAtom { eigenvalue: 1.0, weight: 0.6 },
    ];
    let proj: Vec<f64> = atoms
        .iter()
        .map(|a| delta * delta * a.eigenvalue * a.weight)
        .collect();
    let model = SpectralModel::new(atoms, proj, delta)?;
    let (y1, y2) = (0.5, 1.5);
    let mut observed = 0.0_f64;
    let mut worst = String::new();
    for i in 0..8 {
        let lambda = 0.05 * (5.0_f64 / 0.05).powf(i as f64 / 7.0);
        let general = rate_rlda(&model, delta, y1, y2, lambda)?.total;
        let shortcut = rate_rlda_isotropic(&model, delta, y1, y2, lambda)?;
        let dev = (general - shortcut).abs();
        if dev > observed {
            observed = dev;
            worst = format!("λ={lambda:.4}");
        }
    }
    Ok(CheckResult {
        name: "aligned_energy_shortcut",
        passed: observed <= tolerance,
        observed,
        tolerance,
        detail: format!("worst grid point: {worst}"),
    })
}

/// For y < 1 the ridge rate must approach the pooled-inverse rate as λ → 0.
fn check_small_lambda_reduction() -> Result<CheckResult> {
    let tolerance = 2e-3;
    let delta = 2.5631031310892009;
    let model = SpectralModel::new(
        vec![SpectralAtom { eigenvalue: 1.0, weight: 1.0 }],
        vec![delta * delta],
        delta,
    )?;
    let (y1, y2) = (0.5, 0.5);
    let ridge = rate_rlda(&model, delta, y1, y2, 1e-6)?;
    let pooled = rate_lda(delta, y1, y2)?;
    let observed = (ridge.total - pooled.total).abs();
    Ok(CheckResult {
        name: "ridge_to_pooled_reduction",
        passed: observed <= tolerance,
        observed,
        tolerance,
        detail: format!("ridge(λ=1e-6)={:.6} vs pooled={:.6}", ridge.total, pooled.total),
    })
}
