//! Synthetic-scenario generation (covariances, mean structures, Gaussian
//! samples) and the replicated Monte Carlo harness that compares empirical
//! classifier errors against their spectral-limit predictions.
//!
//! Determinism contract: every random quantity is derived from the
//! experiment master seed through [`derive_seed`] and per-class ChaCha
//! substreams, so replicate r is reproducible without generating
//! replicates 0..r−1.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{
    conditional_error, fit_bayes, fit_corrected_lda_from, fit_lda_from, fit_naive_bayes_from,
    fit_oracle_intercept_from, fit_rlda_from, fit_rlda_pair_from, ConditionalErrorReport,
    PooledStats,
};
use crate::error::{Error, Result};
use crate::lambda::{default_lambda_grid, log_spaced_grid, select_lambda_cv, select_lambda_from_eigs};
use crate::linalg::sym_eigenvalues_desc;
use crate::stats::{compensated_sum, normal_quantile, sample_sd};
use crate::theory::{
    rate_corrected_lda, rate_corrected_rlda, rate_lda, rate_naive_bayes, rate_rlda,
};
use crate::types::{
    make_spectral_model, Ar1Model, Covariance, CovarianceModel, LabeledDataset, ProblemSpec,
};

pub use crate::types::CovarianceModel as CovarianceGenerator;

/// Splittable seed derivation (SplitMix64 finalizer over master ⊕ index):
/// statistically independent streams for distinct indices, reproducible in
/// isolation.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed index reserved for the mean draw (never a replicate index).
pub const MEAN_SEED_INDEX: u64 = u64::MAX;

// ---------------------------------------------------------------------------
// Covariance generation
// ---------------------------------------------------------------------------

/// Materializes a covariance family at dimension p: dense form plus exact
/// descending eigendecomposition (and cached Cholesky factor).
pub fn gen_covariance(generator: &CovarianceGenerator, p: usize) -> Result<Covariance> {
    generator.realize(p)
}

/// Trigonometric approximation to the AR(1) Toeplitz spectrum:
/// λ_k ≈ (1−ρ²)/(1+ρ²−2ρ·cos(kπ/(p+1))), k = 1..p.
pub fn szego_eigenvalues(rho: f64, p: usize) -> Result<Vec<f64>> {
    if !(rho.abs() < 1.0) {
        return Err(Error::Domain(format!("need |rho| < 1, got {rho}")));
    }
    Ok((1..=p)
        .map(|k| {
            let angle = k as f64 * std::f64::consts::PI / (p as f64 + 1.0);
            (1.0 - rho * rho) / (1.0 + rho * rho - 2.0 * rho * angle.cos())
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Mean generation
// ---------------------------------------------------------------------------

/// How the population mean difference relates to the covariance eigenbasis.
///
/// Externally tagged JSON, e.g. `{"eigenvector": {"k": 1}}` or
/// `{"isotropic": {"case": "iso2"}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanModel {
    /// μ₁ ∝ e₁ (all separation in the first coordinate).
    FirstCoordinate(FirstCoordinateMean),
    /// A random fraction of coordinates carry independent N(0,1) entries.
    SparseRandom(SparseRandomMean),
    /// Every coordinate carries an independent N(0,1) entry.
    DenseRandom(DenseRandomMean),
    /// μ₁−μ₂ ∝ √λ_k·v_k for the k-th eigenvector (1-based).
    Eigenvector(EigenvectorMean),
    /// Equal projections of μ₁−μ₂, Σ^{−1/2}(μ₁−μ₂), or Σ⁻¹(μ₁−μ₂)
    /// on every eigenvector.
    Isotropic(IsotropicMean),
    /// Σ⁻¹(μ₁−μ₂) ∝ (s standard-normal entries, then zeros): a sparse
    /// optimal classification direction.
    SparseDirection(SparseDirectionMean),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FirstCoordinateMean {}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SparseRandomMean {
    /// Fraction of coordinates in the support, in (0, 1].
    pub fraction: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenseRandomMean {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenvectorMean {
    /// 1-based eigenvector index (eigenvalues descending).
    pub k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IsoCase {
    /// μ₁−μ₂ ∝ v₁+⋯+v_p.
    Iso1,
    /// Σ^{−1/2}(μ₁−μ₂) ∝ v₁+⋯+v_p (aligned energy: dᵢ² ∝ λᵢ).
    Iso2,
    /// Σ⁻¹(μ₁−μ₂) ∝ v₁+⋯+v_p.
    Iso3,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsotropicMean {
    pub case: IsoCase,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SparseDirectionMean {
    /// Number of leading nonzero entries of Σ⁻¹(μ₁−μ₂).
    pub s: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn default_target_bayes_error() -> f64 {
    0.1
}

/// A mean structure plus the Bayes error it must realize after rescaling.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeanSpec {
    pub model: MeanModel,
    /// Target Φ(−Δ/2) in (0, 0.5); the draw is rescaled to hit it exactly.
    #[serde(default = "default_target_bayes_error")]
    pub target_bayes_error: f64,
}

/// Builds (μ₁, μ₂=0) for the given covariance: the structural direction is
/// drawn per the variant (random variants use their own seed if set, else
/// `fallback_seed`), then rescaled so Φ(−Δ/2) equals the target Bayes error.
pub fn gen_means(
    mean: &MeanSpec,
    cov: &Covariance,
    fallback_seed: u64,
) -> Result<(DVector<f64>, DVector<f64>)> {
    if !(mean.target_bayes_error > 0.0 && mean.target_bayes_error < 0.5) {
        return Err(Error::Validation(format!(
            "target Bayes error must lie in (0, 0.5), got {}",
            mean.target_bayes_error
        )));
    }
    let p = cov.p();
    let delta_target = -2.0 * normal_quantile(mean.target_bayes_error);

    // A zero draw has probability zero; retry on the next substream.
    for attempt in 0..8u64 {
        let direction = raw_direction(&mean.model, cov, derive_seed(fallback_seed, attempt))?;
        let delta_raw = cov.mahalanobis_sq(&direction).max(0.0).sqrt();
        if delta_raw > 1e-12 {
            let mu1 = direction * (delta_target / delta_raw);
            return Ok((mu1, DVector::zeros(p)));
        }
    }
    Err(Error::Numerical(
        "mean draw degenerated to the zero vector repeatedly".into(),
    ))
}

/// The unscaled mean-difference direction of each variant.
fn raw_direction(model: &MeanModel, cov: &Covariance, seed: u64) -> Result<DVector<f64>> {
    let p = cov.p();
    match model {
        MeanModel::FirstCoordinate(_) => {
            let mut d = DVector::zeros(p);
            d[0] = 1.0;
            Ok(d)
        }
        MeanModel::SparseRandom(m) => {
            if !(m.fraction > 0.0 && m.fraction <= 1.0) {
                return Err(Error::Validation(format!(
                    "support fraction must lie in (0, 1], got {}",
                    m.fraction
                )));
            }
            let support = ((m.fraction * p as f64).round() as usize).clamp(1, p);
            let mut rng = ChaCha8Rng::seed_from_u64(m.seed.unwrap_or(seed));
            // Partial Fisher–Yates draw of `support` distinct coordinates.
            let mut idx: Vec<usize> = (0..p).collect();
            for i in 0..support {
                let j = rng.gen_range(i..p);
                idx.swap(i, j);
            }
            let mut d = DVector::zeros(p);
            for &coord in &idx[..support] {
                d[coord] = rng.sample::<f64, _>(StandardNormal);
            }
            Ok(d)
        }
        MeanModel::DenseRandom(m) => {
            let mut rng = ChaCha8Rng::seed_from_u64(m.seed.unwrap_or(seed));
            Ok(DVector::from_fn(p, |_, _| rng.sample(StandardNormal)))
        }
        MeanModel::Eigenvector(m) => {
            if m.k == 0 || m.k > p {
                return Err(Error::Validation(format!(
                    "eigenvector index must lie in 1..={p}, got {}",
                    m.k
                )));
            }
            let idx = m.k - 1;
            let direction =
                cov.eigenvectors().column(idx) * cov.eigenvalues()[idx].sqrt();
            Ok(direction)
        }
        MeanModel::Isotropic(m) => {
            // Combine eigenvectors with weights 1, √λᵢ, or λᵢ; rescaling
            // to the target Δ happens in the caller.
            let weights: Vec<f64> = match m.case {
                IsoCase::Iso1 => vec![1.0; p],
                IsoCase::Iso2 => cov.eigenvalues().iter().map(|l| l.sqrt()).collect(),
                IsoCase::Iso3 => cov.eigenvalues().iter().copied().collect(),
            };
            let mut d = DVector::zeros(p);
            for (i, w) in weights.iter().enumerate() {
                d += cov.eigenvectors().column(i) * *w;
            }
            Ok(d)
        }
        MeanModel::SparseDirection(m) => {
            if m.s == 0 || m.s > p {
                return Err(Error::Validation(format!(
                    "direction support must lie in 1..={p}, got {}",
                    m.s
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(m.seed.unwrap_or(seed));
            let mut w = DVector::zeros(p);
            for i in 0..m.s {
                w[i] = rng.sample::<f64, _>(StandardNormal);
            }
            // The drawn vector is the classification direction Σ⁻¹d.
            Ok(cov.dense() * w)
        }
    }
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// Draws n₁ class-1 and n₂ class-2 rows as μ_k + L·z, z ~ N(0, I), with L
/// the cached Cholesky factor; classes use distinct ChaCha substreams of
/// `seed`.
pub fn sample_dataset(spec: &ProblemSpec, n1: usize, n2: usize, seed: u64) -> Result<LabeledDataset> {
    let x1 = sample_class(spec, spec.mu1(), n1, seed, 1)?;
    let x2 = sample_class(spec, spec.mu2(), n2, seed, 2)?;
    LabeledDataset::new(x1, x2)
}

fn sample_class(
    spec: &ProblemSpec,
    mu: &DVector<f64>,
    n: usize,
    seed: u64,
    stream: u64,
) -> Result<DMatrix<f64>> {
    let p = spec.p();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let z = DMatrix::from_fn(n, p, |_, _| rng.sample::<f64, _>(StandardNormal));
    let l = spec.covariance().cholesky_lower();
    // Fast path for diagonal factors (identity-like covariances): scale
    // columns instead of a full n·p² product.
    let diagonal_only = (0..p).all(|j| (j + 1..p).all(|i| l[(i, j)] == 0.0));
    let mut x = if diagonal_only {
        let mut x = z;
        for j in 0..p {
            let s = l[(j, j)];
            if s != 1.0 {
                x.column_mut(j).scale_mut(s);
            }
        }
        x
    } else {
        z * l.transpose()
    };
    for mut row in x.row_iter_mut() {
        row += mu.transpose();
    }
    Ok(x)
}

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

/// Grid of ridge parameters, either log- or linearly spaced.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    #[serde(default = "default_true")]
    pub log: bool,
}

fn default_true() -> bool {
    true
}

impl GridSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.min > 0.0) || self.max < self.min || self.points == 0 {
            return Err(Error::Config(format!(
                "grid needs 0 < min ≤ max and ≥ 1 point, got [{}, {}] × {}",
                self.min, self.max, self.points
            )));
        }
        Ok(if self.log {
            log_spaced_grid(self.min, self.max, self.points)
        } else if self.points == 1 {
            vec![self.min]
        } else {
            let step = (self.max - self.min) / (self.points - 1) as f64;
            (0..self.points).map(|i| self.min + step * i as f64).collect()
        })
    }
}

/// How a ridge arm obtains its λ: fixed, the spectral plug-in selector, or
/// k-fold cross-validation (both selectors run per replicate on that
/// replicate's training data).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaChoice {
    Fixed(f64),
    PlugIn(PlugInChoice),
    CrossValidation(CvChoice),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlugInChoice {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CvChoice {
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
}

/// One classifier column of an experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierArm {
    Bayes(EmptyArm),
    Lda(EmptyArm),
    CorrectedLda(EmptyArm),
    Rlda(RidgeArm),
    CorrectedRlda(RidgeArm),
    /// Data-driven direction (λ=0 → pooled-inverse, λ>0 → ridge) with the
    /// intercept computed from the TRUE means: the benchmark upper bound.
    OracleRlda(OracleArm),
    NaiveBayes(EmptyArm),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmptyArm {}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RidgeArm {
    pub lambda: LambdaChoice,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleArm {
    /// Fixed ridge parameter; 0 uses the plain pooled-covariance direction.
    pub lambda: f64,
}

impl ClassifierArm {
    /// Stable label for output rows; selector arms are suffixed so a grid
    /// of fixed-λ arms and a selector arm stay distinguishable.
    pub fn label(&self) -> String {
        match self {
            ClassifierArm::Bayes(_) => "bayes".into(),
            ClassifierArm::Lda(_) => "lda".into(),
            ClassifierArm::CorrectedLda(_) => "corrected_lda".into(),
            ClassifierArm::Rlda(a) => format!("rlda{}", a.lambda.label_suffix()),
            ClassifierArm::CorrectedRlda(a) => {
                format!("corrected_rlda{}", a.lambda.label_suffix())
            }
            ClassifierArm::OracleRlda(_) => "oracle_rlda".into(),
            ClassifierArm::NaiveBayes(_) => "naive_bayes".into(),
        }
    }
}

impl LambdaChoice {
    fn label_suffix(&self) -> &'static str {
        match self {
            LambdaChoice::Fixed(_) => "",
            LambdaChoice::PlugIn(_) => "_plugin",
            LambdaChoice::CrossValidation(_) => "_cv",
        }
    }
}

fn default_replicates() -> usize {
    100
}

/// A full replicated comparison: scenario, arms, and replication control.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub covariance: CovarianceModel,
    pub mean: MeanSpec,
    pub p: usize,
    pub n1: usize,
    pub n2: usize,
    pub arms: Vec<ClassifierArm>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    /// Attach limit-theory predictions to arms that map to a formula.
    #[serde(default = "default_true")]
    pub compare_theory: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::Config("p must be positive".into()));
        }
        if self.n1 < 2 || self.n2 < 2 {
            return Err(Error::Config(format!(
                "need at least 2 samples per class, got n1={}, n2={}",
                self.n1, self.n2
            )));
        }
        if self.replicates == 0 {
            return Err(Error::Config("replicate count must be ≥ 1".into()));
        }
        if self.arms.is_empty() {
            return Err(Error::Config("at least one classifier arm required".into()));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Experiment results
// ---------------------------------------------------------------------------

/// Aggregated outcome of one classifier arm.
#[derive(Debug, Clone)]
pub struct ArmResult {
    pub label: String,
    /// Exact conditional error of every replicate (length R unless skipped).
    pub replicates: Vec<ConditionalErrorReport>,
    /// λ used per replicate (0 for λ-free arms; varies for selector arms).
    pub lambdas: Vec<f64>,
    pub mean_total: f64,
    pub sd_total: f64,
    pub mean_class1: f64,
    pub mean_class2: f64,
    /// Limit-theory prediction when the scenario maps to a formula.
    pub theory: Option<f64>,
    /// Reason the arm was skipped (inapplicable at these sizes), if so.
    pub skipped: Option<String>,
}

/// Result of a replicated experiment.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    /// Echo of the scenario that produced this result.
    pub config: ExperimentConfig,
    /// The realized separation Δ of the sampled problem.
    pub delta: f64,
    pub arms: Vec<ArmResult>,
    pub wall_time_s: f64,
}

/// Runs the replicated comparison: per replicate, draw a dataset from the
/// fixed true model, fit each arm, and record the EXACT conditional error
/// of the fitted rule under the true model (no test sets). Arms that are
/// inapplicable at these sizes are skipped with a reason, not fatal.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let started = Instant::now();

    let cov = gen_covariance(&config.covariance, config.p)?;
    let (mu1, mu2) = gen_means(&config.mean, &cov, derive_seed(config.seed, MEAN_SEED_INDEX))?;
    let spec = ProblemSpec::new(mu1, mu2, cov)?;

    // Per-replicate evaluation, parallel over replicates with
    // deterministic per-replicate seeds and order-stable collection.
    let per_replicate: Vec<Vec<Result<(ConditionalErrorReport, f64)>>> = (0..config.replicates)
        .into_par_iter()
        .map(|r| replicate_reports(config, &spec, derive_seed(config.seed, r as u64)))
        .collect::<Result<Vec<_>>>()?;

    let theory = if config.compare_theory {
        theory_predictions(config, &spec)?
    } else {
        vec![None; config.arms.len()]
    };

    let mut arms = Vec::with_capacity(config.arms.len());
    for (a, arm) in config.arms.iter().enumerate() {
        let mut reports = Vec::with_capacity(config.replicates);
        let mut lambdas = Vec::with_capacity(config.replicates);
        let mut skip: Option<String> = None;
        for rep in &per_replicate {
            match &rep[a] {
                Ok((report, lambda)) => {
                    reports.push(*report);
                    lambdas.push(*lambda);
                }
                Err(e) => {
                    skip = Some(e.to_string());
                    break;
                }
            }
        }
        let arm_result = if let Some(reason) = skip {
            ArmResult {
                label: arm.label(),
                replicates: Vec::new(),
                lambdas: Vec::new(),
                mean_total: f64::NAN,
                sd_total: f64::NAN,
                mean_class1: f64::NAN,
                mean_class2: f64::NAN,
                theory: theory[a],
                skipped: Some(reason),
            }
        } else {
            let totals: Vec<f64> = reports.iter().map(|r| r.err_total).collect();
            let c1: Vec<f64> = reports.iter().map(|r| r.err_class1).collect();
            let c2: Vec<f64> = reports.iter().map(|r| r.err_class2).collect();
            let n = totals.len() as f64;
            ArmResult {
                label: arm.label(),
                mean_total: compensated_sum(&totals) / n,
                sd_total: sample_sd(&totals),
                mean_class1: compensated_sum(&c1) / n,
                mean_class2: compensated_sum(&c2) / n,
                replicates: reports,
                lambdas,
                theory: theory[a],
                skipped: None,
            }
        };
        arms.push(arm_result);
    }

    Ok(ExperimentResult {
        config: config.clone(),
        delta: spec.delta(),
        arms,
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}

/// Fits every arm on one replicate's draw. Outer error = infrastructure
/// failure (fatal); inner per-arm error = arm inapplicable (skip).
fn replicate_reports(
    config: &ExperimentConfig,
    spec: &ProblemSpec,
    rep_seed: u64,
) -> Result<Vec<Result<(ConditionalErrorReport, f64)>>> {
    let data = sample_dataset(spec, config.n1, config.n2, rep_seed)?;
    let stats = PooledStats::from_dataset(&data)?;
    let mut out = Vec::with_capacity(config.arms.len());
    for arm in &config.arms {
        out.push(evaluate_arm(arm, spec, &data, &stats, rep_seed));
    }
    Ok(out)
}

fn evaluate_arm(
    arm: &ClassifierArm,
    spec: &ProblemSpec,
    data: &LabeledDataset,
    stats: &PooledStats,
    rep_seed: u64,
) -> Result<(ConditionalErrorReport, f64)> {
    let (clf, lambda) = match arm {
        ClassifierArm::Bayes(_) => (fit_bayes(spec)?, 0.0),
        ClassifierArm::Lda(_) => (fit_lda_from(stats)?, 0.0),
        ClassifierArm::CorrectedLda(_) => (fit_corrected_lda_from(stats)?, 0.0),
        ClassifierArm::Rlda(a) => {
            let lambda = resolve_lambda(&a.lambda, data, stats, rep_seed)?;
            (fit_rlda_from(stats, lambda)?, lambda)
        }
        ClassifierArm::CorrectedRlda(a) => {
            let lambda = resolve_lambda(&a.lambda, data, stats, rep_seed)?;
            (fit_rlda_pair_from(stats, lambda)?.1, lambda)
        }
        ClassifierArm::OracleRlda(a) => (
            fit_oracle_intercept_from(stats, spec, a.lambda)?,
            a.lambda,
        ),
        ClassifierArm::NaiveBayes(_) => (fit_naive_bayes_from(stats)?, 0.0),
    };
    Ok((conditional_error(&clf, spec)?, lambda))
}

fn resolve_lambda(
    choice: &LambdaChoice,
    data: &LabeledDataset,
    stats: &PooledStats,
    rep_seed: u64,
) -> Result<f64> {
    match choice {
        LambdaChoice::Fixed(lambda) => Ok(*lambda),
        LambdaChoice::PlugIn(c) => {
            let eigs: Vec<f64> = sym_eigenvalues_desc(stats.pooled())?
                .iter()
                .map(|&s| s.max(0.0))
                .collect();
            let grid = match &c.grid {
                Some(g) => g.values()?,
                None => default_lambda_grid(&eigs)?,
            };
            Ok(select_lambda_from_eigs(&eigs, stats.n(), &grid)?.lambda_opt)
        }
        LambdaChoice::CrossValidation(c) => {
            let grid = match &c.grid {
                Some(g) => g.values()?,
                None => {
                    // Spectrum scale from the trace: no eigensolve needed.
                    let mean_eig = stats.pooled().trace() / stats.p() as f64;
                    if !(mean_eig > 0.0) {
                        return Err(Error::Numerical(
                            "cannot scale a λ grid to a zero-trace pooled covariance".into(),
                        ));
                    }
                    log_spaced_grid(1e-3 * mean_eig, 1e2 * mean_eig, 40)
                }
            };
            Ok(select_lambda_cv(data, &grid, c.k, derive_seed(rep_seed, 0xCF))?.lambda_cv)
        }
    }
}

/// Limit-theory prediction per arm, where the scenario maps to a formula.
fn theory_predictions(config: &ExperimentConfig, spec: &ProblemSpec) -> Result<Vec<Option<f64>>> {
    let model = make_spectral_model(spec)?;
    let delta = spec.delta();
    let y1 = config.p as f64 / config.n1 as f64;
    let y2 = config.p as f64 / config.n2 as f64;
    // Best effort: arms whose scenario falls outside a formula's domain
    // (e.g. y ≥ 1 for the pooled-inverse rules) simply carry no prediction.
    let mut out = Vec::with_capacity(config.arms.len());
    for arm in &config.arms {
        let value = match arm {
            ClassifierArm::Bayes(_) => Some(crate::stats::normal_cdf(-delta / 2.0)),
            ClassifierArm::Lda(_) => rate_lda(delta, y1, y2).ok().map(|r| r.total),
            ClassifierArm::CorrectedLda(_) => rate_corrected_lda(delta, y1, y2).ok(),
            ClassifierArm::Rlda(a) => match a.lambda {
                LambdaChoice::Fixed(lambda) => {
                    rate_rlda(&model, delta, y1, y2, lambda).ok().map(|r| r.total)
                }
                _ => None,
            },
            ClassifierArm::CorrectedRlda(a) => match a.lambda {
                LambdaChoice::Fixed(lambda) => {
                    rate_corrected_rlda(&model, delta, y1, y2, lambda).ok()
                }
                _ => None,
            },
            // The oracle intercept attains the corrected rule's limit.
            ClassifierArm::OracleRlda(a) => {
                if a.lambda > 0.0 {
                    rate_corrected_rlda(&model, delta, y1, y2, a.lambda).ok()
                } else {
                    rate_corrected_lda(delta, y1, y2).ok()
                }
            }
            ClassifierArm::NaiveBayes(_) => {
                if config.n1 == config.n2 {
                    rate_naive_bayes(spec, config.n1 + config.n2).ok()
                } else {
                    None
                }
            }
        };
        out.push(value);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Heat maps
// ---------------------------------------------------------------------------

fn default_heatmap_replicates() -> usize {
    20
}

/// Grid of experiments over (dimension, AR(1) correlation) cells.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatmapConfig {
    pub p_grid: Vec<usize>,
    pub rho_grid: Vec<f64>,
    pub mean: MeanSpec,
    pub n1: usize,
    pub n2: usize,
    pub arms: Vec<ClassifierArm>,
    #[serde(default = "default_heatmap_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
}

/// Mean total-error surface of one arm over the (ρ, p) grid; NaN where the
/// arm was inapplicable.
#[derive(Debug, Clone)]
pub struct HeatmapArm {
    pub label: String,
    /// `values[i][j]`: mean error at rho_grid[i], p_grid[j].
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct HeatmapResult {
    pub p_grid: Vec<usize>,
    pub rho_grid: Vec<f64>,
    pub arms: Vec<HeatmapArm>,
    pub replicates: usize,
    pub seed: u64,
}

/// Runs the (ρ, p) grid of AR(1) experiments with a reduced default
/// replication count; each cell is an independent [`run_experiment`].
pub fn run_heatmap(config: &HeatmapConfig) -> Result<HeatmapResult> {
    if config.p_grid.is_empty() || config.rho_grid.is_empty() {
        return Err(Error::Config("heat map needs a nonempty (p, rho) grid".into()));
    }
    let mut arms: Vec<HeatmapArm> = config
        .arms
        .iter()
        .map(|a| HeatmapArm {
            label: a.label(),
            values: vec![vec![f64::NAN; config.p_grid.len()]; config.rho_grid.len()],
        })
        .collect();
    for (i, &rho) in config.rho_grid.iter().enumerate() {
        for (j, &p) in config.p_grid.iter().enumerate() {
            let cell = ExperimentConfig {
                covariance: CovarianceModel::Ar1(Ar1Model { rho }),
                mean: config.mean.clone(),
                p,
                n1: config.n1,
                n2: config.n2,
                arms: config.arms.clone(),
                replicates: config.replicates,
                seed: derive_seed(config.seed, (i * config.p_grid.len() + j) as u64),
                compare_theory: false,
            };
            let result = run_experiment(&cell)?;
            for (arm, out) in result.arms.iter().zip(arms.iter_mut()) {
                out.values[i][j] = arm.mean_total;
            }
        }
    }
    Ok(HeatmapResult {
        p_grid: config.p_grid.clone(),
        rho_grid: config.rho_grid.clone(),
        arms,
        replicates: config.replicates,
        seed: config.seed,
    })
}
