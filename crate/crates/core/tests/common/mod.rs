//! Shared helpers for the integration suites: independent oracles
//! (re-derived from first principles, not calling the checked code) and
//! scenario builders.

#![allow(dead_code)]

use hdlda::classifiers::PooledStats;
use hdlda::simulate::{
    gen_covariance, gen_means, sample_dataset, ClassifierArm, ExperimentConfig, FirstCoordinateMean,
    MeanModel, MeanSpec, RidgeArm,
};
use hdlda::types::{CovarianceModel, IdentityModel, ProblemSpec};
use nalgebra::{Cholesky, DVector};

/// Two-sided 10% Bayes-error separation: 2·Φ⁻¹(0.9).
pub const DELTA10: f64 = 2.5631031310892009;

/// Independent closed-form root of the spectral fixed point for a point
/// mass at σ²: the positive solution of yλσ²·m² + (σ²(1−y)+λ)·m − 1 = 0.
pub fn mp_point_mass_oracle(sigma2: f64, y: f64, lambda: f64) -> f64 {
    let a = y * lambda * sigma2;
    let b = sigma2 * (1.0 - y) + lambda;
    ((b * b + 4.0 * a).sqrt() - b) / (2.0 * a)
}

/// Builds a fully specified Gaussian problem from a covariance family and
/// mean structure with a 10% target Bayes error.
pub fn build_problem(cov: &CovarianceModel, mean_model: MeanModel, p: usize, seed: u64) -> ProblemSpec {
    let cov = gen_covariance(cov, p).unwrap();
    let spec = MeanSpec { model: mean_model, target_bayes_error: 0.1 };
    let (mu1, mu2) = gen_means(&spec, &cov, seed).unwrap();
    ProblemSpec::new(mu1, mu2, cov).unwrap()
}

pub fn identity_cov() -> CovarianceModel {
    CovarianceModel::Identity(IdentityModel { sigma2: 1.0 })
}

pub fn first_coordinate_mean() -> MeanSpec {
    MeanSpec {
        model: MeanModel::FirstCoordinate(FirstCoordinateMean {}),
        target_bayes_error: 0.1,
    }
}

/// One fixed-λ ridge arm per grid value.
pub fn rlda_arms(lambdas: &[f64]) -> Vec<ClassifierArm> {
    lambdas
        .iter()
        .map(|&l| {
            ClassifierArm::Rlda(RidgeArm {
                lambda: hdlda::simulate::LambdaChoice::Fixed(l),
            })
        })
        .collect()
}

pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| lo * (hi / lo).powf(i as f64 / (points - 1) as f64))
        .collect()
}

pub fn base_experiment(
    covariance: CovarianceModel,
    mean: MeanSpec,
    p: usize,
    n1: usize,
    n2: usize,
    arms: Vec<ClassifierArm>,
    replicates: usize,
    seed: u64,
) -> ExperimentConfig {
    ExperimentConfig {
        covariance,
        mean,
        p,
        n1,
        n2,
        arms,
        replicates,
        seed,
        compare_theory: true,
    }
}

/// Draws scaled pooled scatter matrices W = (n−2)·Sₙ under Σ = I through
/// the production sampling path and returns (e₁ᵀW⁻¹e₁, e₁ᵀW⁻²e₁) per draw;
/// W is Wishart(I_p, m) with m = n−2 degrees of freedom.
pub fn wishart_inverse_forms_via_sampling(
    p: usize,
    m: usize,
    draws: usize,
    seed: u64,
) -> (Vec<f64>, Vec<f64>) {
    assert!(m % 2 == 0, "m = n−2 must be even for a balanced split");
    let n_half = (m + 2) / 2;
    let spec = build_problem(&identity_cov(), MeanModel::FirstCoordinate(FirstCoordinateMean {}), p, 3);
    let mut q1 = Vec::with_capacity(draws);
    let mut q2 = Vec::with_capacity(draws);
    for d in 0..draws {
        let data = sample_dataset(&spec, n_half, n_half, hdlda::simulate::derive_seed(seed, d as u64)).unwrap();
        let stats = PooledStats::from_dataset(&data).unwrap();
        let w = stats.pooled() * m as f64;
        let chol = Cholesky::new(w).expect("Wishart draw is positive definite");
        let mut e1 = DVector::zeros(p);
        e1[0] = 1.0;
        let x = chol.solve(&e1);
        q1.push(x[0]);
        q2.push(x.norm_squared());
    }
    (q1, q2)
}

/// Monte Carlo mean and its standard error.
pub fn mean_and_se(sample: &[f64]) -> (f64, f64) {
    let n = sample.len() as f64;
    let mean = sample.iter().sum::<f64>() / n;
    let var = sample.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
