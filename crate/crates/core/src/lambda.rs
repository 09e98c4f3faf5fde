//! Data-driven selection of the ridge parameter: the spectral plug-in
//! estimator λ̂₀ (argmin of 1 − R̂₁²/R̂₂ over a grid, from one
//! eigendecomposition of the pooled covariance) and a stratified k-fold
//! cross-validation benchmark.
//!
//! The plug-in objective targets the aligned-energy regime where the
//! simplified ridge rate is a monotone function of R₁/√R₂; for general
//! covariance/mean structure it is a heuristic and cross-validation is the
//! general-purpose fallback.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::classifiers::{fit_rlda_from, predict, PooledStats};
use crate::error::{Error, Result};
use crate::linalg::sym_eigenvalues_desc;
use crate::types::LabeledDataset;

/// Spectral plug-in functionals evaluated over a λ grid, plus the selected
/// minimizer of the objective 1 − R̂₁²/R̂₂.
///
/// Grid points where the estimate degenerates (1 − ŷ·â₁ ≤ 0 or R̂₂ ≤ 0)
/// carry NaN in `r1_hat`/`r2_hat`/`objective` and are skipped by the argmin.
#[derive(Debug, Clone)]
pub struct LambdaEstimates {
    pub lambda_grid: Vec<f64>,
    pub a1: Vec<f64>,
    pub a2: Vec<f64>,
    pub r1_hat: Vec<f64>,
    pub r2_hat: Vec<f64>,
    pub objective: Vec<f64>,
    /// ŷ = p/(n−2).
    pub y_hat: f64,
    pub lambda_opt: f64,
}

/// Plug-in estimates (â₁, â₂, R̂₁, R̂₂) at one λ from the pooled-covariance
/// eigenvalues:
/// â₁ = 1 − (1/p)·Σⱼ 1/(sⱼ/λ+1), â₂ = (1/p)·Σⱼ [u − u²] with u = 1/(sⱼ/λ+1),
/// R̂₁ = â₁/(1−ŷâ₁), R̂₂ = â₁/(1−ŷâ₁)³ − â₂/(1−ŷâ₁)⁴, ŷ = p/(n−2).
pub fn estimate_functionals(
    sample_eigs: &[f64],
    n: usize,
    lambda: f64,
) -> Result<(f64, f64, f64, f64)> {
    if sample_eigs.is_empty() {
        return Err(Error::Validation("need at least one eigenvalue".into()));
    }
    if sample_eigs.iter().any(|&s| s < 0.0 || !s.is_finite()) {
        return Err(Error::Validation(
            "pooled-covariance eigenvalues must be ≥ 0".into(),
        ));
    }
    if n <= 2 {
        return Err(Error::Validation(format!("need n > 2, got {n}")));
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "ridge parameter must be positive, got {lambda}"
        )));
    }
    let p = sample_eigs.len() as f64;
    let (mut a1_sum, mut a2_sum) = (0.0, 0.0);
    for &s in sample_eigs {
        let u = 1.0 / (s / lambda + 1.0);
        a1_sum += u;
        a2_sum += u - u * u;
    }
    let a1 = 1.0 - a1_sum / p;
    let a2 = a2_sum / p;
    let y_hat = p / (n as f64 - 2.0);
    let margin = 1.0 - y_hat * a1;
    if margin <= 0.0 {
        return Err(Error::Numerical(format!(
            "degenerate plug-in estimate at lambda = {lambda}: 1 − ŷ·â₁ = {margin:.3e}"
        )));
    }
    let r1_hat = a1 / margin;
    let r2_hat = a1 / margin.powi(3) - a2 / margin.powi(4);
    Ok((a1, a2, r1_hat, r2_hat))
}

/// Default λ grid: 40 logarithmically spaced points spanning
/// [10⁻³·s̄, 10²·s̄], where s̄ is the mean pooled-covariance eigenvalue.
pub fn default_lambda_grid(sample_eigs: &[f64]) -> Result<Vec<f64>> {
    let mean: f64 = sample_eigs.iter().sum::<f64>() / sample_eigs.len().max(1) as f64;
    if !(mean > 0.0) || !mean.is_finite() {
        return Err(Error::Validation(format!(
            "cannot scale a λ grid to a spectrum with mean eigenvalue {mean}"
        )));
    }
    Ok(log_spaced_grid(1e-3 * mean, 1e2 * mean, 40))
}

/// `points` logarithmically spaced values from `lo` to `hi` inclusive.
pub fn log_spaced_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && points >= 1);
    if points == 1 {
        return vec![lo];
    }
    let (log_lo, log_hi) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (log_lo + (log_hi - log_lo) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Validation("λ grid must be nonempty".into()));
    }
    if grid.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
        return Err(Error::Validation("λ grid values must be positive".into()));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Validation("λ grid must be ascending".into()));
    }
    Ok(())
}

/// Runs the plug-in selector: one eigendecomposition of the pooled
/// covariance, then the objective 1 − R̂₁²/R̂₂ across the grid; the
/// returned λ̂₀ attains the grid minimum (ties toward smaller λ).
pub fn select_lambda(data: &LabeledDataset, grid: &[f64]) -> Result<LambdaEstimates> {
    validate_grid(grid)?;
    let stats = PooledStats::from_dataset(data)?;
    let eigs = sym_eigenvalues_desc(stats.pooled())?;
    // Symmetric eigensolves can return tiny negative values for rank-
    // deficient pooled matrices; clamp to the mathematical range.
    let eigs: Vec<f64> = eigs.iter().map(|&s| s.max(0.0)).collect();
    select_lambda_from_eigs(&eigs, stats.n(), grid)
}

/// Grid evaluation from precomputed pooled-covariance eigenvalues.
pub fn select_lambda_from_eigs(
    sample_eigs: &[f64],
    n: usize,
    grid: &[f64],
) -> Result<LambdaEstimates> {
    validate_grid(grid)?;
    let p = sample_eigs.len() as f64;
    let y_hat = p / (n as f64 - 2.0);
    let mut est = LambdaEstimates {
        lambda_grid: grid.to_vec(),
        a1: Vec::with_capacity(grid.len()),
        a2: Vec::with_capacity(grid.len()),
        r1_hat: Vec::with_capacity(grid.len()),
        r2_hat: Vec::with_capacity(grid.len()),
        objective: Vec::with_capacity(grid.len()),
        y_hat,
        lambda_opt: f64::NAN,
    };
    let mut best: Option<(f64, f64)> = None; // (objective, lambda)
    for &lambda in grid {
        match estimate_functionals(sample_eigs, n, lambda) {
            Ok((a1, a2, r1, r2)) => {
                est.a1.push(a1);
                est.a2.push(a2);
                est.r1_hat.push(r1);
                est.r2_hat.push(r2);
                if r2 > 0.0 {
                    let objective = 1.0 - r1 * r1 / r2;
                    est.objective.push(objective);
                    if best.map_or(true, |(obj, _)| objective < obj) {
                        best = Some((objective, lambda));
                    }
                } else {
                    est.objective.push(f64::NAN);
                }
            }
            Err(Error::Numerical(_)) => {
                let u_means = {
                    let mut s1 = 0.0;
                    let mut s2 = 0.0;
                    for &s in sample_eigs {
                        let u = 1.0 / (s / lambda + 1.0);
                        s1 += u;
                        s2 += u - u * u;
                    }
                    (1.0 - s1 / p, s2 / p)
                };
                est.a1.push(u_means.0);
                est.a2.push(u_means.1);
                est.r1_hat.push(f64::NAN);
                est.r2_hat.push(f64::NAN);
                est.objective.push(f64::NAN);
            }
            Err(other) => return Err(other),
        }
    }
    match best {
        Some((_, lambda)) => {
            est.lambda_opt = lambda;
            Ok(est)
        }
        None => Err(Error::Numerical(
            "plug-in selection failed: every grid point is degenerate".into(),
        )),
    }
}

/// Per-fold and averaged validation errors of the ridge rule across a λ
/// grid, with the cross-validated choice.
#[derive(Debug, Clone)]
pub struct CvReport {
    pub lambda_grid: Vec<f64>,
    /// `fold_errors[f][i]`: misclassified fraction of fold f's validation
    /// split under λ = lambda_grid[i].
    pub fold_errors: Vec<Vec<f64>>,
    /// Mean over folds per λ.
    pub mean_errors: Vec<f64>,
    pub lambda_cv: f64,
    pub k: usize,
    pub seed: u64,
}

/// Stratified k-fold cross-validation of the ridge rule over a λ grid.
///
/// Folds are formed per class by a seeded shuffle followed by round-robin
/// assignment; for each λ the validation misclassification fraction is
/// averaged across folds and the argmin wins, ties toward smaller λ.
pub fn select_lambda_cv(
    data: &LabeledDataset,
    grid: &[f64],
    k: usize,
    seed: u64,
) -> Result<CvReport> {
    validate_grid(grid)?;
    data.validate()?;
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {k}")));
    }
    for (n_c, class) in [(data.n1(), 1), (data.n2(), 2)] {
        if k > n_c {
            return Err(Error::Config(format!(
                "{k} folds would empty class {class} (only {n_c} samples)"
            )));
        }
        if n_c - n_c.div_ceil(k) < 2 {
            return Err(Error::Config(format!(
                "{k} folds leave class {class} with fewer than 2 training samples"
            )));
        }
    }

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let fold_of = |n_c: usize, rng: &mut ChaCha20Rng| -> Vec<usize> {
        let mut idx: Vec<usize> = (0..n_c).collect();
        idx.shuffle(rng);
        let mut fold = vec![0usize; n_c];
        for (pos, &row) in idx.iter().enumerate() {
            fold[row] = pos % k;
        }
        fold
    };
    let fold1 = fold_of(data.n1(), &mut rng);
    let fold2 = fold_of(data.n2(), &mut rng);

    let mut fold_errors: Vec<Vec<f64>> = Vec::with_capacity(k);
    for f in 0..k {
        let split = |fold: &[usize]| -> (Vec<usize>, Vec<usize>) {
            let (mut train, mut val) = (Vec::new(), Vec::new());
            for (row, &assigned) in fold.iter().enumerate() {
                if assigned == f {
                    val.push(row);
                } else {
                    train.push(row);
                }
            }
            (train, val)
        };
        let (train1, val1) = split(&fold1);
        let (train2, val2) = split(&fold2);
        if val1.is_empty() || val2.is_empty() {
            return Err(Error::Config(format!(
                "fold {f} has an empty validation class"
            )));
        }
        let train = data.subset(&train1, &train2)?;
        let stats = PooledStats::from_dataset(&train)?;
        let mut row = Vec::with_capacity(grid.len());
        for &lambda in grid {
            let clf = fit_rlda_from(&stats, lambda)?;
            let mut wrong = 0usize;
            for &r in &val1 {
                if predict(&clf, &data.x1().row(r).transpose())? != 1 {
                    wrong += 1;
                }
            }
            for &r in &val2 {
                if predict(&clf, &data.x2().row(r).transpose())? != 2 {
                    wrong += 1;
                }
            }
            row.push(wrong as f64 / (val1.len() + val2.len()) as f64);
        }
        fold_errors.push(row);
    }

    let mut mean_errors = vec![0.0; grid.len()];
    for row in &fold_errors {
        for (acc, &e) in mean_errors.iter_mut().zip(row) {
            *acc += e;
        }
    }
    for acc in &mut mean_errors {
        *acc /= k as f64;
    }
    let mut best_idx = 0;
    for (i, &e) in mean_errors.iter().enumerate() {
        if e < mean_errors[best_idx] {
            best_idx = i;
        }
    }
    Ok(CvReport {
        lambda_grid: grid.to_vec(),
        fold_errors,
        mean_errors,
        lambda_cv: grid[best_idx],
        k,
        seed,
    })
}
