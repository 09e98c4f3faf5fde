//! Shared domain vocabulary: Gaussian problem specifications, spectral
//! models of the covariance, labeled datasets, and fitted linear
//! classifiers.
//!
//! All types are immutable after validated construction and safe to share
//! across worker threads.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Relative tolerance for treating two covariance eigenvalues as one atom
/// of the spectral distribution.
pub const EIGENVALUE_MERGE_RTOL: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Covariance
// ---------------------------------------------------------------------------

/// A symmetric positive-definite covariance with both representations kept:
/// dense for quadratic forms and sampling, spectral for every limit formula.
///
/// The spectral form is canonical: dense inputs are decomposed exactly once
/// at construction, and the lower Cholesky factor used by samplers is cached
/// here as well.
#[derive(Debug, Clone)]
pub struct Covariance {
    dense: DMatrix<f64>,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
    chol_lower: DMatrix<f64>,
}

impl Covariance {
    /// Builds from a dense matrix; decomposes it symmetrically.
    pub fn from_dense(sigma: DMatrix<f64>) -> Result<Self> {
        if sigma.nrows() != sigma.ncols() || sigma.nrows() == 0 {
            return Err(Error::Validation(format!(
                "sigma must be square and nonempty, got {}x{}",
                sigma.nrows(),
                sigma.ncols()
            )));
        }
        if linalg::symmetry_defect(&sigma) > 1e-12 {
            return Err(Error::Validation(
                "sigma not symmetric (relative defect above 1e-12)".into(),
            ));
        }
        let (eigenvalues, eigenvectors) = linalg::sym_eigen_desc(&sigma)?;
        Self::assemble(sigma, eigenvalues, eigenvectors)
    }

    /// Builds from eigenvalues (any order) and matching orthonormal
    /// eigenvector columns; reconstructs the dense matrix.
    pub fn from_spectral(eigenvalues: DVector<f64>, eigenvectors: DMatrix<f64>) -> Result<Self> {
        let p = eigenvalues.len();
        if eigenvectors.nrows() != p || eigenvectors.ncols() != p || p == 0 {
            return Err(Error::Validation(
                "eigenvector matrix shape must match eigenvalue count".into(),
            ));
        }
        let gram = eigenvectors.transpose() * &eigenvectors;
        let ortho_defect = (&gram - DMatrix::<f64>::identity(p, p)).abs().max();
        if ortho_defect > 1e-8 {
            return Err(Error::Validation(format!(
                "eigenvectors not orthonormal (defect {ortho_defect:.2e})"
            )));
        }
        // Re-sort descending so the spectral form is canonical.
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &b| eigenvalues[b].partial_cmp(&eigenvalues[a]).expect("eigenvalue order"));
        let sorted_vals = DVector::from_iterator(p, order.iter().map(|&i| eigenvalues[i]));
        let mut sorted_vecs = DMatrix::zeros(p, p);
        for (dst, &src) in order.iter().enumerate() {
            sorted_vecs.set_column(dst, &eigenvectors.column(src));
        }
        let dense = &sorted_vecs * DMatrix::from_diagonal(&sorted_vals) * sorted_vecs.transpose();
        Self::assemble(dense, sorted_vals, sorted_vecs)
    }

    /// Shared tail of construction: positivity check plus Cholesky cache.
    fn assemble(
        dense: DMatrix<f64>,
        eigenvalues: DVector<f64>,
        eigenvectors: DMatrix<f64>,
    ) -> Result<Self> {
        if let Some(bad) = eigenvalues.iter().find(|&&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::Validation(format!(
                "sigma not positive definite (eigenvalue {bad})"
            )));
        }
        let chol_lower = linalg::cholesky_lower(&dense, "covariance")?;
        Ok(Self {
            dense,
            eigenvalues,
            eigenvectors,
            chol_lower,
        })
    }

    /// Dimension p.
    pub fn p(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn dense(&self) -> &DMatrix<f64> {
        &self.dense
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// Orthonormal eigenvector columns matching [`Self::eigenvalues`].
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// Cached lower Cholesky factor L with L·Lᵀ = Σ.
    pub fn cholesky_lower(&self) -> &DMatrix<f64> {
        &self.chol_lower
    }

    /// Quadratic form wᵀΣw.
    pub fn quadratic_form(&self, w: &DVector<f64>) -> f64 {
        (w.transpose() * &self.dense * w)[(0, 0)]
    }

    /// Squared Mahalanobis norm dᵀΣ⁻¹d, evaluated in the eigenbasis.
    pub fn mahalanobis_sq(&self, d: &DVector<f64>) -> f64 {
        let proj = self.eigenvectors.transpose() * d;
        proj.iter()
            .zip(self.eigenvalues.iter())
            .map(|(c, l)| c * c / l)
            .sum()
    }

    /// Solves Σ·x = b by Cholesky.
    pub fn solve(&self, b: &DVector<f64>) -> Result<DVector<f64>> {
        linalg::solve_spd(&self.dense, b, "covariance")
    }

    /// Sum of eigenvalues (tr Σ).
    pub fn trace(&self) -> f64 {
        self.eigenvalues.sum()
    }

    /// Sum of squared eigenvalues (tr Σ²).
    pub fn trace_sq(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l * l).sum()
    }
}

// ---------------------------------------------------------------------------
// Covariance model configs (JSON-facing)
// ---------------------------------------------------------------------------

/// Parametric covariance families accepted in configuration files.
///
/// Externally tagged JSON, e.g. `{"ar1": {"rho": 0.5}}` or
/// `{"identity": {"sigma2": 1.0}}`; unknown keys inside a variant are
/// rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceModel {
    /// σ²·I.
    Identity(IdentityModel),
    /// Autoregressive Toeplitz family Σᵢⱼ = ρ^|i−j|.
    Ar1(Ar1Model),
    /// Diagonal covariance realizing an explicit spectral distribution.
    ExplicitSpectral(ExplicitSpectralModel),
    /// Fully specified dense matrix (row-major).
    Dense(DenseModel),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityModel {
    pub sigma2: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ar1Model {
    pub rho: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitSpectralModel {
    /// Atoms of the spectral distribution, each with a positive eigenvalue
    /// and a positive weight; weights must sum to 1.
    pub atoms: Vec<AtomConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomConfig {
    pub eigenvalue: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenseModel {
    pub matrix: Vec<Vec<f64>>,
}

impl CovarianceModel {
    /// Materializes the model at dimension `p` (dense + spectral forms).
    pub fn realize(&self, p: usize) -> Result<Covariance> {
        if p == 0 {
            return Err(Error::Validation("dimension p must be positive".into()));
        }
        match self {
            CovarianceModel::Identity(m) => {
                if !(m.sigma2 > 0.0) {
                    return Err(Error::Validation(format!(
                        "identity covariance needs sigma2 > 0, got {}",
                        m.sigma2
                    )));
                }
                let dense = DMatrix::from_diagonal_element(p, p, m.sigma2);
                let vals = DVector::from_element(p, m.sigma2);
                let vecs = DMatrix::identity(p, p);
                Covariance::assemble(dense, vals, vecs)
            }
            CovarianceModel::Ar1(m) => {
                if !(m.rho.abs() < 1.0) {
                    return Err(Error::Validation(format!(
                        "ar1 covariance needs |rho| < 1, got {}",
                        m.rho
                    )));
                }
                let dense =
                    DMatrix::from_fn(p, p, |i, j| m.rho.powi((i as i32 - j as i32).abs()));
                Covariance::from_dense(dense)
            }
            CovarianceModel::ExplicitSpectral(m) => {
                let weight_sum: f64 = m.atoms.iter().map(|a| a.weight).sum();
                if m.atoms.is_empty()
                    || m.atoms.iter().any(|a| !(a.weight > 0.0) || !(a.eigenvalue > 0.0))
                {
                    return Err(Error::Validation(
                        "spectral atoms need positive eigenvalues and weights".into(),
                    ));
                }
                if (weight_sum - 1.0).abs() > 1e-12 {
                    return Err(Error::Validation("weights must sum to 1".into()));
                }
                let counts = apportion_counts(&m.atoms.iter().map(|a| a.weight).collect::<Vec<_>>(), p);
                let mut vals: Vec<f64> = Vec::with_capacity(p);
                for (atom, count) in m.atoms.iter().zip(&counts) {
                    vals.extend(std::iter::repeat(atom.eigenvalue).take(*count));
                }
                vals.sort_by(|a, b| b.partial_cmp(a).expect("eigenvalue order"));
                let vals = DVector::from_vec(vals);
                let dense = DMatrix::from_diagonal(&vals);
                Covariance::assemble(dense, vals, DMatrix::identity(p, p))
            }
            CovarianceModel::Dense(m) => {
                if m.matrix.len() != p || m.matrix.iter().any(|row| row.len() != p) {
                    return Err(Error::Validation(format!(
                        "dense covariance must be {p}x{p} to match the requested dimension"
                    )));
                }
                let flat: Vec<f64> = m.matrix.iter().flatten().copied().collect();
                Covariance::from_dense(DMatrix::from_row_slice(p, p, &flat))
            }
        }
    }
}

/// Largest-remainder apportionment of `p` slots to `weights` (which sum to
/// 1); every weight receives at least one slot when possible.
fn apportion_counts(weights: &[f64], p: usize) -> Vec<usize> {
    let raw: Vec<f64> = weights.iter().map(|w| w * p as f64).collect();
    let mut counts: Vec<usize> = raw.iter().map(|r| r.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = raw[a] - raw[a].floor();
        let rb = raw[b] - raw[b].floor();
        rb.partial_cmp(&ra).expect("remainder order")
    });
    for i in 0..p.saturating_sub(assigned) {
        counts[order[i % order.len()]] += 1;
    }
    counts
}

// ---------------------------------------------------------------------------
// ProblemSpec
// ---------------------------------------------------------------------------

/// A two-class Gaussian classification problem: N(μ₁, Σ) vs N(μ₂, Σ) with
/// equal class weights, plus the cached Mahalanobis separation
/// Δ = √((μ₁−μ₂)ᵀΣ⁻¹(μ₁−μ₂)).
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    mu1: DVector<f64>,
    mu2: DVector<f64>,
    covariance: Covariance,
    delta: f64,
}

impl ProblemSpec {
    pub fn new(mu1: DVector<f64>, mu2: DVector<f64>, covariance: Covariance) -> Result<Self> {
        if mu1.len() != covariance.p() || mu2.len() != covariance.p() {
            return Err(Error::Validation(format!(
                "mean lengths ({}, {}) must match covariance dimension {}",
                mu1.len(),
                mu2.len(),
                covariance.p()
            )));
        }
        let d = &mu1 - &mu2;
        let delta = covariance.mahalanobis_sq(&d).max(0.0).sqrt();
        Ok(Self {
            mu1,
            mu2,
            covariance,
            delta,
        })
    }

    pub fn from_dense(mu1: DVector<f64>, mu2: DVector<f64>, sigma: DMatrix<f64>) -> Result<Self> {
        Self::new(mu1, mu2, Covariance::from_dense(sigma)?)
    }

    pub fn from_spectral(
        mu1: DVector<f64>,
        mu2: DVector<f64>,
        eigenvalues: DVector<f64>,
        eigenvectors: DMatrix<f64>,
    ) -> Result<Self> {
        Self::new(mu1, mu2, Covariance::from_spectral(eigenvalues, eigenvectors)?)
    }

    /// Builds from the JSON-facing configuration.
    pub fn from_config(config: &ProblemSpecConfig) -> Result<Self> {
        let p = config.mu1.len();
        if config.mu2.len() != p || p == 0 {
            return Err(Error::Config(
                "mu1 and mu2 must be nonempty and of equal length".into(),
            ));
        }
        let covariance = match (&config.sigma_dense, &config.sigma_model) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "give exactly one of sigma_dense and sigma_model, not both".into(),
                ))
            }
            (None, None) => {
                return Err(Error::Config(
                    "missing covariance: give sigma_dense or sigma_model".into(),
                ))
            }
            (Some(rows), None) => CovarianceModel::Dense(DenseModel {
                matrix: rows.clone(),
            })
            .realize(p)?,
            (None, Some(model)) => model.realize(p)?,
        };
        Self::new(
            DVector::from_vec(config.mu1.clone()),
            DVector::from_vec(config.mu2.clone()),
            covariance,
        )
    }

    /// Emits the dense-form configuration (round-trips through
    /// [`Self::from_config`]).
    pub fn to_config(&self) -> ProblemSpecConfig {
        let p = self.p();
        let rows = (0..p)
            .map(|i| (0..p).map(|j| self.covariance.dense()[(i, j)]).collect())
            .collect();
        ProblemSpecConfig {
            mu1: self.mu1.iter().copied().collect(),
            mu2: self.mu2.iter().copied().collect(),
            sigma_dense: Some(rows),
            sigma_model: None,
        }
    }

    pub fn p(&self) -> usize {
        self.covariance.p()
    }

    pub fn mu1(&self) -> &DVector<f64> {
        &self.mu1
    }

    pub fn mu2(&self) -> &DVector<f64> {
        &self.mu2
    }

    pub fn covariance(&self) -> &Covariance {
        &self.covariance
    }

    /// Cached Mahalanobis separation Δ.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Mean difference μ₁ − μ₂.
    pub fn mean_diff(&self) -> DVector<f64> {
        &self.mu1 - &self.mu2
    }

    /// Re-checks every invariant, including that the cached Δ matches a
    /// recomputation to 1e-10 relative.
    pub fn validate(&self) -> Result<()> {
        if self.mu1.iter().chain(self.mu2.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Validation("means must be finite".into()));
        }
        let recomputed = self.covariance.mahalanobis_sq(&self.mean_diff()).max(0.0).sqrt();
        let scale = recomputed.abs().max(1e-300);
        if (recomputed - self.delta).abs() / scale > 1e-10 && (recomputed - self.delta).abs() > 1e-12 {
            return Err(Error::Validation(format!(
                "cached delta {} disagrees with recomputed {}",
                self.delta, recomputed
            )));
        }
        Ok(())
    }
}

/// JSON-facing form of [`ProblemSpec`]: means plus exactly one covariance
/// representation. Unknown keys are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpecConfig {
    pub mu1: Vec<f64>,
    pub mu2: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_dense: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_model: Option<CovarianceModel>,
}

// ---------------------------------------------------------------------------
// SpectralModel
// ---------------------------------------------------------------------------

/// One atom of the covariance spectral distribution together with the total
/// squared projection of the mean difference onto its eigenspace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralAtom {
    /// Eigenvalue λᵢ > 0.
    pub eigenvalue: f64,
    /// Weight wᵢ ∈ (0,1]; weights sum to 1 over the model.
    pub weight: f64,
}

/// Discrete spectral model (H, {dᵢ²}, Δ): the covariance eigenvalue
/// distribution plus the eigenspace energy profile of the mean difference.
///
/// `mean_proj_sq[i]` is the TOTAL squared projection over atom i's
/// eigenspace, so Σᵢ dᵢ²/λᵢ = Δ² regardless of multiplicity.
#[derive(Debug, Clone)]
pub struct SpectralModel {
    atoms: Vec<SpectralAtom>,
    mean_proj_sq: Vec<f64>,
    delta: f64,
}

impl SpectralModel {
    pub fn new(atoms: Vec<SpectralAtom>, mean_proj_sq: Vec<f64>, delta: f64) -> Result<Self> {
        let model = Self {
            atoms,
            mean_proj_sq,
            delta,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn atoms(&self) -> &[SpectralAtom] {
        &self.atoms
    }

    pub fn mean_proj_sq(&self) -> &[f64] {
        &self.mean_proj_sq
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Weighted mean eigenvalue ∫x dH(x).
    pub fn mean_eigenvalue(&self) -> f64 {
        self.atoms.iter().map(|a| a.eigenvalue * a.weight).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.atoms.is_empty() {
            return Err(Error::Validation("spectral model needs at least one atom".into()));
        }
        if self.atoms.len() != self.mean_proj_sq.len() {
            return Err(Error::Validation(
                "mean_proj_sq must align with atoms".into(),
            ));
        }
        for atom in &self.atoms {
            if !(atom.eigenvalue > 0.0) || !atom.eigenvalue.is_finite() {
                return Err(Error::Validation(format!(
                    "sigma not positive definite (eigenvalue {})",
                    atom.eigenvalue
                )));
            }
            if !(atom.weight > 0.0) {
                return Err(Error::Validation(format!(
                    "weights must be strictly positive, got {}",
                    atom.weight
                )));
            }
        }
        let weight_sum: f64 = self.atoms.iter().map(|a| a.weight).sum();
        if (weight_sum - 1.0).abs() > 1e-12 {
            return Err(Error::Validation(format!(
                "weights must sum to 1, got {weight_sum}"
            )));
        }
        if self.mean_proj_sq.iter().any(|&d| d < 0.0 || !d.is_finite()) {
            return Err(Error::Validation("mean projections must be ≥ 0".into()));
        }
        let delta_sq: f64 = self
            .atoms
            .iter()
            .zip(&self.mean_proj_sq)
            .map(|(a, d)| d / a.eigenvalue)
            .sum();
        let want = self.delta * self.delta;
        let scale = want.abs().max(1e-300);
        if (delta_sq - want).abs() / scale > 1e-10 && (delta_sq - want).abs() > 1e-12 {
            return Err(Error::Validation(format!(
                "projection normalization broken: sum d²/λ = {delta_sq}, delta² = {want}"
            )));
        }
        Ok(())
    }
}

/// Collapses a [`ProblemSpec`] to its [`SpectralModel`], merging eigenvalues
/// equal to within [`EIGENVALUE_MERGE_RTOL`] relative into single atoms
/// (weights and mean projections accumulate).
pub fn make_spectral_model(spec: &ProblemSpec) -> Result<SpectralModel> {
    let cov = spec.covariance();
    let p = cov.p();
    let proj = cov.eigenvectors().transpose() * spec.mean_diff();

    let mut atoms: Vec<SpectralAtom> = Vec::new();
    let mut projections: Vec<f64> = Vec::new();
    let mut group_anchor = f64::NAN;
    for i in 0..p {
        let lambda = cov.eigenvalues()[i];
        let d_sq = proj[i] * proj[i];
        let mergeable = !atoms.is_empty() && (group_anchor - lambda).abs() <= EIGENVALUE_MERGE_RTOL * group_anchor;
        if mergeable {
            let last = atoms.last_mut().expect("nonempty");
            // Weighted running mean keeps the merged eigenvalue canonical.
            let total_w = last.weight + 1.0 / p as f64;
            last.eigenvalue =
                (last.eigenvalue * last.weight + lambda / p as f64) / total_w;
            last.weight = total_w;
            *projections.last_mut().expect("nonempty") += d_sq;
        } else {
            atoms.push(SpectralAtom {
                eigenvalue: lambda,
                weight: 1.0 / p as f64,
            });
            projections.push(d_sq);
            group_anchor = lambda;
        }
    }
    // Re-normalize the weight sum exactly (p additions of 1/p can drift).
    let weight_sum: f64 = atoms.iter().map(|a| a.weight).sum();
    for atom in &mut atoms {
        atom.weight /= weight_sum;
    }
    SpectralModel::new(atoms, projections, spec.delta())
}

// ---------------------------------------------------------------------------
// LabeledDataset
// ---------------------------------------------------------------------------

/// Two-class sample: rows are observations, `x1` from class 1 and `x2` from
/// class 2, with a common feature dimension.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    x1: DMatrix<f64>,
    x2: DMatrix<f64>,
}

impl LabeledDataset {
    pub fn new(x1: DMatrix<f64>, x2: DMatrix<f64>) -> Result<Self> {
        let ds = Self { x1, x2 };
        ds.validate()?;
        Ok(ds)
    }

    pub fn x1(&self) -> &DMatrix<f64> {
        &self.x1
    }

    pub fn x2(&self) -> &DMatrix<f64> {
        &self.x2
    }

    pub fn n1(&self) -> usize {
        self.x1.nrows()
    }

    pub fn n2(&self) -> usize {
        self.x2.nrows()
    }

    pub fn n(&self) -> usize {
        self.n1() + self.n2()
    }

    pub fn p(&self) -> usize {
        self.x1.ncols()
    }

    pub fn validate(&self) -> Result<()> {
        if self.x1.ncols() != self.x2.ncols() {
            return Err(Error::Validation(format!(
                "class blocks disagree on feature count: {} vs {}",
                self.x1.ncols(),
                self.x2.ncols()
            )));
        }
        if self.x1.nrows() < 2 || self.x2.nrows() < 2 {
            return Err(Error::Validation(format!(
                "need at least 2 samples per class, got n1={}, n2={}",
                self.x1.nrows(),
                self.x2.nrows()
            )));
        }
        if self.x1.iter().chain(self.x2.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Validation("samples must be finite".into()));
        }
        Ok(())
    }

    /// Extracts the given per-class row indices into a new dataset (used for
    /// cross-validation splits).
    pub fn subset(&self, rows1: &[usize], rows2: &[usize]) -> Result<Self> {
        let pick = |m: &DMatrix<f64>, rows: &[usize], class: u8| -> Result<DMatrix<f64>> {
            if let Some(&bad) = rows.iter().find(|&&r| r >= m.nrows()) {
                return Err(Error::Domain(format!(
                    "row {bad} out of range for class {class} with {} rows",
                    m.nrows()
                )));
            }
            Ok(DMatrix::from_fn(rows.len(), m.ncols(), |i, j| m[(rows[i], j)]))
        };
        Self::new(pick(&self.x1, rows1, 1)?, pick(&self.x2, rows2, 2)?)
    }

    /// Reads the CSV form: feature columns then a final label column in
    /// {1, 2}; an optional non-numeric header row is skipped.
    pub fn from_csv_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut rows1: Vec<Vec<f64>> = Vec::new();
        let mut rows2: Vec<Vec<f64>> = Vec::new();
        let mut width: Option<usize> = None;
        for (idx, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::Config(format!("csv parse error: {e}")))?;
            if record.len() < 2 {
                return Err(Error::Config(format!(
                    "row {}: need at least one feature plus the label column",
                    idx + 1
                )));
            }
            let parsed: Option<Vec<f64>> =
                record.iter().map(|f| f.parse::<f64>().ok()).collect();
            let Some(values) = parsed else {
                if idx == 0 {
                    continue; // header row
                }
                return Err(Error::Config(format!("row {}: non-numeric field", idx + 1)));
            };
            if let Some(w) = width {
                if values.len() != w {
                    return Err(Error::Config(format!(
                        "row {}: expected {} columns, got {}",
                        idx + 1,
                        w,
                        values.len()
                    )));
                }
            } else {
                width = Some(values.len());
            }
            let (features, label) = values.split_at(values.len() - 1);
            match label[0] {
                l if l == 1.0 => rows1.push(features.to_vec()),
                l if l == 2.0 => rows2.push(features.to_vec()),
                other => {
                    return Err(Error::Config(format!(
                        "row {}: label must be 1 or 2, got {}",
                        idx + 1,
                        other
                    )))
                }
            }
        }
        let p = width.ok_or_else(|| Error::Config("csv contains no data rows".into()))? - 1;
        let build = |rows: &[Vec<f64>]| {
            DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j])
        };
        Self::new(build(&rows1), build(&rows2))
    }

    pub fn from_csv_path(path: &std::path::Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(std::io::BufReader::new(file))
    }

    /// Writes the CSV form with a header row `x1,...,xp,label`.
    pub fn to_csv_writer<W: std::io::Write>(&self, mut writer: W) -> Result<()> {
        let p = self.p();
        let header: Vec<String> = (1..=p)
            .map(|j| format!("x{j}"))
            .chain(std::iter::once("label".to_string()))
            .collect();
        writeln!(writer, "{}", header.join(","))?;
        let mut dump = |m: &DMatrix<f64>, label: u8| -> Result<()> {
            for i in 0..m.nrows() {
                let mut fields: Vec<String> = (0..p).map(|j| format!("{}", m[(i, j)])).collect();
                fields.push(label.to_string());
                writeln!(writer, "{}", fields.join(","))?;
            }
            Ok(())
        };
        dump(&self.x1, 1)?;
        dump(&self.x2, 2)
    }
}

// ---------------------------------------------------------------------------
// FittedLinearClassifier
// ---------------------------------------------------------------------------

/// How a linear rule was obtained; drives which intercept and direction the
/// fitters produce and which theory curve applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Truth-derived optimal rule.
    Bayes,
    /// Pooled-covariance plug-in rule.
    Lda,
    /// LDA with the intercept bias correction for unequal sample sizes.
    CorrectedLda,
    /// Ridge-regularized pooled covariance.
    Rlda,
    /// RLDA with the intercept bias correction.
    CorrectedRlda,
    /// Mean-difference direction, covariance ignored.
    NaiveBayes,
}

impl Method {
    /// Stable lowercase identifier used in CSV output.
    pub fn id(&self) -> &'static str {
        match self {
            Method::Bayes => "bayes",
            Method::Lda => "lda",
            Method::CorrectedLda => "corrected_lda",
            Method::Rlda => "rlda",
            Method::CorrectedRlda => "corrected_rlda",
            Method::NaiveBayes => "naive_bayes",
        }
    }

    fn requires_positive_lambda(&self) -> bool {
        matches!(self, Method::Rlda | Method::CorrectedRlda)
    }
}

/// A fitted linear rule: assign class 1 exactly when wᵀx + α > 0.
///
/// `n1`/`n2` echo the training sample sizes (0 for truth-derived rules that
/// never saw data).
#[derive(Debug, Clone)]
pub struct FittedLinearClassifier {
    w: DVector<f64>,
    alpha: f64,
    method: Method,
    lambda: f64,
    n1: usize,
    n2: usize,
}

impl FittedLinearClassifier {
    pub fn new(
        w: DVector<f64>,
        alpha: f64,
        method: Method,
        lambda: f64,
        n1: usize,
        n2: usize,
    ) -> Result<Self> {
        if w.is_empty() || w.iter().any(|v| !v.is_finite()) || !alpha.is_finite() {
            return Err(Error::Validation(
                "classifier needs a finite, nonempty direction and intercept".into(),
            ));
        }
        if method.requires_positive_lambda() && !(lambda > 0.0) {
            return Err(Error::Validation(format!(
                "{} requires lambda > 0, got {lambda}",
                method.id()
            )));
        }
        if !method.requires_positive_lambda() && lambda != 0.0 {
            return Err(Error::Validation(format!(
                "{} must carry lambda = 0, got {lambda}",
                method.id()
            )));
        }
        Ok(Self {
            w,
            alpha,
            method,
            lambda,
            n1,
            n2,
        })
    }

    pub fn w(&self) -> &DVector<f64> {
        &self.w
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn p(&self) -> usize {
        self.w.len()
    }
}
