//! Configuration schemas for the file-driven subcommands. All structs
//! reject unknown keys so scenario typos surface as parse errors.

use hdlda::simulate::{GridSpec, MeanModel};
use hdlda::types::CovarianceModel;
use hdlda::{Error, Result};
use serde::Deserialize;

/// Scenario for the `theory` subcommand: a population model, dimension
/// ratios, and a λ grid. `delta` is mandatory — the rate formulas are
/// parameterized by the separation, not by raw means.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoryConfig {
    /// Mahalanobis separation Δ > 0 between the classes.
    pub delta: f64,
    pub covariance: CovarianceModel,
    pub p: usize,
    /// Mean-direction structure; rescaled internally to hit `delta`.
    pub mean: MeanModel,
    pub lambda_grid: GridSpec,
    #[serde(default)]
    pub y1: Option<f64>,
    #[serde(default)]
    pub y2: Option<f64>,
    #[serde(default)]
    pub n1: Option<usize>,
    #[serde(default)]
    pub n2: Option<usize>,
    /// Seed for random mean structures (ignored by deterministic ones).
    #[serde(default)]
    pub seed: u64,
}

impl TheoryConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(Error::Config(format!(
                "delta must be positive and finite, got {}",
                self.delta
            )));
        }
        if self.p == 0 {
            return Err(Error::Config("p must be positive".into()));
        }
        self.ratios().map(drop)
    }

    /// Dimension ratios (y₁, y₂): either given directly or as sample sizes.
    pub fn ratios(&self) -> Result<(f64, f64)> {
        match (self.y1, self.y2, self.n1, self.n2) {
            (Some(y1), Some(y2), None, None) => {
                if y1 > 0.0 && y2 > 0.0 {
                    Ok((y1, y2))
                } else {
                    Err(Error::Config(format!(
                        "dimension ratios must be positive, got y1={y1}, y2={y2}"
                    )))
                }
            }
            (None, None, Some(n1), Some(n2)) => {
                if n1 >= 2 && n2 >= 2 {
                    Ok((self.p as f64 / n1 as f64, self.p as f64 / n2 as f64))
                } else {
                    Err(Error::Config(format!(
                        "sample sizes must be at least 2, got n1={n1}, n2={n2}"
                    )))
                }
            }
            _ => Err(Error::Config(
                "specify exactly one of the pairs (y1, y2) or (n1, n2)".into(),
            )),
        }
    }
}

/// Classification rule requested on the `classify` command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassifyMethod {
    Lda,
    CorrectedLda,
    Rlda,
    CorrectedRlda,
    NaiveBayes,
}

impl std::str::FromStr for ClassifyMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lda" => Ok(Self::Lda),
            "corrected_lda" => Ok(Self::CorrectedLda),
            "rlda" => Ok(Self::Rlda),
            "corrected_rlda" => Ok(Self::CorrectedRlda),
            "naive_bayes" => Ok(Self::NaiveBayes),
            other => Err(Error::Config(format!(
                "unknown method '{other}'; expected one of lda, corrected_lda, rlda, corrected_rlda, naive_bayes"
            ))),
        }
    }
}

/// Parses a JSON config file into `T` with file/field diagnostics.
pub fn parse_config<T: serde::de::DeserializeOwned>(path: &std::path::Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}
