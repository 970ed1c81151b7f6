//! Experiment configuration: a single JSON document that pins every knob of
//! a run. A run's outputs embed the effective config verbatim, which is the
//! reproducibility contract.

use std::path::PathBuf;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    NoiseStats,
    Renorm,
    Eigen,
    Weyl,
    Sandwich,
    LqSlopes,
    StrichartzSchrodinger,
    StrichartzWave,
    Nls,
    Wave,
    GammaDiagnostics,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::NoiseStats => "noise-stats",
            Experiment::Renorm => "renorm",
            Experiment::Eigen => "eigen",
            Experiment::Weyl => "weyl",
            Experiment::Sandwich => "sandwich",
            Experiment::LqSlopes => "lq-slopes",
            Experiment::StrichartzSchrodinger => "strichartz-schrodinger",
            Experiment::StrichartzWave => "strichartz-wave",
            Experiment::Nls => "nls",
            Experiment::Wave => "wave",
            Experiment::GammaDiagnostics => "gamma-diagnostics",
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub gamma_tol: f64,
    pub gamma_max_iter: usize,
    pub reprojection_limit: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            gamma_tol: 1e-11,
            gamma_max_iter: 400,
            reprojection_limit: 1e-6,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Modes per axis.
    #[serde(default = "default_n")]
    pub n: usize,
    /// Mollification scale.
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// Paraproduct truncation parameter.
    #[serde(default = "default_s")]
    pub s: f64,
    /// Eigenpairs to compute (0 = experiment chooses).
    #[serde(default)]
    pub k: usize,
    #[serde(default = "default_seed")]
    pub base_seed: u64,
    #[serde(default = "default_one")]
    pub seed_count: usize,
    /// Replace the noise by zero (control runs).
    #[serde(default)]
    pub zero_noise: bool,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "default_p")]
    pub q: f64,
    /// Littlewood-Paley blocks for frequency-scale sweeps.
    #[serde(default = "default_scales")]
    pub scales: Vec<i32>,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_one_f")]
    pub t_final: f64,
    /// Sobolev index for the well-posedness probe and trajectory norms.
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    /// Counting-function fit range.
    #[serde(default = "default_lambda_max")]
    pub lambda_max: f64,
    /// Eigenvalue-sandwich parameter.
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Export the enhanced-noise realizations alongside the data.
    #[serde(default)]
    pub dump_noise: bool,
    /// Export the first few eigenvectors as coefficient dumps.
    #[serde(default)]
    pub dump_eigenvectors: usize,
    pub output_dir: PathBuf,
}

fn default_n() -> usize {
    32
}
fn default_eps() -> f64 {
    0.125
}
fn default_s() -> f64 {
    1.0 / 16.0
}
fn default_seed() -> u64 {
    1
}
fn default_one() -> usize {
    1
}
fn default_one_f() -> f64 {
    1.0
}
fn default_p() -> f64 {
    4.0
}
fn default_scales() -> Vec<i32> {
    vec![2, 3, 4]
}
fn default_dt() -> f64 {
    1e-3
}
fn default_sigma() -> f64 {
    0.75
}
fn default_lambda_max() -> f64 {
    100.0
}
fn default_delta() -> f64 {
    0.5
}

impl ExperimentConfig {
    pub fn from_path(path: &std::path::Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let config: ExperimentConfig =
            serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.n < 4 || self.n % 2 != 0 {
            bail!("n must be even and at least 4 (got {})", self.n);
        }
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            bail!("eps must lie in (0, 1] (got {})", self.eps);
        }
        let grid = anderson_core::Grid::new(self.n).map_err(|e| anyhow::anyhow!(e))?;
        let defect = anderson_core::noise::grid_cutoff_defect(grid, self.eps)
            .map_err(|e| anyhow::anyhow!(e))?;
        if defect > 1e-3 {
            bail!(
                "mollification radius 1/eps = {} is not resolved by the grid (renormalization defect {defect:.2e}); increase n or eps",
                1.0 / self.eps
            );
        }
        if !(self.s > 0.0 && self.s <= 1.0) {
            bail!("s must lie in (0, 1] (got {})", self.s);
        }
        if self.seed_count == 0 && !matches!(self.experiment, Experiment::Renorm) {
            // an empty ensemble is allowed, outputs are header-only
        }
        if self.dt <= 0.0 || self.t_final <= 0.0 {
            bail!("dt and t_final must be positive");
        }
        match self.experiment {
            Experiment::StrichartzSchrodinger | Experiment::StrichartzWave => {
                if (2.0 / self.p + 2.0 / self.q - 1.0).abs() > 1e-12 {
                    bail!(
                        "(p, q) = ({}, {}) is not an admissible pair: 2/p + 2/q must equal 1",
                        self.p,
                        self.q
                    );
                }
                if self.scales.len() < 3 {
                    bail!("frequency sweeps need at least 3 blocks, got {:?}", self.scales);
                }
            }
            Experiment::Sandwich => {
                if !(self.delta > 0.0 && self.delta < 1.0) {
                    bail!("delta must lie in (0,1) (got {})", self.delta);
                }
            }
            Experiment::Nls => {
                if !(self.sigma > 0.5) {
                    bail!("the well-posedness probe needs sigma > 1/2 (got {})", self.sigma);
                }
            }
            _ => {}
        }
        Ok(())
    }
}
