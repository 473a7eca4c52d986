use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::Generator;
use crate::error::{Error, Result};
use crate::field::{max_spacing, GridSpec};
use crate::geometry::{PointSet, Polygon};

/// Where the sites come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointSource {
    File(PathBuf),
    Generator {
        generator: Generator,
        seed: u64,
        /// Domain vertices; the unit square when absent.
        domain: Option<Polygon>,
    },
}

impl PointSource {
    pub fn generated(generator: Generator, seed: u64) -> Self {
        PointSource::Generator {
            generator,
            seed,
            domain: None,
        }
    }

    pub fn resolve(&self) -> Result<PointSet> {
        match self {
            PointSource::File(path) => PointSet::read(path),
            PointSource::Generator {
                generator,
                seed,
                domain,
            } => {
                let domain = domain.clone().unwrap_or_else(Polygon::unit_square);
                generator.generate(&domain, *seed)
            }
        }
    }
}

/// How the sampling grid is chosen for each `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridPolicy {
    /// `h = pi tau / (4 oversample)`, a fresh grid per `tau`.
    SamplingRule { oversample: f64 },
    /// A fixed number of pixels along the longer side of the domain's bounding box.
    Explicit { pixels: usize },
}

impl GridPolicy {
    pub fn grid_for(&self, domain: &Polygon, tau: f64) -> Result<GridSpec> {
        match *self {
            GridPolicy::SamplingRule { oversample } => {
                if !(oversample.is_finite() && oversample >= 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "oversample must be at least 1, got {oversample}"
                    )));
                }
                GridSpec::with_spacing(domain, max_spacing(tau) / oversample)
            }
            GridPolicy::Explicit { pixels } => GridSpec::covering(domain, pixels),
        }
    }
}

impl Default for GridPolicy {
    fn default() -> Self {
        GridPolicy::SamplingRule { oversample: 1.0 }
    }
}

/// One convergence experiment: a point set, the estimator parameters and a
/// decreasing `tau` schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub points: PointSource,
    pub epsilon: f64,
    pub delta: f64,
    pub bins: usize,
    pub bin_origin: f64,
    pub taus: Vec<f64>,
    pub grid: GridPolicy,
    pub pad_factor: usize,
    pub mc_samples: u64,
    pub mc_seed: u64,
    /// Build wave fields even when the grid undersamples the phase.
    pub force: bool,
    /// Fill the `runtime_s` CSV column. Off by default so reruns produce identical CSVs.
    pub record_runtime: bool,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            points: PointSource::generated(Generator::SingleCenter, 0),
            epsilon: 0.05,
            delta: 0.1,
            bins: 32,
            bin_origin: 0.0,
            taus: vec![0.1, 0.05, 0.02],
            grid: GridPolicy::default(),
            pad_factor: 2,
            mc_samples: 1_000_000,
            mc_seed: 0,
            force: false,
            record_runtime: false,
            output_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return bad(format!(
                "epsilon must lie in (0, 1/2), got {}",
                self.epsilon
            ));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        if self.bins == 0 {
            return bad("bins must be at least 1".into());
        }
        if !self.bin_origin.is_finite() {
            return bad("bin origin must be finite".into());
        }
        if self.pad_factor == 0 {
            return bad("pad factor must be at least 1".into());
        }
        if self.mc_samples == 0 {
            return bad("Monte-Carlo sample count must be at least 1".into());
        }
        if self.taus.is_empty() {
            return bad("tau schedule is empty".into());
        }
        if self.taus.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return bad(format!("tau values must be positive: {:?}", self.taus));
        }
        if self.taus.windows(2).any(|w| w[1] >= w[0]) {
            return bad(format!(
                "tau schedule must strictly decrease: {:?}",
                self.taus
            ));
        }
        Ok(())
    }

    /// Rejects explicit grids that undersample the smallest `tau` (unless forced).
    pub fn check_sampling(&self, domain: &Polygon) -> Result<()> {
        let tau_min = *self.taus.last().expect("validated schedule");
        let grid = self.grid.grid_for(domain, tau_min)?;
        let limit = max_spacing(tau_min);
        if !self.force && grid.h > limit * (1.0 + 1e-12) {
            return Err(Error::UndersampledPhase {
                h: grid.h,
                tau: tau_min,
                limit,
            });
        }
        Ok(())
    }
}
