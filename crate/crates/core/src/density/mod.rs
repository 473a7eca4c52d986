//! Ground-truth orientation densities and the histogram type they share with the
//! spectral estimator.

mod closed_form;
mod monte_carlo;
mod quadrature;

use std::f64::consts::TAU;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::normalize_angle;

pub use closed_form::{closed_form_density, closed_form_histogram, interval_mass};
pub use monte_carlo::{monte_carlo_histogram, MC_STREAMS};
pub use quadrature::{gauss_legendre_16, integrate_adaptive};

pub const CSV_HEADER: &str = "omega_lo,omega_hi,mass,source";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    ClosedForm,
    MonteCarlo,
    Spectral,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::ClosedForm => "closed_form",
            Source::MonteCarlo => "monte_carlo",
            Source::Spectral => "spectral",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Interval measures of an orientation density over `B` equal bins.
///
/// Bin `b` covers `[origin + b*2pi/B, origin + (b+1)*2pi/B)`. Masses are integrals of
/// the density over each bin, not density values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrientationHistogram {
    origin: f64,
    masses: Vec<f64>,
    source: Source,
}

impl OrientationHistogram {
    pub fn new(origin: f64, masses: Vec<f64>, source: Source) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::InvalidParameter(
                "histogram needs at least one bin".into(),
            ));
        }
        if !origin.is_finite() {
            return Err(Error::InvalidParameter("bin origin must be finite".into()));
        }
        if let Some(m) = masses.iter().find(|m| !(m.is_finite() && **m >= 0.0)) {
            return Err(Error::InvalidParameter(format!("invalid bin mass {m}")));
        }
        Ok(OrientationHistogram {
            origin,
            masses,
            source,
        })
    }

    pub fn bin_count(&self) -> usize {
        self.masses.len()
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn source(&self) -> Source {
        self.source
    }

    pub fn bin_width(&self) -> f64 {
        TAU / self.bin_count() as f64
    }

    /// `(lo, hi)` edges of bin `b`, not wrapped.
    pub fn bin_edges(&self, b: usize) -> (f64, f64) {
        bin_edges(self.origin, self.bin_count(), b)
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.bin_count() != other.bin_count() {
            return Err(Error::BinMismatch(format!(
                "{} bins vs {} bins",
                self.bin_count(),
                other.bin_count()
            )));
        }
        let shift = normalize_angle(self.origin - other.origin);
        if shift.min(TAU - shift) > 1e-12 {
            return Err(Error::BinMismatch(format!(
                "origins {} vs {}",
                self.origin, other.origin
            )));
        }
        Ok(())
    }

    /// Sum of absolute per-bin differences.
    pub fn l1_distance(&self, other: &Self) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .masses
            .iter()
            .zip(&other.masses)
            .map(|(a, b)| (a - b).abs())
            .sum())
    }

    /// Largest per-bin difference.
    pub fn sup_distance(&self, other: &Self) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .masses
            .iter()
            .zip(&other.masses)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Merges runs of `factor` adjacent bins. `factor` must divide the bin count.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || !self.bin_count().is_multiple_of(factor) {
            return Err(Error::BinMismatch(format!(
                "cannot merge {} bins in groups of {factor}",
                self.bin_count()
            )));
        }
        let masses = self.masses.chunks(factor).map(|c| c.iter().sum()).collect();
        Ok(OrientationHistogram {
            origin: self.origin,
            masses,
            source: self.source,
        })
    }

    /// CSV with header `omega_lo,omega_hi,mass,source`, one row per bin.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.bin_count() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for (b, m) in self.masses.iter().enumerate() {
            let (lo, hi) = self.bin_edges(b);
            let _ = writeln!(out, "{lo},{hi},{m},{}", self.source);
        }
        out
    }
}

pub(crate) fn bin_edges(origin: f64, bins: usize, b: usize) -> (f64, f64) {
    let width = TAU / bins as f64;
    (origin + b as f64 * width, origin + (b + 1) as f64 * width)
}

/// Bin containing `angle`; the last bin absorbs rounding at the wrap point.
pub(crate) fn bin_index(angle: f64, origin: f64, bins: usize) -> usize {
    let offset = normalize_angle(angle - origin);
    ((offset / TAU * bins as f64) as usize).min(bins - 1)
}
