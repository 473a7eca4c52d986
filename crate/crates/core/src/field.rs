//! Grid samples of the distance transform, the eroded support mask, and the complex
//! wave representation `exp(iS/tau)`.

use std::f64::consts::PI;
use std::path::Path;

use ndarray::{Array2, Zip};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, PointSet, Polygon, VoronoiDiagram};

/// Largest pixel size that resolves the phase of `exp(iS/tau)`.
///
/// The phase advances at rate `|grad S| / tau = 1 / tau`; annulus polling needs content
/// out to `(1 + delta) / tau`, and Nyquist allows `pi / h`. The extra factor of 4 keeps
/// leakage from the aliased tail small.
pub fn max_spacing(tau: f64) -> f64 {
    PI * tau / 4.0
}

/// Square-pixel sampling lattice; pixel `(i, j)` has center
/// `origin + ((i + 1/2) h, (j + 1/2) h)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin: Point,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(origin: Point, h: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "pixel size must be positive, got {h}"
            )));
        }
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidParameter(
                "grid needs at least one pixel".into(),
            ));
        }
        Ok(GridSpec { origin, h, nx, ny })
    }

    /// Grid over the domain's bounding box with `pixels` along its longer side.
    pub fn covering(domain: &Polygon, pixels: usize) -> Result<Self> {
        if pixels == 0 {
            return Err(Error::InvalidParameter(
                "grid needs at least one pixel".into(),
            ));
        }
        let (min, max) = domain.bounding_box();
        let span = max - min;
        let h = span.x.max(span.y) / pixels as f64;
        Self::with_spacing(domain, h)
    }

    /// Smallest grid with spacing `h` whose pixels cover the domain's bounding box.
    pub fn with_spacing(domain: &Polygon, h: f64) -> Result<Self> {
        let (min, max) = domain.bounding_box();
        let span = max - min;
        let count = |len: f64| ((len / h) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        Self::new(min, h, count(span.x), count(span.y))
    }

    pub fn pixel_center(&self, i: usize, j: usize) -> Point {
        Point::new(
            self.origin.x + (i as f64 + 0.5) * self.h,
            self.origin.y + (j as f64 + 0.5) * self.h,
        )
    }

    pub fn pixel_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn covers(&self, domain: &Polygon) -> bool {
        let (min, max) = domain.bounding_box();
        let tol = 1e-9 * self.h;
        self.origin.x <= min.x + tol
            && self.origin.y <= min.y + tol
            && self.origin.x + self.nx as f64 * self.h >= max.x - tol
            && self.origin.y + self.ny as f64 * self.h >= max.y - tol
    }

    fn sidecar(&self) -> serde_json::Value {
        serde_json::json!({
            "nx": self.nx,
            "ny": self.ny,
            "h": self.h,
            "origin": [self.origin.x, self.origin.y],
        })
    }
}

/// `S(x_i, y_j) = min_k |(x_i, y_j) - Y_k|`, indexed `[i, j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    pub grid: GridSpec,
    pub values: Array2<f64>,
}

/// Pixels whose centers lie in the eroded region, where every point sits at radial
/// position `r` in `[eps R_k(theta), (1 - eps) R_k(theta)]` of its own cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportMask {
    pub grid: GridSpec,
    pub flags: Array2<bool>,
    pub epsilon: f64,
    pub support_count: usize,
    /// Discrete area of the support, `h^2 * support_count`.
    pub area: f64,
}

/// `exp(iS/tau)` on the support, zero elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    pub grid: GridSpec,
    pub values: Array2<Complex64>,
    pub tau: f64,
}

pub fn sample_distance(grid: &GridSpec, points: &PointSet) -> DistanceField {
    let mut values = Array2::zeros((grid.nx, grid.ny));
    Zip::indexed(&mut values).par_for_each(|(i, j), v| {
        *v = points.nearest_site(grid.pixel_center(i, j)).distance;
    });
    DistanceField {
        grid: *grid,
        values,
    }
}

pub fn epsilon_mask(
    grid: &GridSpec,
    points: &PointSet,
    diagram: &VoronoiDiagram,
    epsilon: f64,
) -> Result<SupportMask> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1/2), got {epsilon}"
        )));
    }
    let sites = points.sites();
    let mut flags = Array2::from_elem((grid.nx, grid.ny), false);
    Zip::indexed(&mut flags).par_for_each(|(i, j), flag| {
        let x = grid.pixel_center(i, j);
        let nearest = points.nearest_site(x);
        let r = nearest.distance;
        if r == 0.0 {
            return;
        }
        let dir = (x - sites[nearest.index]) * (1.0 / r);
        let big_r = diagram.cell(nearest.index).ray_length_along(dir);
        // points outside the domain lie beyond their cell boundary, so r > R there
        *flag = epsilon * big_r <= r && r <= (1.0 - epsilon) * big_r;
    });
    let support_count = flags.iter().filter(|f| **f).count();
    if support_count == 0 {
        return Err(Error::EmptySupport { epsilon, h: grid.h });
    }
    Ok(SupportMask {
        grid: *grid,
        flags,
        epsilon,
        support_count,
        area: grid.h * grid.h * support_count as f64,
    })
}

/// Builds `exp(iS/tau)` on the mask. Fails with `UndersampledPhase` when
/// `h > pi tau / 4` unless `force` is set.
pub fn build_cwr(
    field: &DistanceField,
    mask: &SupportMask,
    tau: f64,
    force: bool,
) -> Result<WaveField> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tau must be positive, got {tau}"
        )));
    }
    if field.grid != mask.grid {
        return Err(Error::InvalidParameter(
            "distance field and mask are sampled on different grids".into(),
        ));
    }
    let limit = max_spacing(tau);
    if !force && field.grid.h > limit * (1.0 + 1e-12) {
        return Err(Error::UndersampledPhase {
            h: field.grid.h,
            tau,
            limit,
        });
    }
    let mut values = Array2::zeros((field.grid.nx, field.grid.ny));
    Zip::from(&mut values)
        .and(&field.values)
        .and(&mask.flags)
        .par_for_each(|w, &s, &on| {
            if on {
                *w = Complex64::from_polar(1.0, s / tau);
            }
        });
    Ok(WaveField {
        grid: field.grid,
        values,
        tau,
    })
}

/// Writes `values` as little-endian f64 to `<stem>.bin` and a one-line JSON sidecar
/// to `<stem>.json`.
pub fn write_dump(stem: &Path, values: &[f64], sidecar: &serde_json::Value) -> Result<()> {
    let bin = stem.with_extension("bin");
    let json = stem.with_extension("json");
    let mut bytes = Vec::with_capacity(values.len() * 8);
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(&bin, bytes).map_err(|e| Error::io(&bin, e))?;
    let mut line = serde_json::to_string(sidecar)?;
    line.push('\n');
    std::fs::write(&json, line).map_err(|e| Error::io(&json, e))
}

impl DistanceField {
    /// Row-major dump: value `k = i * ny + j` is `S(x_i, y_j)`.
    pub fn dump(&self, stem: &Path) -> Result<()> {
        let values: Vec<f64> = self.values.iter().copied().collect();
        write_dump(stem, &values, &self.grid.sidecar())
    }
}
