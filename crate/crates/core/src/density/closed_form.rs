use std::f64::consts::TAU;

use super::quadrature::integrate_adaptive;
use super::{bin_edges, OrientationHistogram, Source};
use crate::error::{Error, Result};
use crate::geometry::{normalize_angle, Point, VoronoiCell, VoronoiDiagram};

const QUAD_TOL: f64 = 1e-13;

/// `P(theta) = (1/L) * sum_k R_k(theta)^2 / 2`.
pub fn closed_form_density(diagram: &VoronoiDiagram, theta: f64) -> f64 {
    let dir = Point::from_angle(theta);
    let sum: f64 = diagram
        .cells()
        .iter()
        .map(|c| {
            let r = c.ray_length_along(dir);
            0.5 * r * r
        })
        .sum();
    sum / diagram.domain_area()
}

/// Integral of `R^2 / 2` for one cell over `[lo, hi]`, split at the cell's kinks so every
/// panel integrates a smooth function.
fn cell_sector_area(cell: &VoronoiCell, lo: f64, hi: f64) -> f64 {
    let mut cuts: Vec<f64> = cell
        .kink_angles()
        .into_iter()
        .map(|k| lo + normalize_angle(k - lo))
        .filter(|&k| k > lo && k < hi)
        .collect();
    cuts.sort_by(f64::total_cmp);

    let f = |t: f64| {
        let r = cell.ray_length(t);
        0.5 * r * r
    };
    let mut total = 0.0;
    let mut a = lo;
    for b in cuts.into_iter().chain(std::iter::once(hi)) {
        if b > a {
            total += integrate_adaptive(f, a, b, QUAD_TOL);
        }
        a = b;
    }
    total
}

/// `int_lo^hi P(omega) d omega` for `0 <= hi - lo <= 2pi`.
pub fn interval_mass(diagram: &VoronoiDiagram, lo: f64, hi: f64) -> f64 {
    debug_assert!(hi >= lo && hi - lo <= TAU * (1.0 + 1e-12));
    let area: f64 = diagram
        .cells()
        .iter()
        .map(|c| cell_sector_area(c, lo, hi))
        .sum();
    area / diagram.domain_area()
}

/// Closed-form interval measures over `bins` equal bins starting at `origin`.
pub fn closed_form_histogram(
    diagram: &VoronoiDiagram,
    bins: usize,
    origin: f64,
) -> Result<OrientationHistogram> {
    if bins == 0 {
        return Err(Error::InvalidParameter(
            "bin count must be at least 1".into(),
        ));
    }
    let masses = (0..bins)
        .map(|b| {
            let (lo, hi) = bin_edges(origin, bins, b);
            interval_mass(diagram, lo, hi)
        })
        .collect();
    OrientationHistogram::new(origin, masses, Source::ClosedForm)
}
