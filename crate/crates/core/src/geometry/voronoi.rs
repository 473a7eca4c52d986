use super::{Point, PointSet, Polygon};
use crate::error::{Error, Result};

/// Supporting line of one cell edge: points `x` of the cell satisfy `normal . x <= offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Face {
    normal: Point,
    offset: f64,
}

/// One site's Voronoi region intersected with the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct VoronoiCell {
    site_index: usize,
    site: Point,
    polygon: Polygon,
    faces: Vec<Face>,
}

impl VoronoiCell {
    pub fn site_index(&self) -> usize {
        self.site_index
    }

    pub fn site(&self) -> Point {
        self.site
    }

    pub fn polygon(&self) -> &Polygon {
        &self.polygon
    }

    /// Distance from the site to the cell boundary along the unit vector `dir`.
    ///
    /// The site is strictly inside a convex cell, so the exit point is the smallest
    /// positive hit parameter over all supporting lines; a ray through a vertex gets
    /// the same value from both adjacent edges.
    pub fn ray_length_along(&self, dir: Point) -> f64 {
        let mut best = f64::INFINITY;
        for face in &self.faces {
            let rate = face.normal.dot(dir);
            if rate > 0.0 {
                let t = (face.offset - face.normal.dot(self.site)) / rate;
                if t < best {
                    best = t;
                }
            }
        }
        best
    }

    pub fn ray_length(&self, theta: f64) -> f64 {
        self.ray_length_along(Point::from_angle(theta))
    }

    /// Directions from the site to each cell vertex, in `[0, 2pi)`. `R(theta)` is smooth
    /// between consecutive kinks.
    pub fn kink_angles(&self) -> Vec<f64> {
        self.polygon
            .vertices()
            .iter()
            .map(|v| (*v - self.site).angle())
            .collect()
    }
}

/// Voronoi cells of a point set, each clipped to the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct VoronoiDiagram {
    cells: Vec<VoronoiCell>,
}

impl VoronoiDiagram {
    pub fn cells(&self) -> &[VoronoiCell] {
        &self.cells
    }

    pub fn cell(&self, k: usize) -> &VoronoiCell {
        &self.cells[k]
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// `R_k(theta)`: distance from site `k` to its cell boundary along direction `theta`.
    pub fn ray_length(&self, k: usize, theta: f64) -> f64 {
        self.cells[k].ray_length(theta)
    }

    /// Total area `L`, as the sum of the cell areas. Equal to the integral of
    /// `R_k^2 / 2` over all directions, summed over cells.
    pub fn domain_area(&self) -> f64 {
        self.cells.iter().map(|c| c.polygon.area()).sum()
    }
}

/// Builds the Voronoi diagram by intersecting the domain with the `K - 1` bisector
/// half-planes of every site.
pub fn clip_voronoi(points: &PointSet) -> Result<VoronoiDiagram> {
    let sites = points.sites();
    let domain = points.domain();
    let scale = domain.scale();
    let mut cells = Vec::with_capacity(sites.len());

    for (k, &site) in sites.iter().enumerate() {
        let mut poly = domain.vertices().to_vec();
        for (j, &other) in sites.iter().enumerate() {
            if j == k {
                continue;
            }
            let normal = other - site;
            if normal.norm() == 0.0 {
                return Err(Error::DegenerateInput(format!(
                    "sites {k} and {j} coincide"
                )));
            }
            let offset = normal.dot((site + other) * 0.5);
            poly = clip_half_plane(&poly, normal, offset);
            if poly.is_empty() {
                break;
            }
        }
        let poly = dedup_vertices(poly, 1e-12 * scale);
        if poly.len() < 3 {
            return Err(Error::DegenerateInput(format!(
                "cell of site {k} collapsed"
            )));
        }
        let polygon = Polygon::from_ccw(poly);
        let faces = faces_of(&polygon);
        let inside = faces.iter().all(|f| f.offset - f.normal.dot(site) > 0.0);
        if !inside {
            return Err(Error::DegenerateInput(format!(
                "site {k} lies on the boundary of its cell"
            )));
        }
        cells.push(VoronoiCell {
            site_index: k,
            site,
            polygon,
            faces,
        });
    }
    Ok(VoronoiDiagram { cells })
}

/// Sutherland-Hodgman step keeping `normal . x <= offset`.
fn clip_half_plane(poly: &[Point], normal: Point, offset: f64) -> Vec<Point> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let sa = normal.dot(a) - offset;
        let sb = normal.dot(b) - offset;
        if sa <= 0.0 {
            out.push(a);
        }
        if (sa < 0.0 && sb > 0.0) || (sa > 0.0 && sb < 0.0) {
            let t = sa / (sa - sb);
            out.push(a + (b - a) * t);
        }
    }
    out
}

fn dedup_vertices(poly: Vec<Point>, tol: f64) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(poly.len());
    for p in poly {
        if out.last().is_none_or(|q| q.distance(p) > tol) {
            out.push(p);
        }
    }
    while out.len() > 1 && out[0].distance(*out.last().unwrap()) <= tol {
        out.pop();
    }
    out
}

fn faces_of(polygon: &Polygon) -> Vec<Face> {
    polygon
        .edges()
        .filter_map(|(a, b)| {
            let e = b - a;
            let len = e.norm();
            (len > 0.0).then(|| {
                let normal = Point::new(e.y / len, -e.x / len);
                Face {
                    normal,
                    offset: normal.dot(a),
                }
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, PI, TAU};

    fn single() -> VoronoiDiagram {
        clip_voronoi(&PointSet::in_unit_square(vec![Point::new(0.5, 0.5)]).unwrap()).unwrap()
    }

    fn two() -> VoronoiDiagram {
        let ps =
            PointSet::in_unit_square(vec![Point::new(0.25, 0.5), Point::new(0.75, 0.5)]).unwrap();
        clip_voronoi(&ps).unwrap()
    }

    fn bbox_of(cell: &VoronoiCell) -> (Point, Point) {
        cell.polygon().bounding_box()
    }

    #[test]
    fn single_site_owns_the_square() {
        let d = single();
        assert_eq!(d.len(), 1);
        assert_eq!(d.cell(0).polygon().area(), 1.0);
        assert_eq!(d.domain_area(), 1.0);
    }

    #[test]
    fn two_sites_split_at_bisector() {
        let d = two();
        let (min0, max0) = bbox_of(d.cell(0));
        let (min1, max1) = bbox_of(d.cell(1));
        assert_eq!((min0, max0), (Point::new(0.0, 0.0), Point::new(0.5, 1.0)));
        assert_eq!((min1, max1), (Point::new(0.5, 0.0), Point::new(1.0, 1.0)));
        assert_eq!(d.cell(0).polygon().area(), 0.5);
    }

    #[test]
    fn ray_length_examples() {
        let d = single();
        assert!((d.ray_length(0, 0.0) - 0.5).abs() < 1e-15);
        assert!((d.ray_length(0, FRAC_PI_4) - 2f64.sqrt() / 2.0).abs() < 1e-12);
        assert!((d.ray_length(0, PI) - 0.5).abs() < 1e-15);
        let d = two();
        assert!((d.ray_length(0, 0.0) - 0.25).abs() < 1e-15);
        assert!((d.ray_length(1, PI) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rectangle_area_is_independent_of_sites() {
        let rect = Polygon::rectangle(Point::new(0.0, 0.0), Point::new(2.0, 1.0));
        let ps = PointSet::new(
            vec![
                Point::new(0.3, 0.4),
                Point::new(1.1, 0.7),
                Point::new(1.7, 0.2),
            ],
            rect,
        )
        .unwrap();
        let d = clip_voronoi(&ps).unwrap();
        assert!((d.domain_area() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn quadrature_of_ray_length_matches_shoelace() {
        // midpoint rule over theta, independent of the polygon area routine
        let d = single();
        let n = 10_000;
        let h = TAU / n as f64;
        let area: f64 = (0..n)
            .map(|i| {
                let r = d.ray_length(0, (i as f64 + 0.5) * h);
                0.5 * r * r * h
            })
            .sum();
        assert!((area - 1.0).abs() < 1e-4, "{area}");
        assert!((area - d.domain_area()).abs() < 1e-4);
    }

    #[test]
    fn kink_angles_point_at_corners() {
        let d = single();
        let mut kinks = d.cell(0).kink_angles();
        kinks.sort_by(f64::total_cmp);
        let expected = [FRAC_PI_4, 3.0 * FRAC_PI_4, 5.0 * FRAC_PI_4, 7.0 * FRAC_PI_4];
        for (a, b) in kinks.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
