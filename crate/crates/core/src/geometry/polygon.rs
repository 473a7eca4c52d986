use serde::{Deserialize, Serialize};

use super::Point;
use crate::error::{Error, Result};

/// A simple polygon with counterclockwise vertices; the closing edge is implicit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    vertices: Vec<Point>,
}

impl Polygon {
    /// Builds a polygon, reversing clockwise input so the stored order is counterclockwise.
    pub fn new(mut vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::DegenerateInput(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if vertices
            .iter()
            .any(|p| !p.x.is_finite() || !p.y.is_finite())
        {
            return Err(Error::DegenerateInput("non-finite polygon vertex".into()));
        }
        let area = shoelace(&vertices);
        if area == 0.0 {
            return Err(Error::DegenerateInput("polygon has zero area".into()));
        }
        if area < 0.0 {
            vertices.reverse();
        }
        if !is_simple(&vertices) {
            return Err(Error::DegenerateInput("polygon self-intersects".into()));
        }
        Ok(Polygon { vertices })
    }

    /// Trusted constructor for polygons produced by clipping a convex ccw polygon.
    pub(crate) fn from_ccw(vertices: Vec<Point>) -> Self {
        debug_assert!(vertices.len() >= 3);
        Polygon { vertices }
    }

    pub fn unit_square() -> Self {
        Self::rectangle(Point::new(0.0, 0.0), Point::new(1.0, 1.0))
    }

    pub fn rectangle(min: Point, max: Point) -> Self {
        Polygon {
            vertices: vec![min, Point::new(max.x, min.y), max, Point::new(min.x, max.y)],
        }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Edges `(a, b)` in counterclockwise order, including the closing edge.
    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn signed_area(&self) -> f64 {
        shoelace(&self.vertices)
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn centroid(&self) -> Point {
        let mut cx = 0.0;
        let mut cy = 0.0;
        for (a, b) in self.edges() {
            let w = a.cross(b);
            cx += (a.x + b.x) * w;
            cy += (a.y + b.y) * w;
        }
        let a6 = 6.0 * self.signed_area();
        Point::new(cx / a6, cy / a6)
    }

    /// Axis-aligned bounding box as `(min, max)`.
    pub fn bounding_box(&self) -> (Point, Point) {
        let mut min = self.vertices[0];
        let mut max = self.vertices[0];
        for p in &self.vertices[1..] {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        (min, max)
    }

    /// Every turn is a left turn (collinear vertices allowed) and the boundary winds once.
    pub fn is_convex(&self) -> bool {
        let n = self.vertices.len();
        let scale = self.scale();
        let mut turning = 0.0;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let c = self.vertices[(i + 2) % n];
            let e1 = b - a;
            let e2 = c - b;
            if e1.cross(e2) < -1e-12 * scale * scale {
                return false;
            }
            turning += e1.cross(e2).atan2(e1.dot(e2));
        }
        (turning - std::f64::consts::TAU).abs() < 1e-6
    }

    /// Crossing-number point-in-polygon test; boundary points may go either way.
    pub fn contains(&self, p: Point) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn distance_to_boundary(&self, p: Point) -> f64 {
        self.edges()
            .map(|(a, b)| point_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Length of the bounding-box diagonal; used to scale tolerances.
    pub fn scale(&self) -> f64 {
        let (min, max) = self.bounding_box();
        (max - min).norm()
    }
}

fn shoelace(vertices: &[Point]) -> f64 {
    let n = vertices.len();
    let twice: f64 = (0..n)
        .map(|i| vertices[i].cross(vertices[(i + 1) % n]))
        .sum();
    0.5 * twice
}

fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = (q2 - q1).cross(p1 - q1);
    let d2 = (q2 - q1).cross(p2 - q1);
    let d3 = (p2 - p1).cross(q1 - p1);
    let d4 = (p2 - p1).cross(q2 - p1);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |a: Point, b: Point, c: Point| {
        c.x >= a.x.min(b.x) && c.x <= a.x.max(b.x) && c.y >= a.y.min(b.y) && c.y <= a.y.max(b.y)
    };
    (d1 == 0.0 && on(q1, q2, p1))
        || (d2 == 0.0 && on(q1, q2, p2))
        || (d3 == 0.0 && on(p1, p2, q1))
        || (d4 == 0.0 && on(p1, p2, q2))
}

fn is_simple(vertices: &[Point]) -> bool {
    let n = vertices.len();
    for i in 0..n {
        let (a1, a2) = (vertices[i], vertices[(i + 1) % n]);
        if a1 == a2 {
            return false;
        }
        for j in (i + 1)..n {
            // adjacent edges share a vertex by construction
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (b1, b2) = (vertices[j], vertices[(j + 1) % n]);
            if segments_intersect(a1, a2, b1, b2) {
                return false;
            }
        }
    }
    true
}
