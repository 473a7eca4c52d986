use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Point, Polygon};
use crate::error::{Error, Result};

/// Sites closer than this to each other or to the domain boundary are rejected.
pub const MIN_CLEARANCE: f64 = 1e-9;

/// The `K` source sites together with the convex polygonal domain they live in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    sites: Vec<Point>,
    domain: Polygon,
}

/// Result of a nearest-site query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearestSite {
    pub index: usize,
    pub distance: f64,
    /// Another site lies at the same distance; `index` is the lowest such site.
    pub tie: bool,
}

impl PointSet {
    pub fn new(sites: Vec<Point>, domain: Polygon) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::DegenerateInput("point set is empty".into()));
        }
        if !domain.is_convex() {
            return Err(Error::NonConvexDomain(
                "ray lengths are only single-valued on convex cells".into(),
            ));
        }
        for (k, &s) in sites.iter().enumerate() {
            if !s.x.is_finite() || !s.y.is_finite() {
                return Err(Error::DegenerateInput(format!("site {k} is not finite")));
            }
            if !domain.contains(s) || domain.distance_to_boundary(s) <= MIN_CLEARANCE {
                return Err(Error::DegenerateInput(format!(
                    "site {k} at ({}, {}) is not strictly inside the domain",
                    s.x, s.y
                )));
            }
        }
        for i in 0..sites.len() {
            for j in (i + 1)..sites.len() {
                if sites[i].distance(sites[j]) <= MIN_CLEARANCE {
                    return Err(Error::DegenerateInput(format!(
                        "sites {i} and {j} coincide"
                    )));
                }
            }
        }
        Ok(PointSet { sites, domain })
    }

    pub fn in_unit_square(sites: Vec<Point>) -> Result<Self> {
        Self::new(sites, Polygon::unit_square())
    }

    pub fn sites(&self) -> &[Point] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn domain(&self) -> &Polygon {
        &self.domain
    }

    /// Brute-force nearest site; equidistant sites resolve to the lowest index.
    pub fn nearest_site(&self, x: Point) -> NearestSite {
        let mut best = 0;
        let mut best_d2 = f64::INFINITY;
        for (k, s) in self.sites.iter().enumerate() {
            let d = x - *s;
            let d2 = d.dot(d);
            if d2 < best_d2 {
                best_d2 = d2;
                best = k;
            }
        }
        let distance = best_d2.sqrt();
        let tol = 1e-12 * (1.0 + distance);
        let tie = self
            .sites
            .iter()
            .enumerate()
            .any(|(k, s)| k != best && (x.distance(*s) - distance).abs() <= tol);
        NearestSite {
            index: best,
            distance,
            tie,
        }
    }

    /// Orientation of the distance-transform gradient at `x`: the direction from the
    /// nearest site to `x`, in `[0, 2pi)`.
    pub fn nearest_site_orientation(&self, x: Point) -> Result<f64> {
        let nearest = self.nearest_site(x);
        if nearest.distance == 0.0 {
            return Err(Error::AtSite {
                x: x.x,
                y: x.y,
                site: nearest.index,
            });
        }
        Ok((x - self.sites[nearest.index]).angle())
    }

    /// Parses the point-set text format: one `x,y` per line, `#` comments, and an
    /// optional `domain: x0,y0 x1,y1 ...` line (unit square when absent).
    pub fn parse(text: &str) -> Result<Self> {
        let mut sites = Vec::new();
        let mut domain = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("domain:") {
                if domain.is_some() {
                    return Err(Error::Parse {
                        line: line_no,
                        message: "duplicate domain line".into(),
                    });
                }
                let vertices = parse_vertex_list(rest).map_err(|message| Error::Parse {
                    line: line_no,
                    message,
                })?;
                domain = Some(Polygon::new(vertices)?);
                continue;
            }
            let p = parse_pair(line).map_err(|message| Error::Parse {
                line: line_no,
                message,
            })?;
            sites.push(p);
        }
        PointSet::new(sites, domain.unwrap_or_else(Polygon::unit_square))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Serializes to the text format; floats use the shortest round-trip representation.
    pub fn to_text(&self, comment: Option<&str>) -> String {
        let mut out = String::new();
        if let Some(c) = comment {
            for line in c.lines() {
                let _ = writeln!(out, "# {line}");
            }
        }
        out.push_str("domain:");
        for v in self.domain.vertices() {
            let _ = write!(out, " {},{}", v.x, v.y);
        }
        out.push('\n');
        for s in &self.sites {
            let _ = writeln!(out, "{},{}", s.x, s.y);
        }
        out
    }

    pub fn write(&self, path: impl AsRef<Path>, comment: Option<&str>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text(comment)).map_err(|e| Error::io(path, e))
    }
}

pub(crate) fn parse_pair(s: &str) -> std::result::Result<Point, String> {
    let mut parts = s.split(',');
    let (Some(x), Some(y), None) = (parts.next(), parts.next(), parts.next()) else {
        return Err(format!("expected `x,y`, got `{s}`"));
    };
    let x: f64 = x.trim().parse().map_err(|_| format!("bad number `{x}`"))?;
    let y: f64 = y.trim().parse().map_err(|_| format!("bad number `{y}`"))?;
    Ok(Point::new(x, y))
}

/// Parses whitespace-separated `x,y` pairs.
pub(crate) fn parse_vertex_list(s: &str) -> std::result::Result<Vec<Point>, String> {
    s.split_whitespace().map(parse_pair).collect()
}

impl std::str::FromStr for Polygon {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let vertices = parse_vertex_list(s).map_err(|message| Error::Parse { line: 1, message })?;
        Polygon::new(vertices)
    }
}
