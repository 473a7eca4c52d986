use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, PointSet, Polygon};

/// Named point-set generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    /// One site at the domain centroid.
    SingleCenter,
    /// Two sites at the quarter points of the bounding box's long axis.
    TwoSites,
    /// `K` seeded uniform sites with a minimum spacing and boundary clearance.
    Uniform(usize),
    /// `K` sites evenly spaced on a circle about the centroid.
    Ring(usize),
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let count = |rest: &str| -> Result<usize> {
            match rest.parse::<usize>() {
                Ok(k) if k >= 1 => Ok(k),
                _ => Err(Error::InvalidParameter(format!("bad site count in `{s}`"))),
            }
        };
        match s {
            "single-center" => Ok(Generator::SingleCenter),
            "two-sites" => Ok(Generator::TwoSites),
            _ => {
                if let Some(rest) = s.strip_prefix("uniform-") {
                    Ok(Generator::Uniform(count(rest)?))
                } else if let Some(rest) = s.strip_prefix("ring-") {
                    Ok(Generator::Ring(count(rest)?))
                } else {
                    Err(Error::InvalidParameter(format!("unknown generator `{s}`")))
                }
            }
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::SingleCenter => f.write_str("single-center"),
            Generator::TwoSites => f.write_str("two-sites"),
            Generator::Uniform(k) => write!(f, "uniform-{k}"),
            Generator::Ring(k) => write!(f, "ring-{k}"),
        }
    }
}

impl Generator {
    /// Builds the point set; only `Uniform` consumes `seed`.
    pub fn generate(self, domain: &Polygon, seed: u64) -> Result<PointSet> {
        let (min, max) = domain.bounding_box();
        let span = max - min;
        let center = domain.centroid();
        let sites = match self {
            Generator::SingleCenter => vec![center],
            Generator::TwoSites => {
                if span.x >= span.y {
                    let y = 0.5 * (min.y + max.y);
                    vec![
                        Point::new(min.x + 0.25 * span.x, y),
                        Point::new(min.x + 0.75 * span.x, y),
                    ]
                } else {
                    let x = 0.5 * (min.x + max.x);
                    vec![
                        Point::new(x, min.y + 0.25 * span.y),
                        Point::new(x, min.y + 0.75 * span.y),
                    ]
                }
            }
            Generator::Ring(k) => {
                let radius = 0.3 * span.x.min(span.y);
                (0..k)
                    .map(|i| center + Point::from_angle(TAU * i as f64 / k as f64) * radius)
                    .collect()
            }
            Generator::Uniform(k) => uniform_sites(domain, k, seed)?,
        };
        PointSet::new(sites, domain.clone())
    }
}

/// Rejection sampling from `ChaCha8Rng::seed_from_u64(seed)`: candidates are uniform in
/// the bounding box and kept when inside the domain, at least `0.02 * sqrt(area)` from
/// its boundary, and at least `0.1 * sqrt(area / k)` from every kept site.
fn uniform_sites(domain: &Polygon, k: usize, seed: u64) -> Result<Vec<Point>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (min, max) = domain.bounding_box();
    let span = max - min;
    let scale = domain.area().sqrt();
    let margin = 0.02 * scale;
    let spacing = 0.1 * scale / (k as f64).sqrt();
    let mut sites: Vec<Point> = Vec::with_capacity(k);
    let max_attempts = 10_000 * k;
    for _ in 0..max_attempts {
        if sites.len() == k {
            break;
        }
        let p = Point::new(
            min.x + span.x * rng.random::<f64>(),
            min.y + span.y * rng.random::<f64>(),
        );
        if domain.contains(p)
            && domain.distance_to_boundary(p) >= margin
            && sites.iter().all(|s| s.distance(p) >= spacing)
        {
            sites.push(p);
        }
    }
    if sites.len() < k {
        return Err(Error::DegenerateInput(format!(
            "could not place {k} separated sites in the domain"
        )));
    }
    Ok(sites)
}
