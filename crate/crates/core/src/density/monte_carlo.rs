use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{bin_index, OrientationHistogram, Source};
use crate::error::{Error, Result};
use crate::geometry::{Point, PointSet};

/// Number of independent substreams the sample budget is split across.
///
/// Substream `i` is `ChaCha8Rng::seed_from_u64(seed)` switched to stream `i`. The split
/// is fixed, so results do not depend on how many worker threads run it.
pub const MC_STREAMS: usize = 64;

/// Orientation histogram of `nabla S(W)` for `W` uniform on the domain.
///
/// Positions are drawn uniformly in the domain's bounding box and rejected outside the
/// polygon. Equidistant samples go to the lowest-index site; a draw landing exactly on
/// a site is redrawn.
pub fn monte_carlo_histogram(
    points: &PointSet,
    n_samples: u64,
    bins: usize,
    origin: f64,
    seed: u64,
) -> Result<OrientationHistogram> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    if bins == 0 {
        return Err(Error::InvalidParameter(
            "bin count must be at least 1".into(),
        ));
    }
    let per_stream = n_samples / MC_STREAMS as u64;
    let extra = n_samples % MC_STREAMS as u64;

    let partial: Vec<Vec<u64>> = (0..MC_STREAMS)
        .into_par_iter()
        .map(|i| {
            let quota = per_stream + u64::from((i as u64) < extra);
            sample_stream(points, quota, bins, origin, seed, i as u64)
        })
        .collect();

    let mut counts = vec![0u64; bins];
    for p in &partial {
        for (c, v) in counts.iter_mut().zip(p) {
            *c += v;
        }
    }
    let n = n_samples as f64;
    let masses = counts.into_iter().map(|c| c as f64 / n).collect();
    OrientationHistogram::new(origin, masses, Source::MonteCarlo)
}

fn sample_stream(
    points: &PointSet,
    quota: u64,
    bins: usize,
    origin: f64,
    seed: u64,
    stream: u64,
) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let domain = points.domain();
    let (min, max) = domain.bounding_box();
    let span = max - min;
    let mut counts = vec![0u64; bins];
    let mut drawn = 0;
    while drawn < quota {
        let x = Point::new(
            min.x + span.x * rng.random::<f64>(),
            min.y + span.y * rng.random::<f64>(),
        );
        if !domain.contains(x) {
            continue;
        }
        let Ok(angle) = points.nearest_site_orientation(x) else {
            continue;
        };
        counts[bin_index(angle, origin, bins)] += 1;
        drawn += 1;
    }
    counts
}
