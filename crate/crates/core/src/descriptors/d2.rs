use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{TriangleMesh, Vec3};
use crate::num::Real;

/// Upper end of the histogram support, in units of the mean distance.
pub const D2_RANGE: f64 = 3.0;

/// Distribution of distances between random vertex pairs, normalized by
/// their mean so that the histogram is scale invariant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct D2Histogram<T: Real> {
    pub frequencies: Vec<T>,
    /// Mean sampled distance (mm) used for normalization.
    pub mean_distance: T,
}

impl<T: Real> D2Histogram<T> {
    pub fn bins(&self) -> usize {
        self.frequencies.len()
    }
}

pub fn d2_descriptor<T: Real>(
    mesh: &TriangleMesh<T>,
    n_pairs: usize,
    bins: usize,
    seed: u64,
) -> Result<D2Histogram<T>> {
    d2_from_points(mesh.vertices(), n_pairs, bins, seed)
}

/// D2 histogram over `n_pairs` distinct-index pairs drawn uniformly from
/// `points`, binned on `[0, 3·mean]` (values beyond clamp into the last bin).
pub fn d2_from_points<T: Real>(
    points: &[Vec3<T>],
    n_pairs: usize,
    bins: usize,
    seed: u64,
) -> Result<D2Histogram<T>> {
    let n = points.len();
    if n < 2 {
        return Err(Error::Degenerate(format!(
            "D2 needs at least two vertices, mesh has {n}"
        )));
    }
    if n_pairs == 0 || bins == 0 {
        return Err(Error::arg("D2 needs at least one pair and one bin"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let distances: Vec<T> = (0..n_pairs)
        .map(|_| {
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            (points[i] - points[j]).norm()
        })
        .collect();
    let mean = distances.iter().fold(T::zero(), |a, &d| a + d) / T::from_count(n_pairs);
    if !(mean > T::zero()) {
        return Err(Error::Degenerate("all sampled points coincide".into()));
    }
    let mut counts = vec![0usize; bins];
    let scale = T::from_count(bins) / T::lit(D2_RANGE);
    for d in distances {
        let idx = ((d / mean) * scale).floor().as_f64() as usize;
        counts[idx.min(bins - 1)] += 1;
    }
    let total = T::from_count(n_pairs);
    Ok(D2Histogram {
        frequencies: counts.into_iter().map(|c| T::from_count(c) / total).collect(),
        mean_distance: mean,
    })
}
