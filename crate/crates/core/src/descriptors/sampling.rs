use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::aha::SegmentLabeling;
use crate::error::{Error, Result};

/// Distinct vertex ids drawn from one segment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSet {
    pub segment: u8,
    /// Ascending vertex ids.
    pub vertices: Vec<usize>,
    pub seed: u64,
}

/// Per-segment stream seed so segments sample independently.
pub(crate) fn segment_seed(seed: u64, segment: u8) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ (segment as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform sampling without replacement of `n` vertices from `segment`; the
/// whole segment is returned when it has at most `n` vertices.
pub fn sample_points(labeling: &SegmentLabeling, segment: u8, n: usize, seed: u64) -> Result<SampleSet> {
    let members = labeling.segment_vertices(segment);
    if members.is_empty() {
        return Err(Error::Degenerate(format!("segment {segment} has no vertices")));
    }
    let mut vertices: Vec<usize> = if members.len() <= n {
        members.to_vec()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(segment_seed(seed, segment));
        rand::seq::index::sample(&mut rng, members.len(), n)
            .into_iter()
            .map(|i| members[i])
            .collect()
    };
    vertices.sort_unstable();
    Ok(SampleSet {
        segment,
        vertices,
        seed,
    })
}
