use super::curvature::CurvatureField;
use super::scalar::shape_index;
use crate::aha::{SegmentLabeling, SEGMENT_COUNT};
use crate::error::{Error, Result};
use crate::num::Real;

/// Per-segment shape-index histograms on [0, 1], each normalized to sum 1, and
/// concatenated for segments 1..=17 (row-major, `17 × bins` values).
pub fn shape_index_histogram<T: Real>(
    curvature: &CurvatureField<T>,
    labeling: &SegmentLabeling,
    bins: usize,
) -> Result<Vec<T>> {
    if bins == 0 {
        return Err(Error::arg("histogram needs at least one bin"));
    }
    if curvature.len() != labeling.labels().len() {
        return Err(Error::DimensionMismatch {
            expected: labeling.labels().len(),
            got: curvature.len(),
        });
    }
    let mut out = Vec::with_capacity(SEGMENT_COUNT * bins);
    for seg in 1..=SEGMENT_COUNT as u8 {
        let mut counts = vec![0usize; bins];
        let mut total = 0usize;
        for &v in labeling.segment_vertices(seg) {
            if !curvature.valid[v] {
                continue;
            }
            let si = shape_index(curvature.k1[v], curvature.k2[v])?;
            let idx = (si * T::from_count(bins)).floor().as_f64() as usize;
            counts[idx.min(bins - 1)] += 1;
            total += 1;
        }
        if total == 0 {
            return Err(Error::Degenerate(format!(
                "segment {seg} has no vertex with a valid curvature estimate"
            )));
        }
        let t = T::from_count(total);
        out.extend(counts.into_iter().map(|c| T::from_count(c) / t));
    }
    Ok(out)
}
