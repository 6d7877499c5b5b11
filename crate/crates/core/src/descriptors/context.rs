use crate::error::{Error, Result};
use crate::num::Real;

/// Histogram of `distances / normalizer` over `bins` equal bins on [0, 1]
/// (last bin right-closed, larger ratios clamp into it), normalized to sum 1.
pub fn gcd_histogram<T: Real>(distances: &[T], normalizer: T, bins: usize) -> Result<Vec<T>> {
    if bins == 0 {
        return Err(Error::arg("histogram needs at least one bin"));
    }
    if distances.is_empty() {
        return Err(Error::Degenerate("no distances to histogram".into()));
    }
    if let Some(d) = distances.iter().find(|d| !d.is_finite_val() || **d < T::zero()) {
        return Err(Error::arg(format!("distance {d} is not finite and non-negative")));
    }
    if !(normalizer > T::zero()) || distances.iter().all(|&d| d == T::zero()) {
        return Err(Error::Degenerate(
            "all geodesic distances are zero; cannot normalize".into(),
        ));
    }
    let mut counts = vec![0usize; bins];
    let nb = T::from_count(bins);
    for &d in distances {
        let idx = ((d / normalizer) * nb).floor().as_f64() as usize;
        counts[idx.min(bins - 1)] += 1;
    }
    let total = T::from_count(distances.len());
    Ok(counts.into_iter().map(|c| T::from_count(c) / total).collect())
}
