use super::metrics::Label;
use crate::error::{Error, Result};
use crate::num::Real;

/// Majority label among the `k` training scalars closest to `query`.
/// Distance ties go to the lower training index; `k` must be odd.
pub fn knn_classify<T: Real>(train: &[T], labels: &[Label], query: T, k: usize) -> Result<Label> {
    if train.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: train.len(),
            got: labels.len(),
        });
    }
    if k == 0 || k % 2 == 0 {
        return Err(Error::arg(format!("k = {k} must be odd")));
    }
    if k > train.len() {
        return Err(Error::arg(format!(
            "k = {k} exceeds the {} training samples",
            train.len()
        )));
    }
    let mut order: Vec<(T, usize)> = train.iter().map(|&t| (t - query).abs()).zip(0..).collect();
    order.sort_by(|a, b| a.0.total_cmp_val(&b.0).then(a.1.cmp(&b.1)));
    let diseased = order[..k].iter().filter(|&&(_, i)| labels[i].is_diseased()).count();
    Ok(Label::from_diseased(2 * diseased > k))
}
