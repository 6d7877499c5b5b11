use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{ConfusionMatrix, Label};
use super::stats::pearson_correlation;
use crate::error::{Error, Result};
use crate::num::Real;

/// Indices of all samples except `held_out`.
pub fn training_indices(m: usize, held_out: usize) -> Vec<usize> {
    (0..m).filter(|&i| i != held_out).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationOutcome {
    pub confusion: ConfusionMatrix,
    /// Held-out prediction per sample; `None` for skipped folds.
    pub predictions: Vec<Option<Label>>,
    /// Folds whose training set held a single class.
    pub skipped: usize,
}

/// Leave-one-out classification. `fold(train, test)` retrains on `train` and
/// predicts sample `test`; folds run in parallel and are gathered in order.
pub fn loo_classify<F>(labels: &[Label], fold: F) -> Result<ClassificationOutcome>
where
    F: Fn(&[usize], usize) -> Result<Label> + Sync,
{
    let m = labels.len();
    if m < 2 {
        return Err(Error::arg("leave-one-out needs at least two samples"));
    }
    let predictions: Vec<Option<Label>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let train = training_indices(m, i);
            let first = labels[train[0]];
            if train.iter().all(|&j| labels[j] == first) {
                return Ok(None);
            }
            fold(&train, i).map(Some)
        })
        .collect::<Result<_>>()?;
    let mut confusion = ConfusionMatrix::default();
    let mut skipped = 0;
    for (p, &a) in predictions.iter().zip(labels) {
        match p {
            Some(p) => confusion.record(a, *p),
            None => skipped += 1,
        }
    }
    Ok(ClassificationOutcome {
        confusion,
        predictions,
        skipped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RegressionOutcome<T: Real> {
    pub estimates: Vec<T>,
    /// Correlation between held-out estimates and targets; `None` when either
    /// side has zero variance.
    pub pearson: Option<T>,
}

/// Leave-one-out regression; `fold(train, test)` returns the estimate of `test`.
pub fn loo_regress<T: Real, F>(targets: &[T], fold: F) -> Result<RegressionOutcome<T>>
where
    F: Fn(&[usize], usize) -> Result<T> + Sync,
{
    let m = targets.len();
    if m < 2 {
        return Err(Error::arg("leave-one-out needs at least two samples"));
    }
    let estimates: Vec<T> = (0..m)
        .into_par_iter()
        .map(|i| fold(&training_indices(m, i), i))
        .collect::<Result<_>>()?;
    let pearson = match pearson_correlation(&estimates, targets) {
        Ok(r) => Some(r),
        Err(Error::Degenerate(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(RegressionOutcome { estimates, pearson })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_class_folds_are_skipped() {
        let labels = [Label::Normal, Label::Normal, Label::Diseased];
        let out = loo_classify(&labels, |_, _| Ok(Label::Normal)).unwrap();
        assert_eq!(out.skipped, 1);
        assert_eq!(out.predictions[2], None);
        assert_eq!(out.confusion.total(), 2);
    }

    #[test]
    fn regression_gathers_in_order() {
        let y = [1.0f64, 2.0, 3.0, 5.0];
        let out = loo_regress(&y, |_, i| Ok(y[i] * 2.0)).unwrap();
        assert_eq!(out.estimates, vec![2.0, 4.0, 6.0, 10.0]);
        assert_eq!(out.pearson, Some(1.0));
    }
}
