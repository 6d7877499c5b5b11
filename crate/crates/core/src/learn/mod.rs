//! Classifiers, regression and leave-one-out evaluation.

pub mod knn;
pub mod lda;
pub mod loo;
pub mod metrics;
pub mod mlp;
pub mod regression;
pub mod stats;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use knn::knn_classify;
pub use lda::{lda_fit, LdaModel};
pub use loo::{loo_classify, loo_regress, ClassificationOutcome, RegressionOutcome};
pub use metrics::{
    binarize_ds, binarize_ds_at, truncated_decimal, ConfusionMatrix, ConfusionSummary, Label, RateReport, DS_THRESHOLD,
};
pub use mlp::{mlp_train, MlpModel, MlpParams};
pub use regression::{mvr_fit, RegressionModel};
pub use stats::pearson_correlation;

use crate::error::{Error, Result};
use crate::num::Real;

pub(crate) fn rows_to_matrix<T: Real>(rows: &[Vec<T>]) -> Result<DMatrix<T>> {
    let d = rows.first().map(Vec::len).ok_or_else(|| Error::arg("empty design matrix"))?;
    if d == 0 {
        return Err(Error::arg("zero-dimensional samples"));
    }
    for r in rows {
        if r.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: r.len() });
        }
        if r.iter().any(|v| !v.is_finite_val()) {
            return Err(Error::arg("non-finite sample value"));
        }
    }
    Ok(DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum Classifier {
    /// Fisher projection followed by k-NN on the projected scalar.
    LdaKnn { k: usize },
    Mlp(MlpParams),
}

impl Default for Classifier {
    fn default() -> Self {
        Classifier::LdaKnn { k: 1 }
    }
}

impl Classifier {
    /// Trains on `(x, labels)` and labels every query.
    pub fn fit_predict<T: Real>(&self, x: &[Vec<T>], labels: &[Label], queries: &[Vec<T>]) -> Result<Vec<Label>> {
        match self {
            Classifier::LdaKnn { k } => {
                let model = lda_fit(x, labels)?;
                let train: Vec<T> = x.iter().map(|r| model.project(r)).collect::<Result<_>>()?;
                queries
                    .iter()
                    .map(|q| knn_classify(&train, labels, model.project(q)?, *k))
                    .collect()
            }
            Classifier::Mlp(params) => {
                let model = mlp_train(x, labels, params)?;
                queries.iter().map(|q| Ok(model.predict(q)?.1)).collect()
            }
        }
    }
}

/// Leave-one-out evaluation of `classifier` on fixed feature vectors.
pub fn loo_vectors<T: Real>(classifier: &Classifier, x: &[Vec<T>], labels: &[Label]) -> Result<ClassificationOutcome> {
    if x.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: labels.len() });
    }
    loo_classify(labels, |train, test| {
        let tx: Vec<Vec<T>> = train.iter().map(|&i| x[i].clone()).collect();
        let ty: Vec<Label> = train.iter().map(|&i| labels[i]).collect();
        Ok(classifier.fit_predict(&tx, &ty, std::slice::from_ref(&x[test]))?[0])
    })
}
