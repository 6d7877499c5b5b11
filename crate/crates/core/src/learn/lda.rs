use nalgebra::{DMatrix, DVector};

use super::metrics::Label;
use super::rows_to_matrix;
use crate::error::{Error, Result};
use crate::num::Real;

/// Relative ridge added to a singular within-class scatter.
pub const RIDGE_FACTOR: f64 = 1e-6;

/// Two-class Fisher discriminant reduced to a single projection direction.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaModel<T: Real> {
    pub mean_diseased: DVector<T>,
    pub mean_normal: DVector<T>,
    pub mean: DVector<T>,
    pub within_scatter: DMatrix<T>,
    pub between_scatter: DMatrix<T>,
    /// Unit projection direction; diseased samples project toward positive values.
    pub direction: DVector<T>,
    pub epsilon: T,
}

impl<T: Real> LdaModel<T> {
    pub fn dim(&self) -> usize {
        self.direction.len()
    }

    /// `wᵀ(x − μ)`.
    pub fn project(&self, x: &[T]) -> Result<T> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(x.iter()
            .zip(self.mean.iter().zip(self.direction.iter()))
            .fold(T::zero(), |s, (&v, (&m, &w))| s + (v - m) * w))
    }
}

fn is_singular<T: Real>(s: &DMatrix<T>) -> bool {
    let eig = s.clone().symmetric_eigen();
    let max = eig.eigenvalues.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
    let min = eig.eigenvalues.iter().fold(max, |m, &v| m.min(v));
    let tol = T::from_count(s.nrows()) * T::default_epsilon() * max;
    !(min > tol)
}

pub fn lda_fit<T: Real>(x: &[Vec<T>], labels: &[Label]) -> Result<LdaModel<T>> {
    if x.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: labels.len(),
        });
    }
    if x.len() < 3 {
        return Err(Error::arg("LDA needs at least three samples"));
    }
    let data = rows_to_matrix(x)?;
    let (m, d) = data.shape();
    let class_mean = |l: Label| -> Result<(DVector<T>, usize)> {
        let rows: Vec<usize> = (0..m).filter(|&i| labels[i] == l).collect();
        if rows.is_empty() {
            return Err(Error::arg(format!("LDA input has no {l} samples")));
        }
        let mut mu = DVector::zeros(d);
        for &i in &rows {
            mu += data.row(i).transpose();
        }
        Ok((mu / T::from_count(rows.len()), rows.len()))
    };
    let (mu_d, _) = class_mean(Label::Diseased)?;
    let (mu_n, _) = class_mean(Label::Normal)?;
    let mean = data.row_sum().transpose() / T::from_count(m);

    let mut sw = DMatrix::zeros(d, d);
    for i in 0..m {
        let mu = if labels[i] == Label::Diseased { &mu_d } else { &mu_n };
        let c = data.row(i).transpose() - mu;
        sw += &c * c.transpose();
    }
    sw = (&sw + sw.transpose()) * T::lit(0.5);
    let mut sb = DMatrix::zeros(d, d);
    for mu in [&mu_d, &mu_n] {
        let c = mu - &mean;
        sb += &c * c.transpose();
    }

    let diff = &mu_d - &mu_n;
    if !(diff.norm() > T::zero()) {
        return Err(Error::Degenerate(
            "class means coincide; no discriminant direction".into(),
        ));
    }
    let epsilon = if m <= d || is_singular(&sw) {
        let tr = sw.trace();
        let scaled = T::lit(RIDGE_FACTOR) * tr / T::from_count(d);
        if scaled > T::zero() { scaled } else { T::lit(RIDGE_FACTOR) }
    } else {
        T::zero()
    };
    let reg = &sw + DMatrix::identity(d, d) * epsilon;
    let w = reg
        .cholesky()
        .ok_or_else(|| Error::Degenerate("regularized within-class scatter is not positive definite".into()))?
        .solve(&diff);
    let norm = w.norm();
    if !(norm > T::zero()) || !norm.is_finite_val() {
        return Err(Error::Degenerate("discriminant direction vanished".into()));
    }
    Ok(LdaModel {
        mean_diseased: mu_d,
        mean_normal: mu_n,
        mean,
        within_scatter: sw,
        between_scatter: sb,
        direction: w / norm,
        epsilon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lab(n: usize, d: usize) -> Vec<Label> {
        let mut l = vec![Label::Normal; n];
        l.extend(vec![Label::Diseased; d]);
        l
    }

    #[test]
    fn one_dimensional_margin() {
        let x = vec![vec![0.0f64], vec![1.0], vec![10.0], vec![11.0]];
        let m = lda_fit(&x, &lab(2, 2)).unwrap();
        let p: Vec<f64> = x.iter().map(|v| m.project(v).unwrap()).collect();
        assert!(p[0].max(p[1]) < p[2].min(p[3]));
        assert_eq!(m.epsilon, 0.0);
        assert_eq!(m.project(&[5.5]).unwrap(), 0.0);
        assert!((m.project(&[6.5]).unwrap() - 1.0).abs() < 1e-12);
        assert!(m.project(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn identical_means_error() {
        let x = vec![vec![0.0f64], vec![1.0], vec![0.0], vec![1.0]];
        assert!(lda_fit(&x, &lab(2, 2)).is_err());
        assert!(lda_fit(&x, &[Label::Normal; 4]).is_err());
    }

    #[test]
    fn high_dimensional_ridge() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let labels = lab(16, 16);
        let x: Vec<Vec<f64>> = labels
            .iter()
            .map(|l| {
                let off = if l.is_diseased() { 1.0 } else { 0.0 };
                (0..340).map(|_| off + rng.random_range(-0.3..0.3)).collect()
            })
            .collect();
        let m = lda_fit(&x, &labels).unwrap();
        assert!(m.epsilon > 0.0);
        assert!((m.direction.norm() - 1.0).abs() < 1e-12);
        let sym = (&m.within_scatter - m.within_scatter.transpose()).abs().max();
        assert!(sym < 1e-9);
        for (v, l) in x.iter().zip(&labels) {
            assert_eq!(m.project(v).unwrap() > 0.0, l.is_diseased());
        }
    }
}
