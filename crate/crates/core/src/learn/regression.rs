use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::rows_to_matrix;
use crate::error::{Error, Result};
use crate::num::Real;

/// Linear model `y = β₀ + β₁x₁ + … + βₙxₙ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RegressionModel<T: Real> {
    /// `β₀..βₙ`.
    pub coefficients: Vec<T>,
    /// `(1/m) Σ ε²` on the training data.
    pub mse: T,
    pub m: usize,
    pub n: usize,
    pub rank: usize,
    /// Underdetermined or rank-deficient fit; the minimum-norm solution was used.
    pub minimum_norm: bool,
    pub ridge: T,
}

impl<T: Real> RegressionModel<T> {
    pub fn intercept(&self) -> T {
        self.coefficients[0]
    }

    pub fn slopes(&self) -> &[T] {
        &self.coefficients[1..]
    }

    pub fn predict(&self, x: &[T]) -> Result<T> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(self.slopes().iter().zip(x).fold(self.intercept(), |s, (&b, &v)| s + b * v))
    }
}

/// Least-squares fit through an SVD of the centred design. The intercept is
/// recovered from the means, so a constant response gives zero slopes. A
/// positive `ridge` adds `λ‖β₁..ₙ‖²` to the objective.
pub fn mvr_fit<T: Real>(x: &[Vec<T>], y: &[T], ridge: T) -> Result<RegressionModel<T>> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::arg("regression needs at least two samples"));
    }
    if y.iter().any(|v| !v.is_finite_val()) || !ridge.is_finite_val() || ridge < T::zero() {
        return Err(Error::arg("non-finite response or invalid ridge"));
    }
    let data = rows_to_matrix(x)?;
    let (m, n) = data.shape();
    let mf = T::from_count(m);
    let xm: DVector<T> = data.row_sum().transpose() / mf;
    let ym = y.iter().fold(T::zero(), |s, &v| s + v) / mf;
    let mut xc = data.clone();
    for mut row in xc.row_iter_mut() {
        row -= xm.transpose();
    }
    let yc = DVector::from_iterator(m, y.iter().map(|&v| v - ym));

    let svd = xc.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(T::zero(), |a, &s| a.max(s));
    let tol = T::from_count(m.max(n)) * T::default_epsilon() * smax;
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let uty = u.transpose() * &yc;
    let mut coef = DVector::zeros(svd.singular_values.len());
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if ridge > T::zero() {
            coef[i] = s * uty[i] / (s * s + ridge);
        } else if s > tol {
            coef[i] = uty[i] / s;
        }
    }
    let beta: DVector<T> = vt.transpose() * coef;
    let intercept = ym - xm.dot(&beta);

    let resid = DVector::from_iterator(m, y.iter().copied()) - (&data * &beta).add_scalar(intercept);
    let mse = resid.norm_squared() / mf;
    let mut coefficients = Vec::with_capacity(n + 1);
    coefficients.push(intercept);
    coefficients.extend(beta.iter().copied());
    if coefficients.iter().any(|c| !c.is_finite_val()) {
        return Err(Error::Degenerate("regression produced non-finite coefficients".into()));
    }
    Ok(RegressionModel {
        coefficients,
        mse,
        m,
        n,
        rank,
        minimum_norm: m <= n + 1 || rank < n,
        ridge,
    })
}

/// Residuals `y − ŷ` of `model` on `x`.
pub fn residuals<T: Real>(model: &RegressionModel<T>, x: &[Vec<T>], y: &[T]) -> Result<Vec<T>> {
    x.iter().zip(y).map(|(r, &v)| Ok(v - model.predict(r)?)).collect()
}


#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_line() {
        let x: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (0..5).map(|i| 2.0 + 3.0 * i as f64).collect();
        let m = mvr_fit(&x, &y, 0.0).unwrap();
        assert!((m.intercept() - 2.0).abs() < 1e-9 && (m.slopes()[0] - 3.0).abs() < 1e-9);
        assert!(m.mse < 1e-9);
        assert!(!m.minimum_norm);
        let b = RegressionModel { coefficients: vec![2.0, 3.0], mse: 0.0, m: 0, n: 1, rank: 1, minimum_norm: false, ridge: 0.0 };
        assert_eq!(b.predict(&[4.0]).unwrap(), 14.0);
        assert!(b.predict(&[4.0, 1.0]).is_err());
    }

    #[test]
    fn constant_response() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x: Vec<Vec<f64>> = (0..8).map(|_| (0..20).map(|_| rng.random()).collect()).collect();
        let m = mvr_fit(&x, &[42.0; 8], 0.0).unwrap();
        assert!((m.intercept() - 42.0).abs() < 1e-12);
        assert!(m.slopes().iter().all(|&b| b == 0.0));
        assert!(m.minimum_norm);
    }

    #[test]
    fn planted_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let beta: Vec<f64> = (0..21).map(|_| rng.random_range(-5.0..5.0)).collect();
        let x: Vec<Vec<f64>> = (0..31).map(|_| (0..20).map(|_| rng.random()).collect()).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|r| beta[0] + r.iter().zip(&beta[1..]).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        let m = mvr_fit(&x, &y, 0.0).unwrap();
        for (a, b) in m.coefficients.iter().zip(&beta) {
            assert!((a - b).abs() < 1e-6);
        }
        let probe: Vec<f64> = (0..20).map(|i| i as f64 * 0.05).collect();
        let truth = beta[0] + probe.iter().zip(&beta[1..]).map(|(a, b)| a * b).sum::<f64>();
        assert!((m.predict(&probe).unwrap() - truth).abs() < 1e-6);
    }

    #[test]
    fn ridge_shrinks() {
        let x: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (0..6).map(|i| 3.0 * i as f64).collect();
        let m = mvr_fit(&x, &y, 10.0).unwrap();
        assert!(m.slopes()[0] > 0.0 && m.slopes()[0] < 3.0);
        assert!(mvr_fit(&x, &y, -1.0).is_err());
        assert!(mvr_fit(&x, &[f64::NAN; 6], 0.0).is_err());
    }
}
