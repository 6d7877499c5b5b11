use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::Label;
use crate::error::{Error, Result};
use crate::num::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub hidden: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for MlpParams {
    fn default() -> Self {
        Self {
            hidden: 10,
            epochs: 2000,
            learning_rate: 0.3,
            seed: 0,
        }
    }
}

/// Single hidden layer perceptron `d → h → 1` with logistic units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct MlpModel<T: Real> {
    pub inputs: usize,
    pub hidden: usize,
    /// Row-major `h × d`.
    pub w1: Vec<T>,
    pub b1: Vec<T>,
    pub w2: Vec<T>,
    pub b2: T,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Training loss before each update.
    pub loss_history: Vec<T>,
}

fn logistic<T: Real>(z: T) -> T {
    T::one() / (T::one() + (-z).exp())
}

impl<T: Real> MlpModel<T> {
    pub fn zeros(inputs: usize, hidden: usize) -> Self {
        Self {
            inputs,
            hidden,
            w1: vec![T::zero(); inputs * hidden],
            b1: vec![T::zero(); hidden],
            w2: vec![T::zero(); hidden],
            b2: T::zero(),
            learning_rate: 0.3,
            epochs: 0,
            seed: 0,
            loss_history: Vec::new(),
        }
    }

    pub fn param_count(&self) -> usize {
        self.hidden * (self.inputs + 2) + 1
    }

    /// Parameters flattened as `w1, b1, w2, b2`.
    pub fn params(&self) -> Vec<T> {
        let mut p = Vec::with_capacity(self.param_count());
        p.extend_from_slice(&self.w1);
        p.extend_from_slice(&self.b1);
        p.extend_from_slice(&self.w2);
        p.push(self.b2);
        p
    }

    pub fn set_params(&mut self, p: &[T]) -> Result<()> {
        if p.len() != self.param_count() {
            return Err(Error::DimensionMismatch {
                expected: self.param_count(),
                got: p.len(),
            });
        }
        let (hd, h) = (self.hidden * self.inputs, self.hidden);
        self.w1.copy_from_slice(&p[..hd]);
        self.b1.copy_from_slice(&p[hd..hd + h]);
        self.w2.copy_from_slice(&p[hd + h..hd + 2 * h]);
        self.b2 = p[hd + 2 * h];
        Ok(())
    }

    fn hidden_activations(&self, x: &[T]) -> Vec<T> {
        (0..self.hidden)
            .map(|j| {
                let row = &self.w1[j * self.inputs..(j + 1) * self.inputs];
                let z = row.iter().zip(x).fold(self.b1[j], |s, (&w, &v)| s + w * v);
                logistic(z)
            })
            .collect()
    }

    fn output(&self, a: &[T]) -> T {
        logistic(self.w2.iter().zip(a).fold(self.b2, |s, (&w, &v)| s + w * v))
    }

    /// Output probability of the diseased class and its label at 0.5.
    pub fn predict(&self, x: &[T]) -> Result<(T, Label)> {
        if x.len() != self.inputs {
            return Err(Error::DimensionMismatch {
                expected: self.inputs,
                got: x.len(),
            });
        }
        let y = self.output(&self.hidden_activations(x));
        Ok((y, Label::from_diseased(y >= T::lit(0.5))))
    }

    /// Mean squared error over the batch and its gradient in [`Self::params`] order.
    pub fn loss_and_gradient(&self, x: &[Vec<T>], targets: &[T]) -> (T, Vec<T>) {
        let (d, h) = (self.inputs, self.hidden);
        let m = T::from_count(x.len());
        let mut g = vec![T::zero(); self.param_count()];
        let mut loss = T::zero();
        let two = T::lit(2.0);
        for (xi, &t) in x.iter().zip(targets) {
            let a = self.hidden_activations(xi);
            let y = self.output(&a);
            let e = y - t;
            loss += e * e;
            let delta = two * e * y * (T::one() - y) / m;
            for j in 0..h {
                g[h * d + h + j] += delta * a[j];
                let dh = delta * self.w2[j] * a[j] * (T::one() - a[j]);
                g[h * d + j] += dh;
                for (gk, &v) in g[j * d..(j + 1) * d].iter_mut().zip(xi) {
                    *gk += dh * v;
                }
            }
            g[h * d + 2 * h] += delta;
        }
        (loss / m, g)
    }
}

fn targets<T: Real>(labels: &[Label]) -> Vec<T> {
    labels
        .iter()
        .map(|l| if l.is_diseased() { T::one() } else { T::zero() })
        .collect()
}

/// Full-batch gradient descent on the mean squared error from uniform
/// `[-0.5, 0.5]` initial weights.
pub fn mlp_train<T: Real>(x: &[Vec<T>], labels: &[Label], params: &MlpParams) -> Result<MlpModel<T>> {
    if x.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: labels.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::arg("MLP training needs at least two samples"));
    }
    if params.hidden == 0 {
        return Err(Error::arg("hidden layer width must be at least 1"));
    }
    if !(params.learning_rate > 0.0) {
        return Err(Error::arg("learning rate must be positive"));
    }
    let d = x[0].len();
    if let Some(bad) = x.iter().find(|r| r.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: bad.len() });
    }
    let mut model = MlpModel::zeros(d, params.hidden);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let init: Vec<T> = (0..model.param_count())
        .map(|_| T::lit(rng.random_range(-0.5..=0.5)))
        .collect();
    model.set_params(&init)?;
    model.learning_rate = params.learning_rate;
    model.epochs = params.epochs;
    model.seed = params.seed;

    let t = targets::<T>(labels);
    let lr = T::lit(params.learning_rate);
    let mut p = init;
    for epoch in 0..params.epochs {
        let (loss, g) = model.loss_and_gradient(x, &t);
        if !loss.is_finite_val() || g.iter().any(|v| !v.is_finite_val()) {
            return Err(Error::Diverged { epoch });
        }
        model.loss_history.push(loss);
        p.iter_mut().zip(&g).for_each(|(w, &gi)| *w -= lr * gi);
        model.set_params(&p)?;
    }
    Ok(model)
}
