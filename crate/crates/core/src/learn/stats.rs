use crate::error::{Error, Result};
use crate::num::Real;

/// Sample Pearson correlation coefficient, clamped to [-1, 1].
pub fn pearson_correlation<T: Real>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::arg("correlation needs at least two pairs"));
    }
    if a.iter().chain(b).any(|v| !v.is_finite_val()) {
        return Err(Error::arg("non-finite value in correlation input"));
    }
    let n = T::from_count(a.len());
    let ma = a.iter().fold(T::zero(), |s, &v| s + v) / n;
    let mb = b.iter().fold(T::zero(), |s, &v| s + v) / n;
    let (mut sab, mut saa, mut sbb) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if !(saa > T::zero()) || !(sbb > T::zero()) {
        return Err(Error::Degenerate("zero variance in correlation input".into()));
    }
    let r = sab / (saa * sbb).sqrt();
    Ok(r.clamp(-T::one(), T::one()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let a = [1.0f64, 2.0, 3.0, 4.0];
        assert!((pearson_correlation(&a, &[1.0, 3.0, 2.0, 4.0]).unwrap() - 0.8).abs() < 1e-15);
        let b: Vec<f64> = a.iter().map(|x| 2.0 * x + 1.0).collect();
        assert_eq!(pearson_correlation(&a, &b).unwrap(), 1.0);
        let c: Vec<f64> = a.iter().map(|x| -x).collect();
        assert_eq!(pearson_correlation(&a, &c).unwrap(), -1.0);
        assert!(pearson_correlation(&a, &[1.0; 4]).is_err());
        assert!(pearson_correlation(&a, &[1.0; 3]).is_err());
    }
}
