use crate::error::{Error, Result};
use crate::mesh::Vec3;
use crate::num::Real;

/// Allowed deviation of a normal from unit length.
pub const UNIT_TOLERANCE: f64 = 1e-6;

/// Shape index `1/2 − (1/π)·atan((κ1 + κ2)/(κ1 − κ2))` ∈ [0, 1].
///
/// Umbilic points take the one-sided limit: 0 for κ > 0 (cap), 1 for κ < 0
/// (cup). Planar points (κ1 = κ2 = 0) map to 0.5.
pub fn shape_index<T: Real>(k1: T, k2: T) -> Result<T> {
    if k1 < k2 {
        return Err(Error::arg(format!(
            "shape index needs k1 >= k2, got k1 = {k1}, k2 = {k2}"
        )));
    }
    let half = T::lit(0.5);
    if k1 == k2 {
        return Ok(if k1 > T::zero() {
            T::zero()
        } else if k1 < T::zero() {
            T::one()
        } else {
            half
        });
    }
    Ok(half - ((k1 + k2) / (k1 - k2)).atan() / T::pi())
}

/// Root-mean-square of the principal curvatures.
pub fn curvedness<T: Real>(k1: T, k2: T) -> T {
    ((k1 * k1 + k2 * k2) * T::lit(0.5)).sqrt()
}

/// Unsigned angle between a unit normal and the XZ plane: `asin(|n_y|)`.
pub fn normal_orientation<T: Real>(n: &Vec3<T>) -> Result<T> {
    let len = n.norm();
    if !((len - T::one()).abs() <= T::lit(UNIT_TOLERANCE)) {
        return Err(Error::arg(format!("normal must be unit length, |n| = {len}")));
    }
    Ok(n.y.abs().min(T::one()).asin())
}
