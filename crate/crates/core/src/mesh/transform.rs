//! Similarity transforms `v ↦ s·R·v + t`.

use nalgebra::{Matrix3, Rotation3, Unit};

use super::{TriangleMesh, Vec3};
use crate::error::{Error, Result};
use crate::num::Real;

/// Tolerance on `RᵀR − I` and on `det R − 1`.
pub const ORTHONORMAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform<T: Real> {
    rotation: Matrix3<T>,
    translation: Vec3<T>,
    scale: T,
}

impl<T: Real> RigidTransform<T> {
    pub fn new(rotation: Matrix3<T>, translation: Vec3<T>, scale: T) -> Result<Self> {
        let residual = (rotation.transpose() * rotation - Matrix3::identity()).abs().max();
        if residual > T::lit(ORTHONORMAL_TOL) {
            return Err(Error::arg(format!(
                "rotation is not orthonormal (max |RᵀR − I| = {residual})"
            )));
        }
        if (rotation.determinant() - T::one()).abs() > T::lit(ORTHONORMAL_TOL) {
            return Err(Error::arg("rotation has determinant -1 (reflection)"));
        }
        if !(scale > T::zero()) {
            return Err(Error::arg(format!("scale must be positive, got {scale}")));
        }
        Ok(Self {
            rotation,
            translation,
            scale,
        })
    }

    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vec3::zeros(),
            scale: T::one(),
        }
    }

    /// Rotation by `angle` radians about `axis` (right-hand rule).
    pub fn rotation(axis: Vec3<T>, angle: T) -> Self {
        let r = Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle);
        Self {
            rotation: r.into_inner(),
            translation: Vec3::zeros(),
            scale: T::one(),
        }
    }

    pub fn with_translation(mut self, t: Vec3<T>) -> Self {
        self.translation = t;
        self
    }

    pub fn with_scale(mut self, s: T) -> Self {
        self.scale = s;
        self
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn apply_point(&self, p: &Vec3<T>) -> Vec3<T> {
        self.rotation * p * self.scale + self.translation
    }

    pub fn apply_vector(&self, v: &Vec3<T>) -> Vec3<T> {
        self.rotation * v
    }
}

/// Applies `t` to every vertex; faces are unchanged and normals follow the rotation.
pub fn rigid_transform<T: Real>(
    mesh: &TriangleMesh<T>,
    t: &RigidTransform<T>,
) -> Result<TriangleMesh<T>> {
    let vertices = mesh.vertices().iter().map(|v| t.apply_point(v)).collect();
    mesh.with_vertices(vertices)
}
