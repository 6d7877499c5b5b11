use rayon::prelude::*;

use crate::error::Result;
use crate::mesh::{TriangleMesh, Vec3};
use crate::num::Real;

/// Two-stage mean-face-normal denoising.
///
/// Stage one replaces every face normal, `normal_iterations` times, by the
/// area-weighted mean of the normals of the face and its edge neighbours.
/// Stage two moves vertices, `vertex_iterations` times, so that incident faces
/// become orthogonal to their filtered normals:
/// `x_i += τ Σ_{f∋i} Σ_{j∈f, j≠i} n_f n_fᵀ (x_j − x_i)` with τ = 1 / (3·max degree).
/// Connectivity is never modified.
pub fn smooth_mesh<T: Real>(
    mesh: &TriangleMesh<T>,
    normal_iterations: usize,
    vertex_iterations: usize,
) -> Result<TriangleMesh<T>> {
    if (normal_iterations == 0 && vertex_iterations == 0) || mesh.face_count() == 0 {
        return Ok(mesh.clone());
    }
    let normals = filtered_face_normals(mesh, normal_iterations);
    if vertex_iterations == 0 {
        return Ok(mesh.clone());
    }
    let faces = mesh.faces();
    let vertex_faces = mesh.vertex_faces();
    let max_degree = mesh
        .vertex_neighbors()
        .iter()
        .map(Vec::len)
        .max()
        .unwrap_or(1)
        .max(1);
    let tau = T::one() / T::from_count(3 * max_degree);
    let mut x = mesh.vertices().to_vec();
    for _ in 0..vertex_iterations {
        x = (0..x.len())
            .into_par_iter()
            .map(|i| {
                let xi = x[i];
                let mut delta = Vec3::zeros();
                for &f in &vertex_faces[i] {
                    let n = normals[f];
                    for &j in &faces[f] {
                        if j != i {
                            delta += n * n.dot(&(x[j] - xi));
                        }
                    }
                }
                xi + delta * tau
            })
            .collect();
    }
    mesh.with_vertices(x)
}

/// Iterated area-weighted mean of face normals over closed edge neighbourhoods.
pub fn filtered_face_normals<T: Real>(mesh: &TriangleMesh<T>, iterations: usize) -> Vec<Vec3<T>> {
    let adjacency = mesh.face_adjacency();
    let areas: Vec<T> = (0..mesh.face_count()).map(|f| mesh.face_area(f)).collect();
    let mut normals: Vec<Vec3<T>> = (0..mesh.face_count()).map(|f| mesh.face_normal(f)).collect();
    for _ in 0..iterations {
        normals = (0..normals.len())
            .into_par_iter()
            .map(|f| {
                let mut acc = normals[f] * areas[f];
                for &g in &adjacency[f] {
                    acc += normals[g] * areas[g];
                }
                let len = acc.norm();
                if len > T::zero() {
                    acc / len
                } else {
                    normals[f]
                }
            })
            .collect();
    }
    normals
}
