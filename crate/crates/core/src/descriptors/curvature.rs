use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::{TriangleMesh, Vec3};
use crate::num::Real;

/// Minimum neighbourhood size for the five-parameter height fit.
pub const MIN_NEIGHBORS: usize = 5;

/// Per-vertex principal curvatures (1/mm), `k1 >= k2`, positive where the
/// surface bends away from its outward normal (a sphere has `+1/r`).
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureField<T: Real> {
    pub k1: Vec<T>,
    pub k2: Vec<T>,
    pub valid: Vec<bool>,
}

impl<T: Real> CurvatureField<T> {
    pub fn len(&self) -> usize {
        self.k1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k1.is_empty()
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }
}

/// Vertices within `depth` edges of `v`, excluding `v`.
pub fn k_ring(neighbors: &[Vec<usize>], v: usize, depth: usize) -> Vec<usize> {
    let mut seen = vec![v];
    let mut out = Vec::new();
    let mut frontier = VecDeque::from([(v, 0usize)]);
    while let Some((u, d)) = frontier.pop_front() {
        if d == depth {
            continue;
        }
        for &w in &neighbors[u] {
            if !seen.contains(&w) {
                seen.push(w);
                out.push(w);
                frontier.push_back((w, d + 1));
            }
        }
    }
    out
}

/// Orthonormal tangent basis for a unit normal.
pub(crate) fn tangent_frame<T: Real>(n: &Vec3<T>) -> (Vec3<T>, Vec3<T>) {
    let helper = if n.x.abs() < T::lit(0.9) { Vec3::x() } else { Vec3::y() };
    let u = helper.cross(n).normalize();
    let v = n.cross(&u);
    (u, v)
}

/// Principal curvatures by least-squares fitting the height function
/// `h = a·u² + b·uv + c·v² + d·u + e·v` over the `ring_depth`-ring of every
/// vertex, in the tangent frame of its normal. The linear terms absorb small
/// normal errors; with `d = e = 0` the shape operator reduces to
/// `[[2a, b], [b, 2c]]`.
pub fn estimate_curvatures<T: Real>(mesh: &TriangleMesh<T>, ring_depth: usize) -> Result<CurvatureField<T>> {
    if ring_depth == 0 {
        return Err(Error::arg("ring depth must be >= 1"));
    }
    let neighbors = mesh.vertex_neighbors();
    let fits: Vec<Option<(T, T)>> = (0..mesh.vertex_count())
        .into_par_iter()
        .map(|v| {
            let ring = k_ring(&neighbors, v, ring_depth);
            fit_vertex(mesh.vertices()[v], mesh.normals()[v], ring.iter().map(|&w| mesh.vertices()[w]))
        })
        .collect();
    let mut field = CurvatureField {
        k1: Vec::with_capacity(fits.len()),
        k2: Vec::with_capacity(fits.len()),
        valid: Vec::with_capacity(fits.len()),
    };
    for fit in fits {
        let (k1, k2, ok) = match fit {
            Some((a, b)) => (a, b, true),
            None => (T::zero(), T::zero(), false),
        };
        field.k1.push(k1);
        field.k2.push(k2);
        field.valid.push(ok);
    }
    Ok(field)
}

fn fit_vertex<T: Real>(
    p: Vec3<T>,
    n: Vec3<T>,
    ring: impl ExactSizeIterator<Item = Vec3<T>>,
) -> Option<(T, T)> {
    let m = ring.len();
    if m < MIN_NEIGHBORS {
        return None;
    }
    let (tu, tv) = tangent_frame(&n);
    let mut a = DMatrix::<T>::zeros(m, 5);
    let mut h = DVector::<T>::zeros(m);
    let mut scale = T::zero();
    for (row, q) in ring.enumerate() {
        let d = q - p;
        let (x, y) = (d.dot(&tu), d.dot(&tv));
        scale = scale.max(x.abs()).max(y.abs());
        a[(row, 0)] = x * x;
        a[(row, 1)] = x * y;
        a[(row, 2)] = y * y;
        a[(row, 3)] = x;
        a[(row, 4)] = y;
        h[row] = d.dot(&n);
    }
    if !(scale > T::zero()) {
        return None;
    }
    // column scaling keeps the system well conditioned at any mesh size
    let s2 = scale * scale;
    for row in 0..m {
        a[(row, 0)] /= s2;
        a[(row, 1)] /= s2;
        a[(row, 2)] /= s2;
        a[(row, 3)] /= scale;
        a[(row, 4)] /= scale;
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > smax * T::lit(1e-8)) {
        return None;
    }
    let coef = svd.solve(&h, T::zero()).ok()?;
    let (ca, cb, cc) = (coef[0] / s2, coef[1] / s2, coef[2] / s2);
    let (cd, ce) = (coef[3] / scale, coef[4] / scale);

    let e = T::one() + cd * cd;
    let f = cd * ce;
    let g = T::one() + ce * ce;
    let w = (T::one() + cd * cd + ce * ce).sqrt();
    let l = T::lit(2.0) * ca / w;
    let mm = cb / w;
    let nn = T::lit(2.0) * cc / w;
    let det_i = e * g - f * f;
    let gauss = (l * nn - mm * mm) / det_i;
    let mean = (e * nn - T::lit(2.0) * f * mm + g * l) / (T::lit(2.0) * det_i);
    let disc = (mean * mean - gauss).max(T::zero()).sqrt();
    // the height is measured along the outward normal, so convex regions have
    // negative second derivatives; flip to make them positive
    let k1 = -(mean - disc);
    let k2 = -(mean + disc);
    if !(k1.is_finite_val() && k2.is_finite_val()) {
        return None;
    }
    Some((k1, k2))
}
