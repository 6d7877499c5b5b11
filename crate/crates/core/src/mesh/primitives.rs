//! Analytic test surfaces: icospheres, tori, planar grids and bendable sheets.

use std::collections::HashMap;

use super::{TriangleMesh, Vec3};
use crate::num::Real;

/// Subdivided icosahedron projected onto a sphere; `10·4^s + 2` vertices.
pub fn icosphere<T: Real>(radius: T, subdivisions: u32) -> TriangleMesh<T> {
    let (vertices, faces) = unit_icosphere(subdivisions);
    let vertices = vertices.into_iter().map(|v| v * radius).collect();
    TriangleMesh::new(vertices, faces).expect("icosphere is valid")
}

pub(crate) fn unit_icosphere<T: Real>(subdivisions: u32) -> (Vec<Vec3<T>>, Vec<[usize; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let mut vertices: Vec<Vec3<T>> = raw
        .iter()
        .map(|p| Vec3::new(T::lit(p[0]), T::lit(p[1]), T::lit(p[2])).normalize())
        .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Vec3<T>>| {
            let key = if a < b { (a, b) } else { (b, a) };
            *cache.entry(key).or_insert_with(|| {
                vertices.push(((vertices[a] + vertices[b]) * T::lit(0.5)).normalize());
                vertices.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    (vertices, faces)
}

/// Torus around the z axis with major radius `major` and tube radius `minor`.
/// `u_steps` samples the ring angle, `v_steps` the tube angle (v = 0 is the
/// outer equator).
pub fn torus<T: Real>(major: T, minor: T, u_steps: usize, v_steps: usize) -> TriangleMesh<T> {
    let tau = T::two_pi();
    let mut vertices = Vec::with_capacity(u_steps * v_steps);
    for i in 0..u_steps {
        let phi = tau * T::from_count(i) / T::from_count(u_steps);
        for j in 0..v_steps {
            let theta = tau * T::from_count(j) / T::from_count(v_steps);
            let ring = major + minor * theta.cos();
            vertices.push(Vec3::new(
                ring * phi.cos(),
                ring * phi.sin(),
                minor * theta.sin(),
            ));
        }
    }
    let idx = |i: usize, j: usize| (i % u_steps) * v_steps + (j % v_steps);
    let mut faces = Vec::with_capacity(2 * u_steps * v_steps);
    for i in 0..u_steps {
        for j in 0..v_steps {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    TriangleMesh::new(vertices, faces).expect("torus is valid")
}

/// Planar `nx × ny` vertex grid in the z = 0 plane with normals along +z.
pub fn grid<T: Real>(nx: usize, ny: usize, spacing: T) -> TriangleMesh<T> {
    sheet(nx, ny, spacing, None)
}

/// Rectangular sheet of `nx × ny` vertices with spacing `spacing`, optionally
/// rolled around a cylinder of radius `bend_radius` whose axis is parallel to
/// y. Bending is an isometry of the continuous sheet, so the flat and bent
/// versions share intrinsic geometry up to chord effects.
pub fn sheet<T: Real>(nx: usize, ny: usize, spacing: T, bend_radius: Option<T>) -> TriangleMesh<T> {
    assert!(nx >= 2 && ny >= 2, "sheet needs at least 2x2 vertices");
    let mut vertices = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let x = spacing * T::from_count(i);
            let y = spacing * T::from_count(j);
            let p = match bend_radius {
                None => Vec3::new(x, y, T::zero()),
                Some(r) => {
                    let angle = x / r;
                    Vec3::new(r * angle.sin(), y, r * (T::one() - angle.cos()))
                }
            };
            vertices.push(p);
        }
    }
    let mut faces = Vec::with_capacity(2 * (nx - 1) * (ny - 1));
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let a = j * nx + i;
            let b = a + 1;
            let c = a + nx + 1;
            let d = a + nx;
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    TriangleMesh::new(vertices, faces).expect("sheet is valid")
}
