use std::collections::HashMap;

use rayon::prelude::*;

use super::tables::{EDGE_TABLE, TRI_TABLE};
use super::ScalarVolume;
use crate::error::Result;
use crate::mesh::{TriangleMesh, Vec3, MIN_FACE_AREA};
use crate::num::Real;

const CORNERS: [[usize; 3]; 8] = [
    [0, 0, 0],
    [1, 0, 0],
    [1, 1, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 0, 1],
    [1, 1, 1],
    [0, 1, 1],
];

const EDGES: [(usize, usize); 12] = [
    (0, 1),
    (1, 2),
    (2, 3),
    (3, 0),
    (4, 5),
    (5, 6),
    (6, 7),
    (7, 4),
    (0, 4),
    (1, 5),
    (2, 6),
    (3, 7),
];

/// Interpolation parameter is kept this far from the grid points so that
/// crossings never collapse onto a shared corner.
const T_MARGIN: f64 = 1e-4;

/// Grid edge identity: lower grid point index and axis.
type EdgeKey = (usize, u8);

/// Marching-cubes isosurface at `iso` with linear interpolation along cell
/// edges. Vertices are welded per grid edge and placed in physical
/// coordinates. Faces are wound so normals point toward increasing values.
/// Returns an empty mesh when `iso` is not crossed.
pub fn extract_isosurface<T: Real>(volume: &ScalarVolume<T>, iso: T) -> Result<TriangleMesh<T>> {
    let (lo, hi) = volume.min_max();
    if iso < lo || iso > hi {
        return TriangleMesh::new(Vec::new(), Vec::new());
    }
    let [nx, ny, nz] = volume.dims();
    let slabs: Vec<Vec<[(EdgeKey, Vec3<T>); 3]>> = (0..nz - 1)
        .into_par_iter()
        .map(|k| {
            let mut tris = Vec::new();
            for j in 0..ny - 1 {
                for i in 0..nx - 1 {
                    march_cell(volume, iso, [i, j, k], &mut tris);
                }
            }
            tris
        })
        .collect();

    let mut index: HashMap<EdgeKey, usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let min_area = T::lit(MIN_FACE_AREA);
    for tri in slabs.into_iter().flatten() {
        let ids = tri.map(|(key, pos)| {
            *index.entry(key).or_insert_with(|| {
                vertices.push(pos);
                vertices.len() - 1
            })
        });
        let area = (vertices[ids[1]] - vertices[ids[0]])
            .cross(&(vertices[ids[2]] - vertices[ids[0]]))
            .norm()
            * T::lit(0.5);
        if area > min_area {
            faces.push(ids);
        }
    }
    TriangleMesh::new(vertices, faces)
}

fn march_cell<T: Real>(
    volume: &ScalarVolume<T>,
    iso: T,
    [i, j, k]: [usize; 3],
    out: &mut Vec<[(EdgeKey, Vec3<T>); 3]>,
) {
    let corner = |c: usize| {
        let o = CORNERS[c];
        [i + o[0], j + o[1], k + o[2]]
    };
    let values: [T; 8] = std::array::from_fn(|c| {
        let [a, b, d] = corner(c);
        volume.get(a, b, d)
    });
    let case = (0..8).fold(0usize, |acc, c| acc | (((values[c] < iso) as usize) << c));
    if EDGE_TABLE[case] == 0 {
        return;
    }
    let crossing = |e: usize| -> (EdgeKey, Vec3<T>) {
        let (a, b) = EDGES[e];
        let (pa, pb) = (corner(a), corner(b));
        let axis = (0..3).find(|&d| pa[d] != pb[d]).expect("edge spans one axis");
        let low = if pa[axis] < pb[axis] { pa } else { pb };
        let key = (volume.index(low[0], low[1], low[2]), axis as u8);
        let (va, vb) = (values[a], values[b]);
        let margin = T::lit(T_MARGIN);
        let t = ((iso - va) / (vb - va)).clamp(margin, T::one() - margin);
        let xa = volume.position(pa[0], pa[1], pa[2]);
        let xb = volume.position(pb[0], pb[1], pb[2]);
        let p = Vec3::new(
            xa[0] + t * (xb[0] - xa[0]),
            xa[1] + t * (xb[1] - xa[1]),
            xa[2] + t * (xb[2] - xa[2]),
        );
        (key, p)
    };
    for tri in TRI_TABLE[case].chunks(3) {
        if tri[0] < 0 {
            break;
        }
        // table winding faces the low side; reverse it to face increasing values
        out.push([
            crossing(tri[0] as usize),
            crossing(tri[2] as usize),
            crossing(tri[1] as usize),
        ]);
    }
}
