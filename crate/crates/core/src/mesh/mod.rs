//! Indexed triangle meshes, validation and connectivity queries.

pub mod io;
pub mod phantom;
pub mod primitives;
pub mod transform;

use std::collections::{BTreeMap, VecDeque};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

pub type Vec3<T> = Vector3<T>;

/// Smallest admissible face area (mm²).
pub const MIN_FACE_AREA: f64 = 1e-12;

/// Indexed triangle surface with outward-pointing, area-weighted vertex normals.
///
/// Immutable after construction: every constructor validates indices and face
/// areas, makes face winding consistent and recomputes the normals.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh<T: Real> {
    vertices: Vec<Vec3<T>>,
    faces: Vec<[usize; 3]>,
    normals: Vec<Vec3<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshReport {
    pub vertices: usize,
    pub faces: usize,
    pub edges: usize,
    pub euler_characteristic: i64,
    pub boundary_edges: usize,
    pub non_manifold_edges: usize,
    pub bbox_min: [f64; 3],
    pub bbox_max: [f64; 3],
}

impl<T: Real> TriangleMesh<T> {
    /// Validates the input, orients faces (outward for closed components,
    /// majority winding for open ones) and computes vertex normals.
    pub fn new(vertices: Vec<Vec3<T>>, faces: Vec<[usize; 3]>) -> Result<Self> {
        validate(&vertices, &faces)?;
        let faces = orient_faces(&vertices, faces);
        let normals = vertex_normals(&vertices, &faces);
        Ok(Self {
            vertices,
            faces,
            normals,
        })
    }

    /// Replaces vertex positions, keeping connectivity and winding.
    pub fn with_vertices(&self, vertices: Vec<Vec3<T>>) -> Result<Self> {
        if vertices.len() != self.vertices.len() {
            return Err(Error::DimensionMismatch {
                expected: self.vertices.len(),
                got: vertices.len(),
            });
        }
        validate(&vertices, &self.faces)?;
        let normals = vertex_normals(&vertices, &self.faces);
        Ok(Self {
            vertices,
            faces: self.faces.clone(),
            normals,
        })
    }

    pub fn vertices(&self) -> &[Vec3<T>] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn normals(&self) -> &[Vec3<T>] {
        &self.normals
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    /// Twice-area vector of a face (cross product of two edges).
    pub fn face_cross(&self, f: usize) -> Vec3<T> {
        face_cross(&self.vertices, self.faces[f])
    }

    pub fn face_area(&self, f: usize) -> T {
        self.face_cross(f).norm() * T::lit(0.5)
    }

    pub fn face_normal(&self, f: usize) -> Vec3<T> {
        self.face_cross(f).normalize()
    }

    pub fn face_centroid(&self, f: usize) -> Vec3<T> {
        let [a, b, c] = self.faces[f];
        (self.vertices[a] + self.vertices[b] + self.vertices[c]) / T::lit(3.0)
    }

    pub fn surface_area(&self) -> T {
        (0..self.faces.len()).fold(T::zero(), |acc, f| acc + self.face_area(f))
    }

    /// Signed enclosed volume; positive for closed meshes with outward winding.
    pub fn signed_volume(&self) -> T {
        signed_volume(&self.vertices, self.faces.iter())
    }

    pub fn centroid(&self) -> Vec3<T> {
        let sum = self
            .vertices
            .iter()
            .fold(Vec3::zeros(), |acc: Vec3<T>, v| acc + v);
        sum / T::from_count(self.vertices.len().max(1))
    }

    /// Undirected edges with the number of incident faces, sorted by key.
    pub fn edge_face_counts(&self) -> BTreeMap<(usize, usize), usize> {
        let mut map = BTreeMap::new();
        for f in &self.faces {
            for (a, b) in face_edges(*f) {
                *map.entry(edge_key(a, b)).or_insert(0) += 1;
            }
        }
        map
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.edge_face_counts().into_keys().collect()
    }

    /// Sorted one-ring neighbour lists.
    pub fn vertex_neighbors(&self) -> Vec<Vec<usize>> {
        let mut nbrs = vec![Vec::new(); self.vertices.len()];
        for f in &self.faces {
            for (a, b) in face_edges(*f) {
                nbrs[a].push(b);
                nbrs[b].push(a);
            }
        }
        for list in &mut nbrs {
            list.sort_unstable();
            list.dedup();
        }
        nbrs
    }

    pub fn vertex_faces(&self) -> Vec<Vec<usize>> {
        let mut vf = vec![Vec::new(); self.vertices.len()];
        for (i, f) in self.faces.iter().enumerate() {
            for &v in f {
                vf[v].push(i);
            }
        }
        vf
    }

    /// Faces sharing an edge with each face.
    pub fn face_adjacency(&self) -> Vec<Vec<usize>> {
        let mut by_edge: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (i, f) in self.faces.iter().enumerate() {
            for (a, b) in face_edges(*f) {
                by_edge.entry(edge_key(a, b)).or_default().push(i);
            }
        }
        let mut adj = vec![Vec::new(); self.faces.len()];
        for faces in by_edge.values() {
            for &f in faces {
                for &g in faces {
                    if f != g {
                        adj[f].push(g);
                    }
                }
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    pub fn is_edge_manifold(&self) -> bool {
        self.edge_face_counts().values().all(|&c| c <= 2)
    }

    pub fn report(&self) -> MeshReport {
        let counts = self.edge_face_counts();
        let boundary = counts.values().filter(|&&c| c == 1).count();
        let non_manifold = counts.values().filter(|&&c| c > 2).count();
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for v in &self.vertices {
            for k in 0..3 {
                lo[k] = lo[k].min(v[k].as_f64());
                hi[k] = hi[k].max(v[k].as_f64());
            }
        }
        if self.vertices.is_empty() {
            lo = [0.0; 3];
            hi = [0.0; 3];
        }
        let (v, e, f) = (self.vertices.len(), counts.len(), self.faces.len());
        MeshReport {
            vertices: v,
            faces: f,
            edges: e,
            euler_characteristic: v as i64 - e as i64 + f as i64,
            boundary_edges: boundary,
            non_manifold_edges: non_manifold,
            bbox_min: lo,
            bbox_max: hi,
        }
    }

    /// Connected components (by shared vertices) as lists of face ids.
    pub fn face_components(&self) -> Vec<Vec<usize>> {
        let vf = self.vertex_faces();
        let mut seen = vec![false; self.faces.len()];
        let mut comps = Vec::new();
        for start in 0..self.faces.len() {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(f) = queue.pop_front() {
                for &v in &self.faces[f] {
                    for &g in &vf[v] {
                        if !seen[g] {
                            seen[g] = true;
                            comp.push(g);
                            queue.push_back(g);
                        }
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    /// Keeps the component with the most faces; unreferenced vertices are dropped.
    pub fn largest_component(&self) -> Result<Self> {
        let comps = self.face_components();
        let Some(best) = comps
            .iter()
            .enumerate()
            .max_by_key(|(i, c)| (c.len(), std::cmp::Reverse(*i)))
            .map(|(_, c)| c)
        else {
            return Ok(self.clone());
        };
        let faces: Vec<[usize; 3]> = best.iter().map(|&f| self.faces[f]).collect();
        self.compact(faces)
    }

    fn compact(&self, faces: Vec<[usize; 3]>) -> Result<Self> {
        let mut used = vec![false; self.vertices.len()];
        for f in &faces {
            for &v in f {
                used[v] = true;
            }
        }
        let mut remap = vec![usize::MAX; self.vertices.len()];
        let mut vertices = Vec::new();
        for (old, _) in used.iter().enumerate().filter(|(_, &u)| u) {
            remap[old] = vertices.len();
            vertices.push(self.vertices[old]);
        }
        let faces = faces
            .iter()
            .map(|f| [remap[f[0]], remap[f[1]], remap[f[2]]])
            .collect();
        Self::new(vertices, faces)
    }
}

pub(crate) fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

pub(crate) fn face_edges(f: [usize; 3]) -> [(usize, usize); 3] {
    [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])]
}

fn face_cross<T: Real>(vertices: &[Vec3<T>], f: [usize; 3]) -> Vec3<T> {
    let [a, b, c] = f;
    (vertices[b] - vertices[a]).cross(&(vertices[c] - vertices[a]))
}

fn signed_volume<'a, T: Real>(
    vertices: &[Vec3<T>],
    faces: impl Iterator<Item = &'a [usize; 3]>,
) -> T {
    let sixth = T::lit(1.0 / 6.0);
    faces.fold(T::zero(), |acc, f| {
        acc + vertices[f[0]].dot(&vertices[f[1]].cross(&vertices[f[2]])) * sixth
    })
}

fn validate<T: Real>(vertices: &[Vec3<T>], faces: &[[usize; 3]]) -> Result<()> {
    let n = vertices.len();
    for (i, v) in vertices.iter().enumerate() {
        if !v.iter().all(|c| c.is_finite_val()) {
            return Err(Error::InvalidMesh(format!("vertex {i} is not finite")));
        }
    }
    let min_area = T::lit(MIN_FACE_AREA);
    for (i, f) in faces.iter().enumerate() {
        if let Some(&bad) = f.iter().find(|&&v| v >= n) {
            return Err(Error::InvalidMesh(format!(
                "face {i} references vertex {bad} but the mesh has {n} vertices"
            )));
        }
        if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
            return Err(Error::InvalidMesh(format!(
                "face {i} repeats a vertex index: {f:?}"
            )));
        }
        let area = face_cross(vertices, *f).norm() * T::lit(0.5);
        if area <= min_area {
            return Err(Error::InvalidMesh(format!(
                "face {i} is degenerate (area {area})"
            )));
        }
    }
    Ok(())
}

/// Makes winding consistent per component. Closed components are flipped to
/// positive signed volume; open components keep the winding of the majority of
/// their input faces.
fn orient_faces<T: Real>(vertices: &[Vec3<T>], mut faces: Vec<[usize; 3]>) -> Vec<[usize; 3]> {
    let mut by_edge: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (i, f) in faces.iter().enumerate() {
        for (a, b) in face_edges(*f) {
            by_edge.entry(edge_key(a, b)).or_default().push(i);
        }
    }
    let has_directed = |f: &[usize; 3], a: usize, b: usize| {
        face_edges(*f).iter().any(|&(x, y)| x == a && y == b)
    };

    let mut visited = vec![false; faces.len()];
    let mut flipped = vec![false; faces.len()];
    for start in 0..faces.len() {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        let mut comp = vec![start];
        let mut closed = true;
        let mut queue = VecDeque::from([start]);
        while let Some(f) = queue.pop_front() {
            let face = faces[f];
            for (a, b) in face_edges(face) {
                let shared = &by_edge[&edge_key(a, b)];
                if shared.len() != 2 {
                    closed = false;
                    continue;
                }
                let g = if shared[0] == f { shared[1] } else { shared[0] };
                if visited[g] {
                    continue;
                }
                visited[g] = true;
                // consistent neighbours traverse the shared edge in opposite directions
                if has_directed(&faces[g], a, b) {
                    faces[g].swap(1, 2);
                    flipped[g] = !flipped[g];
                }
                comp.push(g);
                queue.push_back(g);
            }
        }
        let flip_all = if closed {
            signed_volume(vertices, comp.iter().map(|&f| &faces[f])) < T::zero()
        } else {
            let n_flipped = comp.iter().filter(|&&f| flipped[f]).count();
            2 * n_flipped > comp.len()
        };
        if flip_all {
            for &f in &comp {
                faces[f].swap(1, 2);
            }
        }
    }
    faces
}

fn vertex_normals<T: Real>(vertices: &[Vec3<T>], faces: &[[usize; 3]]) -> Vec<Vec3<T>> {
    let mut acc = vec![Vec3::<T>::zeros(); vertices.len()];
    for f in faces {
        let n = face_cross(vertices, *f);
        for &v in f {
            acc[v] += n;
        }
    }
    acc.into_iter()
        .map(|n| {
            let len = n.norm();
            if len > T::zero() {
                n / len
            } else {
                // isolated vertex
                Vec3::z()
            }
        })
        .collect()
}
