use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::mesh::TriangleMesh;
use crate::num::Real;

/// Mesh edge graph in compressed sparse row form, weighted by Euclidean edge length.
#[derive(Debug, Clone)]
pub struct EdgeGraph<T: Real> {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<T>,
}

#[derive(Debug, Clone, Copy)]
struct Entry<T> {
    dist: T,
    vertex: usize,
}

impl<T: Real> PartialEq for Entry<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Real> Eq for Entry<T> {}

impl<T: Real> PartialOrd for Entry<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Real> Ord for Entry<T> {
    // reversed: BinaryHeap pops the smallest distance, then the smallest vertex id
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp_val(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl<T: Real> EdgeGraph<T> {
    pub fn from_mesh(mesh: &TriangleMesh<T>) -> Self {
        let neighbors = mesh.vertex_neighbors();
        let mut offsets = Vec::with_capacity(neighbors.len() + 1);
        let mut targets = Vec::new();
        let mut weights = Vec::new();
        offsets.push(0);
        for (v, list) in neighbors.iter().enumerate() {
            for &w in list {
                targets.push(w);
                weights.push((mesh.vertices()[v] - mesh.vertices()[w]).norm());
            }
            offsets.push(targets.len());
        }
        Self {
            offsets,
            targets,
            weights,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Shortest-path distances from `source` to each of `targets` (Dijkstra,
    /// stopping once every target is settled).
    pub fn distances(&self, source: usize, targets: &[usize]) -> Result<Vec<T>> {
        self.distances_with(&mut DijkstraScratch::default(), source, targets)
    }

    /// [`Self::distances`] reusing `scratch` buffers between calls.
    pub fn distances_with(
        &self,
        scratch: &mut DijkstraScratch<T>,
        source: usize,
        targets: &[usize],
    ) -> Result<Vec<T>> {
        let n = self.vertex_count();
        if let Some(&bad) = std::iter::once(&source).chain(targets).find(|&&v| v >= n) {
            return Err(Error::arg(format!("vertex {bad} out of range (mesh has {n})")));
        }
        scratch.reset(n);
        let stamp = scratch.stamp;
        let DijkstraScratch { dist, reached, settled, wanted, heap, .. } = scratch;
        let mut remaining = 0usize;
        for &t in targets {
            if wanted[t] != stamp {
                wanted[t] = stamp;
                remaining += 1;
            }
        }
        dist[source] = T::zero();
        reached[source] = stamp;
        heap.push(Entry {
            dist: T::zero(),
            vertex: source,
        });
        while let Some(Entry { dist: d, vertex: u }) = heap.pop() {
            if remaining == 0 {
                break;
            }
            if settled[u] == stamp {
                continue;
            }
            settled[u] = stamp;
            if wanted[u] == stamp {
                remaining -= 1;
            }
            for e in self.offsets[u]..self.offsets[u + 1] {
                let w = self.targets[e];
                let nd = d + self.weights[e];
                if reached[w] != stamp || nd < dist[w] {
                    reached[w] = stamp;
                    dist[w] = nd;
                    heap.push(Entry { dist: nd, vertex: w });
                }
            }
        }
        heap.clear();
        targets
            .iter()
            .map(|&t| {
                if settled[t] == stamp {
                    Ok(dist[t])
                } else {
                    Err(Error::Unreachable { from: source, to: t })
                }
            })
            .collect()
    }
}

/// Reusable Dijkstra buffers; entries are valid only where their stamp
/// matches the current call.
#[derive(Debug)]
pub struct DijkstraScratch<T: Real> {
    stamp: u32,
    dist: Vec<T>,
    reached: Vec<u32>,
    settled: Vec<u32>,
    wanted: Vec<u32>,
    heap: BinaryHeap<Entry<T>>,
}

impl<T: Real> Default for DijkstraScratch<T> {
    fn default() -> Self {
        Self {
            stamp: 0,
            dist: Vec::new(),
            reached: Vec::new(),
            settled: Vec::new(),
            wanted: Vec::new(),
            heap: BinaryHeap::new(),
        }
    }
}

impl<T: Real> DijkstraScratch<T> {
    fn reset(&mut self, n: usize) {
        if self.dist.len() != n || self.stamp == u32::MAX {
            self.dist = vec![T::zero(); n];
            self.reached = vec![0; n];
            self.settled = vec![0; n];
            self.wanted = vec![0; n];
            self.stamp = 0;
        }
        self.stamp += 1;
    }
}

/// Graph geodesic distances from `source` to every vertex in `targets`.
pub fn geodesic_distances<T: Real>(
    mesh: &TriangleMesh<T>,
    source: usize,
    targets: &[usize],
) -> Result<Vec<T>> {
    EdgeGraph::from_mesh(mesh).distances(source, targets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::primitives::{grid, icosphere};
    use crate::mesh::{TriangleMesh, Vec3};

    #[test]
    fn strip_path_length() {
        let g = grid(6, 2, 1.0f64);
        let d = geodesic_distances(&g, 0, &[5, 0]).unwrap();
        assert!((d[0] - 5.0).abs() < 1e-12);
        assert_eq!(d[1], 0.0);
    }

    #[test]
    fn antipodal_on_unit_sphere() {
        let m = icosphere(1.0f64, 4);
        let src = 0;
        let p = m.vertices()[src];
        let anti = (0..m.vertex_count())
            .min_by(|&a, &b| {
                (m.vertices()[a] + p)
                    .norm()
                    .partial_cmp(&(m.vertices()[b] + p).norm())
                    .unwrap()
            })
            .unwrap();
        let d = geodesic_distances(&m, src, &[anti]).unwrap()[0];
        let pi = std::f64::consts::PI;
        assert!(d >= pi * 0.999 && (d - pi) / pi < 0.06, "{d}");
    }

    #[test]
    fn unreachable_reports_pair() {
        let v = vec![
            Vec3::new(0.0f64, 0.0, 0.0),
            Vec3::x(),
            Vec3::y(),
            Vec3::new(5.0, 0.0, 0.0),
            Vec3::new(6.0, 0.0, 0.0),
            Vec3::new(5.0, 1.0, 0.0),
        ];
        let m = TriangleMesh::new(v, vec![[0, 1, 2], [3, 4, 5]]).unwrap();
        match geodesic_distances(&m, 0, &[1, 4]) {
            Err(Error::Unreachable { from: 0, to: 4 }) => {}
            other => panic!("{other:?}"),
        }
    }
}
