use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::context::gcd_histogram;
use super::curvature::{estimate_curvatures, CurvatureField};
use super::geodesic::{DijkstraScratch, EdgeGraph};
use super::sampling::sample_points;
use super::scalar::{curvedness, normal_orientation, shape_index};
use crate::aha::{SegmentLabeling, SEGMENT_COUNT};
use crate::error::{Error, Result};
use crate::mesh::TriangleMesh;
use crate::num::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureParams {
    /// Points sampled per segment.
    pub samples: usize,
    pub gcd_bins: usize,
    /// Neighbourhood depth of the curvature fit.
    pub ring_depth: usize,
    /// Rescale curvedness to [0, 1] by min-max over each segment's samples.
    pub normalize_curvedness: bool,
    pub seed: u64,
}

impl Default for FeatureParams {
    fn default() -> Self {
        Self {
            samples: 500,
            gcd_bins: 20,
            ring_depth: 2,
            normalize_curvedness: false,
            seed: 0,
        }
    }
}

/// Descriptor tuple of one sampled surface point: shape index, curvedness,
/// normal orientation and the geodesic context histogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct FeatureVector<T: Real> {
    pub segment: u8,
    pub vertex: usize,
    pub shape_index: T,
    pub curvedness: T,
    pub orientation: T,
    pub gcd: Vec<T>,
}

impl<T: Real> FeatureVector<T> {
    /// Flattened `(I, C, θ, GCD…)`; 23 values with the default 20 bins.
    pub fn values(&self) -> Vec<T> {
        let mut v = Vec::with_capacity(3 + self.gcd.len());
        v.extend([self.shape_index, self.curvedness, self.orientation]);
        v.extend_from_slice(&self.gcd);
        v
    }

    pub fn dim(&self) -> usize {
        3 + self.gcd.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet<T: Real> {
    pub vectors: Vec<FeatureVector<T>>,
    /// Sampled points dropped because their curvature fit was invalid.
    pub skipped_invalid: usize,
}

/// Feature vectors for the sampled points of one segment. Geodesic context is
/// measured against the segment's other sampled points and normalized by the
/// largest distance among them.
pub fn feature_vectors<T: Real>(
    mesh: &TriangleMesh<T>,
    curvature: &CurvatureField<T>,
    graph: &EdgeGraph<T>,
    labeling: &SegmentLabeling,
    segment: u8,
    params: &FeatureParams,
) -> Result<FeatureSet<T>> {
    if curvature.len() != mesh.vertex_count() || graph.vertex_count() != mesh.vertex_count() {
        return Err(Error::DimensionMismatch {
            expected: mesh.vertex_count(),
            got: curvature.len(),
        });
    }
    let samples = sample_points(labeling, segment, params.samples, params.seed)?;
    let ids = &samples.vertices;
    if ids.len() < 2 {
        return Err(Error::Degenerate(format!(
            "segment {segment} has a single sampled point; geodesic context is undefined"
        )));
    }
    // upper triangle only; the matrix is filled symmetrically
    let upper: Vec<Vec<T>> = (0..ids.len())
        .into_par_iter()
        .map_init(DijkstraScratch::default, |scratch, i| {
            graph.distances_with(scratch, ids[i], &ids[i + 1..])
        })
        .collect::<Result<_>>()?;
    let n = ids.len();
    let mut rows = vec![vec![T::zero(); n]; n];
    for (i, row) in upper.iter().enumerate() {
        for (k, &d) in row.iter().enumerate() {
            rows[i][i + 1 + k] = d;
            rows[i + 1 + k][i] = d;
        }
    }
    let normalizer = upper
        .iter()
        .flatten()
        .fold(T::zero(), |m, &d| if d > m { d } else { m });

    let mut vectors = Vec::with_capacity(ids.len());
    let mut skipped = 0;
    for (i, &v) in ids.iter().enumerate() {
        if !curvature.valid[v] {
            skipped += 1;
            continue;
        }
        let others: Vec<T> = rows[i]
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &d)| d)
            .collect();
        let (k1, k2) = (curvature.k1[v], curvature.k2[v]);
        vectors.push(FeatureVector {
            segment,
            vertex: v,
            shape_index: shape_index(k1, k2)?,
            curvedness: curvedness(k1, k2),
            orientation: normal_orientation(&mesh.normals()[v])?,
            gcd: gcd_histogram(&others, normalizer, params.gcd_bins)?,
        });
    }
    if params.normalize_curvedness && !vectors.is_empty() {
        let (lo, hi) = vectors.iter().fold(
            (vectors[0].curvedness, vectors[0].curvedness),
            |(lo, hi), f| (lo.min(f.curvedness), hi.max(f.curvedness)),
        );
        let range = hi - lo;
        for f in &mut vectors {
            f.curvedness = if range > T::zero() {
                (f.curvedness - lo) / range
            } else {
                T::zero()
            };
        }
    }
    Ok(FeatureSet {
        vectors,
        skipped_invalid: skipped,
    })
}

/// Features of all 17 segments, in segment order.
pub fn surface_features<T: Real>(
    mesh: &TriangleMesh<T>,
    labeling: &SegmentLabeling,
    params: &FeatureParams,
) -> Result<FeatureSet<T>> {
    let curvature = estimate_curvatures(mesh, params.ring_depth)?;
    let graph = EdgeGraph::from_mesh(mesh);
    let mut all = FeatureSet {
        vectors: Vec::new(),
        skipped_invalid: 0,
    };
    for seg in 1..=SEGMENT_COUNT as u8 {
        let set = feature_vectors(mesh, &curvature, &graph, labeling, seg, params)?;
        all.vectors.extend(set.vectors);
        all.skipped_invalid += set.skipped_invalid;
    }
    Ok(all)
}

/// CSV with header `segment_id,vertex_id,I,C,theta,gcd_0..gcd_{n-1}`.
pub fn write_features_csv<T: Real, W: Write>(features: &[FeatureVector<T>], w: &mut W) -> std::io::Result<()> {
    let bins = features.first().map_or(20, |f| f.gcd.len());
    write!(w, "segment_id,vertex_id,I,C,theta")?;
    for b in 0..bins {
        write!(w, ",gcd_{b}")?;
    }
    writeln!(w)?;
    for f in features {
        write!(w, "{},{},{},{},{}", f.segment, f.vertex, f.shape_index, f.curvedness, f.orientation)?;
        for g in &f.gcd {
            write!(w, ",{g}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_features_csv<T: Real>(text: &str) -> Result<Vec<FeatureVector<T>>> {
    let mut lines = text.lines().enumerate();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 1, msg: "empty feature file".into() })?
        .1;
    let cols = header.split(',').count();
    if cols < 6 || !header.starts_with("segment_id,vertex_id,I,C,theta") {
        return Err(Error::Parse {
            line: 1,
            msg: "expected header segment_id,vertex_id,I,C,theta,gcd_*".into(),
        });
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let err = |msg: &str| Error::Parse { line: i + 1, msg: msg.into() };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != cols {
            return Err(err(&format!("expected {cols} columns, found {}", f.len())));
        }
        let num = |s: &str| -> Result<T> {
            s.trim()
                .parse::<f64>()
                .map(T::lit)
                .map_err(|_| err(&format!("bad number '{s}'")))
        };
        out.push(FeatureVector {
            segment: f[0].trim().parse().map_err(|_| err("bad segment_id"))?,
            vertex: f[1].trim().parse().map_err(|_| err("bad vertex_id"))?,
            shape_index: num(f[2])?,
            curvedness: num(f[3])?,
            orientation: num(f[4])?,
            gcd: f[5..].iter().map(|s| num(s)).collect::<Result<_>>()?,
        });
    }
    Ok(out)
}
