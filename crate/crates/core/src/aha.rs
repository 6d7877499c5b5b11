//! AHA 17-segment partitioning of a left-ventricle surface and the
//! segment → coronary territory map.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{Matrix3, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{TriangleMesh, Vec3};
use crate::num::Real;

pub const SEGMENT_COUNT: usize = 17;
pub const APEX_SEGMENT: u8 = 17;

/// Fraction of the base-to-apex span, measured from the apex, that forms the apical cap.
pub const APEX_CAP_FRACTION: f64 = 0.15;

/// Leading/second covariance eigenvalue ratio below which the principal axis is ambiguous.
pub const AXIS_AMBIGUITY_RATIO: f64 = 1.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Artery {
    Lad,
    Rca,
    Lcx,
}

impl Artery {
    pub const ALL: [Artery; 3] = [Artery::Lad, Artery::Rca, Artery::Lcx];
}

impl fmt::Display for Artery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Artery::Lad => "LAD",
            Artery::Rca => "RCA",
            Artery::Lcx => "LCX",
        })
    }
}

impl FromStr for Artery {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "LAD" => Ok(Artery::Lad),
            "RCA" => Ok(Artery::Rca),
            "LCX" => Ok(Artery::Lcx),
            _ => Err(Error::arg(format!("unknown artery '{s}'"))),
        }
    }
}

/// Standard AHA assignment of segments to the supplying coronary artery.
pub fn territory_of(segment: u8) -> Result<Artery> {
    match segment {
        1 | 2 | 7 | 8 | 13 | 14 | 17 => Ok(Artery::Lad),
        3 | 4 | 9 | 10 | 15 => Ok(Artery::Rca),
        5 | 6 | 11 | 12 | 16 => Ok(Artery::Lcx),
        _ => Err(Error::arg(format!("segment id {segment} is outside 1..=17"))),
    }
}

/// Anatomical landmarks (mm).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Landmarks<T: Real> {
    pub apex: Vec3<T>,
    pub base: Vec3<T>,
    pub septal: [Vec3<T>; 3],
}

#[derive(Serialize, Deserialize)]
struct LandmarksDoc {
    apex: [f64; 3],
    base: [f64; 3],
    septal: [[f64; 3]; 3],
}

fn to_vec3<T: Real>(a: [f64; 3]) -> Vec3<T> {
    Vec3::new(T::lit(a[0]), T::lit(a[1]), T::lit(a[2]))
}

fn to_array<T: Real>(v: &Vec3<T>) -> [f64; 3] {
    [v.x.as_f64(), v.y.as_f64(), v.z.as_f64()]
}

impl<T: Real> Landmarks<T> {
    pub fn from_json(s: &str) -> Result<Self> {
        let doc: LandmarksDoc = serde_json::from_str(s)?;
        let lm = Self {
            apex: to_vec3(doc.apex),
            base: to_vec3(doc.base),
            septal: doc.septal.map(to_vec3),
        };
        lm.validate()?;
        Ok(lm)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }

    pub fn to_json(&self) -> String {
        let doc = LandmarksDoc {
            apex: to_array(&self.apex),
            base: to_array(&self.base),
            septal: [
                to_array(&self.septal[0]),
                to_array(&self.septal[1]),
                to_array(&self.septal[2]),
            ],
        };
        serde_json::to_string_pretty(&doc).expect("landmarks serialize")
    }

    pub fn axis_length(&self) -> T {
        (self.apex - self.base).norm()
    }

    pub fn validate(&self) -> Result<()> {
        let span = self.axis_length();
        let scale = self.apex.norm().max(self.base.norm()).max(T::one());
        if !(span > T::lit(1e-9) * scale) {
            return Err(Error::DegenerateLandmarks("apex coincides with base centroid".into()));
        }
        let axis = (self.apex - self.base) / span;
        for (i, s) in self.septal.iter().enumerate() {
            let d = s - self.base;
            let perp = d - axis * d.dot(&axis);
            if !(perp.norm() > T::lit(1e-6) * span) {
                return Err(Error::DegenerateLandmarks(format!(
                    "septal landmark {} lies on the long axis",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    pub fn transformed(&self, t: &crate::mesh::transform::RigidTransform<T>) -> Self {
        Self {
            apex: t.apply_point(&self.apex),
            base: t.apply_point(&self.base),
            septal: self.septal.map(|s| t.apply_point(&s)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LongAxis<T: Real> {
    /// Unit direction pointing toward the apex.
    pub direction: Vec3<T>,
    /// Point on the axis where the axial coordinate is zero.
    pub origin: Vec3<T>,
    /// Range of vertex axial coordinates.
    pub extent: (T, T),
}

/// Long axis from landmarks (base → apex) or, without them, the principal
/// eigenvector of the vertex covariance, signed so that the extreme farther
/// from the centroid lies on the positive side.
pub fn compute_long_axis<T: Real>(
    mesh: &TriangleMesh<T>,
    landmarks: Option<&Landmarks<T>>,
) -> Result<LongAxis<T>> {
    let (direction, origin) = match landmarks {
        Some(lm) => {
            lm.validate()?;
            ((lm.apex - lm.base).normalize(), lm.base)
        }
        None => {
            if mesh.vertex_count() < 2 {
                return Err(Error::Degenerate("long axis needs at least two vertices".into()));
            }
            let c = mesh.centroid();
            let mut cov = Matrix3::zeros();
            for v in mesh.vertices() {
                let d = v - c;
                cov += d * d.transpose();
            }
            let eig = SymmetricEigen::new(cov);
            let mut order = [0usize, 1, 2];
            order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp_val(&eig.eigenvalues[a]));
            let (l1, l2) = (eig.eigenvalues[order[0]], eig.eigenvalues[order[1]]);
            let ratio = if l2 > T::zero() { l1 / l2 } else { T::lit(f64::INFINITY) };
            if ratio < T::lit(AXIS_AMBIGUITY_RATIO) {
                return Err(Error::AmbiguousAxis {
                    ratio: ratio.as_f64(),
                });
            }
            let mut axis: Vec3<T> = eig.eigenvectors.column(order[0]).into_owned().normalize();
            let (lo, hi) = axial_range(mesh, &axis, &c);
            if -lo > hi {
                axis = -axis;
            }
            (axis, c)
        }
    };
    let extent = axial_range(mesh, &direction, &origin);
    Ok(LongAxis {
        direction,
        origin,
        extent,
    })
}

fn axial_range<T: Real>(mesh: &TriangleMesh<T>, axis: &Vec3<T>, origin: &Vec3<T>) -> (T, T) {
    mesh.vertices().iter().fold(
        (T::lit(f64::INFINITY), T::lit(f64::NEG_INFINITY)),
        |(lo, hi), v| {
            let t = (v - origin).dot(axis);
            (if t < lo { t } else { lo }, if t > hi { t } else { hi })
        },
    )
}

/// Per-vertex AHA segment ids with per-segment vertex lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentLabeling {
    labels: Vec<u8>,
    members: Vec<Vec<usize>>,
}

impl SegmentLabeling {
    pub fn from_labels(labels: Vec<u8>) -> Result<Self> {
        let mut members = vec![Vec::new(); SEGMENT_COUNT];
        for (v, &s) in labels.iter().enumerate() {
            if !(1..=SEGMENT_COUNT as u8).contains(&s) {
                return Err(Error::arg(format!("vertex {v} has segment id {s}")));
            }
            members[s as usize - 1].push(v);
        }
        Ok(Self { labels, members })
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn segment_of(&self, vertex: usize) -> u8 {
        self.labels[vertex]
    }

    /// Vertex ids of segment `id` (1-based), ascending.
    pub fn segment_vertices(&self, id: u8) -> &[usize] {
        match id {
            1..=17 => &self.members[id as usize - 1],
            _ => &[],
        }
    }

    pub fn nonempty_segments(&self) -> usize {
        self.members.iter().filter(|m| !m.is_empty()).count()
    }

    /// CSV with header `vertex_id,segment_id,artery`.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "vertex_id,segment_id,artery")?;
        for (v, &s) in self.labels.iter().enumerate() {
            let artery = territory_of(s).expect("labels are validated");
            writeln!(w, "{v},{s},{artery}")?;
        }
        Ok(())
    }

    pub fn read_csv(text: &str) -> Result<Self> {
        let mut labels = Vec::new();
        for (i, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let mut cols = line.split(',');
            let vid: usize = cols
                .next()
                .and_then(|c| c.trim().parse().ok())
                .ok_or_else(|| Error::Parse { line: i + 1, msg: "bad vertex_id".into() })?;
            let seg: u8 = cols
                .next()
                .and_then(|c| c.trim().parse().ok())
                .ok_or_else(|| Error::Parse { line: i + 1, msg: "bad segment_id".into() })?;
            if vid != labels.len() {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("expected vertex_id {}, found {vid}", labels.len()),
                });
            }
            labels.push(seg);
        }
        Self::from_labels(labels)
    }
}

/// Longitudinal band of an axial position `t` ∈ [0, 1] (base → apex).
fn band_of(t: f64) -> usize {
    let cap_start = 1.0 - APEX_CAP_FRACTION;
    let third = cap_start / 3.0;
    if t >= cap_start {
        3
    } else if t < third {
        0
    } else if t < 2.0 * third {
        1
    } else {
        2
    }
}

/// Assigns every vertex to one of the 17 AHA segments.
///
/// The base-to-apex span is split into an apical cap (distal 15%, segment 17)
/// and three equal bands: basal (1–6), mid (7–12) and apical (13–16). Bands are
/// divided into 60° (basal, mid) or 90° (apical) sectors counted
/// counter-clockwise about the long axis, starting at the projection of the
/// first septal landmark. Vertices beyond the base plane fall in the basal band.
pub fn partition_17<T: Real>(mesh: &TriangleMesh<T>, landmarks: &Landmarks<T>) -> Result<SegmentLabeling> {
    landmarks.validate()?;
    let span = landmarks.axis_length();
    let axis = (landmarks.apex - landmarks.base) / span;
    let d = landmarks.septal[0] - landmarks.base;
    let reference = (d - axis * d.dot(&axis)).normalize();
    let binormal = axis.cross(&reference);
    let labels: Vec<u8> = mesh
        .vertices()
        .par_iter()
        .map(|v| {
            let rel = v - landmarks.base;
            let t = (rel.dot(&axis) / span).as_f64();
            let band = band_of(t);
            if band == 3 {
                return APEX_SEGMENT;
            }
            let x = rel.dot(&reference).as_f64();
            let y = rel.dot(&binormal).as_f64();
            let mut phi = y.atan2(x);
            if phi < 0.0 {
                phi += std::f64::consts::TAU;
            }
            let sectors = if band == 2 { 4 } else { 6 };
            let sector = ((phi / std::f64::consts::TAU * sectors as f64) as usize).min(sectors - 1);
            (1 + 6 * band + sector) as u8
        })
        .collect();
    SegmentLabeling::from_labels(labels)
}
