//! Scalar volumes and the volume → surface pipeline: median filtering,
//! isosurface extraction and mean-face-normal mesh smoothing.

pub mod marching_cubes;
pub mod median;
pub mod smooth;
mod tables;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

pub use marching_cubes::extract_isosurface;
pub use median::median_filter;
pub use smooth::smooth_mesh;

/// Regular grid of samples stored x-fastest, then y, then z.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarVolume<T: Real> {
    dims: [usize; 3],
    spacing: [T; 3],
    origin: [T; 3],
    values: Vec<T>,
}

impl<T: Real> ScalarVolume<T> {
    pub fn new(dims: [usize; 3], spacing: [T; 3], origin: [T; 3], values: Vec<T>) -> Result<Self> {
        if dims.iter().any(|&d| d < 2) {
            return Err(Error::InvalidVolume(format!(
                "every dimension must be >= 2, got {dims:?}"
            )));
        }
        if spacing.iter().any(|&s| !(s > T::zero())) {
            return Err(Error::InvalidVolume("spacing must be positive".into()));
        }
        let n = dims[0] * dims[1] * dims[2];
        if values.len() != n {
            return Err(Error::InvalidVolume(format!(
                "expected {n} values for dims {dims:?}, got {}",
                values.len()
            )));
        }
        Ok(Self {
            dims,
            spacing,
            origin,
            values,
        })
    }

    /// Samples `f` at every voxel centre (physical coordinates).
    pub fn from_fn(
        dims: [usize; 3],
        spacing: [T; 3],
        origin: [T; 3],
        mut f: impl FnMut([T; 3]) -> T,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    let p = [
                        origin[0] + spacing[0] * T::from_count(i),
                        origin[1] + spacing[1] * T::from_count(j),
                        origin[2] + spacing[2] * T::from_count(k),
                    ];
                    values.push(f(p));
                }
            }
        }
        Self::new(dims, spacing, origin, values)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> [T; 3] {
        self.spacing
    }

    pub fn origin(&self) -> [T; 3] {
        self.origin
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> T {
        self.values[self.index(i, j, k)]
    }

    pub fn position(&self, i: usize, j: usize, k: usize) -> [T; 3] {
        [
            self.origin[0] + self.spacing[0] * T::from_count(i),
            self.origin[1] + self.spacing[1] * T::from_count(j),
            self.origin[2] + self.spacing[2] * T::from_count(k),
        ]
    }

    pub fn min_max(&self) -> (T, T) {
        self.values.iter().fold(
            (self.values[0], self.values[0]),
            |(lo, hi), &v| (if v < lo { v } else { lo }, if v > hi { v } else { hi }),
        )
    }

    pub(crate) fn with_values(&self, values: Vec<T>) -> Self {
        Self {
            values,
            ..self.clone()
        }
    }
}

/// Element type of a raw volume file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RawDtype {
    F32,
    U16,
}

/// JSON sidecar describing a raw little-endian volume file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeHeader {
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub origin: [f64; 3],
    pub dtype: RawDtype,
}

/// Default sidecar location: `<raw path>.json`.
pub fn sidecar_path(raw: impl AsRef<Path>) -> PathBuf {
    let mut s = raw.as_ref().as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn decode_raw<T: Real>(header: &VolumeHeader, bytes: &[u8]) -> Result<ScalarVolume<T>> {
    let n = header.dims.iter().product::<usize>();
    let width = match header.dtype {
        RawDtype::F32 => 4,
        RawDtype::U16 => 2,
    };
    if bytes.len() != n * width {
        return Err(Error::InvalidVolume(format!(
            "raw data has {} bytes, header implies {}",
            bytes.len(),
            n * width
        )));
    }
    let values = match header.dtype {
        RawDtype::F32 => bytes
            .chunks_exact(4)
            .map(|c| T::lit(f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64))
            .collect(),
        RawDtype::U16 => bytes
            .chunks_exact(2)
            .map(|c| T::lit(u16::from_le_bytes([c[0], c[1]]) as f64))
            .collect(),
    };
    ScalarVolume::new(
        header.dims,
        header.spacing.map(T::lit),
        header.origin.map(T::lit),
        values,
    )
}

pub fn encode_raw<T: Real>(volume: &ScalarVolume<T>, dtype: RawDtype) -> (VolumeHeader, Vec<u8>) {
    let bytes = match dtype {
        RawDtype::F32 => volume
            .values
            .iter()
            .flat_map(|v| (v.as_f64() as f32).to_le_bytes())
            .collect(),
        RawDtype::U16 => volume
            .values
            .iter()
            .flat_map(|v| (v.as_f64().round().clamp(0.0, u16::MAX as f64) as u16).to_le_bytes())
            .collect(),
    };
    let header = VolumeHeader {
        dims: volume.dims,
        spacing: volume.spacing.map(|s| s.as_f64()),
        origin: volume.origin.map(|s| s.as_f64()),
        dtype,
    };
    (header, bytes)
}

pub fn load_volume<T: Real>(raw: impl AsRef<Path>, sidecar: impl AsRef<Path>) -> Result<ScalarVolume<T>> {
    let (raw, sidecar) = (raw.as_ref(), sidecar.as_ref());
    let text = fs::read_to_string(sidecar).map_err(|e| Error::io(sidecar, e))?;
    let header: VolumeHeader = serde_json::from_str(&text)?;
    let bytes = fs::read(raw).map_err(|e| Error::io(raw, e))?;
    decode_raw(&header, &bytes)
}

pub fn save_volume<T: Real>(
    volume: &ScalarVolume<T>,
    raw: impl AsRef<Path>,
    sidecar: impl AsRef<Path>,
    dtype: RawDtype,
) -> Result<()> {
    let (raw, sidecar) = (raw.as_ref(), sidecar.as_ref());
    let (header, bytes) = encode_raw(volume, dtype);
    fs::write(raw, bytes).map_err(|e| Error::io(raw, e))?;
    let json = serde_json::to_string_pretty(&header)?;
    fs::write(sidecar, json).map_err(|e| Error::io(sidecar, e))
}
