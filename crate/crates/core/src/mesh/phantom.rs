//! Synthetic ventricle-like phantoms with a seeded Gaussian bump field that
//! stands in for trabeculation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::primitives::unit_icosphere;
use super::{TriangleMesh, Vec3};
use crate::aha::Landmarks;
use crate::error::{Error, Result};
use crate::num::Real;
use crate::volume::ScalarVolume;

/// Bumps are truncated beyond this many standard deviations from their centre.
pub const BUMP_SUPPORT: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseShape {
    /// Sphere of radius `radii[0]`.
    Sphere,
    Ellipsoid,
    /// Lower half (z ≤ 0) of an ellipsoid, open at the base plane z = 0. The
    /// apex sits at `(0, 0, -radii[2])`.
    HalfEllipsoidShell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    #[default]
    Outward,
    Inward,
    /// Each bump picks its sign at random.
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpField {
    pub count: usize,
    /// Peak displacement (mm).
    pub amplitude: f64,
    /// Bump width (mm); each bump is a Gaussian with σ = wavelength / 2.
    pub wavelength: f64,
    #[serde(default)]
    pub polarity: Polarity,
}

impl Default for BumpField {
    fn default() -> Self {
        Self {
            count: 0,
            amplitude: 0.0,
            wavelength: 1.0,
            polarity: Polarity::Outward,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhantomSpec {
    pub base: BaseShape,
    /// Semi-axes along x, y, z (mm).
    pub radii: [f64; 3],
    #[serde(default)]
    pub bumps: BumpField,
    #[serde(default)]
    pub seed: u64,
    /// Icosphere subdivision level of the generated mesh.
    #[serde(default = "default_subdivisions")]
    pub subdivisions: u32,
}

fn default_subdivisions() -> u32 {
    4
}

#[derive(Debug, Clone, Copy)]
struct Bump {
    center: Vec3<f64>,
    sign: f64,
}

impl PhantomSpec {
    pub fn validate(&self) -> Result<()> {
        if self.radii.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
            return Err(Error::arg(format!("radii must be positive, got {:?}", self.radii)));
        }
        let b = &self.bumps;
        if !(b.amplitude >= 0.0 && b.amplitude.is_finite()) {
            return Err(Error::arg(format!("bump amplitude must be >= 0, got {}", b.amplitude)));
        }
        if b.count > 0 && !(b.wavelength > 0.0 && b.wavelength.is_finite()) {
            return Err(Error::arg(format!("bump wavelength must be > 0, got {}", b.wavelength)));
        }
        if self.subdivisions > 8 {
            return Err(Error::arg("subdivisions above 8 are not supported"));
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }

    fn semi_axes(&self) -> [f64; 3] {
        match self.base {
            BaseShape::Sphere => [self.radii[0]; 3],
            _ => self.radii,
        }
    }

    fn is_half(&self) -> bool {
        self.base == BaseShape::HalfEllipsoidShell
    }

    /// Point on the undisplaced base surface along direction `u`.
    fn surface_point(&self, u: &Vec3<f64>) -> Vec3<f64> {
        let [a, b, c] = self.semi_axes();
        let q = (u.x / a).powi(2) + (u.y / b).powi(2) + (u.z / c).powi(2);
        u / q.sqrt()
    }

    fn surface_normal(&self, p: &Vec3<f64>) -> Vec3<f64> {
        let [a, b, c] = self.semi_axes();
        Vec3::new(p.x / (a * a), p.y / (b * b), p.z / (c * c)).normalize()
    }

    fn bumps(&self) -> Vec<Bump> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.bumps.count)
            .map(|_| {
                let mut u = loop {
                    let v = Vec3::new(
                        StandardNormal.sample(&mut rng),
                        StandardNormal.sample(&mut rng),
                        StandardNormal.sample(&mut rng),
                    );
                    let n: f64 = v.norm();
                    if n > 1e-9 {
                        break v / n;
                    }
                };
                if self.is_half() && u.z > 0.0 {
                    u.z = -u.z;
                }
                let sign = match self.bumps.polarity {
                    Polarity::Outward => 1.0,
                    Polarity::Inward => -1.0,
                    Polarity::Mixed => {
                        if rng.random::<bool>() {
                            1.0
                        } else {
                            -1.0
                        }
                    }
                };
                Bump {
                    center: self.surface_point(&u),
                    sign,
                }
            })
            .collect()
    }

    fn displacement(&self, bumps: &[Bump], p: &Vec3<f64>) -> f64 {
        if bumps.is_empty() || self.bumps.amplitude == 0.0 {
            return 0.0;
        }
        let sigma = self.bumps.wavelength / 2.0;
        let inv = 1.0 / (2.0 * sigma * sigma);
        let cutoff = (BUMP_SUPPORT * sigma).powi(2);
        self.bumps.amplitude
            * bumps
                .iter()
                .filter_map(|b| {
                    let d2 = (p - b.center).norm_squared();
                    (d2 < cutoff).then(|| b.sign * (-d2 * inv).exp())
                })
                .sum::<f64>()
    }

    /// Apex, base centroid and three septal points consistent with the
    /// phantom's orientation (long axis along z, apex at negative z).
    pub fn canonical_landmarks<T: Real>(&self) -> Landmarks<T> {
        let [_, _, c] = self.semi_axes();
        let angle = 2.0f64;
        let septal = [0.3, 0.5, 0.7].map(|frac| {
            let u = Vec3::new(angle.cos(), angle.sin(), -frac * 2.0).normalize();
            let p = self.surface_point(&u);
            Vec3::new(T::lit(p.x), T::lit(p.y), T::lit(p.z))
        });
        Landmarks {
            apex: Vec3::new(T::zero(), T::zero(), T::lit(-c)),
            base: Vec3::zeros(),
            septal,
        }
    }
}

/// Deterministic phantom mesh; bumps displace vertices along the base-surface normal.
pub fn generate_phantom<T: Real>(spec: &PhantomSpec) -> Result<TriangleMesh<T>> {
    spec.validate()?;
    let (dirs, faces) = unit_icosphere::<f64>(spec.subdivisions);
    let bumps = spec.bumps();
    let faces: Vec<[usize; 3]> = if spec.is_half() {
        faces
            .into_iter()
            .filter(|f| f.iter().map(|&i| dirs[i].z).sum::<f64>() < 0.0)
            .collect()
    } else {
        faces
    };
    let mut remap = vec![usize::MAX; dirs.len()];
    let mut used: Vec<usize> = faces.iter().flatten().copied().collect();
    used.sort_unstable();
    used.dedup();
    let vertices: Vec<Vec3<T>> = used
        .iter()
        .enumerate()
        .map(|(new, &old)| {
            remap[old] = new;
            let s = spec.surface_point(&dirs[old]);
            let p = s + spec.surface_normal(&s) * spec.displacement(&bumps, &s);
            Vec3::new(T::lit(p.x), T::lit(p.y), T::lit(p.z))
        })
        .collect();
    let faces = faces
        .iter()
        .map(|f| [remap[f[0]], remap[f[1]], remap[f[2]]])
        .collect();
    TriangleMesh::new(vertices, faces)
}

/// Options for rendering a phantom into a scalar volume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RasterOptions {
    /// Isotropic voxel size (mm).
    pub spacing: f64,
    /// Margin around the shape (mm).
    pub padding: f64,
    /// Standard deviation of additive Gaussian noise.
    #[serde(default)]
    pub noise_sigma: f64,
}

impl Default for RasterOptions {
    fn default() -> Self {
        Self {
            spacing: 0.5,
            padding: 2.0,
            noise_sigma: 0.0,
        }
    }
}

/// Renders the phantom as a signed radial distance field (negative inside,
/// zero on the surface). Bumps act radially here. Half shells are cropped just
/// below the base plane so the zero level set is open at the base.
pub fn phantom_volume<T: Real>(spec: &PhantomSpec, opts: &RasterOptions) -> Result<ScalarVolume<T>> {
    spec.validate()?;
    if !(opts.spacing > 0.0) || !(opts.padding >= 0.0) || !(opts.noise_sigma >= 0.0) {
        return Err(Error::arg("raster spacing must be > 0, padding and noise >= 0"));
    }
    let bumps = spec.bumps();
    let [a, b, c] = spec.semi_axes();
    let reach = spec.bumps.amplitude + opts.padding;
    let lo = [-a - reach, -b - reach, -c - reach];
    let hi = if spec.is_half() {
        [a + reach, b + reach, -0.5 * opts.spacing]
    } else {
        [a + reach, b + reach, c + reach]
    };
    let dims: [usize; 3] =
        std::array::from_fn(|k| ((hi[k] - lo[k]) / opts.spacing).floor() as usize + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut values = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
    for k in 0..dims[2] {
        for j in 0..dims[1] {
            for i in 0..dims[0] {
                let p = Vec3::new(
                    lo[0] + i as f64 * opts.spacing,
                    lo[1] + j as f64 * opts.spacing,
                    lo[2] + k as f64 * opts.spacing,
                );
                let r = p.norm();
                let mut f = if r < 1e-12 {
                    -a.min(b).min(c)
                } else {
                    let s = spec.surface_point(&(p / r));
                    r - s.norm() - spec.displacement(&bumps, &s)
                };
                if opts.noise_sigma > 0.0 {
                    let n: f64 = StandardNormal.sample(&mut rng);
                    f += opts.noise_sigma * n;
                }
                values.push(T::lit(f));
            }
        }
    }
    let origin = lo.map(T::lit);
    ScalarVolume::new(dims, [T::lit(opts.spacing); 3], origin, values)
}
