//! Morphological analysis of ventricle-like triangle surfaces.
//!
//! The pipeline runs from a scalar volume to a smoothed surface mesh
//! ([`volume`]), partitions it into the 17 AHA segments ([`aha`]), computes
//! isometry-robust per-point descriptors ([`descriptors`]), quantizes them
//! against a k-means vocabulary into bag-of-features histograms ([`bof`]) and
//! evaluates classifiers and regressors under leave-one-out ([`learn`],
//! [`pipeline`]).
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the common `f64` instantiation.

pub mod aha;
pub mod bof;
pub mod descriptors;
pub mod error;
pub mod learn;
pub mod mesh;
pub mod num;
pub mod pipeline;
pub mod volume;

pub use error::{Error, Result};
pub use num::Real;

pub type Mesh = mesh::TriangleMesh<f64>;
pub type MeshF32 = mesh::TriangleMesh<f32>;
pub type Volume = volume::ScalarVolume<f64>;
pub type VolumeF32 = volume::ScalarVolume<f32>;
pub type Curvatures = descriptors::CurvatureField<f64>;
pub type Features = descriptors::FeatureVector<f64>;
pub type Vocabulary = bof::Vocabulary<f64>;
pub type Histogram = bof::BoFHistogram<f64>;
pub type Mlp = learn::MlpModel<f64>;
pub type Regression = learn::RegressionModel<f64>;
pub type Rate = num_rational::Ratio<u64>;
