//! Per-point surface descriptors and global shape signatures.
//!
//! Local descriptors: principal curvatures ([`curvature`]), shape index,
//! curvedness and normal orientation ([`scalar`]), and the geodesic contextual
//! histogram ([`geodesic`], [`context`]). [`features`] assembles them into one
//! vector per sampled surface point. [`d2`] and [`histogram`] provide the
//! global D2 distribution and the per-segment shape-index histogram.

pub mod context;
pub mod curvature;
pub mod d2;
pub mod features;
pub mod geodesic;
pub mod histogram;
pub mod sampling;
pub mod scalar;

pub use context::gcd_histogram;
pub use curvature::{estimate_curvatures, CurvatureField};
pub use d2::{d2_descriptor, d2_from_points, D2Histogram};
pub use features::{feature_vectors, surface_features, FeatureParams, FeatureSet, FeatureVector};
pub use geodesic::{geodesic_distances, DijkstraScratch, EdgeGraph};
pub use histogram::shape_index_histogram;
pub use sampling::{sample_points, SampleSet};
pub use scalar::{curvedness, normal_orientation, shape_index};
