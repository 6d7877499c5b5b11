//! End-to-end orchestration: configuration, surface extraction, per-subject
//! feature sets and leave-one-out studies over a dataset manifest.

mod evaluate;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aha::{partition_17, territory_of, Artery, Landmarks, SegmentLabeling, SEGMENT_COUNT};
use crate::bof::KMeansParams;
use crate::descriptors::features::read_features_csv;
use crate::descriptors::{surface_features, FeatureParams, FeatureVector};
use crate::error::{Error, Result};
use crate::learn::{binarize_ds_at, Classifier, Label, MlpParams};
use crate::mesh::io::{load_mesh, MeshFormat};
use crate::mesh::phantom::{phantom_volume, PhantomSpec, RasterOptions};
use crate::mesh::TriangleMesh;
use crate::num::Real;
use crate::volume::{extract_isosurface, median_filter, smooth_mesh, ScalarVolume};

pub use evaluate::{
    classify_global, classify_local, regress_local, GlobalReport, LocalReport, PredictionRow, RegressionReport,
    RegressionRow, SegmentResult,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassifierKind {
    #[default]
    LdaKnn,
    Mlp,
}

/// Vocabulary shared by all segments, or one per segment position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VocabularyScope {
    #[default]
    Global,
    PerSegment,
}

/// Per-subject vector used by whole-surface classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GlobalRepresentation {
    /// 17 per-segment word histograms, concatenated.
    #[default]
    SegmentBof,
    /// One word histogram over the whole surface.
    SurfaceBof,
    /// 17 per-segment shape-index histograms of the sampled points.
    ShapeIndex,
}

/// Regression inputs: one segment's histogram, or the histograms of all
/// segments in an artery's territory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegressionInput {
    #[default]
    Segment,
    Territory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub seed: u64,
    pub median_kernel: [usize; 3],
    pub iso: Option<f64>,
    pub normal_iterations: usize,
    pub vertex_iterations: usize,
    pub samples: usize,
    pub gcd_bins: usize,
    pub ring_depth: usize,
    pub normalize_curvedness: bool,
    pub vocabulary_k: usize,
    pub vocabulary_scope: VocabularyScope,
    pub kmeans_max_iter: usize,
    pub standardize: bool,
    /// Cap on training features fed to k-means; larger pools are subsampled.
    pub max_vocabulary_features: usize,
    pub global_representation: GlobalRepresentation,
    pub classifier: ClassifierKind,
    pub knn_k: usize,
    pub mlp_hidden: usize,
    pub mlp_epochs: usize,
    pub learning_rate: f64,
    pub regression_input: RegressionInput,
    pub ridge: f64,
    pub ds_threshold: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            median_kernel: [7, 7, 1],
            iso: None,
            normal_iterations: 5,
            vertex_iterations: 10,
            samples: 500,
            gcd_bins: 20,
            ring_depth: 2,
            normalize_curvedness: false,
            vocabulary_k: 20,
            vocabulary_scope: VocabularyScope::Global,
            kmeans_max_iter: 100,
            standardize: true,
            max_vocabulary_features: 10_000,
            global_representation: GlobalRepresentation::SegmentBof,
            classifier: ClassifierKind::LdaKnn,
            knn_k: 1,
            mlp_hidden: 10,
            mlp_epochs: 2000,
            learning_rate: 0.3,
            regression_input: RegressionInput::Segment,
            ridge: 0.0,
            ds_threshold: 70.0,
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.median_kernel.iter().any(|&k| k == 0 || k % 2 == 0) {
            return Err(Error::arg(format!("median kernel {:?} must be odd in every axis", self.median_kernel)));
        }
        if self.samples == 0 || self.gcd_bins == 0 || self.vocabulary_k == 0 {
            return Err(Error::arg("samples, gcd_bins and vocabulary_k must be positive"));
        }
        if self.knn_k == 0 || self.knn_k % 2 == 0 {
            return Err(Error::arg(format!("knn_k = {} must be odd", self.knn_k)));
        }
        if self.mlp_hidden == 0 || !(self.learning_rate > 0.0) {
            return Err(Error::arg("mlp_hidden and learning_rate must be positive"));
        }
        if !(self.ridge >= 0.0) || !(0.0..=100.0).contains(&self.ds_threshold) {
            return Err(Error::arg("ridge must be >= 0 and ds_threshold within [0, 100]"));
        }
        if self.max_vocabulary_features < self.vocabulary_k {
            return Err(Error::arg("max_vocabulary_features must be at least vocabulary_k"));
        }
        Ok(())
    }

    pub fn feature_params(&self) -> FeatureParams {
        FeatureParams {
            samples: self.samples,
            gcd_bins: self.gcd_bins,
            ring_depth: self.ring_depth,
            normalize_curvedness: self.normalize_curvedness,
            seed: self.seed,
        }
    }

    pub fn kmeans_params(&self) -> KMeansParams {
        KMeansParams {
            k: self.vocabulary_k,
            max_iter: self.kmeans_max_iter,
            seed: self.seed,
            standardize: self.standardize,
        }
    }

    pub fn classifier(&self) -> Classifier {
        match self.classifier {
            ClassifierKind::LdaKnn => Classifier::LdaKnn { k: self.knn_k },
            ClassifierKind::Mlp => Classifier::Mlp(MlpParams {
                hidden: self.mlp_hidden,
                epochs: self.mlp_epochs,
                learning_rate: self.learning_rate,
                seed: self.seed,
            }),
        }
    }
}

/// Median filter, isosurface at `iso`, largest connected component, then
/// mean-face-normal smoothing.
pub fn volume_to_mesh<T: Real>(volume: &ScalarVolume<T>, iso: T, config: &PipelineConfig) -> Result<TriangleMesh<T>> {
    let filtered = median_filter(volume, config.median_kernel)?;
    let raw = extract_isosurface(&filtered, iso)?;
    if raw.face_count() == 0 {
        return Err(Error::Degenerate(format!("iso value {iso} produced an empty surface")));
    }
    let surface = raw.largest_component()?;
    smooth_mesh(&surface, config.normal_iterations, config.vertex_iterations)
}

/// Percent diameter stenosis per major coronary artery.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StenosisValues {
    pub lad: f64,
    pub lcx: f64,
    pub rca: f64,
}

impl StenosisValues {
    pub fn get(&self, artery: Artery) -> f64 {
        match artery {
            Artery::Lad => self.lad,
            Artery::Lcx => self.lcx,
            Artery::Rca => self.rca,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for a in Artery::ALL {
            binarize_ds_at(self.get(a), 0.0)?;
        }
        Ok(())
    }

    /// Diseased when any artery reaches `threshold`.
    pub fn subject_label(&self, threshold: f64) -> Result<Label> {
        let mut any = false;
        for a in Artery::ALL {
            any |= binarize_ds_at(self.get(a), threshold)?.is_diseased();
        }
        Ok(Label::from_diseased(any))
    }
}

/// One surface with its sampled features grouped by segment.
#[derive(Debug, Clone, PartialEq)]
pub struct Subject<T: Real> {
    pub id: String,
    pub ds: StenosisValues,
    /// `by_segment[s - 1]` holds the feature vectors of segment `s`.
    pub by_segment: Vec<Vec<FeatureVector<T>>>,
}

impl<T: Real> Subject<T> {
    pub fn new(id: impl Into<String>, ds: StenosisValues, features: Vec<FeatureVector<T>>) -> Result<Self> {
        let id = id.into();
        ds.validate()?;
        let mut by_segment = vec![Vec::new(); SEGMENT_COUNT];
        let dim = features.first().map(FeatureVector::dim);
        for f in features {
            territory_of(f.segment)?;
            if Some(f.dim()) != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim.unwrap_or(0),
                    got: f.dim(),
                });
            }
            by_segment[f.segment as usize - 1].push(f);
        }
        if let Some(s) = by_segment.iter().position(Vec::is_empty) {
            return Err(Error::Degenerate(format!("subject {id}: segment {} has no features", s + 1)));
        }
        Ok(Self { id, ds, by_segment })
    }

    /// Partitions `mesh` and computes its features.
    pub fn from_mesh(
        id: impl Into<String>,
        ds: StenosisValues,
        mesh: &TriangleMesh<T>,
        landmarks: &Landmarks<T>,
        config: &PipelineConfig,
    ) -> Result<Self> {
        let labeling = partition_17(mesh, landmarks)?;
        let features = surface_features(mesh, &labeling, &config.feature_params())?;
        Self::new(id, ds, features.vectors)
    }

    pub fn features(&self) -> impl Iterator<Item = &FeatureVector<T>> {
        self.by_segment.iter().flatten()
    }

    pub fn segment(&self, s: u8) -> &[FeatureVector<T>] {
        &self.by_segment[s as usize - 1]
    }

    pub fn feature_dim(&self) -> usize {
        self.by_segment[0][0].dim()
    }

    /// Label of segment `s` from the stenosis of its supplying artery.
    pub fn segment_label(&self, s: u8, threshold: f64) -> Result<Label> {
        binarize_ds_at(self.ds.get(territory_of(s)?), threshold)
    }
}

/// Renders a phantom into a volume and runs it through surface extraction,
/// partitioning with the phantom's canonical landmarks, and feature
/// computation.
pub fn phantom_subject<T: Real>(
    id: impl Into<String>,
    ds: StenosisValues,
    spec: &PhantomSpec,
    raster: &RasterOptions,
    config: &PipelineConfig,
) -> Result<(Subject<T>, TriangleMesh<T>, SegmentLabeling)> {
    let volume = phantom_volume::<T>(spec, raster)?;
    let iso = T::lit(config.iso.unwrap_or(0.0));
    let mesh = volume_to_mesh(&volume, iso, config)?;
    let landmarks = spec.canonical_landmarks::<T>();
    let labeling = partition_17(&mesh, &landmarks)?;
    let features = surface_features(&mesh, &labeling, &config.feature_params())?;
    Ok((Subject::new(id, ds, features.vectors)?, mesh, labeling))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub mesh: PathBuf,
    pub landmarks: PathBuf,
    pub ds: StenosisValues,
    /// Precomputed feature CSV; computed from the mesh when absent.
    #[serde(default)]
    pub features: Option<PathBuf>,
}

/// Dataset listing; relative paths resolve against the manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub subjects: Vec<ManifestEntry>,
    #[serde(skip)]
    pub root: PathBuf,
}

impl Manifest {
    pub fn from_json(text: &str, root: impl Into<PathBuf>) -> Result<Self> {
        let mut m: Self = serde_json::from_str(text)?;
        m.root = root.into();
        if m.subjects.len() < 2 {
            return Err(Error::arg("manifest must list at least two subjects"));
        }
        let mut ids: Vec<&str> = m.subjects.iter().map(|s| s.id.as_str()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::arg(format!("duplicate subject id '{}'", w[0])));
        }
        for s in &m.subjects {
            s.ds.validate()?;
        }
        Ok(m)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let root = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json(&text, root)
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.root.join(p)
        }
    }

    /// Loads every subject, computing features where no CSV is given.
    pub fn load_subjects<T: Real>(&self, config: &PipelineConfig) -> Result<Vec<Subject<T>>> {
        self.subjects
            .par_iter()
            .map(|e| {
                if let Some(f) = &e.features {
                    let path = self.resolve(f);
                    let text = std::fs::read_to_string(&path).map_err(|err| Error::io(&path, err))?;
                    return Subject::new(e.id.clone(), e.ds, read_features_csv(&text)?);
                }
                let mesh_path = self.resolve(&e.mesh);
                let mesh = load_mesh::<T>(&mesh_path, MeshFormat::from_path(&mesh_path)?)?;
                let landmarks = Landmarks::load(self.resolve(&e.landmarks))?;
                Subject::from_mesh(e.id.clone(), e.ds, &mesh, &landmarks, config)
            })
            .collect()
    }
}
