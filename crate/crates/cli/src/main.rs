//! Command line front end for the lvshape pipeline.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "lvshape", version, about = "Morphological analysis of ventricle-like surfaces")]
pub struct Cli {
    /// Seed for every random step.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Directory that relative output paths resolve against.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// JSON pipeline configuration; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Median filter, isosurface, largest component and smoothing.
    VolumeToMesh(VolumeToMeshArgs),
    /// Mean-face-normal smoothing of a mesh.
    Smooth(SmoothArgs),
    /// Label vertices with AHA 17-segment ids.
    Partition(PartitionArgs),
    /// Per-point descriptors of sampled vertices in every segment.
    Features(FeaturesArgs),
    /// D2 shape distribution.
    D2(D2Args),
    /// Train a k-means vocabulary on feature CSVs.
    Vocab(VocabArgs),
    /// Bag-of-features histograms against a vocabulary.
    Histogram(HistogramArgs),
    /// Leave-one-out whole-surface classification.
    ClassifyGlobal(StudyArgs),
    /// Leave-one-out per-segment classification.
    ClassifyLocal(StudyArgs),
    /// Leave-one-out per-segment regression of percent DS.
    RegressLocal(StudyArgs),
    /// Generate a synthetic phantom.
    Phantom(PhantomArgs),
    /// Metrics of a confusion matrix.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
pub struct VolumeToMeshArgs {
    /// Raw volume file (sidecar `<file>.json` unless --header is given).
    #[arg(long)]
    pub volume: PathBuf,
    #[arg(long)]
    pub header: Option<PathBuf>,
    #[arg(long)]
    pub iso: Option<f64>,
    /// Median kernel as `x,y,z`.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    pub kernel: Option<Vec<usize>>,
    #[arg(long)]
    pub normal_iterations: Option<usize>,
    #[arg(long)]
    pub vertex_iterations: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SmoothArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long)]
    pub normal_iterations: Option<usize>,
    #[arg(long)]
    pub vertex_iterations: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct PartitionArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long)]
    pub landmarks: PathBuf,
    /// Vertex label CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct FeaturesArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    /// Label CSV from `partition`.
    #[arg(long, required_unless_present = "landmarks", conflicts_with = "landmarks")]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub landmarks: Option<PathBuf>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long)]
    pub ring_depth: Option<usize>,
    #[arg(long)]
    pub normalize_curvedness: bool,
    /// Feature CSV (`.json` writes JSON instead).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct D2Args {
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long, default_value_t = 100_000)]
    pub pairs: usize,
    #[arg(long, default_value_t = 30)]
    pub bins: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct VocabArgs {
    /// Feature CSVs pooled for training.
    #[arg(long, num_args = 1.., required = true)]
    pub features: Vec<PathBuf>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Restrict training to one segment.
    #[arg(long)]
    pub segment: Option<u8>,
    #[arg(long)]
    pub no_standardize: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct HistogramArgs {
    #[arg(long, num_args = 1.., required = true)]
    pub features: Vec<PathBuf>,
    #[arg(long)]
    pub vocab: PathBuf,
    /// One row per segment with a leading `segment_id` column.
    #[arg(long)]
    pub per_segment: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Method {
    LdaKnn,
    Mlp,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Scope {
    Global,
    PerSegment,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Representation {
    SegmentBof,
    SurfaceBof,
    ShapeIndex,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum RegressionMode {
    Segment,
    Territory,
}

#[derive(Args, Debug)]
pub struct StudyArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// Neighbours of the k-NN vote (odd).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub vocabulary_k: Option<usize>,
    #[arg(long, value_enum)]
    pub scope: Option<Scope>,
    #[arg(long, value_enum)]
    pub representation: Option<Representation>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long, value_enum)]
    pub input: Option<RegressionMode>,
    #[arg(long)]
    pub ridge: Option<f64>,
    #[arg(long)]
    pub ds_threshold: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Report path stem; `.json` and `.csv` are written.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PhantomArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Also render a raw f32 volume (sidecar `<file>.json`).
    #[arg(long)]
    pub volume_out: Option<PathBuf>,
    #[arg(long)]
    pub landmarks_out: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    pub spacing: f64,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Counts `DD,DN,ND,NN` (actual × predicted, diseased first).
    #[arg(long)]
    pub confusion: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}
