use std::fs;
use std::path::{Path, PathBuf};

use lvshape::aha::{partition_17, Landmarks, SegmentLabeling};
use lvshape::bof::{build_vocabulary, quantize, write_histograms_csv, BoFHistogram, Scope as BofScope, Vocabulary};
use lvshape::descriptors::features::{read_features_csv, write_features_csv};
use lvshape::descriptors::{d2_descriptor, surface_features, FeatureVector};
use lvshape::learn::ConfusionMatrix;
use lvshape::mesh::io::{load_mesh, save_mesh, MeshFormat};
use lvshape::mesh::phantom::{generate_phantom, phantom_volume, PhantomSpec, RasterOptions};
use lvshape::pipeline::{
    classify_global, classify_local, regress_local, ClassifierKind, GlobalRepresentation, Manifest, PipelineConfig,
    RegressionInput, VocabularyScope,
};
use lvshape::volume::{load_volume, save_volume, sidecar_path, smooth_mesh, RawDtype};
use lvshape::{Error, Mesh, Result};
use serde::Serialize;

use crate::{
    Cli, Command, D2Args, FeaturesArgs, HistogramArgs, Method, PartitionArgs, PhantomArgs, RegressionMode,
    Representation, Scope, SmoothArgs, StudyArgs, VocabArgs, VolumeToMeshArgs,
};

struct Ctx {
    out_dir: Option<PathBuf>,
    config: PipelineConfig,
}

impl Ctx {
    fn out(&self, p: &Path) -> Result<PathBuf> {
        let path = match &self.out_dir {
            Some(d) if p.is_relative() => d.join(p),
            _ => p.to_path_buf(),
        };
        if let Some(parent) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        Ok(path)
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_with(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(|e| Error::io(path, e))?;
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

fn to_json<S: Serialize>(value: &S) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn read_mesh(path: &Path) -> Result<Mesh> {
    load_mesh(path, MeshFormat::from_path(path)?)
}

fn write_mesh(mesh: &Mesh, path: &Path) -> Result<()> {
    save_mesh(mesh, path, MeshFormat::from_path(path)?)
}

fn read_features(path: &Path) -> Result<Vec<FeatureVector<f64>>> {
    read_features_csv(&read_text(path)?)
}

pub fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::arg("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::arg(format!("thread pool: {e}")))?;
    }
    let mut config = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    let ctx = Ctx {
        out_dir: cli.out_dir,
        config,
    };
    match cli.command {
        Command::VolumeToMesh(a) => volume_to_mesh(ctx, a),
        Command::Smooth(a) => smooth(ctx, a),
        Command::Partition(a) => partition(ctx, a),
        Command::Features(a) => features(ctx, a),
        Command::D2(a) => d2(ctx, a),
        Command::Vocab(a) => vocab(ctx, a),
        Command::Histogram(a) => histogram(ctx, a),
        Command::ClassifyGlobal(a) => study(ctx, a, Study::Global),
        Command::ClassifyLocal(a) => study(ctx, a, Study::Local),
        Command::RegressLocal(a) => study(ctx, a, Study::Regression),
        Command::Phantom(a) => phantom(ctx, a),
        Command::Report(a) => report(ctx, a),
    }
}

fn volume_to_mesh(mut ctx: Ctx, a: VolumeToMeshArgs) -> Result<()> {
    let c = &mut ctx.config;
    if let Some(k) = a.kernel {
        c.median_kernel = [k[0], k[1], k[2]];
    }
    c.normal_iterations = a.normal_iterations.unwrap_or(c.normal_iterations);
    c.vertex_iterations = a.vertex_iterations.unwrap_or(c.vertex_iterations);
    c.iso = a.iso.or(c.iso);
    c.validate()?;
    let iso = c
        .iso
        .ok_or_else(|| Error::arg("no iso value: pass --iso or set \"iso\" in the config"))?;
    let header = a.header.unwrap_or_else(|| sidecar_path(&a.volume));
    let volume = load_volume::<f64>(&a.volume, &header)?;
    let mesh = lvshape::pipeline::volume_to_mesh(&volume, iso, &ctx.config)?;
    write_mesh(&mesh, &ctx.out(&a.out)?)
}

fn smooth(ctx: Ctx, a: SmoothArgs) -> Result<()> {
    let mesh = read_mesh(&a.mesh)?;
    let n = a.normal_iterations.unwrap_or(ctx.config.normal_iterations);
    let v = a.vertex_iterations.unwrap_or(ctx.config.vertex_iterations);
    write_mesh(&smooth_mesh(&mesh, n, v)?, &ctx.out(&a.out)?)
}

fn partition(ctx: Ctx, a: PartitionArgs) -> Result<()> {
    let mesh = read_mesh(&a.mesh)?;
    let labeling = partition_17(&mesh, &Landmarks::load(&a.landmarks)?)?;
    let out = ctx.out(&a.out)?;
    write_with(&out, |w| labeling.write_csv(w))?;
    eprintln!("{} of 17 segments populated", labeling.nonempty_segments());
    Ok(())
}

fn features(mut ctx: Ctx, a: FeaturesArgs) -> Result<()> {
    let c = &mut ctx.config;
    c.samples = a.samples.unwrap_or(c.samples);
    c.gcd_bins = a.bins.unwrap_or(c.gcd_bins);
    c.ring_depth = a.ring_depth.unwrap_or(c.ring_depth);
    c.normalize_curvedness |= a.normalize_curvedness;
    c.validate()?;
    let mesh = read_mesh(&a.mesh)?;
    let labeling = match (&a.labels, &a.landmarks) {
        (Some(l), _) => SegmentLabeling::read_csv(&read_text(l)?)?,
        (None, Some(l)) => partition_17(&mesh, &Landmarks::load(l)?)?,
        (None, None) => return Err(Error::arg("pass --labels or --landmarks")),
    };
    if labeling.labels().len() != mesh.vertex_count() {
        return Err(Error::DimensionMismatch {
            expected: mesh.vertex_count(),
            got: labeling.labels().len(),
        });
    }
    let set = surface_features(&mesh, &labeling, &ctx.config.feature_params())?;
    let out = ctx.out(&a.out)?;
    if out.extension().is_some_and(|e| e == "json") {
        write_text(&out, &to_json(&set.vectors)?)?;
    } else {
        write_with(&out, |w| write_features_csv(&set.vectors, w))?;
    }
    if set.skipped_invalid > 0 {
        eprintln!("skipped {} sampled points with invalid curvature", set.skipped_invalid);
    }
    Ok(())
}

fn d2(ctx: Ctx, a: D2Args) -> Result<()> {
    let mesh = read_mesh(&a.mesh)?;
    let h = d2_descriptor(&mesh, a.pairs, a.bins, ctx.config.seed)?;
    let out = ctx.out(&a.out)?;
    let width = lvshape::descriptors::d2::D2_RANGE / a.bins as f64;
    write_with(&out, |w| {
        use std::io::Write;
        writeln!(w, "bin,lower,upper,frequency")?;
        for (i, f) in h.frequencies.iter().enumerate() {
            writeln!(w, "{i},{},{},{f}", i as f64 * width, (i + 1) as f64 * width)?;
        }
        Ok(())
    })?;
    eprintln!("mean distance {}", h.mean_distance);
    Ok(())
}

fn vocab(ctx: Ctx, a: VocabArgs) -> Result<()> {
    let mut params = ctx.config.kmeans_params();
    params.k = a.k.unwrap_or(params.k);
    params.max_iter = a.max_iter.unwrap_or(params.max_iter);
    params.standardize &= !a.no_standardize;
    let mut pool = Vec::new();
    for f in &a.features {
        pool.extend(
            read_features(f)?
                .into_iter()
                .filter(|v| a.segment.is_none_or(|s| v.segment == s))
                .map(|v| v.values()),
        );
    }
    let v = build_vocabulary(&pool, &params)?;
    write_text(&ctx.out(&a.out)?, &(v.to_json()? + "\n"))
}

fn histogram(ctx: Ctx, a: HistogramArgs) -> Result<()> {
    let vocab = Vocabulary::<f64>::from_json(&read_text(&a.vocab)?)?;
    let out = ctx.out(&a.out)?;
    let mut rows: Vec<BoFHistogram<f64>> = Vec::new();
    for f in &a.features {
        let feats = read_features(f)?;
        if a.per_segment {
            for s in 1..=17u8 {
                let seg: Vec<Vec<f64>> = feats.iter().filter(|v| v.segment == s).map(|v| v.values()).collect();
                if !seg.is_empty() {
                    rows.push(quantize(&seg, &vocab, BofScope::Segment(s))?);
                }
            }
        } else {
            let all: Vec<Vec<f64>> = feats.iter().map(|v| v.values()).collect();
            rows.push(quantize(&all, &vocab, BofScope::Surface)?);
        }
    }
    if !a.per_segment {
        return write_with(&out, |w| write_histograms_csv(&rows, w));
    }
    write_with(&out, |w| {
        use std::io::Write;
        let header: Vec<String> = (0..vocab.k).map(|i| format!("word_{i}")).collect();
        writeln!(w, "segment_id,{}", header.join(","))?;
        for h in &rows {
            let vals: Vec<String> = h.frequencies.iter().map(f64::to_string).collect();
            writeln!(w, "{},{}", h.scope, vals.join(","))?;
        }
        Ok(())
    })
}

enum Study {
    Global,
    Local,
    Regression,
}

fn study(mut ctx: Ctx, a: StudyArgs, kind: Study) -> Result<()> {
    let c = &mut ctx.config;
    if let Some(m) = a.method {
        c.classifier = match m {
            Method::LdaKnn => ClassifierKind::LdaKnn,
            Method::Mlp => ClassifierKind::Mlp,
        };
    }
    c.knn_k = a.k.unwrap_or(c.knn_k);
    c.vocabulary_k = a.vocabulary_k.unwrap_or(c.vocabulary_k);
    if let Some(s) = a.scope {
        c.vocabulary_scope = match s {
            Scope::Global => VocabularyScope::Global,
            Scope::PerSegment => VocabularyScope::PerSegment,
        };
    }
    if let Some(r) = a.representation {
        c.global_representation = match r {
            Representation::SegmentBof => GlobalRepresentation::SegmentBof,
            Representation::SurfaceBof => GlobalRepresentation::SurfaceBof,
            Representation::ShapeIndex => GlobalRepresentation::ShapeIndex,
        };
    }
    c.mlp_hidden = a.hidden.unwrap_or(c.mlp_hidden);
    c.mlp_epochs = a.epochs.unwrap_or(c.mlp_epochs);
    if let Some(m) = a.input {
        c.regression_input = match m {
            RegressionMode::Segment => RegressionInput::Segment,
            RegressionMode::Territory => RegressionInput::Territory,
        };
    }
    c.ridge = a.ridge.unwrap_or(c.ridge);
    c.ds_threshold = a.ds_threshold.unwrap_or(c.ds_threshold);
    c.samples = a.samples.unwrap_or(c.samples);
    c.validate()?;

    let manifest = Manifest::load(&a.manifest)?;
    let subjects = manifest.load_subjects::<f64>(&ctx.config)?;
    let (task, json, csv, summary) = match kind {
        Study::Global => {
            let r = classify_global(&subjects, &ctx.config)?;
            let mut csv = Vec::new();
            r.write_csv(&mut csv).expect("in-memory write");
            let acc = r.confusion.accuracy.as_ref().map(|a| a.value);
            ("classify-global", to_json(&r)?, csv, format!("accuracy {acc:?}, skipped folds {}", r.skipped_folds))
        }
        Study::Local => {
            let r = classify_local(&subjects, &ctx.config)?;
            let mut csv = Vec::new();
            r.write_csv(&mut csv).expect("in-memory write");
            let acc = r.overall.accuracy.as_ref().map(|a| a.value);
            ("classify-local", to_json(&r)?, csv, format!("pooled accuracy {acc:?}"))
        }
        Study::Regression => {
            let r = regress_local(&subjects, &ctx.config)?;
            let mut csv = Vec::new();
            r.write_csv(&mut csv).expect("in-memory write");
            ("regress-local", to_json(&r)?, csv, format!("{} regressions", r.rows.len()))
        }
    };
    let stem = a.out.unwrap_or_else(|| PathBuf::from(task));
    let json_path = ctx.out(&stem.with_extension("json"))?;
    let csv_path = ctx.out(&stem.with_extension("csv"))?;
    write_text(&json_path, &json)?;
    fs::write(&csv_path, csv).map_err(|e| Error::io(&csv_path, e))?;
    println!("{task}: {summary}; report {}", json_path.display());
    Ok(())
}

fn phantom(ctx: Ctx, a: PhantomArgs) -> Result<()> {
    let spec = PhantomSpec::from_json(&read_text(&a.spec)?)?;
    let mesh: Mesh = generate_phantom(&spec)?;
    write_mesh(&mesh, &ctx.out(&a.out)?)?;
    if let Some(v) = &a.volume_out {
        let raster = RasterOptions {
            spacing: a.spacing,
            noise_sigma: a.noise,
            ..RasterOptions::default()
        };
        let volume = phantom_volume::<f64>(&spec, &raster)?;
        let raw = ctx.out(v)?;
        save_volume(&volume, &raw, sidecar_path(&raw), RawDtype::F32)?;
    }
    if let Some(l) = &a.landmarks_out {
        write_text(&ctx.out(l)?, &(spec.canonical_landmarks::<f64>().to_json() + "\n"))?;
    }
    Ok(())
}

fn report(ctx: Ctx, a: crate::ReportArgs) -> Result<()> {
    let cm: ConfusionMatrix = a.confusion.parse()?;
    let json = to_json(&cm.summary())?;
    match &a.out {
        Some(p) => write_text(&ctx.out(p)?, &json)?,
        None => print!("{json}"),
    }
    Ok(())
}
