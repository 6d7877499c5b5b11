//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use lvshape::aha::{partition_17, SegmentLabeling};
use lvshape::bof::{build_vocabulary, quantize, KMeansParams, Scope};
use lvshape::descriptors::d2::{d2_from_points, D2_RANGE};
use lvshape::descriptors::{
    curvedness, estimate_curvatures, feature_vectors, shape_index, EdgeGraph, FeatureParams, FeatureVector,
};
use lvshape::learn::{
    loo_vectors, mlp_train, mvr_fit, pearson_correlation, truncated_decimal, Classifier, ConfusionMatrix, Label,
    MlpModel, MlpParams,
};
use lvshape::mesh::phantom::{generate_phantom, BaseShape, BumpField, PhantomSpec, Polarity, RasterOptions};
use lvshape::mesh::primitives::{icosphere, sheet, torus};
use lvshape::mesh::transform::{rigid_transform, RigidTransform};
use lvshape::mesh::{TriangleMesh, Vec3};
use lvshape::pipeline::{classify_global, phantom_subject, PipelineConfig, StenosisValues, Subject};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, UnitSphere};

struct Check {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Self { failures: Vec::new(), notes: Vec::new() }
    }

    fn ensure(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn note(&mut self, what: impl Into<String>) {
        self.notes.push(what.into());
    }

    fn within(&mut self, elapsed: Duration, limit: Duration) {
        self.ensure(elapsed <= limit, format!("runtime {elapsed:.2?} exceeds {limit:?}"));
        self.note(format!("{elapsed:.2?}"));
    }
}

// ---------------------------------------------------------------------------

fn metric_reproduction(c: &mut Check) {
    let t = Instant::now();
    let cases = [
        ((13, 3, 3, 13), "81.25", Some(("18.75", "18.75"))),
        ((14, 2, 3, 13), "84.37", None),
        ((14, 2, 1, 15), "90.62", Some(("6.25", "12.50"))),
    ];
    for ((a, b, d, e), acc, rates) in cases {
        let cm = ConfusionMatrix::from_counts(a, b, d, e);
        let accuracy = cm.accuracy().unwrap();
        c.ensure(accuracy == Ratio::new(a + e, a + b + d + e), "accuracy is not trace/total");
        let pct = |r: Ratio<u64>| truncated_decimal(r * 100, 2);
        c.ensure(pct(accuracy) == acc, format!("({a},{b},{d},{e}) accuracy {} != {acc}", pct(accuracy)));
        if let Some((fa, miss)) = rates {
            let got_fa = pct(cm.false_alarm_rate().unwrap());
            let got_miss = pct(cm.miss_rate().unwrap());
            c.ensure(got_fa == fa, format!("false alarm {got_fa} != {fa}"));
            c.ensure(got_miss == miss, format!("miss {got_miss} != {miss}"));
        }
    }
    let s = ConfusionMatrix::from_counts(13, 3, 3, 13).summary();
    c.ensure(s.accuracy.as_ref().map(|a| a.value) == Some(0.8125), "summary accuracy is not 0.8125");
    c.ensure(
        ConfusionMatrix::from_counts(14, 2, 1, 15).miss_rate() == Some(Ratio::new(1, 8)),
        "miss rate of (14,2,1,15) is not exactly 1/8",
    );
    c.within(t.elapsed(), Duration::from_secs(1));
}

fn curvature_oracle(c: &mut Check) {
    let t = Instant::now();
    let sphere = icosphere(2.0f64, 4);
    let k = estimate_curvatures(&sphere, 2).unwrap();
    let n = sphere.vertex_count();
    let close = |x: f64, target: f64, tol: f64| (x - target).abs() <= tol * target.abs();
    let principal = (0..n)
        .filter(|&v| k.valid[v] && close(k.k1[v], 0.5, 0.05) && close(k.k2[v], 0.5, 0.05))
        .count();
    let curved = (0..n)
        .filter(|&v| k.valid[v] && close(curvedness(k.k1[v], k.k2[v]), 0.5, 0.05))
        .count();
    let frac = principal as f64 / n as f64;
    let frac_c = curved as f64 / n as f64;
    c.ensure(frac >= 0.95, format!("sphere: only {:.1}% of vertices within 5%", 100.0 * frac));
    c.ensure(frac_c >= 0.95, format!("sphere curvedness: only {:.1}% within 5%", 100.0 * frac_c));
    c.note(format!("sphere {:.1}% / curvedness {:.1}%", 100.0 * frac, 100.0 * frac_c));

    let (major, minor, v_steps) = (3.0f64, 1.0f64, 40);
    let tor = torus(major, minor, 120, v_steps);
    let kt = estimate_curvatures(&tor, 2).unwrap();
    let band: Vec<usize> = (0..120).map(|i| i * v_steps).collect();
    let (e1, e2) = band.iter().fold((0.0f64, 0.0f64), |(a, b), &v| {
        (a.max((kt.k1[v] - 1.0).abs()), b.max((kt.k2[v] - 0.25).abs() / 0.25))
    });
    c.ensure(band.iter().all(|&v| kt.valid[v]), "torus band has invalid fits");
    c.ensure(e1 <= 0.1, format!("torus k1 relative error {e1:.4}"));
    c.ensure(e2 <= 0.1, format!("torus k2 relative error {e2:.4}"));
    c.note(format!("torus max rel err k1 {e1:.4}, k2 {e2:.4}"));
    c.within(t.elapsed(), Duration::from_secs(10));
}

fn shape_index_formula(c: &mut Check) {
    let text = include_str!("data/shape_index_oracle.csv");
    let mut worst = 0.0f64;
    let mut rows = 0;
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let (k1, k2): (f64, f64) = (f[0].parse().unwrap(), f[1].parse().unwrap());
        let expected: f64 = f[2].parse().unwrap();
        let got = shape_index(k1, k2).unwrap();
        worst = worst.max((got - expected).abs());
        rows += 1;
    }
    c.ensure(rows == 10_000, format!("oracle has {rows} rows"));
    c.ensure(worst < 1e-12, format!("max abs error {worst:e}"));
    c.note(format!("max abs error {worst:.2e}"));
    c.ensure(shape_index(0.5f64, 0.5).unwrap() == 0.0, "convex umbilic is not 0");
    c.ensure(shape_index(-0.5f64, -0.5).unwrap() == 1.0, "concave umbilic is not 1");
    c.ensure(shape_index(0.0f64, 0.0).unwrap() == 0.5, "planar point is not 0.5");
    c.ensure(shape_index(1.0f64, -1.0).unwrap() == 0.5, "symmetric saddle is not 0.5");
    c.ensure(shape_index(1.0f64, 2.0).is_err(), "k1 < k2 accepted");
}

fn geodesic_oracle(c: &mut Check) {
    let t = Instant::now();
    let m = icosphere(1.0f64, 4);
    let g = EdgeGraph::from_mesh(&m);
    let p = m.vertices()[0];
    let anti = (0..m.vertex_count())
        .min_by(|&a, &b| (m.vertices()[a] + p).norm().total_cmp(&(m.vertices()[b] + p).norm()))
        .unwrap();
    let d = g.distances(0, &[anti]).unwrap()[0];
    let pi = std::f64::consts::PI;
    c.ensure((d - pi).abs() / pi <= 0.06, format!("antipodal distance {d:.4}"));
    c.note(format!("antipodal {d:.4} (π·{:.4})", d / pi));

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = m.vertex_count();
    let (mut sym, mut tri) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let (a, b, x) = (rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n));
        let da = g.distances(a, &[b, x]).unwrap();
        let db = g.distances(b, &[a, x]).unwrap();
        sym = sym.max((da[0] - db[0]).abs());
        tri = tri.max(da[0] - (da[1] + db[1]));
    }
    c.ensure(sym <= 1e-9, format!("asymmetry {sym:e}"));
    c.ensure(tri <= 1e-9, format!("triangle inequality violated by {tri:e}"));
    c.within(t.elapsed(), Duration::from_secs(10));
}

fn d2_analytic(c: &mut Check) {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let pts: Vec<Vec3<f64>> = (0..20_000)
        .map(|_| {
            let [x, y, z]: [f64; 3] = UnitSphere.sample(&mut rng);
            Vec3::new(x, y, z)
        })
        .collect();
    let bins = 30;
    let h = d2_from_points(&pts, 100_000, bins, 9).unwrap();
    // chord length on the unit sphere: p(d) = d/2 on [0, 2], mean 4/3
    let mean = 4.0 / 3.0;
    let cdf = |d: f64| (d.clamp(0.0, 2.0) / 2.0).powi(2);
    let width = D2_RANGE / bins as f64 * mean;
    let gap = h
        .frequencies
        .iter()
        .enumerate()
        .map(|(i, f)| (f - (cdf((i + 1) as f64 * width) - cdf(i as f64 * width))).abs())
        .fold(0.0, f64::max);
    c.ensure(gap < 0.02, format!("L∞ gap {gap:.4}"));
    c.note(format!("L∞ gap {gap:.4}, mean {:.4}", h.mean_distance));
    c.within(t.elapsed(), Duration::from_secs(5));
}

fn all_in_one_segment(n: usize) -> SegmentLabeling {
    SegmentLabeling::from_labels(vec![1; n]).unwrap()
}

fn features_of(mesh: &TriangleMesh<f64>, labeling: &SegmentLabeling, seg: u8, params: &FeatureParams) -> Vec<FeatureVector<f64>> {
    let k = estimate_curvatures(mesh, params.ring_depth).unwrap();
    let g = EdgeGraph::from_mesh(mesh);
    feature_vectors(mesh, &k, &g, labeling, seg, params).unwrap().vectors
}

fn isometry_invariance(c: &mut Check) {
    let spec = PhantomSpec {
        base: BaseShape::Ellipsoid,
        radii: [10.0, 8.0, 16.0],
        bumps: BumpField { count: 40, amplitude: 0.8, wavelength: 4.0, polarity: Polarity::Mixed },
        seed: 5,
        subdivisions: 4,
    };
    let mesh: TriangleMesh<f64> = generate_phantom(&spec).unwrap();
    let labeling = partition_17(&mesh, &spec.canonical_landmarks()).unwrap();
    let params = FeatureParams { samples: 120, seed: 3, ..FeatureParams::default() };
    let motion = RigidTransform::rotation(Vec3::y(), 0.7).with_translation(Vec3::new(5.0, -3.0, 2.0));
    let moved = rigid_transform(&mesh, &motion).unwrap();
    let s = 2.5;
    let scaled = rigid_transform(&mesh, &RigidTransform::identity().with_scale(s)).unwrap();
    let (mut d_rigid, mut d_scale) = (0.0f64, 0.0f64);
    for seg in [1u8, 9, 14, 17] {
        let a = features_of(&mesh, &labeling, seg, &params);
        let b = features_of(&moved, &labeling, seg, &params);
        let z = features_of(&scaled, &labeling, seg, &params);
        c.ensure(a.len() == b.len() && a.len() == z.len(), "sample sets differ");
        for ((fa, fb), fz) in a.iter().zip(&b).zip(&z) {
            c.ensure(fa.vertex == fb.vertex && fa.vertex == fz.vertex, "sampled vertices differ");
            d_rigid = d_rigid
                .max((fa.shape_index - fb.shape_index).abs())
                .max((fa.curvedness - fb.curvedness).abs())
                .max((fa.orientation - fb.orientation).abs());
            for (x, y) in fa.gcd.iter().zip(&fb.gcd) {
                d_rigid = d_rigid.max((x - y).abs());
            }
            d_scale = d_scale.max((fz.curvedness * s - fa.curvedness).abs() / fa.curvedness);
        }
    }
    c.ensure(d_rigid <= 1e-6, format!("rigid drift {d_rigid:e}"));
    c.ensure(d_scale <= 1e-6, format!("curvedness scaling drift {d_scale:e}"));

    let (nx, ny, h) = (61, 25, 0.25);
    let flat = sheet(nx, ny, h, None);
    let bent = sheet(nx, ny, h, Some(3.0));
    let labels = all_in_one_segment(flat.vertex_count());
    let p = FeatureParams { samples: 300, seed: 11, ..FeatureParams::default() };
    let fa = features_of(&flat, &labels, 1, &p);
    let fb = features_of(&bent, &labels, 1, &p);
    let mut worst = 0.0f64;
    for a in &fa {
        if let Some(b) = fb.iter().find(|b| b.vertex == a.vertex) {
            let l1: f64 = a.gcd.iter().zip(&b.gcd).map(|(x, y)| (x - y).abs()).sum();
            worst = worst.max(l1);
        }
    }
    c.ensure(!fa.is_empty() && fa.len() == fb.len(), "bend test sample sets differ");
    c.ensure(worst <= 0.1, format!("bend GCD L1 drift {worst:.4}"));
    c.note(format!("rigid {d_rigid:.1e}, scale {d_scale:.1e}, bend L1 {worst:.4}"));
}

fn blobs(seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = Normal::new(0.0, 0.1).unwrap();
    (0..1000)
        .map(|i| {
            let centre = if i < 500 { 0.0 } else { 10.0 };
            (0..23).map(|_| centre + n.sample(&mut rng)).collect()
        })
        .collect()
}

fn kmeans_contract(c: &mut Check) {
    let data = blobs(21);
    let params = KMeansParams { k: 2, seed: 5, max_iter: 100, standardize: true };
    let v = build_vocabulary(&data, &params).unwrap();
    c.ensure(v.inertia.windows(2).all(|w| w[1] <= w[0]), format!("inertia increased: {:?}", v.inertia));
    let mut raw = v.raw_centroids();
    raw.sort_by(|a, b| a[0].total_cmp(&b[0]));
    for (centroid, blob) in raw.iter().zip([&data[..500], &data[500..]]) {
        let dev = (0..23)
            .map(|j| (centroid[j] - blob.iter().map(|x| x[j]).sum::<f64>() / 500.0).abs())
            .fold(0.0, f64::max);
        c.ensure(dev <= 0.05, format!("centroid off its blob mean by {dev:.4}"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let cloud: Vec<Vec<f64>> = (0..3000).map(|_| (0..23).map(|_| rng.random::<f64>()).collect()).collect();
    let p20 = KMeansParams { k: 20, seed: 9, ..KMeansParams::default() };
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let v = build_vocabulary(&cloud, &p20).unwrap();
            let h = quantize(&cloud, &v, Scope::Surface).unwrap();
            (v, h)
        })
    };
    let (v1, h1) = run(1);
    let (v4, h4) = run(4);
    let bits = |v: &lvshape::bof::Vocabulary<f64>| -> Vec<u64> { v.centroids.iter().flatten().map(|x| x.to_bits()).collect() };
    c.ensure(bits(&v1) == bits(&v4), "centroids differ between 1 and 4 threads");
    c.ensure(h1 == h4, "histograms differ between 1 and 4 threads");
    c.ensure(v1.inertia.windows(2).all(|w| w[1] <= w[0]), "inertia increased on the 20-word run");
    c.note(format!("{} Lloyd iterations", v1.iterations));
}

fn learning_oracles(c: &mut Check) {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let labels: Vec<Label> = (0..20).map(|i| Label::from_diseased(i % 2 == 0)).collect();
    let x: Vec<Vec<f64>> = labels
        .iter()
        .map(|l| {
            let centre = if l.is_diseased() { 3.0 } else { -3.0 };
            (0..6).map(|_| centre + rng.random_range(-1.0..1.0)).collect()
        })
        .collect();
    let out = loo_vectors(&Classifier::LdaKnn { k: 1 }, &x, &labels).unwrap();
    c.ensure(out.confusion.accuracy() == Some(Ratio::new(1, 1)), format!("LDA+1-NN LOO {:?}", out.confusion));

    // gradient check at 10 random parameter points
    let data: Vec<Vec<f64>> = (0..8).map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let targets: Vec<f64> = (0..8).map(|i| (i % 2) as f64).collect();
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let mut model = MlpModel::<f64>::zeros(3, 4);
        let p: Vec<f64> = (0..model.param_count()).map(|_| rng.random_range(-1.0..1.0)).collect();
        model.set_params(&p).unwrap();
        let (_, g) = model.loss_and_gradient(&data, &targets);
        let h = 1e-5;
        for i in 0..p.len() {
            let mut probe = model.clone();
            let mut q = p.clone();
            q[i] += h;
            probe.set_params(&q).unwrap();
            let up = probe.loss_and_gradient(&data, &targets).0;
            q[i] -= 2.0 * h;
            probe.set_params(&q).unwrap();
            let down = probe.loss_and_gradient(&data, &targets).0;
            let fd = (up - down) / (2.0 * h);
            let rel = (fd - g[i]).abs() / (fd.abs() + g[i].abs()).max(1e-10);
            worst = worst.max(rel);
        }
    }
    c.ensure(worst < 1e-4, format!("MLP gradient relative error {worst:e}"));

    let xor = vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]];
    let xl: Vec<Label> = [false, true, true, false].map(Label::from_diseased).to_vec();
    let mlp = mlp_train(&xor, &xl, &MlpParams { hidden: 4, epochs: 5000, ..MlpParams::default() }).unwrap();
    let correct = xor.iter().zip(&xl).filter(|(x, l)| mlp.predict(x).unwrap().1 == **l).count();
    c.ensure(correct == 4, format!("XOR training accuracy {correct}/4"));

    let beta: Vec<f64> = (0..21).map(|_| rng.random_range(-3.0..3.0)).collect();
    let xs: Vec<Vec<f64>> = (0..40).map(|_| (0..20).map(|_| rng.random::<f64>()).collect()).collect();
    let y: Vec<f64> = xs
        .iter()
        .map(|r| beta[0] + r.iter().zip(&beta[1..]).map(|(a, b)| a * b).sum::<f64>())
        .collect();
    let model = mvr_fit(&xs, &y, 0.0).unwrap();
    let err = model.coefficients.iter().zip(&beta).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    c.ensure(err <= 1e-6, format!("planted β recovered within {err:e}"));
    let est: Vec<f64> = xs.iter().map(|r| model.predict(r).unwrap()).collect();
    let r = pearson_correlation(&est, &y).unwrap();
    c.ensure(format!("{r:.4}") == "1.0000" && (1.0 - r).abs() <= 1e-12, format!("Pearson r = {r}"));
    c.note(format!("grad rel err {worst:.1e}, β err {err:.1e}, r = {r}"));
}

// ---------------------------------------------------------------------------

const STUDY_SIZE: usize = 20;

fn study_config() -> PipelineConfig {
    PipelineConfig { seed: 1, ..PipelineConfig::default() }
}

/// Normal ventricles carry dense, high-amplitude inward trabeculation;
/// diseased ones are smoother with a few broad outward bulges.
fn study_cohort() -> Vec<(String, StenosisValues, PhantomSpec)> {
    (0..STUDY_SIZE)
        .map(|i| {
            let diseased = i % 2 == 1;
            let bumps = if diseased {
                BumpField { count: 60, amplitude: 1.0, wavelength: 8.0, polarity: Polarity::Outward }
            } else {
                BumpField { count: 400, amplitude: 1.0, wavelength: 2.5, polarity: Polarity::Inward }
            };
            let high = 70.0 + 3.0 * i as f64 / 2.0;
            let low = 5.0 * (i % 7) as f64;
            let ds = match (diseased, i % 3) {
                (false, _) => StenosisValues { lad: low, lcx: 10.0, rca: 40.0 },
                (true, 0) => StenosisValues { lad: high, lcx: low, rca: 20.0 },
                (true, 1) => StenosisValues { lad: 30.0, lcx: high, rca: low },
                (true, _) => StenosisValues { lad: low, lcx: 15.0, rca: high },
            };
            let spec = PhantomSpec {
                base: BaseShape::HalfEllipsoidShell,
                radii: [15.0, 15.0, 30.0],
                bumps,
                seed: 100 + i as u64,
                subdivisions: 4,
            };
            (format!("phantom-{i:02}"), ds, spec)
        })
        .collect()
}

fn run_study() -> (String, f64) {
    let config = study_config();
    let raster = RasterOptions::default();
    let subjects: Vec<Subject<f64>> = study_cohort()
        .into_iter()
        .map(|(id, ds, spec)| phantom_subject(id, ds, &spec, &raster, &config).unwrap().0)
        .collect();
    let report = classify_global(&subjects, &config).unwrap();
    let accuracy = report.confusion.accuracy.as_ref().map_or(0.0, |a| a.value);
    (serde_json::to_string_pretty(&report).unwrap(), accuracy)
}

fn phantom_study(c: &mut Check, first: &mut Option<String>) {
    let t = Instant::now();
    let (json, accuracy) = run_study();
    c.ensure(accuracy >= 0.9, format!("LOO accuracy {accuracy}"));
    c.note(format!("accuracy {accuracy}"));
    c.within(t.elapsed(), Duration::from_secs(300));
    *first = Some(json);
}

fn pipeline_determinism(c: &mut Check, first: &Option<String>) {
    let Some(first) = first else {
        c.ensure(false, "criterion 9 produced no report to compare against");
        return;
    };
    let (second, _) = run_study();
    c.ensure(&second == first, "rerun report differs");
    c.note(format!("{} identical bytes", first.len()));
}

fn main() {
    let mut report: Option<String> = None;
    let mut failed = 0;
    let mut run = |n: usize, title: &str, f: &mut dyn FnMut(&mut Check)| {
        let mut c = Check::new();
        let t = Instant::now();
        if let Err(e) = catch_unwind(AssertUnwindSafe(|| f(&mut c))) {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            c.failures.push(format!("panicked: {msg}"));
        }
        let status = if c.failures.is_empty() { "PASS" } else { "FAIL" };
        let detail = if c.failures.is_empty() { c.notes.join("; ") } else { c.failures.join("; ") };
        println!("criterion {n:>2} {title}: {status} [{:.2?}] {detail}", t.elapsed());
        if !c.failures.is_empty() {
            failed += 1;
        }
    };
    run(1, "metric reproduction", &mut metric_reproduction);
    run(2, "curvature/descriptor oracle", &mut curvature_oracle);
    run(3, "shape-index formula", &mut shape_index_formula);
    run(4, "geodesic oracle", &mut geodesic_oracle);
    run(5, "D2 analytic check", &mut d2_analytic);
    run(6, "isometry invariance", &mut isometry_invariance);
    run(7, "k-means contract", &mut kmeans_contract);
    run(8, "learning oracles", &mut learning_oracles);
    run(9, "end-to-end phantom study", &mut |c| phantom_study(c, &mut report));
    let snapshot = report.clone();
    run(10, "pipeline determinism", &mut |c| pipeline_determinism(c, &snapshot));
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 10 acceptance criteria passed");
}
