use lvshape::aha::partition_17;
use lvshape::bof::{build_vocabulary, quantize, KMeansParams, Scope};
use lvshape::descriptors::{shape_index, EdgeGraph};
use lvshape::learn::{knn_classify, loo_vectors, mvr_fit, pearson_correlation, Classifier, Label};
use lvshape::mesh::io::{load_mesh, read_mesh, save_mesh, write_mesh, MeshFormat};
use lvshape::mesh::phantom::{generate_phantom, BaseShape, BumpField, PhantomSpec, Polarity};
use lvshape::mesh::primitives::icosphere;
use lvshape::mesh::transform::{rigid_transform, RigidTransform};
use lvshape::mesh::{TriangleMesh, Vec3};
use lvshape::volume::{median_filter, ScalarVolume};
use proptest::prelude::*;

fn jittered_sphere(seed: u64, amp: f64) -> TriangleMesh<f64> {
    let m = icosphere(1.0f64, 1);
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
    let v = m
        .vertices()
        .iter()
        .map(|p| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let u = (state >> 11) as f64 / (1u64 << 53) as f64;
            p * (1.0 + amp * (u - 0.5))
        })
        .collect();
    m.with_vertices(v).unwrap()
}

fn phantom() -> (TriangleMesh<f64>, PhantomSpec) {
    let spec = PhantomSpec {
        base: BaseShape::Ellipsoid,
        radii: [10.0, 9.0, 18.0],
        bumps: BumpField { count: 10, amplitude: 0.5, wavelength: 4.0, polarity: Polarity::Mixed },
        seed: 2,
        subdivisions: 3,
    };
    (generate_phantom(&spec).unwrap(), spec)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn mesh_text_formats_round_trip(seed in any::<u64>(), amp in 0.0f64..0.5) {
        let m = jittered_sphere(seed, amp);
        for format in [MeshFormat::Off, MeshFormat::Ply, MeshFormat::Obj] {
            let mut buf = Vec::new();
            write_mesh(&m, &mut buf, format).unwrap();
            let back: TriangleMesh<f64> = read_mesh(buf.as_slice(), format).unwrap();
            prop_assert_eq!(back.faces(), m.faces());
            prop_assert_eq!(back.vertices(), m.vertices());
        }
    }

    #[test]
    fn median_stays_within_input_range(
        values in prop::collection::vec(-100.0f64..100.0, 4 * 5 * 3),
        kx in 0usize..3, ky in 0usize..3, kz in 0usize..2,
    ) {
        let vol = ScalarVolume::new([4, 5, 3], [1.0; 3], [0.0; 3], values).unwrap();
        let out = median_filter(&vol, [2 * kx + 1, 2 * ky + 1, 2 * kz + 1]).unwrap();
        let (lo, hi) = vol.min_max();
        prop_assert!(out.values().iter().all(|&v| v >= lo && v <= hi));
        prop_assert_eq!(out.dims(), vol.dims());
    }

    #[test]
    fn pearson_is_bounded_and_affine_invariant(
        a in prop::collection::vec(-10.0f64..10.0, 3..40),
        noise in prop::collection::vec(-10.0f64..10.0, 40),
        scale in 0.1f64..10.0, shift in -10.0f64..10.0,
    ) {
        let b: Vec<f64> = a.iter().zip(&noise).map(|(x, n)| x + n).collect();
        if let Ok(r) = pearson_correlation(&a, &b) {
            prop_assert!((-1.0..=1.0).contains(&r));
            let a2: Vec<f64> = a.iter().map(|x| scale * x + shift).collect();
            let r2 = pearson_correlation(&a2, &b).unwrap();
            prop_assert!((r - r2).abs() < 1e-9);
            let neg: Vec<f64> = a.iter().map(|x| -x).collect();
            prop_assert!((pearson_correlation(&neg, &b).unwrap() + r).abs() < 1e-9);
        }
    }

    #[test]
    fn shape_index_lies_in_unit_interval(x in -1e3f64..1e3, y in -1e3f64..1e3) {
        let (k1, k2) = if x >= y { (x, y) } else { (y, x) };
        let s = shape_index(k1, k2).unwrap();
        prop_assert!((0.0..=1.0).contains(&s));
        let mirrored = shape_index(-k2, -k1).unwrap();
        prop_assert!((s + mirrored - 1.0).abs() < 1e-12);
    }

    #[test]
    fn knn_recovers_training_points(
        train in prop::collection::btree_set(-1000i32..1000, 1..30),
        flips in prop::collection::vec(any::<bool>(), 30),
    ) {
        let train: Vec<f64> = train.into_iter().map(f64::from).collect();
        let labels: Vec<Label> = flips.iter().take(train.len()).map(|&d| Label::from_diseased(d)).collect();
        for (x, l) in train.iter().zip(&labels) {
            prop_assert_eq!(knn_classify(&train, &labels, *x, 1).unwrap(), *l);
        }
    }

    #[test]
    fn lda_knn_loo_ignores_affine_rescaling(
        seed in any::<u64>(), scale in 0.5f64..20.0, shift in -50.0f64..50.0,
    ) {
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let labels: Vec<Label> = (0..12).map(|i| Label::from_diseased(i % 2 == 0)).collect();
        let x: Vec<Vec<f64>> = labels
            .iter()
            .map(|l| (0..3).map(|_| next() + if l.is_diseased() { 0.8 } else { 0.0 }).collect())
            .collect();
        let moved: Vec<Vec<f64>> = x.iter().map(|r| r.iter().map(|v| scale * v + shift).collect()).collect();
        let classifier = Classifier::LdaKnn { k: 1 };
        let a = loo_vectors(&classifier, &x, &labels).unwrap();
        let b = loo_vectors(&classifier, &moved, &labels).unwrap();
        prop_assert_eq!(a.predictions, b.predictions);
    }

    #[test]
    fn quantize_ignores_feature_order(seed in any::<u64>(), rot in 1usize..59) {
        let mut state = seed;
        let data: Vec<Vec<f64>> = (0..60)
            .map(|_| {
                (0..4)
                    .map(|_| {
                        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                        (state >> 11) as f64 / (1u64 << 53) as f64
                    })
                    .collect()
            })
            .collect();
        let vocab = build_vocabulary(&data, &KMeansParams { k: 5, seed: 1, ..KMeansParams::default() }).unwrap();
        let mut shuffled = data.clone();
        shuffled.rotate_left(rot);
        shuffled.reverse();
        let h = quantize(&data, &vocab, Scope::Surface).unwrap();
        let g = quantize(&shuffled, &vocab, Scope::Surface).unwrap();
        prop_assert_eq!(h.frequencies, g.frequencies);
    }

    #[test]
    fn regression_residuals_are_orthogonal_to_inputs(seed in any::<u64>(), m in 8usize..30) {
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let x: Vec<Vec<f64>> = (0..m).map(|_| (0..4).map(|_| next()).collect()).collect();
        let y: Vec<f64> = (0..m).map(|_| next() * 10.0).collect();
        let model = mvr_fit(&x, &y, 0.0).unwrap();
        let res: Vec<f64> = x.iter().zip(&y).map(|(r, t)| t - model.predict(r).unwrap()).collect();
        prop_assert!(res.iter().sum::<f64>().abs() < 1e-8);
        for j in 0..4 {
            let dot: f64 = x.iter().zip(&res).map(|(r, e)| r[j] * e).sum();
            prop_assert!(dot.abs() < 1e-8, "column {} dot {}", j, dot);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn partition_follows_rigid_motion(
        ax in -1.0f64..1.0, ay in -1.0f64..1.0, az in 0.1f64..1.0,
        angle in -3.0f64..3.0, t in prop::array::uniform3(-20.0f64..20.0),
    ) {
        let (mesh, spec) = phantom();
        let marks = spec.canonical_landmarks();
        let motion = RigidTransform::rotation(Vec3::new(ax, ay, az), angle)
            .with_translation(Vec3::new(t[0], t[1], t[2]));
        let base = partition_17(&mesh, &marks).unwrap();
        let moved = partition_17(&rigid_transform(&mesh, &motion).unwrap(), &marks.transformed(&motion)).unwrap();
        let differing = base.labels().iter().zip(moved.labels()).filter(|(a, b)| a != b).count();
        // only vertices sitting on a segment boundary may flip
        prop_assert!(differing * 100 <= mesh.vertex_count(), "{} labels changed", differing);
    }

    #[test]
    fn geodesics_are_symmetric(a in 0usize..42, b in 0usize..42) {
        let m = jittered_sphere(a as u64, 0.3);
        let g = EdgeGraph::from_mesh(&m);
        let ab = g.distances(a, &[b]).unwrap()[0];
        let ba = g.distances(b, &[a]).unwrap()[0];
        prop_assert!((ab - ba).abs() <= 1e-12);
        prop_assert!(ab >= 0.0 && (a != b || ab == 0.0));
    }
}

#[test]
fn mesh_file_round_trip_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let m = jittered_sphere(7, 0.2);
    for name in ["m.off", "m.ply", "m.obj"] {
        let path = dir.path().join(name);
        let format = MeshFormat::from_path(&path).unwrap();
        save_mesh(&m, &path, format).unwrap();
        let back: TriangleMesh<f64> = load_mesh(&path, format).unwrap();
        assert_eq!(back.vertices(), m.vertices());
        assert_eq!(back.faces(), m.faces());
    }
    assert!(load_mesh::<f64>(dir.path().join("missing.off"), MeshFormat::Off).unwrap_err().is_io());
}
