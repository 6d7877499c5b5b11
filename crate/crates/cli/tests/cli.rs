use std::path::Path;
use std::process::{Command, Output};

fn lvshape(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lvshape"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = lvshape(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn write_spec(dir: &Path, name: &str, seed: u64, diseased: bool) {
    let bumps = if diseased {
        r#"{"count": 20, "amplitude": 1.0, "wavelength": 6.0, "polarity": "outward"}"#
    } else {
        r#"{"count": 150, "amplitude": 1.0, "wavelength": 2.5, "polarity": "inward"}"#
    };
    let spec = format!(
        r#"{{"base": "half_ellipsoid_shell", "radii": [12, 12, 24], "bumps": {bumps}, "seed": {seed}, "subdivisions": 3}}"#
    );
    std::fs::write(dir.join(name), spec).unwrap();
}

#[test]
fn report_prints_exact_and_rounded_rates() {
    let dir = tempfile::tempdir().unwrap();
    let text = ok(dir.path(), &["report", "--confusion", "13,3,3,13"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["accuracy"]["exact"], "13/16");
    assert_eq!(v["accuracy"]["value"], 0.8125);
    assert_eq!(v["false_alarm_rate"]["percent"], 18.75);
    assert_eq!(v["miss_rate"]["percent"], 18.75);
    assert_eq!(v["matrix"], serde_json::json!([[13, 3], [3, 13]]));

    ok(dir.path(), &["report", "--confusion", "14,2,3,13", "--out", "r.json"]);
    let saved: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(saved["accuracy"]["percent"], 84.37);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| lvshape(dir.path(), args).status.code();
    assert_eq!(code(&["report", "--confusion", "1,2,3"]), Some(1));
    assert_eq!(code(&["no-such-command"]), Some(1));
    assert_eq!(code(&["report", "--confusion", "1,2,3,4", "--bogus"]), Some(1));
    assert_eq!(code(&["smooth", "--mesh", "missing.off", "--out", "x.off"]), Some(2));
    assert_eq!(code(&["--help"]), Some(0));
}

#[test]
fn phantom_features_vocabulary_histogram() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_spec(d, "spec.json", 3, false);
    ok(d, &["phantom", "--spec", "spec.json", "--out", "p.off", "--landmarks-out", "p_marks.json"]);
    ok(d, &["partition", "--mesh", "p.off", "--landmarks", "p_marks.json", "--out", "labels.csv"]);
    let labels = std::fs::read_to_string(d.join("labels.csv")).unwrap();
    assert!(labels.lines().skip(1).all(|l| {
        let s: u8 = l.split(',').nth(1).unwrap().parse().unwrap();
        (1..=17).contains(&s)
    }));

    ok(d, &["features", "--mesh", "p.off", "--labels", "labels.csv", "--samples", "40", "--out", "f.csv"]);
    let features = std::fs::read_to_string(d.join("f.csv")).unwrap();
    let header: Vec<&str> = features.lines().next().unwrap().split(',').collect();
    assert_eq!(header.len(), 2 + 23);
    assert_eq!(&header[..5], ["segment_id", "vertex_id", "I", "C", "theta"]);

    ok(d, &["vocab", "--features", "f.csv", "--k", "20", "--out", "vocab.json"]);
    ok(d, &["histogram", "--features", "f.csv", "--vocab", "vocab.json", "--out", "h.csv"]);
    let hist = std::fs::read_to_string(d.join("h.csv")).unwrap();
    let mut rows = hist.lines();
    assert_eq!(rows.next().unwrap().split(',').count(), 20);
    let row: Vec<f64> = rows.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(row.len(), 20);
    assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);

    ok(d, &["d2", "--mesh", "p.off", "--pairs", "2000", "--out", "d2.csv"]);
    ok(d, &["smooth", "--mesh", "p.off", "--out", "s.ply"]);
}

#[test]
fn volume_to_mesh_from_rendered_phantom() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_spec(d, "spec.json", 4, true);
    ok(d, &["phantom", "--spec", "spec.json", "--out", "p.off", "--volume-out", "p.raw", "--spacing", "1.0"]);
    ok(d, &["volume-to-mesh", "--volume", "p.raw", "--iso", "0.5", "--out", "m.obj"]);
    let obj = std::fs::read_to_string(d.join("m.obj")).unwrap();
    assert!(obj.lines().filter(|l| l.starts_with("f ")).count() > 100);
}

#[test]
fn classify_global_reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut entries = Vec::new();
    for i in 0..6 {
        let diseased = i % 2 == 1;
        let spec = format!("s{i}.json");
        write_spec(d, &spec, 40 + i, diseased);
        let mesh = format!("p{i}.off");
        let marks = format!("p{i}_marks.json");
        ok(d, &["phantom", "--spec", &spec, "--out", &mesh, "--landmarks-out", &marks]);
        let lad = if diseased { 90 } else { 10 };
        entries.push(format!(
            r#"{{"id": "p{i}", "mesh": "{mesh}", "landmarks": "{marks}", "ds": {{"lad": {lad}, "lcx": 0, "rca": 0}}}}"#
        ));
    }
    std::fs::write(d.join("manifest.json"), format!(r#"{{"subjects": [{}]}}"#, entries.join(","))).unwrap();

    let args = ["classify-global", "--manifest", "manifest.json", "--samples", "40", "--vocabulary-k", "8", "--seed", "3"];
    ok(d, &[&args[..], &["--out", "a"]].concat());
    ok(d, &[&args[..], &["--out", "b"]].concat());
    let a = std::fs::read(d.join("a.json")).unwrap();
    assert_eq!(a, std::fs::read(d.join("b.json")).unwrap());
    assert_eq!(std::fs::read(d.join("a.csv")).unwrap(), std::fs::read(d.join("b.csv")).unwrap());

    let v: serde_json::Value = serde_json::from_slice(&a).unwrap();
    let m = v["confusion"]["matrix"].as_array().unwrap();
    assert_eq!(m.len(), 2);
    let total: u64 = m.iter().flat_map(|r| r.as_array().unwrap()).map(|x| x.as_u64().unwrap()).sum();
    assert_eq!(total, 6);
    assert!(v["confusion"]["accuracy"]["value"].is_number());
    assert_eq!(v["predictions"].as_array().unwrap().len(), 6);

    ok(d, &["classify-local", "--manifest", "manifest.json", "--samples", "40", "--vocabulary-k", "8", "--out", "local"]);
    let local = std::fs::read_to_string(d.join("local.csv")).unwrap();
    assert_eq!(local.lines().count(), 1 + 17);
    ok(d, &["regress-local", "--manifest", "manifest.json", "--samples", "40", "--vocabulary-k", "8", "--out", "reg"]);
    assert!(d.join("reg.json").exists());
}
