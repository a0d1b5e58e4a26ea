use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use farsplit::farfield::FarField;
use farsplit::picard::squared_singular_value;
use farsplit::split_ls::SplitSolution;
use tempfile::TempDir;

const SCENE: &str = r#"{
  "version": 1, "k": 1.0, "grid_size": 256,
  "components": [
    { "center": [24.0, -4.0], "radius": 5.0, "generator": { "type": "modal" } },
    { "center": [-22.0, 23.0], "radius": 6.0, "generator": { "type": "modal" } },
    { "center": [-15.0, -20.0], "radius": 4.0, "generator": { "type": "modal" } }
  ],
  "omega": [[1.5707963267948966, 2.6179938779914944]],
  "noise": { "level": 0.0, "seed": 7 }
}"#;

fn farsplit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_farsplit"))
        .args(args)
        .env("FARSPLIT_THREADS", "2")
        .output()
        .expect("spawn farsplit")
}

fn ok(args: &[&str]) -> String {
    let out = farsplit(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn setup(scene: &str) -> (TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scene.json");
    fs::write(&path, scene).unwrap();
    (dir, path)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn rel_err_on(a: &FarField, b: &FarField, idx: &[usize]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for &j in idx {
        num += (a.samples()[j] - b.samples()[j]).norm_sqr();
        den += b.samples()[j].norm_sqr();
    }
    (num / den).sqrt()
}

#[test]
fn synth_writes_readable_outputs() {
    let (dir, scene) = setup(SCENE);
    let out = dir.path().join("csv");
    let msg = ok(&["synth", s(&scene), "--out", s(&out)]);
    assert!(msg.contains("samples=256"));
    for stem in ["gamma", "beta_truth", "clean"] {
        let f = FarField::read_csv(&out.join(format!("{stem}.csv"))).unwrap();
        assert_eq!(f.samples().len(), 256);
    }
    let truth: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("truth.json")).unwrap()).unwrap();
    assert_eq!(truth["components"].as_array().unwrap().len(), 3);

    let jdir = dir.path().join("json");
    ok(&["synth", s(&scene), "--out", s(&jdir), "--format", "json"]);
    let a = FarField::read_csv(&out.join("gamma.csv")).unwrap();
    let (b, k) = FarField::read_json(&jdir.join("gamma.json")).unwrap();
    assert_eq!(k, 1.0);
    let all: Vec<usize> = (0..256).collect();
    assert!(rel_err_on(&b, &a, &all) < 1e-12);
}

#[test]
fn complete_restores_missing_arc() {
    let (dir, scene) = setup(SCENE);
    let data = dir.path().join("data");
    ok(&["synth", s(&scene), "--out", s(&data)]);
    let out = dir.path().join("ls");
    let msg = ok(&[
        "complete",
        "--scene",
        s(&scene),
        "--gamma",
        s(&data.join("gamma.csv")),
        "--out",
        s(&out),
    ]);
    assert!(msg.contains("method=ls") && msg.contains("condition="));

    let truth = FarField::read_csv(&data.join("beta_truth.csv")).unwrap();
    let restored = FarField::read_csv(&out.join("restored.csv")).unwrap();
    let arc: Vec<usize> = truth
        .samples()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.norm() > 0.0)
        .map(|(j, _)| j)
        .collect();
    assert!(!arc.is_empty());
    // beta_truth holds the negated field on the arc
    let clean = FarField::read_csv(&data.join("clean.csv")).unwrap();
    assert!(rel_err_on(&truth.scale(farsplit::farfield::C64::new(-1.0, 0.0)), &clean, &arc) < 1e-14);
    let err = rel_err_on(&restored, &clean, &arc);
    assert!(err < 1e-3, "arc error {err}");

    let completed = FarField::read_csv(&out.join("completed.csv")).unwrap();
    let all: Vec<usize> = (0..256).collect();
    assert!(rel_err_on(&completed, &clean, &all) < 1e-3);

    let sol = SplitSolution::from_json(&fs::read_to_string(out.join("solution.json")).unwrap()).unwrap();
    assert_eq!(sol.alphas.len(), 3);
    for i in 1..=3 {
        assert!(out.join(format!("component_{i}.csv")).is_file());
    }
}

#[test]
fn l1_runs_are_byte_identical() {
    let (dir, scene) = setup(SCENE);
    let run = |name: &str| {
        let out = dir.path().join(name);
        ok(&[
            "split", "--scene", s(&scene), "--method", "l1", "--mu", "1e-5", "--iters", "300", "--out", s(&out),
        ]);
        out
    };
    let a = run("a");
    let b = run("b");
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.iter().any(|n| n == "trace.csv"));
    for n in names {
        assert_eq!(fs::read(a.join(&n)).unwrap(), fs::read(b.join(&n)).unwrap(), "{n:?} differs");
    }
    let trace = fs::read_to_string(a.join("trace.csv")).unwrap();
    assert!(trace.starts_with("iter,objective,residual"));
}

#[test]
fn config_file_paths_are_relative() {
    let (dir, _) = setup(SCENE);
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        r#"{"version":1,"scene":"scene.json","method":"l1","l1":{"mu":1e-4,"iters":50,"tol":1e-8,"weights":"auto","band":true},"output":"out","format":"json"}"#,
    )
    .unwrap();
    ok(&["split", "--config", s(&cfg)]);
    assert!(dir.path().join("out/solution.json").is_file());
    assert!(dir.path().join("out/component_1.json").is_file());
}

#[test]
fn exit_codes() {
    let no_arc = SCENE.replace(r#""omega": [[1.5707963267948966, 2.6179938779914944]],"#, r#""omega": [],"#);
    let (dir, scene) = setup(&no_arc);
    let out = farsplit(&["complete", "--scene", s(&scene), "--out", s(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));

    let out = farsplit(&["split", "--scene", s(&dir.path().join("missing.json"))]);
    assert_eq!(out.status.code(), Some(1));
    let out = farsplit(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(1));

    let geometry = dir.path().join("geometry.json");
    fs::write(&geometry, r#"{"k":1.0,"centers":[[0.0,0.0],[1.0,0.0]],"orders":[20,20]}"#).unwrap();
    let out = farsplit(&["analyze", "bounds", s(&geometry), "--theorem", "LS_two"]);
    assert_eq!(out.status.code(), Some(2));
    fs::write(&geometry, r#"{"k":1.0,"centers":[[0.0,0.0],[1000.0,0.0]],"orders":[2,2]}"#).unwrap();
    let text = ok(&["analyze", "bounds", s(&geometry), "--theorem", "LS_two"]);
    assert!(text.starts_with("theorem,feasible,constant,rhs,violated"));
}

#[test]
fn svd_table_spot_values() {
    let text = ok(&["analyze", "svd", "--R", "10"]);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,s_n_squared,asymptote_2sqrt(R^2-n^2)"));
    for line in lines {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        let expected = squared_singular_value(cols[0] as i64, 10.0).unwrap();
        assert!((cols[1] - expected).abs() <= 1e-13 * expected.abs().max(1e-300));
    }
    let t = ok(&["analyze", "threshold", "--R", "10", "--ratio", "1e-6"]);
    assert!(!t.trim().is_empty());
}

#[test]
fn verify_small_run_passes() {
    let text = ok(&["verify", "--trials", "20", "--seed", "3"]);
    assert!(!text.contains("FAIL"), "{text}");
}
