use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const TWO_DISKS: &str = r#"{"name": "two disks", "curves": [
  {"type": "circle", "center": [0, 0], "radius": 0.8},
  {"type": "circle", "center": [3, 0], "radius": 0.8}
]}"#;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_juliashape"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_exit_codes() {
    let dir = TempDir::new().unwrap();
    let good = write(&dir, "good.json", TWO_DISKS);
    let out = run(&["validate", "--shape", s(&good)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let overlap = write(
        &dir,
        "overlap.json",
        r#"{"curves": [{"type": "circle", "center": [0, 0], "radius": 1},
                       {"type": "circle", "center": [1, 0], "radius": 1}]}"#,
    );
    let out = run(&["validate", "--shape", s(&overlap)]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("overlap"), "{}", stderr(&out));

    let broken = write(&dir, "broken.json", "{\"curves\": [\n  {\"type\": \"circle\",,}\n]}");
    let out = run(&["validate", "--shape", s(&broken)]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));

    let out = run(&["validate", "--shape", s(&dir.path().join("missing.json"))]);
    assert_eq!(code(&out), 3);

    assert_eq!(code(&run(&["validate", "--no-such-flag"])), 3);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn solve_disk_of_radius_two() {
    let dir = TempDir::new().unwrap();
    let shape = write(&dir, "disk.json", r#"{"curves": [{"type": "circle", "center": [0, 0], "radius": 2}]}"#);
    let out_dir = dir.path().join("out");
    let out = run(&["solve", "--shape", s(&shape), "--nodes", "64", "--out", s(&out_dir)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let gamma: f64 = stdout(&out)
        .lines()
        .find_map(|l| l.strip_prefix("gamma "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((gamma + 2f64.ln()).abs() < 1e-7);
    assert!(out_dir.join("gamma.txt").exists());
    assert!(out_dir.join("density.csv").exists());
}

#[test]
fn build_writes_polynomial_and_rejects_too_few_roots() {
    let dir = TempDir::new().unwrap();
    let shape = write(&dir, "shifted.json", r#"{"curves": [{"type": "circle", "center": [5, 0], "radius": 1}]}"#);
    let out_dir = dir.path().join("out");
    let out = run(&["build", "--shape", s(&shape), "--n", "8", "--delta", "0.1", "--nodes", "32", "--out", s(&out_dir)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let poly = fs::read_to_string(out_dir.join("poly.csv")).unwrap();
    let offset: f64 = poly.lines().find_map(|l| l.strip_prefix("offset_re,")).unwrap().parse().unwrap();
    assert!((offset + 5.0).abs() < 1e-9, "{poly}");
    let roots = fs::read_to_string(out_dir.join("roots.csv")).unwrap();
    assert_eq!(roots.lines().count(), 9);
    assert!(fs::read_to_string(out_dir.join("conjugated.txt")).unwrap().contains("(fixed point)"));

    let two = write(&dir, "two.json", TWO_DISKS);
    let out = run(&["build", "--shape", s(&two), "--n", "1", "--out", s(&out_dir)]);
    assert_eq!(code(&out), 1);
}

#[test]
fn render_unit_disk_and_viewport_check() {
    let dir = TempDir::new().unwrap();
    let shape = write(&dir, "disk.json", r#"{"curves": [{"type": "circle", "center": [0, 0], "radius": 1}]}"#);
    let out_dir = dir.path().join("out");
    let out = run(&[
        "render", "--shape", s(&shape), "--n", "200", "--delta", "0.05", "--nodes", "64", "--grid", "256x256",
        "--viewport", "-2,-2,2,2", "--ppm", "--out", s(&out_dir),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    let d_boundary = report["d_boundary"].as_f64().unwrap();
    assert!(d_boundary < 0.15, "{d_boundary}");
    let pgm = fs::read(out_dir.join("filled.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n256 256\n255\n"));
    assert_eq!(pgm.len(), "P5\n256 256\n255\n".len() + 256 * 256);
    assert!(out_dir.join("julia.ppm").exists());

    let out = run(&["render", "--shape", s(&shape), "--viewport", "-0.5,-0.5,0.5,0.5", "--grid", "32x32", "--out", s(&out_dir)]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("does not contain"), "{}", stderr(&out));
}

#[test]
fn render_is_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let shape = write(&dir, "two.json", TWO_DISKS);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out_dir in [&a, &b] {
        let out = run(&["render", "--shape", s(&shape), "--n", "100", "--grid", "128x128", "--out", s(out_dir)]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    for f in ["report.json", "filled.pgm", "julia.pgm", "target.pgm", "roots.csv", "poly.csv", "gamma.txt", "shape.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn study_table_and_epsilon_scan() {
    let dir = TempDir::new().unwrap();
    let shape = write(&dir, "two.json", TWO_DISKS);
    let out_dir = dir.path().join("out");
    let config = write(&dir, "config.json", r#"{"grid": [96, 96], "nodes": 64, "deltas": [0.05], "ns": [50]}"#);
    let out = run(&["study", "--shape", s(&shape), "--config", s(&config), "--out", s(&out_dir)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(out_dir.join("study.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);

    let out = run(&["study", "--shape", s(&shape), "--config", s(&config), "--epsilon", "1e-6", "--out", s(&out_dir)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("epsilon"), "{}", stderr(&out));

    let bad = write(&dir, "bad.json", r#"{"grid": [96, 96], "colour": 1}"#);
    let out = run(&["study", "--shape", s(&shape), "--config", s(&bad), "--out", s(&out_dir)]);
    assert_eq!(code(&out), 3);
}
