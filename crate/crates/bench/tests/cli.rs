use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use proxproj::linalg::{DenseMatrix, DenseVector};
use proxproj::projection::ConstraintSpec;
use proxproj_bench::io::{read_vector, write_matrix, write_vector};

fn ppbench(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ppbench"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn ppbench")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// CSV rows with the wall-clock column dropped.
fn rows_without_time(text: &str) -> Vec<String> {
    text.lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_string())
        .collect()
}

#[test]
fn bp_run_writes_one_row_per_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let o = ppbench(
        &["bp", "--m", "20", "--n", "60", "--max-iters", "10", "--tol", "0", "--out", "run1"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("run1.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 11);
    assert_eq!(lines[0], "iter,violation,objective,residual,wall_ms");
    for (k, line) in lines[1..].iter().enumerate() {
        assert!(line.starts_with(&format!("{},", k + 1)));
    }
    let summary = stdout(&o);
    let fields: Vec<&str> = summary.split_whitespace().collect();
    assert_eq!(fields[..2], ["pp", "10"]);
}

#[test]
fn runs_are_reproducible_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let o = ppbench(&["spcp", "--n1", "12", "--n2", "10", "--rank", "2", "--max-iters", "15", "--out", out], dir.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = fs::read_to_string(dir.path().join("a.csv")).unwrap();
    let b = fs::read_to_string(dir.path().join("b.csv")).unwrap();
    assert_eq!(rows_without_time(&a), rows_without_time(&b));
}

#[test]
fn manifest_is_sorted_and_records_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = ppbench(&["emd", "--n", "6", "--max-iters", "20", "--out", "e"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("e.manifest")).unwrap();
    let keys: Vec<&str> = text.lines().map(|l| l.split(" = ").next().unwrap()).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    for key in ["input_hash", "max_iters", "method", "output_csv"] {
        assert!(keys.contains(&key), "missing {key}");
    }
}

#[test]
fn smc_pp_iterates_are_feasible() {
    let dir = tempfile::tempdir().unwrap();
    let o = ppbench(&["smc", "--n", "30", "--rank", "2", "--oversample", "3", "--max-iters", "50"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let viol: f64 = stdout(&o).split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!(viol <= 1e-12, "viol {viol}");
}

#[test]
fn project_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let a = DenseMatrix::from_row_slice(2, 3, &[1.0, 2.0, 0.0, 0.0, 1.0, -1.0]);
    let b = DenseVector::from_vec(vec![1.0, 0.5]);
    let x = DenseVector::from_vec(vec![3.0, -2.0, 4.0]);
    write_matrix(&dir.path().join("a.ppmat"), &a).unwrap();
    write_vector(&dir.path().join("b.ppvec"), &b).unwrap();
    write_vector(&dir.path().join("x.ppvec"), &x).unwrap();
    let o = ppbench(
        &["project", "--matrix", "a.ppmat", "--b", "b.ppvec", "--x", "x.ppvec", "--eps", "0.25", "--out", "u.ppvec"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let u = read_vector(&dir.path().join("u.ppvec")).unwrap();
    let want = ConstraintSpec::new(a, b, 0.25).unwrap().project(&x, 1e-12).unwrap();
    assert_eq!(u, want);
    let reported: f64 = stdout(&o).split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((reported - 0.25).abs() <= 1e-12);
}

#[test]
fn truncated_input_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let a = DenseMatrix::identity(3, 3);
    let path = dir.path().join("a.ppmat");
    write_matrix(&path, &a).unwrap();
    let bytes = fs::read(&path).unwrap();
    fs::write(&path, &bytes[..bytes.len() - 5]).unwrap();
    write_vector(&dir.path().join("b.ppvec"), &DenseVector::zeros(3)).unwrap();
    let o = ppbench(&["bp", "--matrix", "a.ppmat", "--b", "b.ppvec", "--max-iters", "2"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
}

#[test]
fn bad_flag_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = ppbench(&["bp", "--no-such-flag"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = ppbench(&["bp", "--method", "simplex", "--m", "4", "--n", "8"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn gen_writes_hashed_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = ppbench(&["gen", "--problem", "bp", "--m", "5", "--n", "12", "--seed", "3", "--out", "g"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let first = fs::read_to_string(dir.path().join("g.manifest")).unwrap();
    let o = ppbench(&["gen", "--problem", "bp", "--m", "5", "--n", "12", "--seed", "3", "--out", "g"], dir.path());
    assert!(o.status.success());
    let second = fs::read_to_string(dir.path().join("g.manifest")).unwrap();
    assert_eq!(first, second);
    assert!(first.lines().any(|l| l.starts_with("content_hash = ") && l.len() == "content_hash = ".len() + 64));
}

#[test]
fn emd_grid_size_comes_from_images() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.pgm"), "P2\n3 3\n255\n0 0 0\n0 255 0\n0 0 0\n").unwrap();
    fs::write(dir.path().join("b.pgm"), "P2\n3 3\n255\n255 0 0\n0 0 0\n0 0 0\n").unwrap();
    let o = ppbench(
        &["emd", "--kind", "pgm", "--rho0", "a.pgm", "--rho1", "b.pgm", "--max-iters", "5000", "--tol", "1e-9"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let distance: f64 = stdout(&o).split_whitespace().nth(3).unwrap().parse().unwrap();
    assert!((distance - 2.0).abs() < 1e-3, "distance {distance}");
}
