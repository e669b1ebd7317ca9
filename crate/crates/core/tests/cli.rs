use std::path::Path;
use std::process::{Command, Output};

use omega_index::matrix_io::save_matrix;
use omega_index::report::{OmegaReportDoc, SweepDoc};
use omega_index::ComplexMatrix;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_omega-index")).args(args).env_remove("OMEGA_INDEX_THREADS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const GRID: &[&str] = &["omega", "--pair", "commuting", "--grid-radius", "6", "--cuts", "10:40:10"];

#[test]
fn commuting_report_matches_schema() {
    let out = bin(GRID);
    assert_eq!(out.status.code(), Some(0));
    let doc: OmegaReportDoc = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(doc.is_consistent());
    assert_eq!(doc.omega, 0);
    assert_eq!(doc.cuts.iter().map(|c| c.n).collect::<Vec<_>>(), vec![10, 20, 30, 40]);
    assert_eq!(doc.orientation, "conjugate");
    assert!(doc.warnings.is_empty());
    let raw: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let mut keys: Vec<&str> = raw.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort_unstable();
    assert_eq!(
        keys,
        ["cuts", "defect", "epsilon", "omega", "orientation", "scaling", "schema_version", "theorem_bound", "warnings"]
    );
}

#[test]
fn reports_are_byte_identical_across_runs_and_thread_counts() {
    let mut with_threads = GRID.to_vec();
    with_threads.extend(["--threads", "1"]);
    let a = bin(GRID);
    let b = bin(&with_threads);
    let c = Command::new(env!("CARGO_BIN_EXE_omega-index")).args(GRID).env("OMEGA_INDEX_THREADS", "3").output().unwrap();
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);

    let sweep = ["sweep", "--dim", "120", "--cuts", "70,80", "--axis", "perturbation", "--sweep-kind", "random_hermitian", "--values", "0,0.002,0.005", "--seed", "5"];
    let s1 = bin(&sweep);
    let mut s2_args = sweep.to_vec();
    s2_args.extend(["--threads", "2"]);
    let s2 = bin(&s2_args);
    assert_eq!(s1.status.code(), Some(0));
    assert_eq!(s1.stdout, s2.stdout);
    let doc: SweepDoc = serde_json::from_str(&stdout(&s1)).unwrap();
    assert!(doc.omega_constant);
    assert_eq!(doc.omega, Some(1));
    assert_eq!(doc.points.len(), 3);
}

#[test]
fn exit_codes() {
    assert_eq!(bin(&["omega", "--cuts", "5:1:1"]).status.code(), Some(1));
    assert_eq!(bin(&["omega", "--pair", "file", "--a-path", "/nonexistent/a.json", "--b-path", "/nonexistent/b.json"]).status.code(), Some(1));
    assert_eq!(bin(&["omega", "--bogus"]).status.code(), Some(1));
    assert_eq!(bin(&["sweep", "--axis", "lambda", "--values", ""]).status.code(), Some(1));

    let unstable = bin(&["omega", "--dim", "120", "--cuts", "10,80", "--gap-floor", "0"]);
    assert_eq!(unstable.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_str(&stdout(&unstable)).unwrap();
    assert_eq!(err["error"], "UnstableCount");

    let gap = bin(&["omega", "--dim", "120", "--cuts", "50"]);
    assert_eq!(gap.status.code(), Some(2));
    assert!(stdout(&gap).contains("\"GapViolation\""));
}

#[test]
fn lambda_sweep_records_per_point_outcomes() {
    let out = bin(&["sweep", "--dim", "120", "--cuts", "70,80", "--axis", "lambda", "--values", "0.01,0.0125,0.2"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: SweepDoc = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(!doc.omega_constant);
    assert_eq!(doc.points[0].report.as_ref().map(|r| r.omega), Some(1));
    assert_eq!(doc.points[1].report.as_ref().map(|r| r.omega), Some(1));
    assert_eq!(doc.points[2].error.as_ref().map(|e| e.error.as_str()), Some("InadmissibleCommutator"));
}

fn write_pair(dir: &Path, a: &ComplexMatrix, b: &ComplexMatrix) -> (String, String) {
    let (pa, pb) = (dir.join("a.json"), dir.join("b.json"));
    save_matrix(&pa, a).unwrap();
    save_matrix(&pb, b).unwrap();
    (pa.to_string_lossy().into_owned(), pb.to_string_lossy().into_owned())
}

#[test]
fn spectrum_of_the_zero_point() {
    let dir = tempfile::tempdir().unwrap();
    let zero = ComplexMatrix::zeros(1, 1);
    let (pa, pb) = write_pair(dir.path(), &zero, &zero);
    let out = bin(&["spectrum", "--pair", "file", "--a-path", &pa, "--b-path", &pb, "--boundary-window", "0", "--cut", "1", "--orientation", "literal"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out), "index,eigenvalue\n0,0.0\n1,1.0\n");
}

#[test]
fn spectrum_of_a_commuting_grid_is_zero_one() {
    let csv_path = tempfile::tempdir().unwrap().keep().join("spec.csv");
    let out = bin(&["spectrum", "--pair", "commuting", "--grid-radius", "5", "--cut", "30", "--output", csv_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("index,eigenvalue"));
    let values: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(values.len(), 60);
    assert!(values.iter().all(|v| v.abs() < 1e-10 || (v - 1.0).abs() < 1e-10));
}

#[test]
fn sphere_and_verify_outputs() {
    let out = bin(&["sphere", "--pair", "commuting", "--grid-radius", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["schema_version"], "sphere-report-v1");
    // sup over the grid of (2 + r²)⁻², attained at the origin
    assert!((doc["relation_defect"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert_eq!(doc["nonhermitian_defect"].as_f64().unwrap(), 0.0);

    let out = bin(&["verify", "--seed", "7", "--trials", "5", "--max-dim", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["schema_version"], "bounds-report-v1");
    assert_eq!(doc["results"].as_array().unwrap().len(), 5);
    assert_eq!(bin(&["verify", "--seed", "7", "--trials", "5", "--max-dim", "6"]).stdout, out.stdout);
}

#[test]
fn checked_in_calibration_reproduces() {
    let out = bin(&["calibrate"]);
    assert_eq!(out.status.code(), Some(0));
    let pinned = include_str!("../src/calibration/pinned.rs");
    assert_eq!(stdout(&out), pinned);
}
