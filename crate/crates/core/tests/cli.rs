use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hill-spectra"));
    cmd.env_remove("HILL_SPECTRA_OUT_DIR");
    cmd
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .arg("--out-dir")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

/// Data rows of a CSV written by the tool, after checking its two comment
/// lines and header.
fn read_csv(path: &Path, format: &str, header: &str) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), format!("# hill-spectra {format} v1"));
    let manifest = lines
        .next()
        .unwrap()
        .strip_prefix("# manifest: ")
        .expect("manifest line");
    let manifest: Value = serde_json::from_str(manifest).unwrap();
    assert!(manifest["version"].is_string() && manifest["timestamp"].is_string());
    assert_eq!(lines.next().unwrap(), header);
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn read_json(path: &Path) -> Value {
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(v["schema_version"], 1);
    v
}

fn f(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn free_spectrum_writes_arcs_and_zero_gaps() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &["spectrum", "--a", "0,0", "--b", "0,0", "--nmax", "2", "--grid", "17"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for n in ["-02", "-01", "+01", "+02"] {
        let rows = read_csv(
            &dir.path().join(format!("arc_n{n}.csv")),
            "arc",
            "t,re_lambda,im_lambda,abs_dF,f_residual",
        );
        assert_eq!(rows.len(), 17);
        let label: f64 = n.parse().unwrap();
        for r in &rows {
            let t = f(&r[0]);
            let free = (2.0 * std::f64::consts::PI * label + t).powi(2);
            assert!((f(&r[1]) - free).abs() < 1e-8 * (1.0 + free));
            assert_eq!(f(&r[2]), 0.0);
            // 17 significant digits
            assert_eq!(r[1].split('e').next().unwrap().len(), 18);
        }
    }
    let summary = read_json(&dir.path().join("spectrum_summary.json"));
    assert_eq!(summary["arcs"].as_array().unwrap().len(), 4);
    for row in summary["gap_table"].as_array().unwrap() {
        for edge in ["periodic", "antiperiodic"] {
            assert_eq!(row[edge]["measured"], 0.0);
            assert_eq!(row[edge]["predicted"], 0.0);
        }
    }
    assert_eq!(summary["manifest"]["command"], "spectrum");
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["spectrum", "--a", "1,0", "--nmax", "2"][..],
        &["gaps", "--a", "1;0", "--b", "1,0", "--nmax", "2"],
        &["classify", "--a", "1,0,0", "--b", "1,0"],
        &["pairing", "--a", "1,0", "--b", "1,0", "--n", "5:2"],
        &["pairing", "--a", "1,0", "--b", "1,0", "--n", "40", "--t", "0"],
        &["gaps", "--a", "1,0", "--b", "1,0", "--nmax", "0"],
        &["discriminant", "--a", "1,0", "--b", "1,0"],
        &["nonsense"],
    ] {
        let out = run_in(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn computation_failure_exits_with_one_and_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "discriminant",
            "--a",
            "1,0",
            "--b",
            "1,0",
            "--from",
            "1,0",
            "--to",
            "2,0",
            "--samples",
            "2",
            "--ode-tol",
            "1e-30",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    let diag: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(diag["status"], "error");
    assert_eq!(diag["kind"], "integration");
    assert_eq!(read_json(&dir.path().join("error.json"))["kind"], "integration");
}

#[test]
fn gap_table_ratios_and_unresolvable_rows() {
    let dir = tempfile::tempdir().unwrap();
    let header = "n,edge,status,measured,predicted,ratio,noise_floor";
    let out = run_in(dir.path(), &["gaps", "--a", "2,0", "--b", "2,0", "--nmax", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = read_csv(&dir.path().join("gaps.csv"), "gaps", header);
    assert_eq!(rows.len(), 8);
    let n1 = &rows[0];
    assert_eq!(
        (n1[0].as_str(), n1[1].as_str(), n1[2].as_str()),
        ("1", "periodic", "resolved")
    );
    assert!((f(&n1[5]) - 1.0).abs() < 0.5);
    assert_eq!(
        read_json(&dir.path().join("gaps.json"))["rows"]
            .as_array()
            .unwrap()
            .len(),
        4
    );

    let out = run_in(dir.path(), &["gaps", "--a", "1,0", "--b", "0,0", "--nmax", "3"]);
    assert_eq!(out.status.code(), Some(0));
    for r in read_csv(&dir.path().join("gaps.csv"), "gaps", header) {
        assert_eq!(f(&r[4]), 0.0);
    }

    let out = run_in(dir.path(), &["gaps", "--a", "1,0", "--b", "1,0", "--nmax", "8"]);
    assert_eq!(out.status.code(), Some(0));
    for r in read_csv(&dir.path().join("gaps.csv"), "gaps", header) {
        if r[0].parse::<u32>().unwrap() >= 4 {
            assert_eq!(r[2], "unresolvable", "{r:?}");
            assert!(r[3].is_empty() && r[5].is_empty());
        }
    }
}

#[test]
fn classify_truth_table() {
    let dir = tempfile::tempdir().unwrap();
    for (a, b, verdict, m) in [
        ("1,0", "2,0", "singular_at_infinity", None),
        ("1,0", "1,0", "asymptotically_spectral", Some((0, 1))),
        ("1,0", "0,1", "singular_at_infinity", Some((1, 2))),
        ("1,0", "-1,0", "singular_at_infinity", Some((1, 1))),
    ] {
        let out = run_in(dir.path(), &["classify", "--a", a, "--b", b]);
        assert_eq!(out.status.code(), Some(0));
        let report: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(report["verdict"], verdict, "{a} {b}");
        if let Some((m, q)) = m {
            assert_eq!(report["rational_detection"]["m"], m);
            assert_eq!(report["rational_detection"]["q"], q);
        }
        let file = read_json(&dir.path().join("classify.json"));
        assert_eq!(file["report"], report);
    }
}

#[test]
fn pairing_tables() {
    let dir = tempfile::tempdir().unwrap();
    let header = "n,t,status,re_lambda,im_lambda,re_d,im_d,abs_d";
    let out = run_in(
        dir.path(),
        &["pairing", "--a", "1,0", "--b", "2,0", "--n", "3:10", "--t", "0"],
    );
    assert_eq!(out.status.code(), Some(0));
    let d: Vec<f64> = read_csv(&dir.path().join("pairing.csv"), "pairing", header)
        .iter()
        .map(|r| f(&r[7]))
        .collect();
    assert_eq!(d.len(), 8);
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
    assert_eq!(
        read_json(&dir.path().join("pairing.json"))["scan"]["trend"],
        "trend_to_zero"
    );

    let out = run_in(
        dir.path(),
        &["pairing", "--a", "1,0", "--b", "1,0", "--n", "1:8", "--grid", "129"],
    );
    assert_eq!(out.status.code(), Some(0));
    let rows = read_csv(&dir.path().join("pairing.csv"), "pairing", header);
    assert_eq!(rows.len(), 8 * 129);
    assert!(rows.iter().all(|r| r[2] == "ok" && f(&r[7]) > 0.1));

    let out = run_in(
        dir.path(),
        &[
            "pairing",
            "--a",
            "1,1",
            "--b",
            "1,-1",
            "--n",
            "-3:3",
            "--t",
            "0,0.5,2.5",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    for r in read_csv(&dir.path().join("pairing.csv"), "pairing", header) {
        assert!((f(&r[7]) - 1.0).abs() < 1e-9, "{r:?}");
    }
}

#[test]
fn discriminant_free_closed_form_and_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "discriminant",
            "--a",
            "0,0",
            "--b",
            "0,0",
            "--from",
            "1,0",
            "--to",
            "60,5",
            "--samples",
            "7",
            "--oracle-steps",
            "800",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let rows = read_csv(
        &dir.path().join("discriminant.csv"),
        "discriminant",
        "re_lambda,im_lambda,re_F,im_F,re_dF,im_dF,abs_dF,est_error,wronskian_defect,re_F_oracle,im_F_oracle",
    );
    assert_eq!(rows.len(), 7);
    for r in &rows {
        let lam = num_complex::Complex64::new(f(&r[0]), f(&r[1]));
        let exact = lam.sqrt().cos() * 2.0;
        let got = num_complex::Complex64::new(f(&r[2]), f(&r[3]));
        let oracle = num_complex::Complex64::new(f(&r[9]), f(&r[10]));
        assert!((got - exact).norm() < 1e-9 * (1.0 + exact.norm()), "{r:?}");
        assert!((got - oracle).norm() < 1e-7 * (1.0 + exact.norm()), "{r:?}");
        assert!(f(&r[8]) < 1e-9);
    }
}

#[test]
fn discriminant_lists_critical_points() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "discriminant",
            "--a",
            "1,0",
            "--b",
            "1,0",
            "--center",
            "40,0",
            "--half",
            "10,2",
            "--density",
            "8",
            "--critical",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let rows = read_csv(
        &dir.path().join("discriminant.csv"),
        "discriminant",
        "re_lambda,im_lambda,re_F,im_F,re_dF,im_dF,abs_dF,est_error,wronskian_defect",
    );
    assert_eq!(rows.len(), 64);
    let crit = read_csv(
        &dir.path().join("critical_points.csv"),
        "critical_points",
        "re_lambda,im_lambda,re_F,im_F,re_d2F,im_d2F",
    );
    assert!(!crit.is_empty());
    assert!(crit.iter().all(|r| (30.0..=50.0).contains(&f(&r[0]))));
    assert!(read_json(&dir.path().join("critical_points.json"))["search"]["points"].is_array());
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("from_env");
    let out = bin()
        .env("HILL_SPECTRA_OUT_DIR", &target)
        .args(["classify", "--a", "1,0", "--b", "1,0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(target.join("classify.json").exists());

    let flag = dir.path().join("from_flag");
    let out = bin()
        .env("HILL_SPECTRA_OUT_DIR", &target)
        .arg("--out-dir")
        .arg(&flag)
        .args(["classify", "--a", "1,0", "--b", "2,0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(flag.join("classify.json").exists());
}

#[test]
fn reruns_reproduce_numeric_output() {
    let dir = tempfile::tempdir().unwrap();
    let numeric = |path: &Path| -> Vec<String> {
        std::fs::read_to_string(path)
            .unwrap()
            .lines()
            .skip(2)
            .map(str::to_string)
            .collect()
    };
    let args = ["spectrum", "--a", "1,0", "--b", "0,1", "--nmax", "2", "--grid", "33"];
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(run_in(&a, &args).status.code(), Some(0));
    assert_eq!(run_in(&b, &args).status.code(), Some(0));
    for n in ["-02", "-01", "+01", "+02"] {
        let name = format!("arc_n{n}.csv");
        assert_eq!(numeric(&a.join(&name)), numeric(&b.join(&name)));
    }
}
