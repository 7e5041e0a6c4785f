use std::path::Path;
use std::process::{Command, Output};

fn tto(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tto"))
        .args(args)
        .current_dir(dir)
        .env_remove("TTO_THREADS")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, json: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn classical_preset_rows_are_exact() {
    let dir = tempfile::tempdir().unwrap();
    let out = tto(&["preset", "classical", "--out", "res"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let csv = std::fs::read_to_string(dir.path().join("res/classical_p2.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,trace_re,trace_im,limit_re,limit_im,abs_error"));
    let mut seen = Vec::new();
    for line in lines {
        let f: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let n = f[0];
        assert!((f[1] - 2.0 * (n - 1.0) / n).abs() < 1e-10);
        assert!((f[3] - 2.0).abs() < 1e-12);
        assert!((f[5] - 2.0 / n).abs() < 1e-10);
        seen.push(n as usize);
    }
    assert_eq!(seen, vec![8, 16, 32, 64, 128, 256]);

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("res/classical_summary.json")).unwrap()).unwrap();
    let keys: Vec<&str> = summary.as_object().unwrap().keys().map(String::as_str).collect();
    for k in ["config", "rows", "checks", "versions"] {
        assert!(keys.contains(&k), "missing {k}");
    }
    assert_eq!(keys.len(), 4);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "small.json",
        r#"{"name": "small", "experiment": "power", "sequence": {"kind": "radial_harmonic"},
            "symbol": {"fourier": [[1, 1, 0], [-1, 1, 0], [2, 0, 0.5], [-2, 0, -0.5]]},
            "p": [1, 2], "ns": [4, 8, 16]}"#,
    );
    for out in ["a", "b"] {
        let o = tto(&["run", &cfg, "--out", out], dir.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for file in ["small_p1.csv", "small_p2.csv", "small_summary.json"] {
        let a = std::fs::read(dir.path().join("a").join(file)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs");
    }
}

#[test]
fn output_path_from_config_is_used() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"name": "circ", "experiment": "example1", "levels": 3, "output_path": "from_config"}"#,
    );
    let o = tto(&["run", &cfg], dir.path());
    assert!(o.status.success());
    let clark = std::fs::read_to_string(dir.path().join("from_config/circ_clark.csv")).unwrap();
    assert_eq!(clark.lines().next(), Some("arg,weight"));
    assert_eq!(clark.lines().count(), 1 + 14);
}

#[test]
fn invalid_alpha_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        r#"{"name": "bad", "experiment": "power", "alpha": [0.9, 0.0], "ns": [4, 8]}"#,
    );
    let o = tto(&["run", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha"));
}

#[test]
fn malformed_inputs_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(tto(&["preset", "nope"], dir.path()).status.code(), Some(2));
    assert_eq!(tto(&["run", "missing.json"], dir.path()).status.code(), Some(2));
    let cfg = write_config(
        dir.path(),
        "q.json",
        r#"{"name": "q", "experiment": "power", "ns": [100], "quadrature_points": 64}"#,
    );
    assert_eq!(tto(&["run", &cfg], dir.path()).status.code(), Some(2));
    let cfg = write_config(
        dir.path(),
        "u.json",
        r#"{"name": "u", "experiment": "power", "ns": [4], "extra": 1}"#,
    );
    assert_eq!(tto(&["run", &cfg], dir.path()).status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_tto"))
        .args(["preset", "example1", "--out", "x"])
        .current_dir(dir.path())
        .env("TTO_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn thread_override_gives_same_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "t.json",
        r#"{"name": "t", "experiment": "fixed_alpha", "alpha": [0.0, 1.0], "p": 2, "ns": [3, 6, 12]}"#,
    );
    let single = Command::new(env!("CARGO_BIN_EXE_tto"))
        .args(["run", &cfg, "--out", "one"])
        .current_dir(dir.path())
        .env("TTO_THREADS", "1")
        .output()
        .unwrap();
    assert!(single.status.success());
    let o = Command::new(env!("CARGO_BIN_EXE_tto"))
        .args(["run", &cfg, "--out", "many"])
        .current_dir(dir.path())
        .env("TTO_THREADS", "3")
        .output()
        .unwrap();
    assert!(o.status.success());
    let a = std::fs::read(dir.path().join("one/t_alpha_p2.csv")).unwrap();
    let b = std::fs::read(dir.path().join("many/t_alpha_p2.csv")).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("n,trace_re,trace_im,limit_re,limit_im,abs_error,delta_norm\n"));
}

#[test]
fn exhausted_search_is_a_hypothesis_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "e2.json",
        r#"{"name": "e2", "experiment": "example2", "ns": [6],
            "search": {"c": 0.001, "q_start": 0.95, "shrink": 0.99, "max_trials": 2}}"#,
    );
    let o = tto(&["run", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn missed_tolerance_exits_with_tolerance_status() {
    // n = 2 and 3 are far from the asymptotic regime, so the 10% check fails
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "far.json",
        r#"{"name": "far", "experiment": "power", "p": 2, "ns": [2, 3]}"#,
    );
    let o = tto(&["run", &cfg], dir.path());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("FAIL"), "{stdout}");
    assert_eq!(o.status.code(), Some(3));
    assert!(dir.path().join("far_summary.json").exists());
}
