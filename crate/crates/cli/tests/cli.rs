use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn semcheck(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semcheck"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn semcheck")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn bell_file(dir: &Path) -> PathBuf {
    let body = format!(r#"{{"dims":[2,2],"vector":[[{H},0],[0,0],[0,0],[{H},0]]}}"#);
    write(dir, "bell.json", &body)
}

fn stdout_f64(out: &Output) -> f64 {
    String::from_utf8_lossy(&out.stdout).trim().parse().unwrap()
}

#[test]
fn bell_negativity_is_half() {
    let dir = tempfile::tempdir().unwrap();
    let f = bell_file(dir.path());
    let out = semcheck(&["measure", f.to_str().unwrap(), "--measure", "negativity"], dir.path());
    assert!(out.status.success());
    assert!((stdout_f64(&out) - 0.5).abs() < 1e-12);
}

#[test]
fn bell_eof_in_bits_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let f = bell_file(dir.path());
    let out = semcheck(
        &["measure", f.to_str().unwrap(), "--measure", "eof", "--base", "bits"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    assert!((stdout_f64(&out) - 1.0).abs() < 1e-12);
}

#[test]
fn product_state_is_zero_for_every_measure() {
    let dir = tempfile::tempdir().unwrap();
    // |0> ⊗ (|0> + |1>)/√2 as a density matrix
    let mut m = vec!["[0,0]".to_string(); 16];
    for i in 0..2 {
        for j in 0..2 {
            m[i * 4 + j] = "[0.5,0]".into();
        }
    }
    let body = format!(r#"{{"dims":[2,2],"matrix":[{}]}}"#, m.join(","));
    let f = write(dir.path(), "prod.json", &body);
    for id in [
        "eof", "concurrence", "g-concurrence", "tangle", "negativity", "negativity-roof",
        "log-negativity", "renyi:0.5", "tsallis:2", "ree",
    ] {
        let out = semcheck(&["measure", f.to_str().unwrap(), "--measure", id], dir.path());
        assert!(out.status.success(), "{id}: {}", String::from_utf8_lossy(&out.stderr));
        let v = stdout_f64(&out);
        assert!(v.abs() < 1e-4, "{id} gave {v}");
    }
}

#[test]
fn json_output_carries_value_and_unit() {
    let dir = tempfile::tempdir().unwrap();
    let f = bell_file(dir.path());
    let out = semcheck(
        &["measure", f.to_str().unwrap(), "--measure", "log-negativity", "--json"],
        dir.path(),
    );
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(v["unit"], "bits");
}

#[test]
fn measure_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bell = bell_file(dir.path());
    let bell = bell.to_str().unwrap();

    let garbage = write(dir.path(), "bad.json", "{not json");
    let out = semcheck(&["measure", garbage.to_str().unwrap(), "--measure", "eof"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    let out = semcheck(&["measure", "missing.json", "--measure", "eof"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    let out = semcheck(&["measure", bell, "--measure", "nonsense"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    let out = semcheck(&["measure", bell, "--measure", "renyi:3"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    // tripartite input cannot carry a bipartite measure
    let tri = format!(
        r#"{{"dims":[2,2,2],"vector":[[{H},0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[{H},0]]}}"#
    );
    let tri = write(dir.path(), "ghz.json", &tri);
    let out = semcheck(&["measure", tri.to_str().unwrap(), "--measure", "negativity"], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn negative_tolerance_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", r#"{"tolerance": -1}"#);
    let out = semcheck(&["verify", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("semcheck-report.jsonl").exists());
}

#[test]
fn unknown_check_and_bad_dims_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = semcheck(&["verify", "--check", "nope"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = semcheck(&["verify", "--dims", "1x2"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = semcheck(&["verify", "--dims", "2by2"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn seeded_runs_write_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = semcheck(
            &["verify", "--seed", "7", "--trials", "20", "--out", name],
            dir.path(),
        );
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        out
    };
    let a = run("a.jsonl");
    let b = run("b.jsonl");
    assert_eq!(a.stdout, b.stdout);
    let read = |p: &str| std::fs::read(dir.path().join(p)).unwrap();
    assert_eq!(read("a.jsonl"), read("b.jsonl"));
    assert_eq!(read("a.summary.csv"), read("b.summary.csv"));
    assert!(!read("a.jsonl").is_empty());
    // stdout is exactly the CSV summary
    assert_eq!(a.stdout, read("a.summary.csv"));
}

#[test]
fn default_sweep_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = semcheck(&["verify"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let jsonl = std::fs::read_to_string(dir.path().join("semcheck-report.jsonl")).unwrap();
    for line in jsonl.lines() {
        let r: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_ne!(r["verdict"], "fail", "{line}");
    }
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("check_id,measure_id,trials,passes,min_gap,mean_gap,max_gap"));
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"checks":["monotone"],"measures":["negativity"],"dims":[[2,2]],"trials":5,"seed":3}"#,
    );
    let out = semcheck(
        &["verify", "--config", cfg.to_str().unwrap(), "--trials", "3", "--out", "r.jsonl"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let jsonl = std::fs::read_to_string(dir.path().join("r.jsonl")).unwrap();
    assert_eq!(jsonl.lines().count(), 3);
    for line in jsonl.lines() {
        let r: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(r["check_id"], "monotone");
    }
}
