use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

fn logitdyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_logitdyn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(str::to_string).collect())
        .collect();
    (header, rows)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn simulate_two_arm_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("traj.csv");
    let o = logitdyn(&[
        "simulate",
        "--config",
        s(&config("two_arm.toml")),
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let (header, rows) = read_rows(&out);
    assert_eq!(
        header,
        [
            "step",
            "chosen",
            "advantage",
            "p_chosen",
            "collision",
            "shannon",
            "renyi2",
            "update_norm"
        ]
    );
    assert_eq!(rows.len(), 2000);
    let last_p: f64 = rows.last().unwrap()[3].parse().unwrap();
    assert!(last_p >= 0.99, "{last_p}");

    let manifest = std::fs::read_to_string(dir.path().join("traj.manifest.toml")).unwrap();
    let m: toml::Table = toml::from_str(&manifest).unwrap();
    assert_eq!(m["command"].as_str(), Some("simulate"));
    assert_eq!(m["seed"].as_integer(), Some(1));
    assert!(m["rng"].as_str().unwrap().contains("ChaCha8"));
    assert_eq!(m["tool_version"].as_str(), Some(env!("CARGO_PKG_VERSION")));
    assert_eq!(m["config"]["steps"].as_integer(), Some(2000));
    assert_eq!(m["config"]["mode"].as_str(), Some("exact-advantage"));
}

/// Re-parses a trajectory CSV and rechecks `norm = eta |A| sqrt(1 - 2 P_c + C)`.
fn recheck_norms(path: &Path, eta: f64) -> usize {
    let (_, rows) = read_rows(path);
    for row in &rows {
        let f = |i: usize| row[i].parse::<f64>().unwrap();
        let (a, pc, c, norm) = (f(2), f(3), f(4), f(7));
        let closed = eta * a.abs() * (1.0 - 2.0 * pc + c).max(0.0).sqrt();
        let scale = closed.max(norm);
        assert!(
            scale == 0.0 || (closed - norm).abs() / scale <= 1e-9,
            "row {row:?}: {closed} vs {norm}"
        );
        let (renyi2, shannon) = (f(6), f(5));
        assert!((renyi2 + c.ln()).abs() <= 1e-9 * renyi2.abs().max(1.0));
        assert!(renyi2 <= shannon + 1e-12);
    }
    rows.len()
}

#[test]
fn csv_columns_recheck_after_reparse() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(logitdyn(&[
        "simulate",
        "--config",
        s(&config("two_arm.toml")),
        "--out",
        s(&a)
    ])
    .status
    .success());
    assert!(logitdyn(&[
        "simulate",
        "--config",
        s(&config("three_arm_sampled.toml")),
        "--out",
        s(&b)
    ])
    .status
    .success());
    assert_eq!(recheck_norms(&a, 0.1), 2000);
    assert_eq!(recheck_norms(&b, 0.05), 5000);

    let (header, rows) = read_rows(&b);
    assert_eq!(&header[8..], ["z0", "z1", "z2"]);
    for row in &rows {
        let sum: f64 = row[8..].iter().map(|v| v.parse::<f64>().unwrap()).sum();
        assert!(sum.abs() <= 1e-9);
    }
}

#[test]
fn simulate_twice_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let cfg = config("three_arm_sampled.toml");
    assert!(logitdyn(&["simulate", "--config", s(&cfg), "--out", s(&a)])
        .status
        .success());
    assert!(logitdyn(&["simulate", "--config", s(&cfg), "--out", s(&b)])
        .status
        .success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn simulate_zero_steps_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "means = [1.0, 0.0]\nsteps = 0\neta = 0.1\nseed = 3\n").unwrap();
    let o = logitdyn(&[
        "simulate",
        "--config",
        s(&cfg),
        "--out",
        s(&dir.path().join("x.csv")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("steps"), "{}", stderr(&o));
    assert!(!dir.path().join("x.csv").exists());
}

#[test]
fn simulate_io_failures_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.toml");
    let o = logitdyn(&[
        "simulate",
        "--config",
        s(&missing),
        "--out",
        s(&dir.path().join("x.csv")),
    ]);
    assert_eq!(o.status.code(), Some(3));

    let unwritable = dir.path().join("no/such/dir/x.csv");
    let o = logitdyn(&[
        "simulate",
        "--config",
        s(&config("two_arm.toml")),
        "--out",
        s(&unwritable),
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn verify_gradients_and_entropy() {
    let o = logitdyn(&["verify", "gradients"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("[PASS] gradients/score_vs_central_difference"));
    assert!(text.contains("threshold=1e-6"));

    let o = logitdyn(&["verify", "entropy"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("instances=10000"));
    assert!(!text.contains("FAIL"));
    assert!(text.contains("0 failed"));
}

#[test]
fn verify_all_within_budget() {
    let start = Instant::now();
    let o = logitdyn(&["verify", "all"]);
    let elapsed = start.elapsed();
    assert_eq!(o.status.code(), Some(0), "{}\n{}", stdout(&o), stderr(&o));
    assert!(elapsed < Duration::from_secs(60), "{elapsed:?}");
    let text = stdout(&o);
    for suite in ["gradients/", "magnitude/", "entropy/", "mc/"] {
        assert!(text.contains(suite), "{suite} missing");
    }
}

#[test]
fn unknown_suite_is_usage_error() {
    assert_eq!(logitdyn(&["verify", "everything"]).status.code(), Some(2));
    assert_eq!(logitdyn(&[]).status.code(), Some(2));
    assert_eq!(logitdyn(&["--help"]).status.code(), Some(0));
}

#[test]
fn tables_to_stdout() {
    let o = logitdyn(&["tables"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("# chosen_action"));
    assert!(text.contains("positive,0.5,0.5,increase,moderate"));
    assert!(text.contains("negative,0.5,-0.5,increase,moderate"));
    assert!(text.contains("uniform,4,,0.25,1.38629436112,1.38629436112"));
}

#[test]
fn tables_directory_has_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = logitdyn(&["tables", "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    let m: toml::Table =
        toml::from_str(&std::fs::read_to_string(dir.path().join("manifest.toml")).unwrap())
            .unwrap();
    assert_eq!(m["command"].as_str(), Some("tables"));
    assert_eq!(m["outputs"].as_array().unwrap().len(), 3);
}

#[test]
fn sweep_marks_infeasible_cells() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = logitdyn(&[
        "sweep",
        "--pc",
        "0,0.5,0.9,1",
        "--collision",
        "0.2,0.5,1",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = read_rows(&out);
    assert_eq!(header, ["p_chosen", "collision", "sensitivity"]);
    assert_eq!(rows.len(), 12);
    let cell = |p: &str, c: &str| {
        rows.iter()
            .find(|r| r[0] == p && r[1] == c)
            .map(|r| r[2].clone())
            .unwrap()
    };
    assert_eq!(cell("0.9", "0.2"), "infeasible");
    assert_eq!(cell("1", "1"), "0");
    let corner: f64 = cell("0", "1").parse().unwrap();
    assert!((corner - 2f64.sqrt()).abs() < 1e-12);
    let half: f64 = cell("0.5", "0.5").parse().unwrap();
    assert!((half - 0.5f64.sqrt()).abs() < 1e-12);
    assert!(dir.path().join("sweep.manifest.toml").exists());
}

#[test]
fn sweep_rejects_malformed_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    for args in [
        vec!["sweep", "--pc", "abc", "--out", s(&out)],
        vec!["sweep", "--pc", "0.5,1.5", "--out", s(&out)],
        vec!["sweep", "--collision", "-0.1", "--out", s(&out)],
    ] {
        let o = logitdyn(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
    assert!(!out.exists());
}
