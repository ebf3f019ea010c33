use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn pvvac(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pvvac"))
        .args(args)
        .arg("--output-dir")
        .arg(dir)
        .env_remove("PVVAC_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn csv_column(text: &str, name: &str) -> Vec<f64> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect()
}

#[test]
fn scheme_reports_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let out = pvvac(dir.path(), &["scheme", "--masses", "1,2,3"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["scheme"]["c1"].as_f64().unwrap() + 1.6).abs() < 1e-14);
    assert!((v["scheme"]["c2"].as_f64().unwrap() - 0.6).abs() < 1e-14);
    assert!((v["scheme"]["log_lambda"].as_f64().unwrap() - 0.4498681).abs() < 1e-7);
    assert_eq!(v["config"]["masses"], serde_json::json!([1.0, 2.0, 3.0]));
    assert!(dir.path().join("scheme.json").exists());
}

#[test]
fn kernel_table_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let out = pvvac(dir.path(), &["kernel", "--masses", "1,2,3", "--kmax", "10", "--points", "64"]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("kernel.csv")).unwrap();
    assert!(text.starts_with("k,M,U,gap\n"));
    let m = csv_column(&text, "M");
    assert_eq!(m.len(), 64);
    assert!((m[0] - 0.095465).abs() < 1e-6);
    assert!(m.iter().all(|&x| x > 0.0));
    assert!(m.windows(2).all(|w| w[1] <= w[0]));
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("kernel.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["points"], 64);
    assert_eq!(meta["tolerances"]["m_kernel"], 1e-10);
}

#[test]
fn uehling_table_has_gap_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = pvvac(dir.path(), &["uehling", "--masses", "1,100,200", "--points", "11"]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("uehling.csv")).unwrap();
    let gap = csv_column(&text, "gap");
    assert_eq!(gap.len(), 11);
    assert!(gap.iter().all(|g| g.abs() < 1e-3));
    assert_eq!(csv_column(&text, "U")[0], 0.0);
}

#[test]
fn bad_flags_and_configs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(pvvac(dir.path(), &["scheme", "--bogus"]).status.code(), Some(2));
    assert_eq!(pvvac(dir.path(), &["scheme", "--masses", "3,2,1"]).status.code(), Some(2));
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[grid]\nsize = 4\n").unwrap();
    assert_eq!(pvvac(dir.path(), &["scheme", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    let missing = dir.path().join("missing.toml");
    let out = pvvac(dir.path(), &["scheme", "--config", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("configuration error"));
}

#[test]
fn solver_failure_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = pvvac(dir.path(), &["solve-sc", "--n", "4", "--box-length", "4", "--charge", "0.005", "--max-iter", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("solve_sc.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["status"], "max-iter");
}

#[test]
fn config_file_and_overrides_are_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "masses = [1.0, 2.0, 4.0]\ncoupling = 0.2\n[grid]\nn = 4\nbox_length = 4.0\n[source]\nkind = \"charge-mode\"\nmode = [1, 0, 0]\namplitude = 0.004\n[solver]\ndamping = 1.0\n",
    )
    .unwrap();
    let out = pvvac(dir.path(), &["solve-sc", "--config", cfg.to_str().unwrap(), "--coupling", "0.25", "--warm-start"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("solve_sc.json")).unwrap()).unwrap();
    assert_eq!(v["config"]["coupling"], 0.25);
    assert_eq!(v["config"]["masses"], serde_json::json!([1.0, 2.0, 4.0]));
    assert_eq!(v["config"]["source"]["kind"], "charge-mode");
    assert_eq!(v["report"]["status"], "converged");
    let res = csv_column(&fs::read_to_string(dir.path().join("residuals.csv")).unwrap(), "residual");
    assert!(*res.last().unwrap() <= 1e-8);
}

#[test]
fn environment_sets_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_pvvac"))
        .args(["scheme"])
        .env("PVVAC_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("scheme.json").exists());
}

#[test]
fn outputs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["solve-linear", "--n", "6", "--box-length", "5"];
    assert_eq!(pvvac(a.path(), &args).status.code(), Some(0));
    let mut args_b = args.to_vec();
    args_b.extend(["--threads", "1"]);
    assert_eq!(pvvac(b.path(), &args_b).status.code(), Some(0));
    for f in ["potential_v.bin", "potential_a.bin", "slice.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let strip = |p: &Path| {
        let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(p.join("solve_linear.json")).unwrap()).unwrap();
        v["config"]["output_dir"] = serde_json::Value::Null;
        v["config"]["threads"] = serde_json::Value::Null;
        v
    };
    assert_eq!(strip(a.path()), strip(b.path()));
}

#[test]
fn file_sources_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(pvvac(dir.path(), &["solve-linear", "--n", "6", "--box-length", "5"]).status.code(), Some(0));
    // feed the potential back in as a charge density
    let cfg = dir.path().join("file.toml");
    let rho = dir.path().join("potential_v.bin");
    fs::write(
        &cfg,
        format!("[grid]\nn = 6\nbox_length = 5.0\n[source]\nkind = \"file\"\nrho = {:?}\n", rho.to_str().unwrap()),
    )
    .unwrap();
    let sub = dir.path().join("second");
    let out = pvvac(&sub, &["solve-linear", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let wrong = dir.path().join("wrong.toml");
    fs::write(&wrong, format!("[grid]\nn = 8\n[source]\nkind = \"file\"\nrho = {:?}\n", rho.to_str().unwrap())).unwrap();
    assert_eq!(pvvac(&sub, &["solve-linear", "--config", wrong.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn quick_verification_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = pvvac(dir.path(), &["verify", "--quick"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 7);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("verify.json")).unwrap()).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["tier"], "quick");
}
