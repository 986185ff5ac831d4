//! Smoke tests for the CLI surface: exit codes, file outputs, determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cvqkd-opt"))
}

fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .unwrap()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("config.toml");
    fs::write(&path, body).unwrap();
    path
}

fn small_config(protograph_line: &str, out_dir: &Path) -> String {
    format!(
        r#"
version = 1

[system]
alpha_db_per_km = 0.2
eta = 0.55
xi_ch_a = 0.05
xi_rec = 0.18

[code]
{protograph_line}
lifting_factor = 48

[mc]
rates = [0.2, 0.05]
target_errors = 8
max_frames = 200
max_iterations = 30

[ladder]
beta_low = 0.55
beta_high = 0.9
points = 4
fer_window = [0.03, 0.8]
max_expansions = 1

[fit]
degree = 3
transform = "logit"

[search]
v_a = [0.5, 10.0]
beta = [0.5, 0.99]
v_a_points = 24
beta_points = 50
refine = false

[sweep]
distances_km = [10.0, 40.0]
baseline_beta = 0.95

[run]
seed = 99
workers = 1
out_dir = "{}"
"#,
        out_dir.display()
    )
}

fn run_ok(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

#[test]
fn missing_protograph_file_exits_2_and_names_path() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let cfg = write_config(
        tmp.path(),
        &small_config("protograph = \"nowhere/missing.pg\"", &out_dir),
    );
    let out = bin().args(["--config"]).arg(&cfg).arg("simulate").output().unwrap();
    assert_eq!(run_ok(&out), 2, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("missing.pg"), "stderr was: {stderr}");
}

#[test]
fn unknown_config_key_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let mut body = small_config("", &out_dir);
    body.push_str("\n[nonsense]\nfoo = 1\n");
    let cfg = write_config(tmp.path(), &body);
    let out = bin().args(["--config"]).arg(&cfg).arg("simulate").output().unwrap();
    assert_eq!(run_ok(&out), 2);
}

#[test]
fn fit_without_samples_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    fs::create_dir_all(&out_dir).unwrap();
    let cfg = write_config(tmp.path(), &small_config("", &out_dir));
    let out = bin().args(["--config"]).arg(&cfg).arg("fit").output().unwrap();
    assert_eq!(run_ok(&out), 2);
}

#[test]
fn underdetermined_fit_exits_3_naming_the_rate() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    fs::create_dir_all(&out_dir).unwrap();
    // Two rates present, but one has too few points for a cubic.
    fs::write(
        out_dir.join("samples_r0.2.csv"),
        "rate,s_linear,s_db,frames,errors,fer,ci_low,ci_high,seed\n\
         0.2,0.3,-5.2,100,50,0.5,0.4,0.6,1\n\
         0.2,0.4,-4.0,100,20,0.2,0.13,0.29,1\n\
         0.2,0.5,-3.0,100,5,0.05,0.016,0.11,1\n",
    )
    .unwrap();
    fs::write(
        out_dir.join("samples_r0.05.csv"),
        "rate,s_linear,s_db,frames,errors,fer,ci_low,ci_high,seed\n\
         0.05,0.07,-11.5,100,50,0.5,0.4,0.6,1\n\
         0.05,0.08,-11.0,100,40,0.4,0.3,0.5,1\n\
         0.05,0.09,-10.5,100,30,0.3,0.21,0.4,1\n\
         0.05,0.10,-10.0,100,20,0.2,0.13,0.29,1\n\
         0.05,0.11,-9.6,100,10,0.1,0.05,0.18,1\n\
         0.05,0.12,-9.2,100,5,0.05,0.016,0.11,1\n",
    )
    .unwrap();
    let cfg = write_config(tmp.path(), &small_config("", &out_dir));
    let out = bin().args(["--config"]).arg(&cfg).arg("fit").output().unwrap();
    assert_eq!(run_ok(&out), 3, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("0.2"), "stderr was: {stderr}");
}

#[test]
fn simulate_writes_per_rate_tables_deterministically() {
    let tmp = tempfile::tempdir().unwrap();
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    let cfg = write_config(tmp.path(), &small_config("", &out_a));
    let run = |out_dir: &Path| {
        let out = bin()
            .args(["--config"])
            .arg(&cfg)
            .args(["--out"])
            .arg(out_dir)
            .arg("simulate")
            .output()
            .unwrap();
        let code = run_ok(&out);
        assert!(
            code == 0 || code == 4,
            "unexpected exit {code}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    };
    run(&out_a);
    run(&out_b);
    for name in ["samples_r0.2.csv", "samples_r0.05.csv"] {
        let a = fs::read(out_a.join(name)).unwrap();
        let b = fs::read(out_b.join(name)).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "{name} differs between identical runs");
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("rate,s_linear,s_db,frames,errors,fer,ci_low,ci_high,seed\n"));
    }
}

#[test]
fn shipped_default_protograph_file_matches_embedded() {
    // The repo ships the default protograph as a file; the embedded copy
    // must be the same document.
    let path = repo_root().join("crates/cvqkd-core/data/default.pg");
    let text = fs::read_to_string(path).unwrap();
    assert_eq!(text, cvqkd_core::ldpc::DEFAULT_PROTOGRAPH_TEXT);
}

#[test]
fn optimize_requires_surface() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    fs::create_dir_all(&out_dir).unwrap();
    let cfg = write_config(tmp.path(), &small_config("", &out_dir));
    let out = bin().args(["--config"]).arg(&cfg).arg("optimize").output().unwrap();
    assert_eq!(run_ok(&out), 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("surface.json"), "stderr: {stderr}");
}
