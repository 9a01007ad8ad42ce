//! End-to-end tests of the `normef` binary.

use std::path::Path;
use std::process::Command;

fn normef() -> Command {
    Command::new(env!("CARGO_BIN_EXE_normef"))
}

fn write_poly_config(dir: &Path, out_csv: Option<&Path>) -> std::path::PathBuf {
    let out_line = out_csv
        .map(|p| format!("out = \"{}\"\n", p.display()))
        .unwrap_or_default();
    let path = dir.join("poly.toml");
    std::fs::write(
        &path,
        format!(
            r#"
[problem]
kind = "polynomial"
d = 4
l0 = 4.0
l1 = 1.0

[algorithm]
variant = "norm-ef21"
compressor = "top-k"
k = 1
rule = "normalized-sqrt-k"
gamma0 = 1.0

[run]
k_iters = 50
seed = 0
{out_line}"#
        ),
    )
    .unwrap();
    path
}

#[test]
fn run_writes_csv_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let cfg = write_poly_config(dir.path(), Some(&csv));
    let status = normef().arg("run").arg(&cfg).status().unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.contains("k,f,grad_norm_sq,min_grad_norm,bits"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 52);
}

#[test]
fn run_honors_out_and_seed_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_poly_config(dir.path(), None);
    let csv = dir.path().join("cli_out.csv");
    let status = normef()
        .arg("run")
        .arg(&cfg)
        .arg("--seed")
        .arg("9")
        .arg("--out")
        .arg(&csv)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(std::fs::read_to_string(&csv)
        .unwrap()
        .contains("# seed = 9"));
}

#[test]
fn grid_prints_the_found_horizon() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_poly_config(dir.path(), None);
    let output = normef()
        .arg("grid")
        .arg(&cfg)
        .args(["--eps", "1e6", "--step", "250", "--kmax", "1000"])
        .output()
        .unwrap();
    assert!(output.status.success());
    assert_eq!(String::from_utf8_lossy(&output.stdout).trim(), "250");
}

#[test]
fn check_passes_on_the_polynomial_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_poly_config(dir.path(), None);
    let output = normef().arg("check").arg(&cfg).output().unwrap();
    assert!(output.status.success());
    let text = String::from_utf8_lossy(&output.stdout);
    assert!(text.contains("PASS"), "{text}");
    assert!(!text.contains("FAIL"), "{text}");
}

#[test]
fn gen_data_emits_parseable_libsvm() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("synth.libsvm");
    let status = normef()
        .arg("gen-data")
        .args(["--n", "12", "--d", "5", "--seed", "4"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 12);
    assert!(text.lines().all(|l| l.split_whitespace().count() == 6));
}

#[test]
fn compare_writes_joint_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_a = write_poly_config(dir.path(), None);
    let cfg_b = dir.path().join("poly_b.toml");
    std::fs::write(
        &cfg_b,
        std::fs::read_to_string(&cfg_a)
            .unwrap()
            .replace("norm-ef21", "ef21")
            .replace("rule = \"normalized-sqrt-k\"", "rule = \"ef21-classical\"")
            .replace("gamma0 = 1.0", ""),
    )
    .unwrap();
    let joint = dir.path().join("joint.csv");
    let status = normef()
        .arg("compare")
        .arg(&cfg_a)
        .arg(&cfg_b)
        .arg("--out")
        .arg(&joint)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&joint).unwrap();
    assert!(text.contains("k,f_a,grad_norm_sq_a"));
}

#[test]
fn over_cap_momentum_stepsize_is_rejected_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sgdm.toml");
    std::fs::write(
        &path,
        r#"
[problem]
kind = "logistic"
lambda = 0.1

[problem.source]
n = 10
d = 4

[algorithm]
variant = "norm-ef21-sgdm"
compressor = "top-k"
k = 1
rule = "sgdm"
gamma0 = 10.0
batch = 1

[run]
k_iters = 20
seed = 0
"#,
    )
    .unwrap();
    let output = normef().arg("run").arg(&path).output().unwrap();
    assert!(!output.status.success());
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(err.contains("cap"), "stderr: {err}");
}

#[test]
fn unknown_subcommand_exits_with_usage() {
    let output = normef().arg("frobnicate").output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(err.to_lowercase().contains("usage"), "{err}");
}

#[test]
fn malformed_config_reports_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(
        &path,
        r#"
[problem]
kind = "polynomial"
d = 4
l0 = 4.0
l1 = 1.0

[algorithm]
variant = "norm-ef21"
compressor = "top-k"
rule = "normalized-sqrt-k"
gamma0 = 1.0

[run]
k_iters = 10
"#,
    )
    .unwrap();
    let output = normef().arg("run").arg(&path).output().unwrap();
    assert!(!output.status.success());
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(err.contains("algorithm.k"), "{err}");
}
