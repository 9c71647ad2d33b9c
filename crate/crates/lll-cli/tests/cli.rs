//! End-to-end runs of the `lll` binary: artifact layout, reproducibility
//! from the echoed config, and exit codes.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lll"))
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lll-cli-test-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

#[test]
fn yrast_run_is_self_describing() {
    let out = tmp_dir("yrast");
    let status =
        bin().args(["yrast", "--n", "4", "--lmax", "16", "--out"]).arg(&out).status().unwrap();
    assert!(status.success());
    for file in ["yrast.csv", "config.kv", "metadata.json"] {
        assert!(out.join(file).exists(), "{file} missing");
    }
    let csv = String::from_utf8(read(&out.join("yrast.csv"))).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "l,dim,i_l,gap,kernel_dim");
    assert_eq!(lines.len(), 1 + 17, "one row per sector 0..=16");
    // I(0) = N(N-1)/(4π) = 3/π
    let first: Vec<&str> = lines[1].split(',').collect();
    let i0: f64 = first[2].parse().unwrap();
    assert!((i0 - 3.0 / std::f64::consts::PI).abs() < 1e-10);
}

#[test]
fn config_echo_reproduces_run_bit_for_bit() {
    let out1 = tmp_dir("echo1");
    let status = bin()
        .args(["plasma", "--n", "12", "--m", "2", "--sweeps", "1500", "--seed", "9", "--out"])
        .arg(&out1)
        .status()
        .unwrap();
    assert!(status.success());

    // re-run purely from the echoed config
    let out2 = tmp_dir("echo2");
    let status = bin()
        .arg("plasma")
        .arg("--config")
        .arg(out1.join("config.kv"))
        .arg("--out")
        .arg(&out2)
        .status()
        .unwrap();
    assert!(status.success());

    assert_eq!(read(&out1.join("density.csv")), read(&out2.join("density.csv")));
    assert_eq!(read(&out1.join("config.kv")), read(&out2.join("config.kv")));
}

#[test]
fn flags_override_config_entries() {
    let out1 = tmp_dir("override1");
    assert!(bin()
        .args(["yrast", "--n", "3", "--lmax", "6", "--out"])
        .arg(&out1)
        .status()
        .unwrap()
        .success());
    let out2 = tmp_dir("override2");
    assert!(bin()
        .arg("yrast")
        .arg("--config")
        .arg(out1.join("config.kv"))
        .args(["--lmax", "9", "--out"])
        .arg(&out2)
        .status()
        .unwrap()
        .success());
    let csv = String::from_utf8(read(&out2.join("yrast.csv"))).unwrap();
    assert_eq!(csv.lines().count(), 1 + 10, "lmax flag must override the config echo");
}

#[test]
fn unknown_flag_is_usage_error() {
    let out = tmp_dir("usage");
    let output =
        bin().args(["yrast", "--does-not-exist", "3", "--out"]).arg(&out).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("Usage"), "usage text expected, got: {stderr}");
}

#[test]
fn invalid_input_exits_2() {
    let out = tmp_dir("badn");
    let output = bin().args(["yrast", "--n", "0", "--out"]).arg(&out).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn non_convergence_exits_4() {
    let out = tmp_dir("noconv");
    // ω = 0, k = 0: the sector scan's lower-bound cutoff can never fire
    let output = bin()
        .args(["ground", "--n", "3", "--omega", "0", "--g", "1", "--lmax", "8", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(
        output.status.code(),
        Some(4),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
}

#[test]
fn resource_limit_exits_3() {
    let out = tmp_dir("resource");
    // the Laughlin expansion is capped at N = 8
    let output =
        bin().args(["trial", "--n", "9", "--mmax", "0", "--out"]).arg(&out).output().unwrap();
    assert_eq!(
        output.status.code(),
        Some(3),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
}

#[test]
fn phases_table_covers_three_regimes() {
    let out = tmp_dir("phases");
    let status = bin()
        .args([
            "phases",
            "--n",
            "4",
            "--omega-grid=-0.8:0.1:7",
            "--k-grid",
            "0.002:0.02:2",
            "--exact-dim-cap",
            "0",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = String::from_utf8(read(&out.join("phases.csv"))).unwrap();
    for regime in ["laughlin", "annulus", "thermal"] {
        assert!(csv.contains(regime), "regime `{regime}` missing from table:\n{csv}");
    }
}

#[test]
fn meanfield_profile_kinds() {
    for kind in ["annulus", "thermal", "numeric"] {
        let out = tmp_dir(&format!("mf-{kind}"));
        let status = bin()
            .args(["meanfield", "--n", "16", "--m", "32", "--profile", kind, "--out"])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success(), "{kind} failed");
        assert!(out.join("profile.csv").exists());
        assert!(out.join("meanfield.json").exists());
    }
    // unknown profile kind -> input error
    let out = tmp_dir("mf-bad");
    let output = bin()
        .args(["meanfield", "--n", "16", "--m", "32", "--profile", "weird", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}
