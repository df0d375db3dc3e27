//! End-to-end checks of the command-line interface: exit codes, artifact
//! formats, and seeding behavior.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_itsim"))
}

fn workdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("itsim_cli_{tag}"));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn usage_errors_exit_1() {
    let status = bin().arg("teleport").status().unwrap();
    assert_eq!(status.code(), Some(1));
    let status = bin().status().unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn help_exits_0() {
    let status = bin().arg("--help").status().unwrap();
    assert_eq!(status.code(), Some(0));
}

#[test]
fn missing_config_exits_2() {
    let status = bin()
        .args(["--config", "/nonexistent/config.txt", "validate"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn unknown_key_exits_3() {
    let dir = workdir("unknown_key");
    let cfg = dir.join("bad.cfg");
    std::fs::write(&cfg, "drive.volts = 200\n").unwrap();
    let out = bin()
        .args(["--config", cfg.to_str().unwrap(), "potential-profile"])
        .current_dir(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("drive.volts"), "stderr: {stderr}");
}

#[test]
fn constraint_violation_exits_4() {
    let dir = workdir("constraint");
    let cfg = dir.join("bad.cfg");
    std::fs::write(&cfg, "field-model.barrier_height_ev = -1\n").unwrap();
    let out = bin()
        .args(["--config", cfg.to_str().unwrap(), "potential-profile"])
        .current_dir(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("field-model.barrier_height_ev"),
        "stderr: {stderr}"
    );
}

#[test]
fn noiseless_transport_is_adiabatic() {
    let dir = workdir("transport");
    let status = bin()
        .args([
            "transport",
            "--path",
            "ece",
            "--continuous",
            "--noise-dbc",
            "-inf",
            "--seeds",
            "1",
            "--out",
        ])
        .arg(dir.join("t.json"))
        .current_dir(&dir)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let summary = read_json(&dir.join("t.json"));
    let gain = summary["mean_gain_quanta"].as_f64().unwrap();
    assert!(gain < 0.1, "noiseless gain {gain}");
    assert_eq!(summary["path"], "ece");
    assert!(dir.join("t.manifest.json").exists());
}

#[test]
fn heating_map_ratio_vanishes_at_single_barrier_peak() {
    let dir = workdir("heating_map");
    let cfg = dir.join("single.cfg");
    std::fs::write(&cfg, "field-model.single_barrier = true\n").unwrap();
    let csv = dir.join("map.csv");
    let status = bin()
        .args(["--config", cfg.to_str().unwrap(), "heating-map", "--points", "357", "--out"])
        .arg(&csv)
        .current_dir(&dir)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "s_um,ratio_quanta_per_s_per_V2Hz,phi_p_eV"
    );
    let mut peak_row = None;
    let mut max_ratio = 0.0f64;
    for line in lines {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!(cols.iter().all(|x| x.is_finite()));
        max_ratio = max_ratio.max(cols[1]);
        if (cols[0] - 130.0).abs() < 1e-6 {
            peak_row = Some(cols);
        }
    }
    let row = peak_row.expect("grid contains the barrier center");
    assert!(
        row[1] <= 1e-12 * max_ratio,
        "ratio at the barrier peak: {}",
        row[1]
    );
}

#[test]
fn ramsey_outputs_fringe_and_fit() {
    let dir = workdir("ramsey");
    let status = bin()
        .args(["ramsey", "--transports", "2", "--csv-out"])
        .arg(dir.join("fringe.csv"))
        .arg("--json-out")
        .arg(dir.join("fit.json"))
        .current_dir(&dir)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let fit = read_json(&dir.join("fit.json"));
    let contrast = fit["contrast"].as_f64().unwrap();
    let net = fit["net_phase_rad"].as_f64().unwrap();
    assert!((contrast - 0.85).abs() < 1e-6, "contrast {contrast}");
    assert!(net.abs() < 1e-3, "net phase {net}");
    let text = std::fs::read_to_string(dir.join("fringe.csv")).unwrap();
    assert!(text.starts_with("phi_rad,population\n"));
}

#[test]
fn flop_synth_fit_roundtrip() {
    let dir = workdir("flop");
    let csv = dir.join("curve.csv");
    let status = bin()
        .args(["flop-synth", "--nbar", "5", "--kind", "thermal", "--out"])
        .arg(&csv)
        .current_dir(&dir)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let status = bin()
        .args(["flop-fit", "--assume", "thermal", "--in"])
        .arg(&csv)
        .arg("--out")
        .arg(dir.join("fit.json"))
        .current_dir(&dir)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let fit = read_json(&dir.join("fit.json"));
    let nbar = fit["nbar"].as_f64().unwrap();
    assert!((nbar - 5.0).abs() < 0.25, "roundtrip nbar {nbar}");
    assert_eq!(fit["assumption"], "thermal");
}

#[test]
fn potential_profile_matches_configured_barriers() {
    let dir = workdir("profile");
    let csv = dir.join("profile.csv");
    let status = bin()
        .args(["potential-profile", "--points", "357", "--out"])
        .arg(&csv)
        .current_dir(&dir)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut max_phi = 0.0f64;
    for line in text.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        max_phi = max_phi.max(cols[1]);
    }
    assert!((max_phi - 0.35).abs() < 0.01, "peak pseudopotential {max_phi} eV");
}

#[test]
fn env_seed_overrides_config() {
    let dir = workdir("seed_env");
    let run = |seed_env: Option<&str>| {
        let out = dir.join("t.json");
        let mut cmd = bin();
        cmd.args([
            "transport",
            "--continuous",
            "--noise-dbc",
            "-inf",
            "--seeds",
            "1",
            "--out",
        ])
        .arg(&out)
        .current_dir(&dir);
        if let Some(s) = seed_env {
            cmd.env("ITSIM_SEED", s);
        }
        assert_eq!(cmd.status().unwrap().code(), Some(0));
        read_json(&dir.join("t.manifest.json"))["seed"].as_u64().unwrap()
    };
    assert_eq!(run(None), 0);
    assert_eq!(run(Some("777")), 777);
}

#[test]
fn bad_env_seed_exits_4() {
    let dir = workdir("seed_bad");
    let status = bin()
        .args(["validate"])
        .env("ITSIM_SEED", "not-a-number")
        .current_dir(&dir)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(4));
}

#[test]
fn csv_values_carry_full_precision() {
    let dir = workdir("precision");
    let csv = dir.join("profile.csv");
    let status = bin()
        .args(["potential-profile", "--points", "11", "--out"])
        .arg(&csv)
        .current_dir(&dir)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let first_row = text.lines().nth(1).unwrap();
    for cell in first_row.split(',') {
        // 17 significant digits in scientific notation: d.16-digits e exp
        let mantissa = cell.split('e').next().unwrap();
        let digits: usize = mantissa.chars().filter(|c| c.is_ascii_digit()).count();
        assert_eq!(digits, 17, "cell {cell:?} lacks full precision");
    }
}
