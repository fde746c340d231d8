use std::process::{Command, Output};

use serde_json::Value;

fn rabi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rabi"))
        .args(args)
        .env_remove("RABI_NFOCK")
        .output()
        .expect("binary runs")
}

fn json_stdout(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn assert_error(out: &Output, code: i32, kind: &str) -> Value {
    assert_eq!(out.status.code(), Some(code));
    assert!(out.stdout.is_empty(), "nothing on stdout after a failure");
    let err: Value = serde_json::from_slice(&out.stderr).expect("json error on stderr");
    assert_eq!(err["error"]["kind"], kind);
    err
}

#[test]
fn gvm_polaron_limit() {
    let out = rabi(&["gvm", "--omega", "1", "--atom", "0", "--g", "0.5"]);
    assert!(out.status.success());
    let v = json_stdout(&out);
    assert_eq!(v["e0_total"], 0.25);
    assert_eq!(v["lambda"], -0.5);
    assert_eq!(v["mean_photon_full"], 0.25);
    assert_eq!(v["mode"], "full");
    for key in ["e0_order0", "e0_order2", "mean_photon_approx", "stationarity_residual"] {
        assert!(v[key].is_number(), "{key}");
    }
}

#[test]
fn gvm_explicit_mode() {
    let v = json_stdout(&rabi(&["gvm", "--omega", "1", "--atom", "1", "--g", "0.2", "--mode", "explicit"]));
    // ω/2 − g²(ω + 2Ω)/(ω + Ω)² − (Ω/2)exp(−2g²/(ω + Ω)²)
    let expected = 0.5 - 0.04 * 3.0 / 4.0 - 0.5 * (-0.02f64).exp();
    assert!((v["e0_total"].as_f64().unwrap() - expected).abs() < 1e-15);
    assert!((expected + 0.020099).abs() < 1e-6);
    assert_eq!(v["e0_order2"], 0.0);
}

#[test]
fn gvm_decoupled_has_no_corrections() {
    let v = json_stdout(&rabi(&["gvm", "--omega", "1", "--atom", "1", "--g", "0"]));
    assert_eq!(v["e0_total"], 0.0);
    assert_eq!(v["wavefunction"].as_array().unwrap().len(), 0);
}

#[test]
fn units_of_omega_rescales_inputs() {
    let abs = json_stdout(&rabi(&["gvm", "--omega", "2", "--atom", "2", "--g", "0.4"]));
    let rel = json_stdout(&rabi(&["gvm", "--omega", "2", "--atom", "1", "--g", "0.2", "--units-of-omega"]));
    assert_eq!(abs, rel);
}

#[test]
fn gvm_error_paths() {
    assert_error(&rabi(&["gvm", "--atom", "-1", "--g", "0.2"]), 2, "domain");
    assert_error(&rabi(&["gvm", "--atom", "1"]), 2, "usage");
    let err = assert_error(&rabi(&["gvm", "--atom", "0.3", "--g", "0.15", "--root-tol", "1e-300"]), 3, "convergence");
    assert!(err["error"]["message"].as_str().unwrap().contains("root_tol"));
}

#[test]
fn ed_examples() {
    let v = json_stdout(&rabi(&["ed", "--omega", "1", "--atom", "0", "--g", "0.5"]));
    assert!((v["energy"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert!((v["mean_photon"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert_eq!(v["n_fock"], 200);

    let out = rabi(&["ed", "--omega", "1", "--atom", "1", "--g", "0", "--nfock", "8"]);
    assert!(out.status.success());
    let v = json_stdout(&out);
    assert_eq!(v["energy"], 0.0);
    assert_eq!(v["converged"], true);
}

#[test]
fn ed_truncation_from_environment_and_unconverged_exit() {
    let out = Command::new(env!("CARGO_BIN_EXE_rabi"))
        .args(["ed", "--atom", "1", "--g", "1.5"])
        .env("RABI_NFOCK", "8")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    let v = json_stdout(&out);
    assert_eq!(v["n_fock"], 8);
    assert_eq!(v["converged"], false);
}

#[test]
fn grwa_point() {
    let v = json_stdout(&rabi(&["grwa", "--atom", "1", "--g", "0.2"]));
    let expected = 0.5 - 0.04 - 0.5 * (-0.08f64).exp();
    assert!((v["energy"].as_f64().unwrap() - expected).abs() < 1e-15);
    assert!((v["mean_photon"].as_f64().unwrap() - 0.04).abs() < 1e-15);
}

#[test]
fn figure_to_file_with_summary() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig4.csv");
    let out = rabi(&["figure", "--id", "4", "--steps", "11", "--nfock", "80", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let summary = String::from_utf8(out.stderr).unwrap();
    assert!(summary.contains("max|gvm-ed|") && summary.contains("max|grwa-ed|"), "{summary}");
    let csv = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 12);
    assert!(lines[0].starts_with("x,gvm_mean_photon,grwa_mean_photon,ed_mean_photon,"));
}

#[test]
fn figure_1a_high_end_ordering() {
    let out = rabi(&["figure", "--id", "1a", "--nfock", "60"]);
    assert!(out.status.success());
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let header = reader.headers().unwrap().clone();
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 101);
    let last = rows.last().unwrap();
    let err = |name: &str| last[col(name)].parse::<f64>().unwrap();
    assert!(err("gvm_err") <= err("grwa_err"));
}

#[test]
fn unknown_figure_id() {
    let err = assert_error(&rabi(&["figure", "--id", "9"]), 2, "domain");
    assert!(err["error"]["message"].as_str().unwrap().contains("unknown figure id"));
}

#[test]
fn sweep_is_byte_identical_across_runs() {
    let args = [
        "sweep", "--param", "g", "--start", "0", "--stop", "0.8", "--fixed", "1", "--steps", "9", "--methods",
        "gvm,gvm_full,grwa,ed", "--observables", "energy,mean_photon", "--nfock", "60",
    ];
    let a = rabi(&args);
    let b = rabi(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("x,gvm_energy,gvm_full_energy,grwa_energy,ed_energy,gvm_mean_photon,"));

    let mut json_args = args.to_vec();
    json_args.extend(["--format", "json"]);
    let v = json_stdout(&rabi(&json_args));
    assert_eq!(v.as_array().unwrap().len(), 9);
}

#[test]
fn sweep_rejects_bad_specs() {
    assert_error(&rabi(&["sweep", "--param", "atom", "--start", "0", "--stop", "2", "--fixed", "0.2", "--steps", "1"]), 2, "domain");
    assert_error(
        &rabi(&["sweep", "--param", "atom", "--start", "0", "--stop", "2", "--fixed", "0.2", "--methods", "magic"]),
        2,
        "domain",
    );
}

#[test]
fn check_quick_and_fault_injection() {
    let out = rabi(&["check", "--quick"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("2/2 checks passed"), "{text}");

    let out = rabi(&["check", "--quick", "--inject-fault"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("[FAIL]"));
}

#[test]
fn check_full_suite_passes() {
    let out = rabi(&["check"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("11/11 checks passed"));
    for id in 1..=11 {
        assert!(text.contains(&format!("#{id:<2}")), "missing criterion {id}");
    }
}
