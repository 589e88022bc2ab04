use std::path::Path;
use std::process::Command;

fn colorcode(args: &[&str]) -> (bool, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_colorcode")).args(args).output().expect("runs");
    (out.status.success(), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn simulate_writes_csv_manifest_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let (ok, stdout, stderr) = colorcode(&[
        "simulate", "--distance", "3,5", "--p", "0.05,0.1", "--trials", "200", "--seed", "9",
        "--out", out.to_str().unwrap(), "--verbose", "--trace-trials", "3",
    ]);
    assert!(ok, "{stderr}");
    let csv = std::fs::read_to_string(out.join("results.csv")).unwrap();
    assert_eq!(stdout.trim_end(), csv.trim_end());
    assert_eq!(csv.lines().count(), 1 + 2 * 2 * 2);
    let manifest = read_json(&out.join("manifest.json"));
    assert_eq!(manifest["seed"], 9);
    assert_eq!(manifest["csv_sha256"].as_str().unwrap().len(), 64);
    let trace = read_json(&out.join("trace.json"));
    assert_eq!(trace.as_array().unwrap().len(), 4);
    assert_eq!(trace[0]["trials"].as_array().unwrap().len(), 3);
}

#[test]
fn config_file_is_read_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.json");
    std::fs::write(&cfg, r#"{"distances":[3],"rates":[0.08],"trials":150,"seed":4}"#).unwrap();
    let (ok, a, _) = colorcode(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert!(ok);
    let (_, b, _) = colorcode(&["simulate", "--config", cfg.to_str().unwrap(), "--workers", "2"]);
    assert_eq!(a, b);
    let (_, c, _) = colorcode(&["simulate", "--config", cfg.to_str().unwrap(), "--trials", "100"]);
    assert!(c.lines().nth(1).unwrap().starts_with("3,0.08,X,100,"));
}

#[test]
fn circuit_noise_runs_with_each_flag_scheme() {
    for scheme in ["renorm", "direct", "off"] {
        let (ok, stdout, stderr) = colorcode(&[
            "simulate", "--noise", "circuit", "--distance", "3", "--p", "0.002", "--trials", "50",
            "--flag-scheme", scheme, "--rounds", "3",
        ]);
        assert!(ok, "{scheme}: {stderr}");
        assert_eq!(stdout.lines().count(), 3);
    }
}

#[test]
fn invalid_input_is_rejected() {
    assert!(!colorcode(&["simulate", "--distance", "4"]).0);
    assert!(!colorcode(&["simulate", "--noise", "bogus"]).0);
    assert!(!colorcode(&["simulate", "--p", "0.2:0.1:0.01"]).0);
    assert!(!colorcode(&["simulate", "--verbose"]).0);
}

#[test]
fn threshold_reads_existing_results() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("results.csv");
    let mut text = String::from("d,p,basis,trials,failures,hard_failures,rate,ci_low,ci_high\n");
    for d in [5, 7] {
        for p in [0.08, 0.1, 0.12] {
            let rate: f64 = 0.3 * (p / 0.1f64).powf((d as f64 + 1.0) / 2.0);
            text.push_str(&format!("{d},{p},X,1000,{},0,{rate},{rate},{rate}\n", (rate * 1000.0) as u64));
        }
    }
    std::fs::write(&csv, text).unwrap();
    let (ok, stdout, _) = colorcode(&["threshold", "--input", csv.to_str().unwrap()]);
    assert!(ok);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert!((v["X"]["estimate"].as_f64().unwrap() - 0.1).abs() < 1e-9);
    assert!(v["Z"]["error"].is_string());
}

#[test]
fn verification_subcommands_report_results() {
    let (ok, stdout, _) = colorcode(&["verify-flags", "--distance", "5"]);
    assert!(ok);
    assert!(stdout.contains("d=5 circuits=18 max_single_fault_residual=2"));
    let (ok, stdout, _) = colorcode(&["verify-distance", "--distance", "7", "--weight", "3"]);
    assert!(ok);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["passed"], false);
    let (_, stdout, _) = colorcode(&["verify-distance", "--distance", "5", "--decoder", "naive"]);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["report"]["checked"], 171 * 9);
}

#[test]
fn dumps_are_valid_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let lattice = dir.path().join("lattice.json");
    assert!(colorcode(&["dump-lattice", "--distance", "5", "--out", lattice.to_str().unwrap()]).0);
    let v = read_json(&lattice);
    assert_eq!(v["qubits"].as_array().unwrap().len(), 19);
    assert_eq!(v["boundaries"].as_array().unwrap().len(), 3);
    let (ok, stdout, _) = colorcode(&["dump-graph", "--distance", "3"]);
    assert!(ok);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["graphs"].as_array().unwrap().len(), 2);
    let (ok, stdout, _) = colorcode(&["edge-weights", "--distance", "5", "--p", "0.001"]);
    assert!(ok);
    let header = stdout.lines().next().unwrap();
    assert!(header.starts_with("stack,pair,kind"));
    assert!(stdout.lines().skip(1).any(|l| l.contains(",Diagonal,") && l.contains(",8/15,")));
}
