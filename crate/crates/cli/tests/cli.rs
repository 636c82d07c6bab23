//! End-to-end tests of the `hybridoptomech` binary: exit codes, output
//! round-trips, and the provenance contract (every file reproduces
//! byte-for-byte from its own header).

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hybridoptomech"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn binary")
}

fn write_config(dir: &Path, name: &str, json: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path.display().to_string()
}

#[test]
fn missing_config_is_fatal() {
    let out = run(&["occupation"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--preset"));
}

#[test]
fn unknown_preset_is_fatal() {
    let out = run(&["occupation", "--preset", "fig99"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown preset"));
}

#[test]
fn bad_range_is_fatal() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        r#"{"mode":"linear","params":{"kappa":-1.0,"gamma":1.0,"gamma_m":0.0,"nbar":0.0,"g":0.1,"lambda":1.0,"mu":0.01}}"#,
    );
    let out = run(&["occupation", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad range"));
}

#[test]
fn unknown_key_is_fatal_with_precise_message() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "unknown.json",
        r#"{"mode":"linear","params":{"kappa":1.0,"gamma":1.0,"gamma_m":0.0,"nbar":0.0,"g":0.1,"lambda":1.0,"mu":0.01},"bogus":3}"#,
    );
    let out = run(&["occupation", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("unknown key") && err.contains("bogus"),
        "stderr: {err}"
    );
}

#[test]
fn occupation_decoupled_returns_bath_occupation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "decoupled.json",
        r#"{"mode":"linear","params":{"kappa":20.0,"gamma":0.8,"gamma_m":1e-6,"nbar":1000.0,"delta_c":0.3,"delta_a":0.5,"g":0.0,"lambda":0.0,"mu":0.0}}"#,
    );
    let out = run(&["occupation", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["stable"], serde_json::json!(true));
    let nf = doc["n_f"].as_f64().unwrap();
    assert!((nf - 1000.0).abs() <= 1e-6, "n_f = {nf}");
    assert_eq!(doc["gamma_cool"].as_f64().unwrap(), 0.0);
}

#[test]
fn occupation_at_fig3_branch_optimum() {
    let out = run(&["occupation", "--preset", "fig3"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let nf = doc["n_f"].as_f64().unwrap();
    assert!((nf - 0.74).abs() <= 0.03, "n_f = {nf}");
    assert_eq!(doc["cooperativity"].as_f64().unwrap(), 4.0);
}

#[test]
fn occupation_reports_unstable_cell() {
    // Lower-polariton drive deep in the Stokes-dominant region.
    let dir = tempfile::tempdir().unwrap();
    let delta_a = 4.5;
    let delta_c = 1.0 + 64.0 / (delta_a - 1.0);
    let cfg = write_config(
        dir.path(),
        "unstable.json",
        &format!(
            r#"{{"mode":"linear","params":{{"kappa":20.0,"gamma":0.8,"gamma_m":1e-6,"nbar":1000.0,"delta_c":{delta_c},"delta_a":{delta_a},"g":0.25,"lambda":8.0,"mu":0.01}}}}"#
        ),
    );
    let out = run(&["occupation", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["stable"], serde_json::json!(false));
    assert!(doc["n_f"].is_null());
}

#[test]
fn spectrum_csv_round_trips_to_full_precision() {
    use hybridoptomech::spectra::force_spectrum;
    let out = run(&[
        "spectrum",
        "--preset",
        "fig3",
        "--omega-min",
        "-2",
        "--omega-max",
        "2",
        "--omega-points",
        "101",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("# marker omega = -1"));
    assert!(text.contains("# marker omega = 1"));

    let lin = hybridoptomech_cli::config::preset("fig3")
        .unwrap()
        .to_linear()
        .unwrap();
    let mut rows = 0;
    for line in text.lines() {
        if line.starts_with('#') || line.starts_with("omega") || line.is_empty() {
            continue;
        }
        let fields: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(fields.len(), 4);
        let expect = force_spectrum(&lin, fields[0]);
        // Shortest round-trip formatting: parsed values are bit-identical.
        assert_eq!(fields[1], expect.s_kappa);
        assert_eq!(fields[2], expect.s_gamma);
        assert_eq!(fields[3], expect.s_f);
        rows += 1;
    }
    assert_eq!(rows, 101);
}

#[test]
fn spectrum_without_dopant_has_zero_s_gamma_column() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bare.json",
        r#"{"mode":"linear","params":{"kappa":20.0,"gamma":0.8,"gamma_m":1e-6,"nbar":1000.0,"delta_c":1.0,"g":0.25,"lambda":0.0,"mu":0.0}}"#,
    );
    let out = run(&["spectrum", "--config", &cfg, "--omega-points", "21"]);
    assert_eq!(out.status.code(), Some(0));
    for line in String::from_utf8(out.stdout).unwrap().lines() {
        if line.starts_with('#') || line.starts_with("omega") || line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[2], "0", "s_gamma not zero: {line}");
    }
}

#[test]
fn map2d_has_header_and_expected_row_count() {
    let out = run(&[
        "map2d",
        "--preset",
        "fig3",
        "--grid",
        "delta_c=-2:2:2",
        "--grid",
        "delta_a=-1:1:2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let data_rows: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("delta_c") && !l.is_empty())
        .collect();
    assert_eq!(data_rows.len(), 4);
    assert!(text.lines().any(|l| l.starts_with("# config: ")));
}

#[test]
fn compare_emits_one_curve_per_strategy() {
    let out = run(&[
        "compare",
        "--preset",
        "fig4a",
        "--grid",
        "delta_c=-50:-2:25",
        "--strategy",
        "all",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "interference",
        "radiation-pressure",
        "dressed-cavity",
        "dopant",
    ] {
        assert!(
            text.lines().any(|l| l.starts_with(&format!("{name},"))),
            "missing curve {name}"
        );
    }
}

#[test]
fn steady_state_lists_kerr_branches() {
    let dir = tempfile::tempdir().unwrap();
    // Drive amplitude inside the bistable window of the bare Kerr system.
    let cfg = write_config(
        dir.path(),
        "kerr.json",
        r#"{"mode":"physical","params":{"kappa":0.5,"gamma":0.5,"gamma_m":1e-6,"nbar":0.0,"delta_c":3.0,"g0":0.2,"lambda":0.0,"mu0":0.0,"eta":7.0,"phi":0.0}}"#,
    );
    let out = run(&["steady-state", "--config", &cfg, "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let branches = doc["branches"].as_array().unwrap();
    assert_eq!(branches.len(), 3);
    let stable: usize = branches
        .iter()
        .filter(|b| b["stable"] == serde_json::json!(true))
        .count();
    assert!(stable >= 1);
}

#[test]
fn occupation_physical_mode_requires_branch_choice_when_bistable() {
    let dir = tempfile::tempdir().unwrap();
    // Two dynamically stable branches (lossy mechanics near the window edge).
    let cfg = write_config(
        dir.path(),
        "bistable.json",
        r#"{"mode":"physical","params":{"kappa":3.0,"gamma":0.5,"gamma_m":0.3,"nbar":0.0,"delta_c":9.0,"g0":0.2,"lambda":0.0,"mu0":0.0,"eta":44.85,"phi":0.0}}"#,
    );
    let out = run(&["occupation", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--branch"));

    let ok = run(&["occupation", "--config", &cfg, "--branch", "0"]);
    assert_eq!(
        ok.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&ok.stderr)
    );
    let doc: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(doc["stable"], serde_json::json!(true));
}

#[test]
fn output_reproduces_byte_for_byte_from_its_header() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.csv");
    let status = bin()
        .args([
            "map2d",
            "--preset",
            "fig3",
            "--grid",
            "delta_c=-40:40:16",
            "--grid",
            "delta_a=-6:6:16",
            "--out",
        ])
        .arg(&first)
        .status()
        .unwrap();
    assert!(status.success());

    let text = std::fs::read_to_string(&first).unwrap();
    let config_line = text
        .lines()
        .find(|l| l.starts_with("# config: "))
        .expect("config header line");
    let embedded = config_line.trim_start_matches("# config: ");
    let cfg_path = dir.path().join("embedded.json");
    std::fs::write(&cfg_path, embedded).unwrap();

    let second = dir.path().join("second.csv");
    let status = bin()
        .args(["map2d", "--config"])
        .arg(&cfg_path)
        .args(["--workers", "3", "--out"])
        .arg(&second)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(
        std::fs::read(&first).unwrap(),
        std::fs::read(&second).unwrap(),
        "re-run from embedded config differs"
    );
}

#[test]
fn plotdata_blocks_and_json_structure() {
    let out = run(&[
        "resonant-map",
        "--preset",
        "fig5b",
        "--grid",
        "lambda=0.5:2:3",
        "--grid",
        "g=0.05:0.5:3:log",
        "--format",
        "plotdata",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("# columns: lambda g mu n_f status"));

    let out = run(&[
        "resonant-map",
        "--preset",
        "fig5b",
        "--grid",
        "lambda=0.5:2:3",
        "--grid",
        "g=0.05:0.5:3:log",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["cells"].as_array().unwrap().len(), 9);
    assert_eq!(doc["tool"], serde_json::json!("hybridoptomech"));
}

#[test]
fn workers_env_variable_is_honored() {
    let out = bin()
        .args([
            "map2d",
            "--preset",
            "fig3",
            "--grid",
            "delta_c=-2:2:3",
            "--grid",
            "delta_a=-1:1:3",
        ])
        .env("HYBRIDOPTOMECH_WORKERS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));

    let bad = bin()
        .args([
            "map2d",
            "--preset",
            "fig3",
            "--grid",
            "delta_c=-2:2:3",
            "--grid",
            "delta_a=-1:1:3",
        ])
        .env("HYBRIDOPTOMECH_WORKERS", "many")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}
