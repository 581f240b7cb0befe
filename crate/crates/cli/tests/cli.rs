use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn hforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hforge")).args(args).env_remove("HFORGE_THREADS").output().unwrap()
}

fn write_config(dir: &Path, name: &str, cfg: &Value) -> PathBuf {
    let path = dir.join(format!("{name}.json"));
    std::fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path
}

fn run(dir: &Path, name: &str, cfg: &Value, extra: &[&str]) -> (Output, PathBuf) {
    let path = write_config(dir, name, cfg);
    let stem = dir.join(name);
    let mut args = vec!["run", "--config", path.to_str().unwrap(), "--out", stem.to_str().unwrap()];
    args.extend_from_slice(extra);
    (hforge(&args), stem)
}

fn report(stem: &Path) -> Value {
    let text = std::fs::read_to_string(format!("{}.report.json", stem.display())).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn lambda_hadamard() -> Value {
    json!({
        "kind": "scheme",
        "parameters": { "builder": "lambda_resonant", "theta": std::f64::consts::FRAC_PI_4, "phi": 0.0, "expect": "hadamard" },
        "seed": 1
    })
}

fn gate_entry(v: &Value, k: usize) -> (f64, f64) {
    let z = &v["data"][k];
    (z[0].as_f64().unwrap(), z[1].as_f64().unwrap())
}

#[test]
fn lambda_hadamard_report_holds_the_gate() {
    let dir = TempDir::new().unwrap();
    let (out, stem) = run(dir.path(), "had", &lambda_hadamard(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(&stem);
    assert_eq!(r["passed"], true);
    let gate = &r["results"]["gate"];
    assert_eq!((gate["rows"].as_u64(), gate["cols"].as_u64()), (Some(2), Some(2)));
    // global phase: the Λ gate is n·σ, which at θ = π/4, φ = 0 equals the Hadamard exactly
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for (k, want) in [s, s, s, -s].into_iter().enumerate() {
        let (re, im) = gate_entry(gate, k);
        assert!((re - want).abs() < 1e-8 && im.abs() < 1e-8, "entry {k}: {re} {im}");
    }
    for name in ["gate_vs_prediction", "cyclicity_residual", "max_k_norm", "equals_hadamard"] {
        let a = r["assertions"].as_array().unwrap().iter().find(|a| a["name"] == name).unwrap();
        assert!(a["value"].as_f64().unwrap() < 1e-8, "{name}");
    }
    assert!(Path::new(&format!("{}.timings.json", stem.display())).exists());
}

#[test]
fn sweep_writes_full_grid() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({ "kind": "sweep", "parameters": { "delta1_points": 21, "delta2_points": 21 } });
    let (out, stem) = run(dir.path(), "sweep", &cfg, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let mut rdr = csv::Reader::from_path(format!("{}.csv", stem.display())).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["delta1", "delta2", "fidelity"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 441);
    for row in &rows {
        let f: f64 = row[2].parse().unwrap();
        assert!((0.0..=1.0 + 1e-12).contains(&f));
    }
    assert_eq!(report(&stem)["csv_file"], "sweep.csv");
}

#[test]
fn missing_parameter_is_named() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({ "kind": "scheme", "parameters": { "builder": "lambda_resonant", "phi": 0.0 } });
    let (out, stem) = run(dir.path(), "bad", &cfg, &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("theta"), "{}", stderr(&out));
    assert!(!Path::new(&format!("{}.report.json", stem.display())).exists());
}

#[test]
fn validate_accepts_good_and_rejects_negative_duration() {
    let dir = TempDir::new().unwrap();
    let good = write_config(dir.path(), "good", &lambda_hadamard());
    let out = hforge(&["validate", "--config", good.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr(&out).is_empty());

    let cfg = json!({ "kind": "scheme", "parameters": { "builder": "two_segment_chain", "theta": 1.0, "phi": 0.0, "eta": 0.5, "segment_time": -1.0 } });
    let bad = write_config(dir.path(), "neg", &cfg);
    let out = hforge(&["validate", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("segment_time"), "{}", stderr(&out));
}

#[test]
fn list_includes_catalog() {
    let out = hforge(&["list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for name in ["lambda_resonant", "nv_hadamard", "nv_lambda_sweep", "dfs3_lambda"] {
        assert!(text.contains(name), "{name}");
    }
    let out = hforge(&["list", "--json"]);
    let cat: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(cat.as_array().unwrap().iter().any(|s| s["name"] == "lambda_resonant"));
}

#[test]
fn identical_inputs_give_identical_reports() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({
        "kind": "grape",
        "parameters": { "segments": 20, "init": "random", "robust": false, "max_iterations": 15, "min_fidelity": 0.0 },
        "seed": 42
    });
    let (a, sa) = run(dir.path(), "a", &cfg, &[]);
    let (b, sb) = run(dir.path(), "b", &cfg, &["--threads", "3"]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(b.status.code(), Some(0), "{}", stderr(&b));
    let strip = |mut r: Value| {
        r["inputs"]["output"] = Value::Null;
        r["timings_file"] = Value::Null;
        serde_json::to_vec(&r).unwrap()
    };
    assert_eq!(strip(report(&sa)), strip(report(&sb)));

    // same stem twice is byte-identical on disk
    let first = std::fs::read(format!("{}.report.json", sa.display())).unwrap();
    let (again, _) = run(dir.path(), "a", &cfg, &[]);
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(first, std::fs::read(format!("{}.report.json", sa.display())).unwrap());

    // a different seed gives different random controls
    let (c, sc) = run(dir.path(), "c", &cfg, &["--seed", "43"]);
    assert_eq!(c.status.code(), Some(0));
    assert_ne!(report(&sa)["results"]["controls"], report(&sc)["results"]["controls"]);
}

#[test]
fn failed_assertion_exits_two() {
    let dir = TempDir::new().unwrap();
    let mut cfg = lambda_hadamard();
    cfg["parameters"]["expect"] = json!("pauli_x");
    let (out, stem) = run(dir.path(), "wrong", &cfg, &[]);
    assert_eq!(out.status.code(), Some(2));
    let r = report(&stem);
    assert_eq!(r["passed"], false);
    let a = r["assertions"].as_array().unwrap().iter().find(|a| a["name"] == "equals_pauli_x").unwrap();
    assert_eq!(a["pass"], false);
}

#[test]
fn incommensurate_auxiliary_angle_is_rejected() {
    // outside the scheme's domain: a usage error, no report
    let dir = TempDir::new().unwrap();
    let cfg = json!({ "kind": "scheme", "parameters": { "builder": "xy_aux", "theta": 1.0 } });
    let (out, stem) = run(dir.path(), "xy", &cfg, &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("incommensurate"), "{}", stderr(&out));
    assert!(!Path::new(&format!("{}.report.json", stem.display())).exists());
}

#[test]
fn tolerance_override_is_applied_and_recorded() {
    let dir = TempDir::new().unwrap();
    let (out, stem) = run(dir.path(), "tight", &lambda_hadamard(), &["--tol-override", "holonomy=1e-20"]);
    assert_eq!(out.status.code(), Some(2));
    let r = report(&stem);
    assert_eq!(r["inputs"]["tolerances"]["holonomy"], 1e-20);
    assert_eq!(r["inputs"]["tolerance_overrides"][0], json!(["holonomy", 1e-20]));

    let (out, _) = run(dir.path(), "typo", &lambda_hadamard(), &["--tol-override", "holonmy=1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn thread_count_comes_from_environment() {
    let dir = TempDir::new().unwrap();
    let path = write_config(dir.path(), "env", &lambda_hadamard());
    let stem = dir.path().join("env");
    let out = Command::new(env!("CARGO_BIN_EXE_hforge"))
        .args(["run", "--config", path.to_str().unwrap(), "--out", stem.to_str().unwrap()])
        .env("HFORGE_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let t: Value = serde_json::from_str(&std::fs::read_to_string(format!("{}.timings.json", stem.display())).unwrap()).unwrap();
    assert_eq!(t["threads"], 2);
}

#[test]
fn shipped_scenarios_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let out = hforge(&["validate", "--config", path.to_str().unwrap()]);
            assert_eq!(out.status.code(), Some(0), "{}: {}", path.display(), stderr(&out));
            n += 1;
        }
    }
    assert!(n >= 20);
}

#[test]
fn unknown_subcommand_is_usage_error() {
    assert_eq!(hforge(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(hforge(&["--help"]).status.code(), Some(0));
}
