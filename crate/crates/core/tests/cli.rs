use std::path::{Path, PathBuf};
use std::process::Command;

use tempfile::TempDir;

fn twqkd(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_twqkd")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

const CHI_E_SMALL: &str = r#"
schema_version = 1
[source]
n_s = 0.1
[channel]
kind = "amplifier"
gain = 1.5
[encoding]
e_x = 0.0
[search]
grid = 9
starts = 2
[grid]
kappa_s = { start = 0.2, stop = 1.0, points = 3 }
kappa_f = { start = 0.1, stop = 0.5, points = 3 }
"#;

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn empty_grid_is_a_validation_error_and_writes_nothing() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "c.toml", &CHI_E_SMALL.replace("points = 3 }\nkappa_f", "points = 0 }\nkappa_f"));
    let out = dir.path().join("out");
    let (code, _, err) = twqkd(&["chi-e", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 2);
    let v: serde_json::Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(v["error"], "argument");
    assert!(!out.exists());
}

#[test]
fn unknown_keys_and_schema_versions_are_rejected() {
    let dir = TempDir::new().unwrap();
    for body in [format!("{CHI_E_SMALL}\nextra = 1\n"), CHI_E_SMALL.replace("schema_version = 1", "schema_version = 2")] {
        let cfg = write(dir.path(), "c.toml", &body);
        let (code, _, err) = twqkd(&["chi-e", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
        assert_eq!(code, 2, "{err}");
        assert!(serde_json::from_str::<serde_json::Value>(err.trim()).is_ok());
    }
    assert!(!dir.path().join("chi_e.csv").exists());
}

#[test]
fn missing_config_and_bad_flags() {
    assert_eq!(twqkd(&["chi-e"]).0, 2);
    assert_eq!(twqkd(&["chi-e", "--format", "xml"]).0, 2);
    assert_eq!(twqkd(&["--help"]).0, 0);
}

#[test]
fn same_config_same_bytes() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "c.toml", CHI_E_SMALL);
    let mut bodies = Vec::new();
    for (i, workers) in ["1", "4"].iter().enumerate() {
        let out = dir.path().join(format!("o{i}"));
        let (code, _, err) = twqkd(&["chi-e", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--workers", workers]);
        assert_eq!(code, 0, "{err}");
        bodies.push(std::fs::read(out.join("chi_e.csv")).unwrap());
    }
    assert_eq!(bodies[0], bodies[1]);
    let text = String::from_utf8(bodies.remove(0)).unwrap();
    assert!(text.starts_with("# twqkd "));
    assert!(text.contains("config_sha256="));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 7);
    assert!(rows.iter().all(|r| r.len() == 6));
}

#[test]
fn json_format_carries_the_same_rows() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "c.toml", CHI_E_SMALL);
    let out = dir.path().join("o");
    let (code, _, _) = twqkd(&["chi-e", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--format", "json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("chi_e.json")).unwrap()).unwrap();
    assert_eq!(v["command"], "chi-e");
    assert_eq!(v["rows"].as_array().unwrap().len(), 7);
    assert!(v["rows"][0]["chi_E"].as_f64().unwrap() > 0.0);
}

#[test]
fn headline_floodlight_row() {
    let dir = TempDir::new().unwrap();
    let cfg = configs().join("ske_flqkd.toml");
    let (code, _, err) = twqkd(&["ske-curve", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(dir.path().join("ske_curve.csv")).unwrap();
    let row = csv_rows(&text).into_iter().find(|r| r[0].parse::<f64>().unwrap() == 50.0).unwrap();
    let skr: f64 = row[5].parse().unwrap();
    let plob: f64 = row[6].parse().unwrap();
    let ske: f64 = row[4].parse().unwrap();
    assert!(skr > 2e9, "{skr}");
    assert!(ske > plob);
}

#[test]
fn simulate_then_estimate() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let sim = write(
        dir.path(),
        "sim.toml",
        "schema_version = 1\nseed = 7\n[source]\nn_s = 0.1\n[simulate]\nkappa_s = 0.5\nkappa_f = 0.45\nn_pairs = 50000\n",
    );
    let (code, _, err) = twqkd(&["simulate", "--config", sim.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let first = std::fs::read(out.join("records.jsonl")).unwrap();
    assert_eq!(first.iter().filter(|&&b| b == b'\n').count(), 50000);
    let (code, _, _) = twqkd(&["simulate", "--config", sim.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(first, std::fs::read(out.join("records.jsonl")).unwrap());
    let (code, _, _) = twqkd(&["simulate", "--config", sim.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "8"]);
    assert_eq!(code, 0);
    assert_ne!(first, std::fs::read(out.join("records.jsonl")).unwrap());

    let est = write(dir.path(), "est.toml", "schema_version = 1\n[source]\nn_s = 0.1\n[estimate]\nrecords = \"out/records.jsonl\"\n");
    let (code, _, err) = twqkd(&["estimate", "--config", est.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let rows = csv_rows(&std::fs::read_to_string(out.join("estimate.csv")).unwrap());
    let v: Vec<f64> = rows[0].iter().map(|s| s.parse().unwrap()).collect();
    assert_eq!(v[0], 50000.0);
    assert!((v[1] - 0.5).abs() < 4.0 * v[2], "{v:?}");
    assert!((v[3] - 0.45).abs() < 4.0 * v[4], "{v:?}");
}

#[test]
fn reduce_writes_sparse_profile() {
    let dir = TempDir::new().unwrap();
    let cfg = configs().join("reduce.toml");
    let (code, _, err) = twqkd(&["reduce", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("reduced.json")).unwrap()).unwrap();
    let pi = v["reduced"]["phase_insensitive"].as_array().unwrap();
    assert!(pi[1..].iter().all(|z| z[0] == 0.0 && z[1] == 0.0));
    assert_eq!(pi[0][1], 0.0);
    let ps = v["reduced"]["phase_sensitive"].as_array().unwrap();
    assert!(ps[2..].iter().all(|z| z[0] == 0.0 && z[1] == 0.0));
}

#[test]
fn missing_input_file_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "c.toml", "schema_version = 1\n[source]\nn_s = 0.1\n[estimate]\nrecords = \"nope.jsonl\"\n");
    let (code, _, _) = twqkd(&["estimate", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(!dir.path().join("o").exists());
}
