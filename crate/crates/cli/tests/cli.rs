use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn softfoot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_softfoot"))
        .args(args)
        .env_remove("SOFTFOOT_LOG")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

fn equilibrium_json(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("equilibrium.json")).unwrap()).unwrap()
}

const SMALL: &str = r#"{
  "schema": 1,
  "sweep": {"terrains": ["flat", "step"], "step": 0.01},
  "compliance_map": {"e_bar": {"min": 1, "max": 8, "count": 3}, "e0": {"min": 1, "max": 8, "count": 2}},
  "gallery": {"loads_kg": [0, 10, 25]}
}"#;

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("run");
    let runs: Vec<_> = (0..2)
        .map(|_| {
            let _ = fs::remove_dir_all(&out);
            let out_s = out.to_str().unwrap();
            for cmd in [
                "equilibrium",
                "linearize",
                "compliance-map",
                "tilt-sweep",
                "planar-compare",
                "gallery",
            ] {
                let o = softfoot(&[cmd, "--config", &cfg, "--out", out_s, "--seed", "7"]);
                assert!(
                    o.status.success(),
                    "{cmd}: {}",
                    String::from_utf8_lossy(&o.stderr)
                );
            }
            snapshot(&out)
        })
        .collect();
    assert!(runs[0].len() > 10);
    assert_eq!(
        runs[0].keys().collect::<Vec<_>>(),
        runs[1].keys().collect::<Vec<_>>()
    );
    for (name, bytes) in &runs[0] {
        assert!(bytes == &runs[1][name], "{name} differs between runs");
    }
}

#[test]
fn zero_links_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"schema": 1, "foot": {"n": 0}}"#);
    let o = softfoot(&[
        "equilibrium",
        "--config",
        &cfg,
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n ≥ 1"));
}

#[test]
fn millimetre_config_is_converted() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"schema": 1, "units": "mm", "foot": {"phalanx_length": 20}}"#,
    );
    let o = softfoot(&[
        "equilibrium",
        "--config",
        &cfg,
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = equilibrium_json(tmp.path());
    assert_eq!(v["params"]["phalanx_length"].as_f64().unwrap(), 0.02);
    let prov = fs::read_to_string(tmp.path().join("provenance.txt")).unwrap();
    assert!(prov.contains("config foot.phalanx_length = 0.02 m"));
}

#[test]
fn conflicting_units_flag_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"units": "mm"}"#);
    let o = softfoot(&[
        "equilibrium",
        "--config",
        &cfg,
        "--units",
        "m",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("units"));
}

#[test]
fn unknown_subcommand_exits_with_usage_error() {
    let o = softfoot(&["fly"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_config_key_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"schema": 1, "foot": {"stiffnes": 3}}"#);
    let o = softfoot(&[
        "equilibrium",
        "--config",
        &cfg,
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unloaded_foot_without_pretension_stays_straight() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"schema": 1, "load_kg": 0, "foot": {"pretension_angle": 0}}"#,
    );
    let o = softfoot(&[
        "equilibrium",
        "--config",
        &cfg,
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = equilibrium_json(tmp.path());
    let q = v["q_rad"].as_array().unwrap();
    assert_eq!(q.len(), 9);
    assert!(q.iter().all(|x| x.as_f64().unwrap() == 0.0));
}

#[test]
fn defaults_are_logged_to_provenance() {
    let tmp = tempfile::tempdir().unwrap();
    let o = softfoot(&["planar-compare", "--out", tmp.path().to_str().unwrap()]);
    assert!(o.status.success());
    let prov = fs::read_to_string(tmp.path().join("provenance.txt")).unwrap();
    assert!(prov.contains("default schema = 1"));
    assert!(prov.contains("default foot.n = 6"));
    for f in [
        "planar_rigid.csv",
        "planar_compliant.csv",
        "planar_adaptive.csv",
    ] {
        assert!(tmp.path().join(f).exists(), "{f}");
    }
}
