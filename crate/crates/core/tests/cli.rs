use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn taz(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_taz"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn error_json(out: &Output) -> serde_json::Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(stderr.trim()).unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {stderr}"))
}

#[test]
fn synth_then_run_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = taz(&["synth", "--out", "city", "--seed", "3"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("city/units.geojson").exists());
    fs::write(
        dir.path().join("run.toml"),
        "units = \"city/units.geojson\"\nod = \"city/od.csv\"\nout = \"result\"\n",
    )
    .unwrap();
    let out = taz(&["run", "--config", "run.toml"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let partition = fs::read_to_string(dir.path().join("result/partition.csv")).unwrap();
    assert_eq!(partition.lines().next(), Some("unit_id,region_id,level"));
    assert_eq!(partition.lines().count(), 82);
    let out = taz(&["validate", "--config", "run.toml"], dir.path());
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("partition.csv ok"));
}

#[test]
fn missing_od_file_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    taz(&["synth", "--out", "city"], dir.path());
    fs::write(
        dir.path().join("run.toml"),
        "units = \"city/units.geojson\"\nod = \"city/missing_od.csv\"\n",
    )
    .unwrap();
    let out = taz(&["run", "--config", "run.toml"], dir.path());
    assert!(!out.status.success());
    let err = error_json(&out);
    assert!(err["path"].as_str().unwrap().ends_with("missing_od.csv"), "{err}");
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "synth = true\nresolutoin = 2.0\n").unwrap();
    let out = taz(&["run", "--config", "bad.toml"], dir.path());
    assert!(!out.status.success());
    assert_eq!(error_json(&out)["error"], "config");
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), "synth = true\nout = \"from_file\"\n").unwrap();
    let out = taz(
        &["run", "--config", "c.toml", "--out", "from_flag", "--workers", "1"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("from_flag/partition.csv").exists());
    assert!(!dir.path().join("from_file").exists());
}

#[test]
fn bad_scenario_and_method_fail() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), "synth = true\n").unwrap();
    let out = taz(&["sweep", "--config", "c.toml", "--scenario", "nonsense"], dir.path());
    assert!(!out.status.success());
    let out = taz(&["multilevel", "--config", "c.toml", "--method", "4"], dir.path());
    assert!(!out.status.success());
}

#[test]
fn multilevel_writes_level_files() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), "synth = true\n").unwrap();
    let out = taz(&["multilevel", "--config", "c.toml", "--method", "2"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["partition_l0.csv", "partition_l1.csv", "nesting.csv", "objectives.csv"] {
        assert!(dir.path().join("out").join(f).exists(), "{f}");
    }
}
