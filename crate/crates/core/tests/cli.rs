use std::fs;
use std::process::{Command, Output};

fn noisemap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_noisemap")).args(args).output().unwrap()
}

#[test]
fn channel_sweep_writes_csv_to_stdout() {
    let out = noisemap(&["channel-sweep", "--dgw", "1000", "--dt", "300,600", "--trials", "50", "--seed", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("1000,300,"));
}

#[test]
fn config_file_is_applied_and_validated() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.toml");
    fs::write(&good, "[datagen]\nn_trials = 40\n").unwrap();
    let out_dir = dir.path().join("data");
    let out = noisemap(&["--config", good.to_str().unwrap(), "gen-data", "--kind", "regression", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = fs::read_to_string(out_dir.join("regression.csv")).unwrap().lines().count() - 1;
    // one full-mask row plus one per held-out node for each trial
    assert_eq!(rows, 40 * 10);
    assert!(out_dir.join("regression.csv.meta.json").exists());

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[datagen]\nnot_a_field = 1\n").unwrap();
    let out = noisemap(&["--config", bad.to_str().unwrap(), "scene"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.toml"));
}

#[test]
fn scene_dump_loads_back() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scene.json");
    assert!(noisemap(&["scene", "--out", path.to_str().unwrap()]).status.success());
    let scene = noisemap::acoustics::Scene::load(&path).unwrap();
    assert_eq!(scene.nodes().len(), noisemap::acoustics::NODES_PER_AREA);
}

#[test]
fn missing_models_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = noisemap(&["replay", "--models", d, "--dgw", "500", "--dt", "300", "--out", d]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}
