use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pointgap::cli::presets;
use pointgap::cli::ExperimentConfig;
use serde_json::Value;

fn pointgap(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pointgap")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn write_preset(name: &str, dir: &Path, edit: impl FnOnce(&mut ExperimentConfig)) -> PathBuf {
    let mut c = presets::find(name).expect("preset").config;
    c.output_dir = dir.join("out");
    edit(&mut c);
    let path = dir.join(format!("{name}.json"));
    fs::write(&path, c.to_json()).unwrap();
    path
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn winding_run_reports_trivial_chain_sector() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_preset("chain-n3-free-winding", dir.path(), |c| c.n_grid = 64);
    let out = pointgap(&["run", cfg.to_str().unwrap()], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let w = read_json(&dir.path().join("out/winding.json"));
    assert_eq!(w["sector"], serde_json::json!([3, -1]));
    assert_eq!(w["e_ref"], serde_json::json!([0.0, 0.0]));
    assert_eq!(w["winding"], 0);
    for key in ["raw_phase_change", "gap_margin", "grid_size_used"] {
        assert!(w.get(key).is_some(), "{key}");
    }
    let manifest = read_json(&dir.path().join("out/manifest.json"));
    assert_eq!(manifest["summary"]["winding"], 0);
    assert_eq!(manifest["config"]["task"], "winding");
}

#[test]
fn flow_csv_has_both_a_orbital_traces() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_preset("dot-one-body-flow", dir.path(), |c| c.n_grid = 16);
    let out = pointgap(&["run", cfg.to_str().unwrap()], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("out/flow.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("theta,eig_index,re_e,im_e"));
    // 17 theta points, 4 one-body levels
    assert_eq!(lines.count(), 17 * 4);
}

#[test]
fn identical_configs_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_preset("chain-n3-interacting-skin", dir.path(), |c| c.n_grid = 32);
    let hashes = || {
        let out = pointgap(&["run", cfg.to_str().unwrap()], dir.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        read_json(&dir.path().join("out/manifest.json"))["files"].clone()
    };
    let first = hashes();
    assert!(first.as_array().unwrap().iter().any(|f| f["path"] == "occupations.csv"));
    assert_eq!(first, hashes());
    let occ = fs::read_to_string(dir.path().join("out/occupations.csv")).unwrap();
    assert_eq!(occ.lines().next(), Some("state_index,re_e,im_e,site,orbital,spin,value"));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"model": "chain", "params": {"sites": 7, "hopping": 1.0}, "task": "winding", "output_dir": "o", "seed": 3}"#)
        .unwrap();
    let out = pointgap(&["run", bad.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("stage=config"));

    let heavy = write_preset("chain-n9-free-winding", dir.path(), |_| {});
    let out = pointgap(&["run", heavy.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--allow-heavy"));

    let missing = pointgap(&["run", "does-not-exist.json"], dir.path());
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn compute_errors_exit_with_three_and_carry_context() {
    let dir = tempfile::tempdir().unwrap();
    // reference energy on the isolated b-up level
    let cfg = write_preset("dot-one-body-winding", dir.path(), |c| {
        c.sector = Some([1, -1]);
        c.e_ref = [0.0, 0.35];
        c.n_grid = 32;
    });
    let out = pointgap(&["run", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("task=winding") && err.contains("sector=(1,-1)"), "{err}");
}

#[test]
fn presets_subcommand_lists_and_writes() {
    let dir = tempfile::tempdir().unwrap();
    let out = pointgap(&["presets", "--write", "p"], dir.path());
    assert!(out.status.success());
    let listing = String::from_utf8_lossy(&out.stdout);
    let catalog = presets::catalog();
    for p in &catalog {
        assert!(listing.contains(p.name), "{}", p.name);
        let on_disk = ExperimentConfig::load(&dir.path().join("p").join(format!("{}.json", p.name))).unwrap();
        assert_eq!(on_disk, p.config);
    }
}

#[test]
fn shipped_preset_files_match_the_catalog() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../presets");
    let mut names: Vec<String> = fs::read_dir(&root)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".json"))
        .collect();
    names.sort();
    let mut expected: Vec<String> = presets::catalog().iter().map(|p| format!("{}.json", p.name)).collect();
    expected.sort();
    assert_eq!(names, expected);
    for p in presets::catalog() {
        let text = fs::read_to_string(root.join(format!("{}.json", p.name))).unwrap();
        assert_eq!(text, p.config.to_json(), "{} is stale; rerun `pointgap presets --write presets`", p.name);
    }
}

#[test]
fn check_subcommand_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = pointgap(&["check"], dir.path());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 7);
}
