use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;

use wavepacket_cli::config::{parse_config, Experiment};
use wavepacket_cli::output::{read_table, read_timeseries, render_snapshot, write_timeseries, TIMESERIES_COLUMNS};
use wavepacket_cli::{read_manifest, run_experiment, verify_dir, Mismatch, Preset};
use wavepacket_core::{harmonic_ground_state, propagate, Grid, ModelSpec, PulseSpec, RunConfig};

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn example_configs_parse() {
    let mut seen = BTreeSet::new();
    for entry in fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        let cfg = parse_config(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        if let Experiment::Preset { preset, params } = &cfg.experiment {
            // Example files document the defaults.
            assert_eq!(params, &preset.defaults(), "{}", path.display());
            seen.insert(preset.name());
        }
    }
    for p in Preset::ALL {
        assert!(seen.contains(p.name()), "no example for {}", p.name());
    }
}

fn small_trajectory() -> (Arc<Grid>, wavepacket_core::Trajectory) {
    let g = Arc::new(Grid::new(-12.0, 20.0, 256).unwrap());
    let s = harmonic_ground_state(g.clone()).unwrap();
    let m = ModelSpec::decay(2.0, PulseSpec::gaussian(1.0, 0.5, 0.2).unwrap()).unwrap();
    let cfg = RunConfig::new(0.01, 1.5).unwrap().with_record_every(5).with_snapshot_every(50);
    (g, propagate(&s, &m, &cfg).unwrap().0)
}

#[test]
fn timeseries_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (_, traj) = small_trajectory();
    let path = dir.path().join("ts.tsv");
    write_timeseries(&traj, &path).unwrap();

    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split('\t').collect();
    assert_eq!(header, TIMESERIES_COLUMNS);
    for line in lines {
        assert_eq!(line.split('\t').count(), header.len());
    }

    let back = read_timeseries(&path).unwrap();
    let pairs = [
        (&traj.times, &back.times),
        (&traj.p1, &back.p1),
        (&traj.p2, &back.p2),
        (&traj.mean_x1, &back.mean_x1),
        (&traj.mean_x2, &back.mean_x2),
        (&traj.var_x1, &back.var_x1),
        (&traj.var_x2, &back.var_x2),
        (&traj.absorbed, &back.absorbed),
    ];
    for (a, b) in pairs {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b.iter()) {
            if x.is_nan() {
                assert!(y.is_nan());
            } else {
                assert!((x - y).abs() <= 5e-12 * x.abs().max(1e-300), "{x} vs {y}");
            }
        }
    }
}

#[test]
fn snapshot_positions_are_grid_nodes() {
    let dir = tempfile::tempdir().unwrap();
    let (g, traj) = small_trajectory();
    assert!(traj.snapshots.len() >= 2);
    let path = dir.path().join("snap.tsv");
    fs::write(&path, render_snapshot(&traj.snapshots[1], &g, "0123456789abcdef")).unwrap();
    let table = read_table(&path).unwrap();
    assert_eq!(table.columns, ["x", "density1", "density2"]);
    assert!(table.comments.iter().any(|c| c == "config_hash = 0123456789abcdef"));
    assert!(table.comments.iter().any(|c| c.starts_with("t = ")));
    assert_eq!(table.column("x").unwrap(), g.x());
}

fn data_files(dir: &Path) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_string_lossy().replace('\\', "/"));
            }
        }
    }
    out
}

#[test]
fn manifest_inventory_is_complete_and_verifiable() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = parse_config("preset = rabi\n[params]\nsnapshot_every = 1000\n").unwrap();
    cfg.out = dir.path().to_path_buf();
    let manifest = run_experiment(&cfg).unwrap();
    assert!(manifest.passed());

    let mut listed: BTreeSet<String> = manifest.files.iter().map(|f| f.path.clone()).collect();
    listed.insert("manifest.json".into());
    assert_eq!(listed, data_files(dir.path()));
    assert!(listed.iter().any(|f| f.starts_with("snapshots/")));

    assert_eq!(read_manifest(dir.path()).unwrap(), manifest);
    assert!(verify_dir(dir.path()).unwrap().is_empty());

    fs::write(dir.path().join("timeseries.tsv"), "tampered\n").unwrap();
    fs::remove_file(dir.path().join(&manifest.files[0].path)).ok();
    let problems = verify_dir(dir.path()).unwrap();
    assert!(problems.contains(&Mismatch::Changed("timeseries.tsv".into())) || problems.contains(&Mismatch::Missing("timeseries.tsv".into())));
    assert!(!problems.is_empty());
}

#[test]
fn binary_verbs() {
    let exe = env!("CARGO_BIN_EXE_wavepacket");
    let out = Command::new(exe).arg("presets").output().unwrap();
    assert!(out.status.success());
    let listing = String::from_utf8(out.stdout).unwrap();
    for p in Preset::ALL {
        assert!(listing.contains(p.name()));
    }

    let out = Command::new(exe).args(["analytic", "--preset", "decay_weak"]).output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["gamma_reflection"].as_f64().unwrap() - 0.26).abs() < 1e-12);

    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(exe)
        .args(["run", "--preset", "rabi", "--seed", "3", "--verify", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let status = Command::new(exe).arg("verify").arg("--out").arg(dir.path()).status().unwrap();
    assert!(status.success());
    assert_eq!(read_manifest(dir.path()).unwrap().config["seed"], 3);

    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "preset = rabi\n[run]\ndt = -0.1\n").unwrap();
    let out = Command::new(exe).arg("run").arg("--config").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("cannot be combined"), "{err}");
}
