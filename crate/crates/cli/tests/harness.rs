use std::fs;
use std::process::Command;

use roadfront_harness::{run_experiment, ExperimentConfig, HarnessError, RunSettings};

const FIGURES: &str = r#"
name = "small"
kind = "reproduce_figures"

[params]
D = 4.0
d = 0.5
mu = 1.4
L = 2.0

[grid]
half_width = 10.0
nx = 41
ny = 9

[run]
steps = 60
snapshot_times = [0.0, 0.05]

[sweep]
D = [4.0, 9.0, 16.0]
"#;

const QUENCH: &str = r#"
name = "quench"
kind = "road_quench_threshold"

[params]
D = 4.0
d = 0.5
mu = 1.4
L = 2.0
frame = "rescaled"

[grid]
half_width = 10.0
nx = 41
ny = 9

[initial]
road = { shape = "indicator", half_width = 1.0 }
field = { shape = "zero" }

[bisect]
param = "a"
lo = 0.05
hi = 0.1
tol = 0.01
horizon = 5.0
max_horizon = 5.0
"#;

const FLOW: &str = r#"
name = "flow"
kind = "flow_continuity"

[params]
D = 4.0
d = 0.5
mu = 1.4
L = 2.0
frame = "rescaled"

[grid]
half_width = 12.0
nx = 49
ny = 9

[flow]
a_values = [2.0, 6.0]
window = 8.0
t_end = 1.0
"#;

fn cfg(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml(text).unwrap()
}

fn settings(out: &std::path::Path, jobs: usize) -> RunSettings<'_> {
    RunSettings {
        out: Some(out),
        force: false,
        jobs,
    }
}

#[test]
fn summary_is_reproducible_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let c = cfg(FIGURES);
    let (a, b, s) = (
        dir.path().join("a"),
        dir.path().join("b"),
        dir.path().join("serial"),
    );
    run_experiment(&c, &settings(&a, 2)).unwrap();
    run_experiment(&c, &settings(&b, 2)).unwrap();
    run_experiment(&c, &settings(&s, 1)).unwrap();
    let read = |p: &std::path::Path| fs::read(p.join("summary.json")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_eq!(read(&a), read(&s));
    assert_eq!(
        fs::read(a.join("series/D=9/mass.csv")).unwrap(),
        fs::read(s.join("series/D=9/mass.csv")).unwrap()
    );
}

#[test]
fn manifest_lists_every_file_with_its_columns() {
    let dir = tempfile::tempdir().unwrap();
    run_experiment(&cfg(FIGURES), &settings(dir.path(), 0)).unwrap();
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["kind"], "reproduce_figures");
    let files = manifest["files"].as_array().unwrap();
    for f in files {
        assert!(
            dir.path().join(f["path"].as_str().unwrap()).is_file(),
            "{f}"
        );
    }
    let mass = files
        .iter()
        .find(|f| f["path"] == "series/D=4/mass.csv")
        .expect("mass series");
    assert_eq!(mass["columns"][0], "t");
    assert_eq!(mass["columns"][1], "mass");
    let text = fs::read_to_string(dir.path().join("series/D=4/mass.csv")).unwrap();
    assert!(text.starts_with("t,mass,"));
    assert!(dir.path().join("snapshots/D=16/001.snap").is_file());
    // The copied config loads back to the same experiment.
    let back = ExperimentConfig::load(&dir.path().join("config.toml")).unwrap();
    assert_eq!(back, cfg(FIGURES));
}

#[test]
fn occupied_output_needs_force() {
    let dir = tempfile::tempdir().unwrap();
    let c = cfg(FIGURES);
    run_experiment(&c, &settings(dir.path(), 0)).unwrap();
    let e = run_experiment(&c, &settings(dir.path(), 0)).unwrap_err();
    assert!(matches!(e, HarnessError::OutputExists(_)), "{e}");
    fs::write(dir.path().join("stale.txt"), "x").unwrap();
    let forced = RunSettings {
        force: true,
        ..settings(dir.path(), 0)
    };
    run_experiment(&c, &forced).unwrap();
    assert!(!dir.path().join("stale.txt").exists());
}

#[test]
fn bracket_with_equal_outcomes_is_an_error() {
    let e = run_experiment(&cfg(QUENCH), &RunSettings::default()).unwrap_err();
    assert!(matches!(e, HarnessError::SameOutcome { .. }), "{e}");
}

#[test]
fn empty_sweep_list_is_rejected_on_load() {
    let text = FIGURES.replace("D = [4.0, 9.0, 16.0]", "D = []");
    let e = ExperimentConfig::from_toml(&text).unwrap_err();
    assert!(matches!(e, HarnessError::Config { .. }), "{e}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_roadfront");
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        fs::write(&p, text).unwrap();
        p
    };
    let figures = write("figures.toml", FIGURES);
    let flow = write("flow.toml", FLOW);
    let run = |args: &[&std::ffi::OsStr]| Command::new(bin).args(args).output().unwrap();

    let out = run(&["run".as_ref(), "-c".as_ref(), figures.as_os_str()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS invariant_region_min"));

    // Both cut-offs lie inside the window, so the gap does not shrink.
    let out = run(&["run".as_ref(), "-c".as_ref(), flow.as_os_str()]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["certify".as_ref(), "-c".as_ref(), figures.as_os_str()]);
    assert_eq!(out.status.code(), Some(1));
    let missing = dir.path().join("missing.toml");
    let out = run(&["run".as_ref(), "-c".as_ref(), missing.as_os_str()]);
    assert_eq!(out.status.code(), Some(1));
}
