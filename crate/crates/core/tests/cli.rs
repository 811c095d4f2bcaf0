use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_tls-planner");

/// The shipped ENGR config shrunk to a 2 x 3 field with a coarse scanner.
fn small_config(dir: &Path, edit: impl Fn(String) -> String) -> PathBuf {
    let base =
        fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/engr.toml"))
            .unwrap();
    let text = base
        .replace("n_rows = 10", "n_rows = 2")
        .replace("plots_per_row = 6", "plots_per_row = 3")
        .replace("angular_step = 0.36", "angular_step = 1.5")
        .replace("route_set_size = 11", "")
        .replace("subsample = 10000", "subsample = 2000")
        .replace("scan_dwell = 10.0", "scan_dwell = 2.0")
        .replace(
            "output_dir = \"out/engr\"",
            &format!("output_dir = {:?}", dir.join("out").display().to_string()),
        );
    let path = dir.join("small.toml");
    fs::write(&path, edit(text)).unwrap();
    path
}

fn run(args: &[&str], config: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .arg("--config")
        .arg(config)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn zero_rows_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), |t| t.replace("n_rows = 2", "n_rows = 0"));
    let out = run(&["plan"], &cfg);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).contains("n_rows"));
}

#[test]
fn unknown_key_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), |t| t.replace("[sim]", "[sim]\nlookahead = 2.0"));
    let out = run(&["plan"], &cfg);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).contains("lookahead"));
}

#[test]
fn bad_metric_flag_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), |t| t);
    let out = Command::new(BIN)
        .args(["route", "--metric", "taxicab", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_waypoints_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), |t| t);
    let out_dir = dir.path().join("out");
    fs::create_dir_all(&out_dir).unwrap();
    fs::write(
        out_dir.join("waypoints.csv"),
        "index,x,y,heading,location_id,next_segment\n0,1.0,1.0,0.0,,headland\n1,abc,2.0,0.0,3,\n",
    )
    .unwrap();
    let out = run(&["simulate"], &cfg);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    let err = stderr(&out);
    assert!(
        err.contains("waypoints.csv") && err.contains("line 3"),
        "{err}"
    );
}

#[test]
fn missing_inputs_are_a_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), |t| t);
    let out = run(&["route"], &cfg);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
}

fn pipeline(dir: &Path, seed: &str) -> Vec<(String, Vec<u8>)> {
    let cfg = small_config(dir, |t| t);
    for stage in ["plan", "route", "simulate", "evaluate"] {
        let out = run(&[stage, "--seed", seed], &cfg);
        assert!(out.status.success(), "{stage}: {}", stderr(&out));
        assert!(!out.stdout.is_empty());
    }
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir.join("out"))
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn full_run_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let fa = pipeline(a.path(), "11");
    let fb = pipeline(b.path(), "11");
    let names: Vec<&str> = fa.iter().map(|f| f.0.as_str()).collect();
    for want in [
        "visibility.csv",
        "cover.csv",
        "waypoints.csv",
        "trajectory.csv",
        "registration.csv",
    ] {
        assert!(names.contains(&want), "missing {want}");
    }
    assert_eq!(fa.len(), fb.len());
    for ((na, da), (nb, db)) in fa.iter().zip(&fb) {
        assert_eq!(na, nb);
        assert!(da == db, "{na} differs between runs");
    }
}
