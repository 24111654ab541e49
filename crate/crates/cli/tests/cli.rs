use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use crap_core::clutter::io::save_snapshots;
use crap_core::clutter::ClutterSnapshots;
use crap_core::numerics::ComplexMatrix;
use crap_core::Complex64;

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("crap-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

/// The desk preset shrunk to run in a few seconds.
fn small_config(dir: &Path) -> PathBuf {
    let desk = fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/desk.toml")).unwrap();
    let text = desk
        .replace("n_subcarriers = 256", "n_subcarriers = 64")
        .replace("n_symbols = 128", "n_symbols = 32")
        .replace("snapshots = 64", "snapshots = 16")
        .replace("trials = 200", "trials = 3")
        .replace("noise_dbm = [-120.0, -110.0, -100.0, -90.0, -80.0]", "noise_dbm = [-120.0]");
    let path = dir.join("small.toml");
    fs::write(&path, text).unwrap();
    path
}

fn crap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crap")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn acquire_calibrate_sense_pipeline() {
    let dir = workdir("pipeline");
    let cfg = small_config(&dir);
    let (snaps, cal, frame, pgram) = (dir.join("s.bin"), dir.join("c.bin"), dir.join("f.bin"), dir.join("p.bin"));

    let out = crap(&["acquire", "--config", s(&cfg), "--out", s(&snaps)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = crap(&["calibrate", "--in", s(&snaps), "--out", s(&cal)]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("order,"));

    let out = crap(&["acquire", "--config", s(&cfg), "--out", s(&frame), "--runtime"]);
    assert!(out.status.success());
    let truth = String::from_utf8(out.stdout).unwrap();
    let truth: Vec<f64> = truth.trim().split(',').skip(1).map(|v| v.parse().unwrap()).collect();

    let out = crap(&[
        "sense", "--cal", s(&cal), "--in", s(&frame), "--remover", "crap", "--config", s(&cfg), "--dump-pgram",
        s(&pgram),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let line = String::from_utf8(out.stdout).unwrap();
    let fields: Vec<&str> = line.trim().split(',').collect();
    assert_eq!(fields.len(), 8);
    assert_eq!(fields[0], "crap");
    assert_eq!(fields[1], "true");
    let range: f64 = fields[2].parse().unwrap();
    assert!((range - truth[0]).abs() < 1.0, "{range} vs {}", truth[0]);
    assert!(pgram.exists());
    assert!(fs::read_to_string(dir.join("p.bin.csv")).unwrap().lines().count() == 2);

    for remover in ["eca-c", "eca-s"] {
        let out = crap(&["sense", "--in", s(&frame), "--remover", remover, "--config", s(&cfg), "--snapshots", s(&snaps)]);
        assert!(out.status.success(), "{remover}");
    }
}

#[test]
fn simulate_is_deterministic_and_appends() {
    let dir = workdir("simulate");
    let cfg = small_config(&dir);
    let (a, b) = (dir.join("a.csv"), dir.join("b.csv"));
    assert!(crap(&["simulate", "--config", s(&cfg), "--out", s(&a)]).status.success());
    assert!(crap(&["simulate", "--config", s(&cfg), "--out", s(&b)]).status.success());
    let first = fs::read_to_string(&a).unwrap();
    assert_eq!(first, fs::read_to_string(&b).unwrap());
    // header plus one row per remover
    assert_eq!(first.lines().count(), 5);

    assert!(crap(&["simulate", "--config", s(&cfg), "--out", s(&a)]).status.success());
    let appended = fs::read_to_string(&a).unwrap();
    let lines: Vec<&str> = appended.lines().collect();
    assert_eq!(lines.len(), 9);
    assert_eq!(lines[5..], lines[1..5]);
    assert_eq!(lines.iter().filter(|l| l.starts_with("schema")).count(), 1);
}

#[test]
fn append_refuses_a_foreign_header() {
    let dir = workdir("foreign");
    let cfg = small_config(&dir);
    let out = dir.join("x.csv");
    fs::write(&out, "something,else\n1,2\n").unwrap();
    let res = crap(&["simulate", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(res.status.code(), Some(2));
    assert_eq!(fs::read_to_string(&out).unwrap(), "something,else\n1,2\n");
}

#[test]
fn track_replays_a_trajectory() {
    let dir = workdir("track");
    let cfg = small_config(&dir);
    let traj = dir.join("t.csv");
    let mut text = String::from("t,r,v\n");
    for i in 0..=20 {
        let t = i as f64 * 0.01;
        text.push_str(&format!("{t},{},0.8\n", 5.0 + 0.8 * t));
    }
    fs::write(&traj, text).unwrap();
    let out = dir.join("track.csv");
    let res = crap(&["track", "--config", s(&cfg), "--trajectory", s(&traj), "--out", s(&out)]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let log = fs::read_to_string(&out).unwrap();
    assert_eq!(log.lines().count(), 22);
    assert!(log.lines().nth(1).unwrap().starts_with("crap-track/1,"));
}

#[test]
fn exit_codes() {
    let dir = workdir("exit");
    let missing = dir.join("nope.toml");
    assert_eq!(crap(&["simulate", "--config", s(&missing), "--out", s(&dir.join("o.csv"))]).status.code(), Some(2));

    let bad = dir.join("bad.toml");
    fs::write(&bad, "[sweep]\ntrials = 0\n").unwrap();
    assert_eq!(crap(&["simulate", "--config", s(&bad), "--out", s(&dir.join("o.csv"))]).status.code(), Some(2));

    let garbage = dir.join("g.bin");
    fs::write(&garbage, b"not a snapshot file").unwrap();
    assert_eq!(crap(&["calibrate", "--in", s(&garbage), "--out", s(&dir.join("c.bin"))]).status.code(), Some(2));

    assert_eq!(crap(&["calibrate", "--in", s(&garbage), "--out", "x", "--order", "many"]).status.code(), Some(2));

    let nan = dir.join("nan.bin");
    let frame = ComplexMatrix::from_fn(4, 2, |i, _| if i == 0 { Complex64::new(f64::NAN, 0.0) } else { Complex64::new(1.0, 0.0) });
    let snaps = ClutterSnapshots::from_fn(4, 2, 2, |_| Ok(frame.clone())).unwrap();
    save_snapshots(&snaps, &nan).unwrap();
    assert_eq!(crap(&["calibrate", "--in", s(&nan), "--out", s(&dir.join("c.bin"))]).status.code(), Some(3));
}
