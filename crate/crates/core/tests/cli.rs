use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use radiomap::io;
use radiomap::model::{Bounds, Provenance};
use radiomap::sim::{gen_walk, synth_imu, synth_scans, ApSpec, SimConfig};
use radiomap::{Fingerprint, Floorplan, MacId, Point, RadioMap, ReferencePoint};

fn radiomap(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_radiomap"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// 15 m straight walk north with IMU, scans, truth and a wall-free plan.
fn straight_walk(dir: &Path) {
    let cfg = SimConfig { seed: 2, ..SimConfig::default() };
    let truth = gen_walk(&[Point::new(5.0, 2.0), Point::new(5.0, 17.0)], &cfg).unwrap();
    let plan = Floorplan::open(Bounds { xmin: 0.0, ymin: 0.0, xmax: 10.0, ymax: 20.0 });
    let aps: Vec<ApSpec> = (0..4)
        .map(|i| ApSpec::new(MacId::synthetic(i), Point::new(if i % 2 == 0 { 1.0 } else { 9.0 }, 5.0 * i as f64 + 2.0)))
        .collect();
    io::write_imu(&dir.join("imu.csv"), &synth_imu(&truth, &cfg).unwrap()).unwrap();
    io::write_scans(&dir.join("scans.csv"), &synth_scans(&truth, &aps, &plan, &SimConfig { scan_interval: 1.0, ..cfg })).unwrap();
    io::write_track(&dir.join("truth.csv"), &truth).unwrap();
    io::write_floorplan(&dir.join("plan.json"), &plan).unwrap();
}

#[test]
fn pdr_then_evaluate_reports_small_error() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    straight_walk(dir);
    let out = radiomap(dir, &["pdr", "--imu", "imu.csv", "--start-x", "5", "--start-y", "2", "--out", "pdr.csv"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let track = io::read_track(&dir.join("pdr.csv")).unwrap();
    assert_eq!(track.step_count(), 20);

    let out = radiomap(dir, &["evaluate", "--estimated", "pdr.csv", "--truth", "truth.csv"]);
    assert_eq!(code(&out), 0);
    let summary: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(summary["percentile_method"].as_str().unwrap().contains("linear"));
    assert!(summary["stats"]["maximum"].as_f64().unwrap() < 0.05);
    assert_eq!(summary["stats"]["count"].as_u64().unwrap(), 21);
}

#[test]
fn localize_writes_one_row_per_scan() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    straight_walk(dir);
    let out = radiomap(dir, &["build-map", "--track", "truth.csv", "--scans", "scans.csv", "--out", "map.json"]);
    assert_eq!(code(&out), 0);
    let log = String::from_utf8(out.stderr).unwrap();
    assert!(log.lines().all(|l| l.starts_with("pair(") && l.contains(" outcome=")), "{log}");

    let out = radiomap(dir, &["localize", "--map", "map.json", "--algo", "wknn", "--k", "2", "--query", "scans.csv"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x,y,floor,algo,k"));
    let scans = io::read_scans(&dir.join("scans.csv")).unwrap();
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), scans.len());
    assert!(rows.iter().all(|r| r.ends_with(",0,wknn,2")));
}

#[test]
fn input_errors_exit_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    straight_walk(dir);
    fs::write(dir.join("bad.csv"), "t,mac,rss\n0,not-a-mac,-50\n").unwrap();
    fs::write(dir.join("empty_map.json"), "{\"provenance\":\"dynamic\",\"points\":[]}").unwrap();
    let one = RadioMap::new(
        Provenance::Static,
        vec![ReferencePoint {
            id: 0,
            position: Point::new(1.0, 1.0),
            floor: 0,
            fingerprint: [(MacId::synthetic(0), -50.0)].into_iter().collect::<Fingerprint>(),
            sample_count: 1,
        }],
    )
    .unwrap();
    io::write_radio_map(&dir.join("one.json"), &one).unwrap();

    let cases: &[&[&str]] = &[
        &["pdr", "--imu", "missing.csv"],
        &["build-map", "--track", "truth.csv", "--scans", "bad.csv"],
        &["localize", "--map", "one.json", "--algo", "svm", "--query", "scans.csv"],
        &["localize", "--map", "one.json", "--algo", "knn", "--k", "3", "--query", "scans.csv"],
        &["localize", "--map", "empty_map.json", "--algo", "nn", "--query", "scans.csv"],
        &["--config", "missing.json", "pdr", "--imu", "imu.csv"],
        &["no-such-command"],
    ];
    for args in cases {
        let out = radiomap(dir, args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn particle_collapse_exits_with_3() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    straight_walk(dir);
    // the walk leaves this 2 m box within a few steps
    let boxed = Floorplan::open(Bounds { xmin: 4.0, ymin: 1.0, xmax: 6.0, ymax: 3.0 });
    io::write_floorplan(&dir.join("box.json"), &boxed).unwrap();
    let out = radiomap(
        dir,
        &["--seed", "1", "pf-pdr", "--imu", "imu.csv", "--floorplan", "box.json", "--start-x", "5", "--start-y", "2"],
    );
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("collapsed at step"));
}

#[test]
fn config_file_overrides_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    straight_walk(dir);
    fs::write(dir.join("cfg.json"), "{\"pdr\": {\"step_length\": 0.5}}").unwrap();
    let out = radiomap(dir, &["--config", "cfg.json", "pdr", "--imu", "imu.csv", "--start-y", "2", "--start-x", "5"]);
    assert_eq!(code(&out), 0);
    let track = io::read_track_csv(out.stdout.as_slice()).unwrap();
    let end = track.last().unwrap().pose;
    assert!((end.y - 12.0).abs() < 1e-3, "{end:?}");

    fs::write(dir.join("typo.json"), "{\"pdr\": {\"step_lenght\": 0.5}}").unwrap();
    let out = radiomap(dir, &["--config", "typo.json", "pdr", "--imu", "imu.csv"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn seed_changes_particle_filter_output() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    straight_walk(dir);
    let run = |seed: &str| {
        let out = radiomap(dir, &["--seed", seed, "pf-pdr", "--imu", "imu.csv", "--floorplan", "plan.json", "--start-x", "5", "--start-y", "2"]);
        assert_eq!(code(&out), 0);
        out.stdout
    };
    assert_eq!(run("1"), run("1"));
    assert_ne!(run("1"), run("2"));
}
