use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use elex::io::{read_events, read_trajectory_csv};

fn elex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_elex")).args(args).env("ELEX_WORKERS", "1").output().expect("spawn elex")
}

fn ok(args: &[&str]) -> Output {
    let out = elex(args);
    assert!(out.status.success(), "elex {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn json(bytes: &[u8]) -> serde_json::Value {
    serde_json::from_slice(bytes).expect("valid JSON")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn check_iso_and_negative_control() {
    let v = json(&ok(&["check-iso", "--n", "3", "--a", "1/2"]).stdout);
    assert_eq!(v["max_discrepancy"], 0.0);
    assert_eq!(v["n_states"], 4);
    let v = json(&ok(&["check-iso", "--n", "3", "--no-left-hops"]).stdout);
    assert!(v["max_discrepancy"].as_f64().unwrap() > 0.0);
    assert!(!v["mismatches"].as_array().unwrap().is_empty());
}

#[test]
fn verify_spectral_writes_passing_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("spectral.json");
    ok(&["verify-spectral", "--max-n", "8", "--out", p(&out)]);
    let v = json(&std::fs::read(&out).unwrap());
    for id in v["identities"].as_array().unwrap() {
        assert_eq!(id["pass"], true, "{id}");
    }
}

#[test]
fn simulate_x_conserves_mass_at_every_observation() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("x.csv");
    let events = dir.path().join("x.jsonl");
    ok(&["simulate-x", "--n", "20", "--t-max", "0.05", "--obs-times", "0,0.01,0.05", "--out", p(&csv), "--events", p(&events)]);
    let rows = read_trajectory_csv(std::fs::File::open(&csv).unwrap()).unwrap();
    let mut mass: BTreeMap<String, u32> = BTreeMap::new();
    for r in &rows {
        *mass.entry(r.time.to_string()).or_default() += r.value;
    }
    assert_eq!(mass.len(), 3);
    assert!(mass.values().all(|&m| m == 20), "{mass:?}");
    let ev = read_events(std::io::BufReader::new(std::fs::File::open(&events).unwrap())).unwrap();
    assert!(!ev.is_empty());
    assert!(ev.windows(2).all(|w| w[0].time < w[1].time));
}

#[test]
fn simulate_z_from_configuration_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"N": 4, "a": 1.0, "heights": [2, 1, 1, 0]}"#).unwrap();
    let csv = dir.path().join("z.csv");
    ok(&["simulate-z", "--n", "4", "--t-max", "0.1", "--initial", p(&cfg), "--out", p(&csv)]);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("time,site,occupancy\n"));
    let rows = read_trajectory_csv(text.as_bytes()).unwrap();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.value <= 1));
}

#[test]
fn solvers_write_their_tables() {
    let dir = tempfile::tempdir().unwrap();
    let st = dir.path().join("stefan");
    ok(&["solve-stefan", "--s0", "0.5", "--t-max", "0.01", "--grid", "50", "--dt", "1e-4", "--frames", "2", "--out", p(&st)]);
    let front = std::fs::read_to_string(st.join("front.csv")).unwrap();
    let first = front.lines().nth(1).unwrap();
    let (t0, s0) = first.split_once(',').unwrap();
    // The discrete front is reset so the grid mass is exactly one.
    assert_eq!(t0, "0");
    assert!((s0.parse::<f64>().unwrap() - 0.5).abs() < 1.0 / 50.0, "{front}");
    assert!(std::fs::read_to_string(st.join("profile.csv")).unwrap().starts_with("t,x,v,u\n"));

    let z = dir.path().join("z");
    ok(&["solve-z", "--t-max", "0.01", "--grid", "50", "--dt", "1e-4", "--frames", "2", "--out", p(&z)]);
    assert!(std::fs::read_to_string(z.join("z.csv")).unwrap().starts_with("t,y,z\n"));
    json(&std::fs::read(z.join("summary.json")).unwrap());

    let v = json(&ok(&["check-equivalence", "--t-max", "0.01", "--grid", "50", "--dt", "1e-4", "--frames", "2"]).stdout);
    assert!(v["max_sup"].as_f64().unwrap() < 1e-2);
}

#[test]
fn converge_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let args = [
        "converge-x", "--n-list", "16,32", "--t-max", "0.02", "--obs-count", "2", "--replicas", "30", "--grid", "100", "--dt", "1e-4",
        "--out", p(&out),
    ];
    let stdout = String::from_utf8(ok(&args).stdout).unwrap();
    assert!(stdout.contains("process X"));
    let rep = elex::parse_report(&out).unwrap();
    assert_eq!(rep.config.n_list, vec![16, 32]);
    assert_eq!(rep.seeds.len(), 30);
    let r = elex(&["report", "--input", p(&out), "--check", "h"]);
    assert!(matches!(r.status.code(), Some(0) | Some(2)));
    assert!(String::from_utf8_lossy(&r.stdout).contains("h"));
}

#[test]
fn bad_input_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("x.csv");
    let r = elex(&["simulate-x", "--n", "8", "--t-max", "0.1", "--obs-times", "0.2", "--out", p(&csv)]);
    assert!(!r.status.success());
    assert!(String::from_utf8_lossy(&r.stderr).starts_with("error:"));

    let r = elex(&["solve-stefan", "--s0", "0.3", "--out", p(dir.path())]);
    assert!(!r.status.success());

    let r = elex(&["converge-x", "--replicas", "5", "--out", p(dir.path())]);
    assert!(!r.status.success());
    assert!(String::from_utf8_lossy(&r.stderr).contains("replicas"));

    let r = elex(&["report", "--input", p(&dir.path().join("missing"))]);
    assert!(!r.status.success());
}
