use std::f64::consts::FRAC_PI_2;
use std::process::{Command, Output};

use nhlgi::export::Table;
use serde_json::Value;

fn nhlgi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nhlgi"))
        .args(args)
        .env("NHLGI_THREADS", "2")
        .output()
        .expect("spawn nhlgi")
}

fn stdout_ok(args: &[&str]) -> String {
    let out = nhlgi(args);
    assert!(
        out.status.success(),
        "nhlgi {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn csv(args: &[&str]) -> Table {
    Table::parse_csv(&stdout_ok(args)).expect("parsable csv")
}

fn meta<'a>(table: &'a Table, key: &str) -> Option<&'a str> {
    table.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
}

#[test]
fn lgi_reproduces_lueders_and_beyond() {
    let t = csv(&["lgi", "--theta", "0,0.5235987755982988", "--t", "0.7853981633974483"]);
    assert_eq!(t.columns, ["theta", "kappa", "t1", "t2", "t3", "C12", "C23", "C13", "K3"]);
    let k3 = t.column("K3").unwrap();
    assert!((k3[0] - 1.0).abs() < 1e-10, "θ = 0: {}", k3[0]);
    assert!((k3[1] - 1.75).abs() < 1e-10, "θ = π/6: {}", k3[1]);
    assert_eq!(meta(&t, "command"), Some("lgi"));
    assert_eq!(meta(&t, "seed"), Some("none"));
}

#[test]
fn lgi_explicit_times() {
    let t = csv(&["lgi", "--theta", "0.4", "--t1", "0.1", "--t2", "0.5", "--t3", "1.2"]);
    assert_eq!(t.rows.len(), 1);
    assert_eq!(&t.rows[0][2..5], &[0.1, 0.5, 1.2]);
}

#[test]
fn trajectory_at_theta_zero_is_great_circle() {
    let t = csv(&["trajectory", "--theta", "0", "--tmax", "1.5708", "--step", "0.01"]);
    assert_eq!(t.rows.len(), 158);
    let times = t.column("t").unwrap();
    let sx = t.column("S_x").unwrap();
    let sy = t.column("S_y").unwrap();
    let sz = t.column("S_z").unwrap();
    for i in 0..t.rows.len() {
        // H = σ_x rotates |↑⟩_y about x̂ at angular frequency 2
        assert!(sx[i].abs() < 1e-12);
        assert!((sy[i] + 0.5 * (2.0 * times[i]).cos()).abs() < 1e-9, "row {i}");
        assert!((sy[i].hypot(sz[i]) - 0.5).abs() < 1e-9);
    }
}

#[test]
fn distance_matches_closed_form() {
    let t = csv(&["distance", "--theta", "0.3,1.2", "--tmax", "3", "--step", "0.1"]);
    let d = t.column("delta").unwrap();
    let cf = t.column("delta_closed_form").unwrap();
    for (a, b) in d.iter().zip(&cf) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn rescaled_distance_has_trace_distance_identity() {
    let t = csv(&["distance", "--rescaled", "--theta", "1.0", "--tmax", "2", "--step", "0.25"]);
    let d = t.column("delta").unwrap();
    let tr = t.column("trace_distance").unwrap();
    for (a, b) in d.iter().zip(&tr) {
        assert!((a.sin() - b).abs() < 1e-9);
    }
}

#[test]
fn noise_series_decays_toward_classical() {
    let t = csv(&["noise", "--t", "0.7853981633974483"]);
    let k3 = t.column("K3").unwrap();
    assert_eq!(k3.len(), 5);
    assert!(k3[0] > 2.99);
    for w in k3.windows(2) {
        assert!(w[1] <= w[0] + 1e-12);
    }
    assert!(*k3.last().unwrap() < 1.01);
}

#[test]
fn json_output_schema() {
    let text = stdout_ok(&["speed", "--theta", "0.3", "--tmax", "0.05", "--format", "json"]);
    let v: Value = serde_json::from_str(&text).unwrap();
    let columns: Vec<&str> = v["columns"].as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect();
    assert_eq!(columns, ["theta", "t", "v", "v_closed_form"]);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.as_array().unwrap().len() == 4));
    assert_eq!(v["meta"]["command"], "speed");
}

#[test]
fn scan_json_reports_argmax_and_seed() {
    let text = stdout_ok(&["scan", "--theta", "0.5", "--budget", "20000", "--seed", "3", "--format", "json"]);
    let v: Value = serde_json::from_str(&text).unwrap();
    let results = v["results"].as_array().unwrap();
    assert_eq!(results.len(), 2);
    for r in results {
        assert_eq!(r["seed"], 3);
        assert!(r["argmax"].is_object());
    }
    let k3 = results.iter().find(|r| r["objective_kind"] == "k3").unwrap();
    let s = 0.5f64.sin();
    assert!(k3["objective"].as_f64().unwrap() >= 1.0 + s + s * s - 1e-9);
}

#[test]
fn output_is_byte_stable() {
    let args = ["scan", "--theta", "0.7", "--budget", "20000", "--seed", "11"];
    assert_eq!(stdout_ok(&args), stdout_ok(&args));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("speed.csv");
    let p = path.to_str().unwrap();
    let out = stdout_ok(&["speed", "--theta", "0", "--tmax", "1", "--out", p]);
    assert!(out.is_empty());
    let t = Table::parse_csv(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(t.rows.len(), 101);
    for v in t.column("v").unwrap() {
        assert!((v - 1.0).abs() < 1e-6);
    }
}

#[test]
fn embed_agrees_with_direct_evolution() {
    let t = csv(&["embed", "--theta", "0.5,1.4", "--tmax", "3", "--step", "0.5"]);
    for f in t.column("fidelity").unwrap() {
        assert!((f - 1.0).abs() < 1e-10);
    }
    for p in t.column("p_select").unwrap() {
        assert!(p > 0.0 && p <= 1.0 + 1e-12);
    }
}

#[test]
fn invalid_configuration_exits_2() {
    for args in [
        &["lgi", "--theta", "2"][..],
        &["trajectory", "--theta", "0.5", "--kappa", "-1"],
        &["speed", "--step", "0"],
        &["trajectory", "--bogus"],
        &["noisescan", "--kappa", "1,0.5"],
    ] {
        let out = nhlgi(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn theta_exactly_half_pi_is_rejected() {
    let half_pi = FRAC_PI_2.to_string();
    assert_eq!(nhlgi(&["speed", "--theta", &half_pi]).status.code(), Some(2));
}

#[test]
fn check_passes() {
    let text = stdout_ok(&["check"]);
    let lines: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(lines.len(), 10);
    assert!(lines.iter().all(|l| l.starts_with("PASS")), "{text}");
}

#[test]
fn output_is_independent_of_thread_count() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_nhlgi"))
            .args(["noisescan", "--theta", "1.0", "--kappa", "0,0.1,10", "--budget", "20000"])
            .env("NHLGI_THREADS", threads)
            .output()
            .unwrap()
            .stdout
    };
    let single = run("1");
    assert!(!single.is_empty());
    assert_eq!(single, run("4"));
}
