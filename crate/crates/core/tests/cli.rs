use std::path::Path;
use std::process::{Command, Output};

use pitchflap::dde::{growth_rate, History, TimeSeries};

fn pitchflap(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pitchflap"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn crossings_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = pitchflap(&["crossings", "--tau-max", "2"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("crossings.csv"));
    assert_eq!(header, ["omega_c", "tau", "k", "rt"]);
    let core: Vec<_> = rows.iter().filter(|r| r[2] == "0").collect();
    assert_eq!(core.len(), 3);
    for (w, t, rt) in [(1.0525, 0.3579, "1"), (2.1947, 0.0853, "-1"), (3.0269, 1.5194, "1")] {
        let r = core.iter().find(|r| (num(&r[0]) - w).abs() < 1e-3).unwrap();
        assert!((num(&r[1]) - t).abs() < 1e-3);
        assert_eq!(r[3], rt);
    }
    let prov: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("crossings.provenance.json")).unwrap()).unwrap();
    assert_eq!(prov["command"], "crossings");
    assert_eq!(prov["config"]["tau_max"], 2.0);
    assert_eq!(serde_json::from_slice::<serde_json::Value>(&out.stdout).unwrap(), prov);
}

#[test]
fn classify_stable_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = pitchflap(&["classify", "--sigma", "0.01", "--nu1-sq", "4"], dir.path());
    assert!(out.status.success());
    let (_, rows) = read_csv(&dir.path().join("classify.csv"));
    assert_eq!(rows[0][0], "Stable");
}

#[test]
fn simulate_unstable_delay() {
    let dir = tempfile::tempdir().unwrap();
    let tau = format!("{}", 2.0 * std::f64::consts::PI);
    let out = pitchflap(
        &["simulate", "--tau", &tau, "--psi-end", "25", "--step", "2e-3"],
        dir.path(),
    );
    assert!(out.status.success());
    let (header, rows) = read_csv(&dir.path().join("simulate.csv"));
    assert_eq!(header, ["psi", "theta", "beta", "theta_dot", "beta_dot"]);
    let ts = TimeSeries {
        psi: rows.iter().map(|r| num(&r[0])).collect(),
        states: rows
            .iter()
            .map(|r| [num(&r[1]), num(&r[2]), num(&r[3]), num(&r[4])])
            .collect(),
        step: 2e-3,
        tau: 2.0 * std::f64::consts::PI,
        history: History::Constant,
        diverged: false,
    };
    let g = growth_rate(&ts, (15.0, 25.0)).unwrap();
    assert!((g - 0.999).abs() < 0.05 * 0.999, "{g}");
}

#[test]
fn outputs_are_deterministic() {
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["sweep-gains", "--a-range", "6e-4,7e-4,3", "--b-range", "0,1e-4,2"];
    assert!(pitchflap(&args, d1.path()).status.success());
    assert!(pitchflap(&args, d2.path()).status.success());
    for f in ["sweep.csv", "sweep_gains.provenance.json"] {
        assert_eq!(
            std::fs::read(d1.path().join(f)).unwrap(),
            std::fs::read(d2.path().join(f)).unwrap()
        );
    }
    let text = std::fs::read_to_string(d1.path().join("sweep.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "a\\b,0,0.0001");
    assert_eq!(lines.count(), 3);
}

#[test]
fn json_format_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"tau": 0.2296, "region": {"re_min": -1, "re_max": 0.5, "im_min": 0, "im_max": 3}}"#,
    )
    .unwrap();
    let out = pitchflap(
        &["roots", "--config", cfg.to_str().unwrap(), "--format", "json"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("roots.json")).unwrap()).unwrap();
    let roots = v["roots"]["roots"].as_array().unwrap();
    assert!(roots.iter().all(|r| r["s"][0].as_f64().unwrap() < 0.0));
    assert_eq!(v["roots"]["certified"], true);
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"rotor": {"sigma": 0.05, "spin": 1}}"#).unwrap();
    let out = pitchflap(&["classify", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "config");

    let out = pitchflap(&["roots", "--grid-step", "1.0"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = pitchflap(&["roots", "--region", "1,0,0,1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unstabilizable_gains_report_category() {
    let dir = tempfile::tempdir().unwrap();
    let out = pitchflap(&["optimize-delay", "--a", "0", "--b", "0"], dir.path());
    assert!(!out.status.success());
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "no-stable-interval");
}
