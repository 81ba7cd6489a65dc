use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rlm-duality")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn dynamics_writes_sorted_deterministic_csv() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let out = run(&["dynamics", "--times", "0:5:26", "--out", path_str(p)]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(out.stdout.is_empty());
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert!(!text.contains('\r'));
    assert_eq!(
        text.lines().next().unwrap(),
        "t,occ_exact,occ_semigroup,occ_slip,current_exact,current_closed_form"
    );
    let body = rows(&text);
    assert_eq!(body.len(), 26);
    let times: Vec<f64> = body.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(times.windows(2).all(|w| w[0] < w[1]));
    for r in &body {
        let current: f64 = r[4].parse().unwrap();
        let closed: f64 = r[5].parse().unwrap();
        assert!((current - closed).abs() < 1e-8, "{r:?}");
    }
}

#[test]
fn hot_reservoir_traces_coincide() {
    let out = run(&["dynamics", "--T", "1e6", "--times", "0:5:11", "--stdout"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for r in rows(&stdout(&out)) {
        let exact: f64 = r[1].parse().unwrap();
        let semi: f64 = r[2].parse().unwrap();
        let slip: f64 = r[3].parse().unwrap();
        assert!((exact - semi).abs() < 1e-6 && (exact - slip).abs() < 1e-6, "{r:?}");
    }
}

#[test]
fn divisibility_map_small_grid() {
    let out = run(&["divisibility-map", "--eps-range", "0:2", "--T-range", "0.05:1", "--grid", "3x3", "--stdout"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert_eq!(text.lines().next().unwrap(), "x,y,max_g,max_g_dual");
    let body = rows(&text);
    assert_eq!(body.len(), 9);
    for r in &body {
        let x: f64 = r[0].parse().unwrap();
        let y: f64 = r[1].parse().unwrap();
        if x == 0.0 {
            assert_eq!(r[2].parse::<f64>().unwrap(), 0.0);
        } else if y < 1.0 / (2.0 * std::f64::consts::PI) {
            assert_eq!(r[3], "inf", "{r:?}");
        }
    }
}

#[test]
fn frequency_map_reports_errors() {
    let out = run(&["frequency-map", "--grid", "5x4", "--stdout"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert_eq!(text.lines().next().unwrap(), "re_e,im_e,abs_exact,abs_semigroup_error,abs_slip_error");
    let body = rows(&text);
    assert_eq!(body.len(), 20);
    assert!(body.iter().all(|r| r[2].parse::<f64>().unwrap().is_finite()));
}

#[test]
fn markov_classifies_onsets_and_lists_breakdowns() {
    let out = run(&["markov", "--eps-range", "0.01:0.01", "--gamma-range", "1:3", "--grid", "1x2", "--stdout"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let mut tables = text.split("\n\n");
    let onset = tables.next().unwrap();
    assert_eq!(onset.lines().next().unwrap(), "detuning_over_t,gamma_over_t,cp_onset_t");
    assert_eq!(onset.lines().count(), 3);
    let breakdown = tables.next().unwrap();
    let gammas: Vec<f64> = rows(breakdown).iter().map(|r| r[2].parse().unwrap()).collect();
    let pi = std::f64::consts::PI;
    assert_eq!(gammas.len(), 3);
    for (n, g) in gammas.iter().enumerate() {
        let target = (1.0 + 2.0 * n as f64) * 2.0 * pi;
        assert!((g / target - 1.0).abs() < 0.01, "{g} vs {target}");
    }
}

#[test]
fn duality_check_exit_codes() {
    let ok = run(&["duality-check"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(ok.stdout.is_empty());

    let bad = run(&["duality-check", "--perturb", "gamma=1.01"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(!bad.stderr.is_empty());

    let missing = run(&["duality-check", "--family", "/nonexistent/family.json"]);
    assert_eq!(missing.status.code(), Some(2));

    let no_target = run(&["dynamics"]);
    assert_eq!(no_target.status.code(), Some(2));
}

#[test]
fn duality_check_reports_all_relations() {
    let out = run(&["duality-check", "--stdout"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["all_pass"], true);
    assert!(report["relation_ids"].as_array().unwrap().len() >= 12);
}

#[test]
fn exported_family_replays_with_identical_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let family = dir.path().join("family.json");
    let direct = dir.path().join("direct.json");
    let replay = dir.path().join("replay.json");
    let out = run(&["duality-check", "--export-family", path_str(&family), "--out", path_str(&direct)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&["duality-check", "--family", path_str(&family), "--out", path_str(&replay)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let load = |p: &Path| -> serde_json::Value { serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap() };
    let (a, b) = (load(&direct), load(&replay));
    let residuals = |v: &serde_json::Value| -> Vec<(String, f64)> {
        v["reports"]
            .as_array()
            .unwrap()
            .iter()
            .map(|r| (r["relation_id"].as_str().unwrap().to_string(), r["max_residual"].as_f64().unwrap()))
            .collect()
    };
    assert_eq!(residuals(&a), residuals(&b));
}
