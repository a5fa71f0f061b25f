use std::process::{Command, Output};

fn tn_ntn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tn-ntn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn analyze_is_reproducible_and_sorted() {
    let args = ["analyze", "--cases", "baseline,case1", "--sweep", "load=1,0.25", "--t-db", "5,-5", "--no-rate"];
    let a = tn_ntn(&args);
    let b = tn_ntn(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "case,axis,axis_value,T_db,metric,value,err");
    let keys: Vec<(String, String, String)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[2].to_string(), f[3].to_string())
        })
        .collect();
    let expected = [
        ("case1", "0.25", "-5"),
        ("case1", "0.25", "5"),
        ("case1", "1", "-5"),
        ("case1", "1", "5"),
        ("baseline", "0.25", "-5"),
        ("baseline", "0.25", "5"),
        ("baseline", "1", "-5"),
        ("baseline", "1", "5"),
    ];
    let expected: Vec<_> = expected.iter().map(|(a, b, c)| (a.to_string(), b.to_string(), c.to_string())).collect();
    assert_eq!(keys, expected);
}

#[test]
fn simulate_is_bit_identical_for_a_seed() {
    let args = ["simulate", "--trials", "20000", "--seed", "42", "--t-db", "0:10:5"];
    let a = tn_ntn(&args);
    let b = tn_ntn(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.starts_with("case,axis,axis_value,T_db,metric,value,err,half_width,seed,trials\n"));
    assert_eq!(text.lines().count(), 1 + 3 + 1);
    assert!(text.lines().nth(1).unwrap().ends_with(",42,20000"));
    let c = tn_ntn(&["simulate", "--trials", "20000", "--seed", "7", "--t-db", "0:10:5"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn validate_exit_code_follows_tolerance() {
    let base = ["validate", "--trials", "50000", "--t-db", "0,10", "--no-rate"];
    let pass = tn_ntn(&[&base[..], &["--tolerance", "0.02"]].concat());
    assert!(pass.status.success(), "{}", stdout(&pass));
    assert_eq!(stdout(&pass).matches(",PASS").count(), 2);

    let fail = tn_ntn(&[&base[..], &["--tolerance", "0"]].concat());
    assert_eq!(fail.status.code(), Some(1));
    let text = stdout(&fail);
    assert!(text.starts_with("case,axis,axis_value,T_db,metric,analytic,simulated,half_width,delta,limit,status"));
    for line in text.lines().skip(1) {
        let delta: f64 = line.split(',').nth(8).unwrap().parse().unwrap();
        assert!(delta > 0.0);
        assert!(line.ends_with(",FAIL"));
    }
}

#[test]
fn outputs_go_to_file_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let o = tn_ntn(&[
        "analyze",
        "--preset",
        "rural",
        "--set",
        "num_ntn_ues=1",
        "--cases",
        "case2",
        "--t-db",
        "0",
        "--no-rate",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let rows: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["case"], "case2");
    assert_eq!(rows[0]["metric"], "coverage");
    let v = rows[0]["value"].as_f64().unwrap();
    assert!(v > 0.0 && v < 1.0);
}

#[test]
fn scenario_files_and_sweeps_agree() {
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/rural.json");
    let from_file = tn_ntn(&["analyze", "--scenario", root, "--t-db", "0", "--no-rate"]);
    let from_preset = tn_ntn(&["analyze", "--preset", "rural", "--t-db", "0", "--no-rate"]);
    assert!(from_file.status.success());
    assert_eq!(from_file.stdout, from_preset.stdout);

    let swept = tn_ntn(&["analyze", "--sweep", "altitude=1200", "--t-db", "0", "--no-rate"]);
    let set = tn_ntn(&["analyze", "--set", "altitude_km=1200", "--t-db", "0", "--no-rate"]);
    let value = |o: &Output| stdout(o).lines().nth(1).unwrap().split(',').nth(5).unwrap().to_string();
    assert_eq!(value(&swept), value(&set));
}

#[test]
fn threshold_sweep_uses_axis_values() {
    let o = tn_ntn(&["analyze", "--sweep", "T_db=-5:5:5", "--no-rate"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].starts_with("case1,T_db,-5,-5,coverage,"));
}

#[test]
fn bad_input_is_reported() {
    for args in [
        vec!["analyze", "--set", "no_such_key=1"],
        vec!["analyze", "--sweep", "height=1"],
        vec!["analyze", "--set", "load=2"],
        vec!["analyze", "--t-db", "5:0:1"],
        vec!["simulate", "--trials", "0"],
        vec!["analyze", "--scenario", "/nonexistent/scenario.json"],
    ] {
        let o = tn_ntn(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"), "{args:?}");
    }
}

#[test]
fn dump_cdf_tracks_the_analytic_law() {
    for law in ["serving", "interferer", "annulus", "satellite"] {
        let o = tn_ntn(&["geometry", "dump-cdf", "--law", law, "--samples", "50000", "--points", "21", "--format", "json"]);
        assert!(o.status.success(), "{law}");
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert!(v["ks_distance"].as_f64().unwrap() < 0.01, "{law}");
        let table = v["table"].as_array().unwrap();
        assert_eq!(table.len(), 21);
        assert_eq!(table[20]["analytic_cdf"].as_f64().unwrap(), 1.0);
    }
}
