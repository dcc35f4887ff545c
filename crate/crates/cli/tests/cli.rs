//! End-to-end runs of the `qinterp` binary.

use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qinterp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn metric<'a>(record: &'a Value, name: &str) -> &'a Value {
    record["metrics"]
        .as_array()
        .unwrap()
        .iter()
        .find(|m| m["name"] == name)
        .unwrap_or_else(|| panic!("no metric {name}"))
}

fn without_durations(mut v: Value) -> Value {
    for r in v["records"].as_array_mut().unwrap() {
        r.as_object_mut().unwrap().remove("duration_ms");
    }
    v
}

#[test]
fn census_examples() {
    let v = json(&["census", "-p", "5", "-r", "1", "-d", "3", "-k", "2"]);
    assert_eq!(v["schema_version"], 1);
    let r = &v["records"][0];
    assert_eq!(metric(r, "range_good")["exact"], "160/1");
    assert_eq!(metric(r, "success_good")["exact"], "32/125");
    assert_eq!(metric(r, "mean_all")["exact"], "1/1");
    let v = json(&["census", "-p", "3", "-d", "1", "-k", "1"]);
    let r = &v["records"][0];
    assert_eq!(metric(r, "range_all")["exact"], "7/1");
    assert_eq!(r["details"]["all"]["histogram"], serde_json::json!([[0, 2], [1, 6], [3, 1]]));
}

#[test]
fn census_sweep_skips_non_prime_powers() {
    let out = run(&["census", "-q", "5..10", "-d", "1", "-k", "1"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let qs: Vec<u64> = v["records"].as_array().unwrap().iter().map(|r| r["config"]["q"].as_u64().unwrap()).collect();
    assert_eq!(qs, vec![5, 7, 8, 9]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("6,10"));
}

#[test]
fn invert_examples() {
    let v = json(&["invert", "-p", "5", "-d", "3", "--z", "2,3,0,4"]);
    let r = &v["records"][0];
    assert_eq!(r["details"]["x"], serde_json::json!([1, 2]));
    assert_eq!(r["details"]["y"], serde_json::json!([1, 1]));
    let v = json(&["invert", "-p", "7", "-d", "3", "--verify-all"]);
    let r = &v["records"][0];
    assert_eq!(r["details"]["summary"], "all fibers verified");
    assert_eq!(metric(r, "mismatches")["value"], 0.0);
    assert_eq!(metric(r, "fibers_verified")["exact"], "756/1");
}

#[test]
fn invert_extended_reports_extension() {
    let v = json(&["invert", "-p", "7", "-d", "2", "--z", "2,3,5", "--seed", "3"]);
    let r = &v["records"][0];
    assert!(metric(r, "attempts")["value"].as_f64().unwrap() >= 1.0);
    let ext = metric(r, "extension")["value"].as_f64().unwrap();
    assert!((0.0..7.0).contains(&ext));
}

#[test]
fn simulate_examples() {
    let v = json(&["simulate", "optimal", "-p", "5", "-d", "3", "-k", "2"]);
    let s = metric(&v["records"][0], "success_good")["value"].as_f64().unwrap();
    assert!((s - 0.256).abs() < 1e-9);
    let v = json(&["simulate", "pgm", "-p", "3", "-d", "1", "-k", "1"]);
    let s = metric(&v["records"][0], "success")["value"].as_f64().unwrap();
    assert!((s - 0.738095).abs() < 1e-4);
    let v = json(&["simulate", "optimal", "-p", "3", "-d", "1", "-k", "2"]);
    let s = metric(&v["records"][0], "success_all")["value"].as_f64().unwrap();
    assert!((s - 1.0).abs() < 1e-9);
    let v = json(&["simulate", "optimal", "-p", "3", "-d", "1", "-k", "1", "--all-c"]);
    let r = &v["records"][0];
    assert!(metric(r, "spread_good")["value"].as_f64().unwrap() < 1e-12);
    assert_eq!(metric(r, "runs_all")["value"], 9.0);
}

#[test]
fn rank_examples() {
    let v = json(&["rank", "-p", "3", "-d", "1", "-k", "1"]);
    let r = &v["records"][0];
    assert!(metric(r, "rank")["value"].as_f64().unwrap() <= 7.0);
    assert_eq!(metric(r, "bound_holds")["value"], 1.0);
    let v = json(&["rank", "-p", "3", "-d", "1", "-k", "0"]);
    assert_eq!(metric(&v["records"][0], "rank")["value"], 1.0);
}

#[test]
fn multivariate_examples() {
    let v = json(&["multivariate", "-q", "5", "-n", "2", "-d", "1", "-k", "1"]);
    assert_eq!(metric(&v["records"][0], "fraction")["exact"], "101/125");
    let uni = without_durations(json(&["multivariate", "-q", "5", "-n", "1", "-d", "3", "-k", "2"]));
    let cen = without_durations(json(&["census", "-q", "5", "-d", "3", "-k", "2"]));
    assert_eq!(uni, cen);
    let v = json(&["multivariate", "-q", "5", "-n", "2", "-d", "2", "-k", "2", "--mode", "sample", "--samples", "100"]);
    assert_eq!(v["records"][0]["config"]["variant"], "membership");
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| run(args).status.code();
    assert_eq!(code(&["census", "-p", "4", "-d", "1", "-k", "1"]), Some(2));
    assert_eq!(code(&["census", "-p", "3", "-d", "3", "-k", "1"]), Some(2));
    assert_eq!(code(&["census", "-d", "1", "-k", "1"]), Some(2));
    assert_eq!(code(&["census", "-p", "5", "-d", "3"]), Some(2));
    assert_eq!(code(&["census", "-q", "49", "-d", "5", "-k", "4"]), Some(3));
    assert_eq!(code(&["invert", "-p", "5", "-d", "3", "--z", "0,0,0,0"]), Some(4));
    assert_eq!(code(&["invert", "-p", "5", "-d", "3", "--z", "1,2,3"]), Some(2));
    assert_eq!(code(&["invert", "-p", "7", "-d", "2", "--z", "0,0,1"]), Some(5));
    assert_eq!(
        code(&["multivariate", "-q", "5", "-n", "2", "-d", "1", "-k", "1", "--mode", "sample", "--samples", "3"]),
        Some(2)
    );
    let out = run(&["invert", "-p", "5", "-d", "3", "--z", "0,0,0,0"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("SingularHankel"));
}

#[test]
fn budget_env_override() {
    let out = Command::new(env!("CARGO_BIN_EXE_qinterp"))
        .args(["census", "-p", "5", "-d", "3", "-k", "2"])
        .env("QINTERP_PAIR_SPACE", "100")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["simulate", "optimal", "-p", "5", "-d", "3", "-k", "2", "--seed", "42"][..],
        &["invert", "-p", "7", "-d", "2", "--z", "2,3,5", "--seed", "9"][..],
        &["multivariate", "-q", "3", "-n", "2", "-d", "2", "-k", "2", "--mode", "sample", "--samples", "50", "--seed", "1"][..],
        &["census", "-q", "7..9", "-d", "2", "-k", "2", "--workers", "2"][..],
    ] {
        assert_eq!(without_durations(json(args)), without_durations(json(args)), "{args:?}");
    }
    let a = without_durations(json(&["census", "-p", "7", "-d", "2", "-k", "2", "--workers", "1"]));
    let mut b = without_durations(json(&["census", "-p", "7", "-d", "2", "-k", "2", "--workers", "4"]));
    b["records"][0]["config"]["workers"] = 1.into();
    assert_eq!(a, b);
}

#[test]
fn csv_matches_json() {
    let args = ["census", "-q", "5..7", "-d", "3", "-k", "2"];
    let v = json(&args);
    let mut csv_args = args.to_vec();
    csv_args.extend(["--format", "csv"]);
    let out = run(&csv_args);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let mut from_csv = Vec::new();
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        from_csv.push((
            f[col("q")].parse::<u64>().unwrap(),
            f[col("metric")].to_string(),
            f[col("exact")].to_string(),
            f[col("value")].parse::<f64>().unwrap(),
        ));
    }
    let mut from_json = Vec::new();
    for r in v["records"].as_array().unwrap() {
        for m in r["metrics"].as_array().unwrap() {
            from_json.push((
                r["config"]["q"].as_u64().unwrap(),
                m["name"].as_str().unwrap().to_string(),
                m["exact"].as_str().unwrap_or("").to_string(),
                m["value"].as_f64().unwrap(),
            ));
        }
    }
    assert_eq!(from_csv, from_json);
}

#[test]
fn output_file() {
    let path = std::env::temp_dir().join(format!("qinterp-test-{}.json", std::process::id()));
    let out = run(&["census", "-p", "3", "-d", "1", "-k", "1", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["schema_version"], 1);
    std::fs::remove_file(path).unwrap();
}
