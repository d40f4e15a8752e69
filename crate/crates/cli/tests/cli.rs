use std::process::Command;

use serde_json::Value;

fn pexp(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_pexp"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
    )
}

fn records(stdout: &str) -> Vec<Value> {
    stdout
        .lines()
        .map(|l| serde_json::from_str(l).expect("one JSON object per line"))
        .collect()
}

fn without_timing(stdout: &str) -> Vec<Value> {
    records(stdout)
        .into_iter()
        .map(|mut r| {
            r.as_object_mut().unwrap().remove("wall_ms");
            r
        })
        .collect()
}

#[test]
fn dwork_suite_passes() {
    let (code, out) = pexp(&["verify", "--suite", "dwork", "-p", "3", "-d", "1", "-N", "12", "-D", "256"]);
    assert_eq!(code, 0, "{out}");
    let recs = records(&out);
    assert_eq!(recs.len(), 3);
    for r in &recs {
        for key in ["suite", "case", "status", "residual_valuation", "wall_ms"] {
            assert!(r.get(key).is_some(), "missing {key}");
        }
        assert_eq!(r["status"], "pass");
    }
}

#[test]
fn all_suites_at_q9() {
    let (code, out) = pexp(&["verify", "--suite", "all", "-p", "3", "-d", "2"]);
    assert_eq!(code, 0, "{out}");
    let recs = records(&out);
    let points = recs
        .iter()
        .filter(|r| r["suite"] == "classfield" && r["case"].as_str().unwrap().starts_with("point="))
        .count();
    assert_eq!(points, 4);
    for r in &recs {
        if r["informational"] == false {
            assert_eq!(r["status"], "pass", "{r}");
        }
    }
}

#[test]
fn output_is_deterministic() {
    let args = ["verify", "--suite", "witt", "-p", "5", "--seed", "7"];
    let (_, a) = pexp(&args);
    let (_, b) = pexp(&args);
    assert_eq!(without_timing(&a), without_timing(&b));
}

#[test]
fn classfield_at_q27_samples_lines() {
    let (code, out) = pexp(&["verify", "--suite", "classfield", "-p", "3", "-d", "3", "-D", "32"]);
    assert_eq!(code, 0, "{out}");
    let recs = records(&out);
    let points = recs
        .iter()
        .filter(|r| r["case"].as_str().unwrap().starts_with("point="))
        .count();
    assert_eq!(points, 13);
    let lines = recs.iter().find(|r| r["case"] == "lines").unwrap();
    assert!(lines["detail"]["triples"].as_u64().unwrap() > 400);
}

#[test]
fn config_errors_exit_with_two() {
    assert_eq!(pexp(&["verify", "-p", "4"]).0, 2);
    assert_eq!(pexp(&["verify", "--suite", "nonsense"]).0, 2);
    assert_eq!(pexp(&["verify", "-p", "3", "-N", "400"]).0, 2);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.conf");
    std::fs::write(&bad, "p = 3\nwidth = 9\n").unwrap();
    assert_eq!(pexp(&["verify", "--config", bad.to_str().unwrap()]).0, 2);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "# defaults\np = 5\nsuite = dwork\nD = 64\n").unwrap();
    let report = dir.path().join("out.jsonl");
    let (code, out) = pexp(&[
        "verify",
        "--config",
        conf.to_str().unwrap(),
        "-p",
        "3",
        "--json-lines",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let recs = records(&std::fs::read_to_string(&report).unwrap());
    assert_eq!(recs.len(), 3);
    assert!(recs.iter().all(|r| r["suite"] == "dwork"));
}

#[test]
fn series_csv_profile() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let (code, _) = pexp(&[
        "series", "--which", "e-u2", "--u-index", "0", "-p", "3", "-d", "2", "-D", "64", "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,valuation"));
    assert_eq!(lines.count(), 65);
    assert_eq!(pexp(&["series", "--which", "e-u2", "--u-index", "9", "-d", "2"]).0, 2);
}

#[test]
fn verify_writes_profiles_into_csv_directory() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = pexp(&["verify", "--suite", "dwork", "--csv", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(dir.path().join("dwork.csv").exists());
}

#[test]
fn sigma_alpha_is_informational() {
    let (code, out) = pexp(&["explore-sigma-alpha", "-p", "3", "-d", "2"]);
    assert_eq!(code, 0);
    let recs = records(&out);
    assert_eq!(recs.len(), 4 * 3);
    assert!(recs.iter().all(|r| r["informational"] == true));
    let (code, out) = pexp(&["explore-sigma-alpha", "-p", "3", "-d", "1"]);
    assert_eq!(code, 0);
    let recs = records(&out);
    assert!(recs.iter().any(|r| r["status"] == "pass"));
}
