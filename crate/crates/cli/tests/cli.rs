//! The `eclosure` binary end to end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use eclosure_cli::ResultRecord;

fn eclosure(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eclosure")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn eleven_pvalues_csv() -> String {
    let p = [0.0001, 0.013, 0.019, 0.021, 0.044, 0.052, 0.074, 0.124, 0.486, 0.661, 0.848];
    let mut s = String::from("index,value\n");
    for (i, x) in p.iter().enumerate() {
        s.push_str(&format!("{},{x}\n", i + 1));
    }
    s
}

#[test]
fn figure_output_feeds_run() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("boundary_k20.csv");
    let o = eclosure(&["figure", "fig1", "--k", "20", "--m", "20", "--alpha", "0.05", "--out", csv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let body = fs::read_to_string(&csv).unwrap();
    let col: Vec<f64> = body.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    let expect: Vec<f64> = (1..=20).map(|i| 41.0 - 2.0 * i as f64).collect();
    assert!(col.iter().zip(&expect).all(|(a, b)| (a - b).abs() < 1e-9), "{col:?}");

    let o = eclosure(&["run", "--method", "closed-ebh", "--alpha", "0.05", csv.to_str().unwrap()]);
    let rec = ResultRecord::from_json_line(&stdout(&o)).unwrap();
    assert_eq!(rec.rejected, (1..=20).collect::<Vec<_>>());
    let o = eclosure(&["run", "--method", "ebh", "--alpha", "0.05", csv.to_str().unwrap()]);
    assert!(ResultRecord::from_json_line(&stdout(&o)).unwrap().rejected.is_empty());
}

#[test]
fn run_examples_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let pv = write(dir.path(), "pvalues.csv", &eleven_pvalues_csv());
    let out = dir.path().join("r.jsonl");
    let o = eclosure(&["run", "--method", "bh", "--alpha", "0.2", pv.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success() && o.stdout.is_empty());
    let rec = ResultRecord::from_json_line(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(rec.rejected.len(), 8);
    assert_eq!(rec.m, 11);

    let ones = write(dir.path(), "empty-signal.csv", "index,value\n1,1\n2,1\n3,1\n4,1\n");
    let o = eclosure(&["run", "--method", "by", "--alpha", "0.05", ones.to_str().unwrap()]);
    assert!(ResultRecord::from_json_line(&stdout(&o)).unwrap().rejected.is_empty());

    let json = write(dir.path(), "k.json", r#"{"kind": "knockoff_stat", "values": [6, 5, 4, 3, -2, -1]}"#);
    let o = eclosure(&["run", "--method", "closed-knockoff", "--alpha", "0.4", json.to_str().unwrap(), "--format", "text"]);
    let text = stdout(&o);
    assert!(text.contains("rejects 4 of 6") && text.contains("c_alpha = 3"), "{text}");
}

#[test]
fn input_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.csv", "index,value\n1,0.2\n2,1.7\n");
    let o = eclosure(&["run", "--method", "by", "--alpha", "0.05", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let w = write(dir.path(), "w.csv", "index,w\n1,2\n");
    let o = eclosure(&["run", "--method", "ebh", "--alpha", "0.05", w.to_str().unwrap()]);
    assert!(!o.status.success());
    let json = write(dir.path(), "e.json", r#"{"kind": "evalue", "values": [3]}"#);
    let o = eclosure(&["run", "--method", "bh", "--alpha", "0.05", json.to_str().unwrap()]);
    assert!(stderr(&o).contains("expected pvalue"), "{}", stderr(&o));
    let o = eclosure(&["run", "--method", "bh", "--alpha", "0.05", "/nonexistent.csv"]);
    assert!(!o.status.success());
}

#[test]
fn compare_table_and_empty_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let pv = write(dir.path(), "pvalues.csv", &eleven_pvalues_csv());
    let o = eclosure(&["compare", pv.to_str().unwrap(), "--alpha", "0.05,0.1", "--method", "by,su", "--format", "csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "alpha,by,closed-by,su,closed-su");
    assert_eq!(lines.len(), 3);
    for row in &lines[1..] {
        let c: Vec<usize> = row.split(',').skip(1).map(|x| x.parse().unwrap()).collect();
        assert!(c[1] >= c[0] && c[3] >= c[2], "{row}");
    }
    let empty = write(dir.path(), "empty.csv", "index,value\n");
    let o = eclosure(&["compare", empty.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("empty"));
}

#[test]
fn query_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let ko = write(dir.path(), "ko.csv", "index,w\n1,6\n2,5\n3,4\n4,3\n5,-2\n6,-1\n");
    let o = eclosure(&["query", ko.to_str().unwrap(), "--method", "closed-knockoff", "--alpha", "0.4", "--set", "1,2,3"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["certificate"]["member"], true);
    assert!(v.get("critical_alpha").is_none());
    let o = eclosure(&[
        "query",
        ko.to_str().unwrap(),
        "--method",
        "closed-knockoff",
        "--alpha",
        "0.4",
        "--set",
        "1",
        "--critical-alpha",
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("depends") || stderr(&o).contains("from alpha"));

    let e = write(dir.path(), "e.csv", "index,value\n1,30\n2,10\n3,0\n");
    let o = eclosure(&["query", e.to_str().unwrap(), "--method", "closed-ebh", "--alpha", "0.05", "--set", "1"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["critical_alpha"].as_f64().unwrap() - 0.075).abs() < 1e-12);
    let o = eclosure(&["query", e.to_str().unwrap(), "--method", "closed-ebh", "--alpha", "0.05", "--set", "3"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["certificate"]["member"], false);
    assert_eq!(v["certificate"]["witness"], serde_json::json!([3]));
    let o = eclosure(&["query", e.to_str().unwrap(), "--method", "closed-ebh", "--alpha", "0.05", "--set", "4"]);
    assert!(!o.status.success());
}

#[test]
fn selfcheck_exit_codes_and_determinism() {
    let a = eclosure(&["selfcheck", "--m", "6", "--trials", "40", "--seed", "3"]);
    let b = eclosure(&["selfcheck", "--m", "6", "--trials", "40", "--seed", "3"]);
    assert!(a.status.success(), "{}", stdout(&a));
    assert_eq!(a.stdout, b.stdout);

    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.txt");
    let f = eclosure(&["selfcheck", "--m", "5", "--trials", "2", "--check", "by-member", "--inject-fault", "--out", report.to_str().unwrap()]);
    assert_eq!(f.status.code(), Some(1));
    assert!(fs::read_to_string(&report).unwrap().contains("replay: {"));
    let r = eclosure(&["selfcheck", "--replay", report.to_str().unwrap()]);
    assert!(r.status.success());
    assert_eq!(stdout(&r).lines().count(), 2);

    let o = eclosure(&["selfcheck", "--m", "13"]);
    assert_eq!(o.status.code(), Some(2));
}
