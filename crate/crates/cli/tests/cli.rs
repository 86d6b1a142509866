use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn chaobell(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chaobell"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_owned).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_owned).collect()).collect();
    (header, rows)
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn sweep_table_matches_oracle() {
    let o = chaobell(&[
        "sweep",
        "--trials",
        "1000000",
        "--mean-intensity",
        "1.0",
        "--deltas",
        "0:90:13deg",
        "--seed",
        "42",
        "--mode",
        "intensity",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = csv_rows(&stdout(&o));
    assert_eq!(
        header,
        ["delta_radians", "estimate", "std_error", "oracle", "abs_deviation"]
    );
    assert_eq!(rows.len(), 13);
    for r in &rows {
        let delta = num(&r[0]);
        assert!((num(&r[3]) + (2.0 * delta).cos()).abs() < 1e-8, "{r:?}");
        assert!(num(&r[4]) < 0.02);
    }
}

#[test]
fn sweep_rejects_empty_deltas() {
    assert_eq!(chaobell(&["sweep", "--deltas", ""]).status.code(), Some(2));
    assert_eq!(chaobell(&["sweep", "--deltas", "0:90:0"]).status.code(), Some(2));
    assert_eq!(chaobell(&["sweep", "--trials", "0"]).status.code(), Some(2));
    assert_eq!(chaobell(&["sweep", "--mode", "bogus"]).status.code(), Some(2));
    assert_eq!(
        chaobell(&["sweep", "--mode", "intensity", "--postselect"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(chaobell(&["sweep", "--seed", "-4"]).status.code(), Some(2));
}

#[test]
fn repeated_runs_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let path = dir.path().join(name);
        let o = chaobell(&[
            "sweep",
            "--trials",
            "100000",
            "--deltas",
            "0,30,60",
            "--mode",
            "matched",
            "--postselect",
            "--threads",
            threads,
            "--format",
            "json",
            "--output",
            path.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(&path).unwrap()
    };
    let a = run("a.json", "1");
    let b = run("b.json", "1");
    let c = run("c.json", "8");
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn json_documents_have_config_rows_summary() {
    let o = chaobell(&["chsh", "--trials", "20000", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let obj = v.as_object().unwrap();
    assert_eq!(obj.keys().collect::<Vec<_>>(), ["config", "rows", "summary"]);
    assert_eq!(v["config"]["mode"], "poisson");
    assert_eq!(v["config"]["seed"], 42);
    assert!(v["rows"][0]["s_estimate"].is_number());
    assert!(v["summary"]["c_ab"].is_number());
}

#[test]
fn chsh_defaults_reach_two_root_two() {
    let o = chaobell(&["chsh", "--trials", "1000000", "--mode", "poisson"]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = csv_rows(&stdout(&o));
    assert_eq!(header[0], "s_estimate");
    assert!((num(&rows[0][0]) - 2.828427).abs() < 0.03, "{rows:?}");
    assert!((num(&rows[0][2]) - 2.828427).abs() < 1e-6);
}

#[test]
fn chsh_equal_angles_and_arity() {
    let o = chaobell(&["chsh", "--angles", "0,0,0,0", "--trials", "1000000"]);
    assert_eq!(o.status.code(), Some(0));
    let (_, rows) = csv_rows(&stdout(&o));
    assert!((num(&rows[0][0]) - 2.0).abs() < 0.03);
    assert_eq!(chaobell(&["chsh", "--angles", "0,45,22.5"]).status.code(), Some(2));
    assert_eq!(chaobell(&["chsh", "--angles", "0,45,x,1"]).status.code(), Some(2));
}

#[test]
fn dist_check_exit_codes() {
    let o = chaobell(&["dist-check", "--mean-intensity", "1", "--samples", "1000000"]);
    assert_eq!(o.status.code(), Some(0));
    let (_, rows) = csv_rows(&stdout(&o));
    assert_eq!(rows[0][0], "0");
    assert_eq!(num(&rows[0][2]), 0.5);
    assert!(String::from_utf8_lossy(&o.stderr).contains("passed: true"));

    let o = chaobell(&[
        "dist-check",
        "--mean-intensity",
        "1",
        "--samples",
        "100",
        "--threshold",
        "1e-6",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(
        chaobell(&["dist-check", "--mean-intensity", "-1"]).status.code(),
        Some(2)
    );
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn bell_datasets_from_files_and_random() {
    let dir = tempfile::tempdir().unwrap();
    let same = write(dir.path(), "same.txt", "+1 -1 1\n+1,-1,1\n1, -1, +1\n");
    let o = chaobell(&["bell-datasets", "--input", &same]);
    assert_eq!(o.status.code(), Some(0));
    let (_, rows) = csv_rows(&stdout(&o));
    assert_eq!(&rows[0][..6], ["bell_three", "3", "3", "0", "0", "0"]);
    assert_eq!(rows[0][7], "true");

    let zero = write(dir.path(), "zero.txt", "1 0 1\n1 1 1\n1 1 1\n");
    assert_eq!(chaobell(&["bell-datasets", "--input", &zero]).status.code(), Some(2));
    let ragged = write(dir.path(), "ragged.txt", "1 1\n1 1 1\n1 1 1\n");
    assert_eq!(chaobell(&["bell-datasets", "--input", &ragged]).status.code(), Some(2));
    let two = write(dir.path(), "two.txt", "1 1\n1 1\n");
    assert_eq!(chaobell(&["bell-datasets", "--input", &two]).status.code(), Some(2));

    let o = chaobell(&["bell-datasets", "--random", "4", "--len", "10000", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["rows"][0]["check"], "chsh_four");
    assert_eq!(v["rows"][0]["satisfied"], true);
    assert!(!v["rows"][0]["margin"].as_str().unwrap().starts_with('-'));
    assert_eq!(chaobell(&["bell-datasets"]).status.code(), Some(2));
}

#[test]
fn demo_prints_both_orderings() {
    let o = chaobell(&["demo-noncommute"]);
    assert_eq!(o.status.code(), Some(0));
    let (_, rows) = csv_rows(&stdout(&o));
    assert_eq!(num(&rows[0][2]), 0.25);
    assert_eq!(num(&rows[1][2]), 0.0);

    let o = chaobell(&["demo-noncommute", "--angles", "45,90", "--input-pol", "0"]);
    assert_eq!(num(&csv_rows(&stdout(&o)).1[0][2]), 0.25);

    let o = chaobell(&["demo-noncommute", "--angles", ""]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(num(&csv_rows(&stdout(&o)).1[0][2]), 1.0);
}

#[test]
fn random_seed_is_echoed() {
    let o = chaobell(&["chsh", "--trials", "1000", "--seed", "random", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["config"]["seed"].is_u64());
}
