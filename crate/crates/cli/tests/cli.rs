use std::path::Path;
use std::process::{Command, Output};

use certann::{tau, DistributionKind, MetricP};

fn certann(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_certann"))
        .args(args)
        .current_dir(dir)
        .env_remove("CERTANN_LOG")
        .output()
        .expect("run certann")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn gen(dir: &Path, n: &str, dim: &str) {
    let o = certann(
        &["gen", "--n", n, "--dim", dim, "--seed", "3", "--output", "data.csv", "--queries-output", "queries.csv"],
        dir,
    );
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn build_rejects_c_below_tau_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), "50", "4");
    let o = certann(&["build", "--input", "data.csv", "--output", "i.bin", "--c", "2"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let t = tau(DistributionKind::Rademacher, 4, MetricP::L2);
    assert!(stderr(&o).contains(&t.to_string()), "{}", stderr(&o));
    assert!(!dir.path().join("i.bin").exists());
}

#[test]
fn query_with_wrong_dimension_fails() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), "100", "4");
    let o = certann(&["build", "--input", "data.csv", "--output", "i.bin", "--k", "3"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let o = certann(&["query", "--index", "i.bin", "--vector", "1,2,3"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("dimension"), "{}", stderr(&o));
}

#[test]
fn bench_with_oracle_passes_every_query() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), "3000", "8");
    for mode in ["light", "full"] {
        let o = certann(
            &["build", "--input", "data.csv", "--output", "i.bin", "--mode", mode, "--k", "4", "--p", "1.5"],
            dir.path(),
        );
        assert!(o.status.success(), "{}", stderr(&o));
        let o = certann(&["bench", "--index", "i.bin", "--queries", "queries.csv", "--oracle"], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
        let out = stdout(&o);
        assert!(out.contains("sandwich: 100/100 pass"), "{out}");
        assert!(out.contains("throughput"));
    }
}

#[test]
fn identical_flags_give_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), "500", "6");
    let run = |name: &str| {
        let o = certann(
            &[
                "build", "--input", "data.csv", "--output", name, "--dist", "uniform", "--seed", "9", "--k", "3",
                "--p", "inf",
            ],
            dir.path(),
        );
        assert!(o.status.success(), "{}", stderr(&o));
        let q = certann(&["query", "--index", name, "--queries", "queries.csv", "--csv"], dir.path());
        assert!(q.status.success(), "{}", stderr(&q));
        (std::fs::read(dir.path().join(name)).unwrap(), q.stdout)
    };
    let (a, qa) = run("a.bin");
    let (b, qb) = run("b.bin");
    assert_eq!(a, b);
    assert_eq!(qa, qb);
    let text = String::from_utf8(qa).unwrap();
    assert!(text.starts_with("query,id,distance\n"));
    assert!(text.lines().count() > 1);
}

#[test]
fn query_output_is_sorted_by_distance() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), "400", "3");
    certann(&["build", "--input", "data.csv", "--output", "i.bin", "--k", "2"], dir.path());
    let o = certann(&["query", "--index", "i.bin", "--queries", "queries.csv", "--csv"], dir.path());
    let rows: Vec<(usize, f64)> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| {
            let cells: Vec<&str> = l.split(',').collect();
            (cells[0].parse().unwrap(), cells[2].parse().unwrap())
        })
        .collect();
    assert!(!rows.is_empty());
    assert!(rows.windows(2).all(|w| w[0].0 != w[1].0 || w[0].1 <= w[1].1));
}

#[test]
fn ingest_errors_exit_with_data_code() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("empty.csv"), "").unwrap();
    std::fs::write(dir.path().join("ragged.csv"), "1,2\n1,2,3\n").unwrap();
    let o = certann(&["build", "--input", "empty.csv", "--output", "i.bin"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("empty dataset"));
    let o = certann(&["build", "--input", "ragged.csv", "--output", "i.bin"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("line 2"));
    let o = certann(&["query", "--index", "ragged.csv", "--vector", "1,2"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("not an index file"));
}

#[test]
fn fvec_input_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let o = certann(
        &["gen", "--n", "200", "--dim", "5", "--format", "fvec", "--output", "d.fvec", "--queries-output", "q.fvec"],
        dir.path(),
    );
    assert!(o.status.success());
    let o = certann(&["build", "--input", "d.fvec", "--format", "fvec", "--output", "i.bin", "--k", "2"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("points: 200, dimension: 5"));
    let o = certann(&["bench", "--index", "i.bin", "--queries", "q.fvec", "--format", "fvec", "--oracle"], dir.path());
    assert!(stdout(&o).contains("sandwich: 100/100 pass"), "{}", stdout(&o));
}

#[test]
fn build_reports_derived_constants() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), "300", "4");
    let o = certann(&["build", "--input", "data.csv", "--output", "i.bin", "--mode", "full", "--k", "3"], dir.path());
    let out = stdout(&o);
    for needle in ["k = 3", "tau = 5.65685", "p_fp = 0.875", "gamma = ", "cells per point 3^3 = 27"] {
        assert!(out.contains(needle), "missing {needle}: {out}");
    }
}

#[test]
fn validate_suites_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = certann(&["validate", "--suite", "sandwich", "--n", "1000", "--dim", "6", "--k", "3"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("sandwich: 100/100 pass"));
    let o = certann(
        &[
            "validate",
            "--suite",
            "bounds",
            "--trials",
            "2000",
            "--pairs",
            "2",
            "--csv",
            "sweep.csv",
            "--only-dist",
            "rademacher",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 18);
    let o = certann(&["validate", "--suite", "tightness", "--trials", "2000"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("collided 2000/2000"));
}
