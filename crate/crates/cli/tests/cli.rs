use std::process::Command;

use permcycles::QuadratureConfig;
use permcycles_cli::{emit_figure_data, parse_ratio, run, Cell, Report};

fn ok(args: &[&str]) -> String {
    let mut argv = vec!["permcycles"];
    argv.extend_from_slice(args);
    let out = run(argv);
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    out.stdout
}

fn json(args: &[&str]) -> Report {
    let mut with_flag = args.to_vec();
    with_flag.push("--json");
    serde_json::from_str(&ok(&with_flag)).unwrap()
}

fn column(report: &Report, name: &str) -> Vec<Cell> {
    let table = report.results.table.as_ref().unwrap();
    let c = table.columns.iter().position(|col| col == name).unwrap();
    table.rows.iter().map(|r| r[c].clone()).collect()
}

fn num(cell: &Cell) -> f64 {
    match cell {
        Cell::Num(v) => *v,
        Cell::Int(v) => *v as f64,
        Cell::Text(t) => panic!("expected a number, got {t}"),
    }
}

#[test]
fn gamma_star_report() {
    let r = json(&["gamma-star"]);
    let v = &r.results.values;
    assert!((v["gamma_star"] - 0.377541).abs() < 1e-6);
    assert!((v["P0"] - 0.0987).abs() < 1e-4);
    assert!((v["P1"] - 0.8285).abs() < 1e-4);
    assert!((v["P2"] - 0.0728).abs() < 1e-4);
    assert_eq!(r.version, env!("CARGO_PKG_VERSION"));
}

#[test]
fn limit_pmf_table() {
    let r = json(&["limit-pmf", "--gamma", "0.25", "--delta", "0.333333"]);
    let p: Vec<f64> = column(&r, "p").iter().map(num).collect();
    for (got, want) in p.iter().zip([0.7497, 0.2168, 0.0295, 0.0040]) {
        assert!((got - want).abs() < 1e-4, "{p:?}");
    }
    let human = ok(&["limit-pmf", "--gamma", "0.25", "--delta", "0.333333"]);
    assert!(human.lines().any(|l| l.starts_with("0  0.7497")), "{human}");
}

#[test]
fn exact_pmf_rational_small() {
    let r = json(&[
        "exact-pmf",
        "--n",
        "4",
        "--gamma",
        "0.5",
        "--delta",
        "1",
        "--exact-rational",
    ]);
    assert_eq!(r.results.exact["window"], "[2, 4]");
    let p = column(&r, "p");
    assert_eq!(p, ["1/24", "5/6", "1/8"].map(|s| Cell::Text(s.into())).to_vec());
}

#[test]
fn exact_and_sample_share_the_window() {
    // 1/3 · 3000 is exactly 1000, which a float product can miss.
    let e = json(&["exact-pmf", "--n", "3000", "--gamma", "1/3", "--delta", "1/2"]);
    let s = json(&[
        "sample", "--n", "3000", "--gamma", "1/3", "--delta", "1/2", "--draws", "10", "--seed", "1",
    ]);
    assert_eq!(e.results.exact["window"], "[1000, 1500]");
    assert_eq!(s.results.exact["window"], "[1000, 1500]");
    assert_eq!(s.seed, Some(1));
}

#[test]
fn json_round_trip() {
    for args in [
        vec!["gamma-star"],
        vec![
            "exact-pmf",
            "--n",
            "9",
            "--gamma",
            "1/3",
            "--delta",
            "1",
            "--exact-rational",
        ],
        vec![
            "sample",
            "--n",
            "50",
            "--gamma",
            "0.2",
            "--delta",
            "0.5",
            "--draws",
            "500",
            "--seed",
            "3",
            "--workers",
            "2",
        ],
        vec!["limit-moment", "--r", "3", "--gamma", "0.1", "--delta", "0.7"],
        vec!["exact-moment", "--n", "10", "--a", "6", "--b", "10", "--r", "1"],
    ] {
        let r = json(&args);
        let text = serde_json::to_string(&r).unwrap();
        let back: Report = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }
}

#[test]
fn exact_moment_fraction() {
    let r = json(&["exact-moment", "--n", "10", "--a", "6", "--b", "10", "--r", "1"]);
    assert_eq!(r.results.exact["moment"], "1627/2520");
}

#[test]
fn figure_rows() {
    let csv = ok(&["figure", "--lo", "0.3333", "--hi", "1", "--points", "200"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("gamma,P0,P1,P2"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 200);
    for row in &rows {
        assert!(row.iter().all(|v| v.is_finite() && *v >= 0.0), "{row:?}");
        if row[0] >= 1.0 / 3.0 {
            assert!((row[1] + row[2] + row[3] - 1.0).abs() < 1e-8, "{row:?}");
        }
    }
}

#[test]
fn figure_continuous_at_one_half() {
    let cfg = QuadratureConfig::default();
    let below = emit_figure_data(0.5 - 1e-10, 0.5 - 1e-10 + 1e-12, 2, &cfg).unwrap()[0];
    let at = emit_figure_data(0.5, 0.6, 2, &cfg).unwrap();
    for c in 1..4 {
        assert!((below[c] - at[0][c]).abs() < 1e-8, "{below:?} vs {:?}", at[0]);
    }
    let ln2 = std::f64::consts::LN_2;
    assert!((at[0][1] - (1.0 - ln2)).abs() < 1e-15 && (at[0][2] - ln2).abs() < 1e-15);
    assert!((at[1][1] - 0.48918).abs() < 1e-5 && (at[1][2] - 0.51082).abs() < 1e-5);
    assert!(emit_figure_data(0.2, 1.0, 10, &cfg).is_err());
}

#[test]
fn fractions_parse_exactly() {
    assert_eq!(parse_ratio("1/3").unwrap(), num_rational::Ratio::new(1, 3));
    assert_eq!(parse_ratio("0.25").unwrap(), num_rational::Ratio::new(1, 4));
    assert_eq!(parse_ratio("1").unwrap(), num_rational::Ratio::from_integer(1));
    assert!(parse_ratio("abc").is_err());
    assert!(parse_ratio("1/0").is_err());
}

#[test]
fn exit_codes() {
    for args in [
        vec!["permcycles", "nonsense"],
        vec!["permcycles", "qp", "--r", "3", "--lambda", "2"],
        vec!["permcycles", "limit-pmf", "--gamma", "0.5", "--delta", "0.4"],
        vec!["permcycles", "dilog", "--x", "1.5"],
        vec!["permcycles", "limit-pmf", "--gamma", "one", "--delta", "1"],
    ] {
        let out = run(args.clone());
        assert_eq!(out.code, 2, "{args:?}");
        assert_eq!(out.stderr.trim_end().lines().count(), 1, "{}", out.stderr);
    }
    let out = run([
        "permcycles",
        "limit-moment",
        "--r",
        "3",
        "--gamma",
        "0.1",
        "--delta",
        "1",
        "--tol",
        "1e-30",
    ]);
    assert_eq!(out.code, 3);
    assert!(out.stderr.contains("achieved"), "{}", out.stderr);
}

#[test]
fn binary_exit_status() {
    let bin = env!("CARGO_BIN_EXE_permcycles");
    let status = Command::new(bin).args(["dilog", "--x", "2"]).output().unwrap();
    assert_eq!(status.status.code(), Some(2));
    let good = Command::new(bin)
        .args(["dilog", "--x", "0.5", "--json"])
        .output()
        .unwrap();
    assert_eq!(good.status.code(), Some(0));
    let r: Report = serde_json::from_slice(&good.stdout).unwrap();
    assert!((r.results.values["dilog"] - 0.5822405264650125).abs() < 1e-14);
}
