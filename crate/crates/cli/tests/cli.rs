use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_mut2wait"));
    c.env_remove("MUT2WAIT_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_owned).collect();
    let rows = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn read_draws(path: &Path) -> Vec<f64> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.parse().unwrap())
        .collect()
}

fn keys(v: &Value) -> Vec<&str> {
    v.as_object().unwrap().keys().map(String::as_str).collect()
}

const EVAL: [&str; 11] = [
    "eval", "--mu1", "1", "--mu2", "1", "--n", "1", "--t-max", "5", "--points", "50",
];

#[test]
fn eval_table() {
    let o = run(&EVAL);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = parse_csv(&stdout(&o));
    assert_eq!(header, ["t", "survival", "cdf", "pdf", "small_t_approx"]);
    assert_eq!(rows.len(), 50);
    let at_one = rows.iter().find(|r| r[0] == 1.0).expect("t = 1 on the grid");
    assert!((at_one[1] - 0.692_200_627_555_346_4).abs() < 1e-15);
    assert!((at_one[1] + at_one[2] - 1.0).abs() < 1e-15);
    assert!((at_one[3] - 0.437_554_247_511_763_9).abs() < 1e-15);
    assert_eq!(at_one[4], 0.5);
}

#[test]
fn eval_json_matches_csv() {
    let csv = parse_csv(&stdout(&run(&EVAL))).1;
    let mut args = EVAL.to_vec();
    args.extend(["--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&run(&args))).unwrap();
    assert_eq!(keys(&v), ["params", "rows"]);
    assert_eq!(keys(&v["params"]), ["mu1", "mu2", "n"]);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), csv.len());
    for (j, c) in rows.iter().zip(&csv) {
        assert_eq!(keys(j), ["t", "survival", "cdf", "pdf", "small_t_approx"]);
        assert_eq!(j["survival"].as_f64().unwrap(), c[1]);
    }
}

#[test]
fn eval_log_grid_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("eval.csv");
    let o = run(&[
        "eval", "--mu1", "0.01", "--mu2", "0.01", "--n", "100", "--t-min", "0.01", "--t-max", "100",
        "--points", "5", "--log-grid", "--output", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let (_, rows) = parse_csv(&fs::read_to_string(&out).unwrap());
    let t: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    assert_eq!(t.len(), 5);
    assert!((t[2] - 1.0).abs() < 1e-12 && t[0] == 0.01 && t[4] == 100.0);
}

#[test]
fn usage_errors_name_the_flag() {
    for (flag, args) in [
        ("--mu1", vec!["eval", "--mu1", "-1", "--mu2", "1", "--n", "1", "--t-max", "5", "--points", "5"]),
        ("--mu2", vec!["eval", "--mu1", "1", "--mu2", "nan", "--n", "1", "--t-max", "5", "--points", "5"]),
        ("--n", vec!["eval", "--mu1", "1", "--mu2", "1", "--n", "0", "--t-max", "5", "--points", "5"]),
        ("--samples", vec!["sample", "--mu1", "1", "--mu2", "1", "--n", "1", "--samples", "0", "--output", "/nonexistent/x"]),
        ("--delta", vec!["compare", "--mu1", "1", "--mu2", "1", "--n", "1", "--delta", "1.5"]),
        ("--horizon", vec!["compare", "--mu1", "1", "--mu2", "1", "--n", "1", "--model", "moran", "--horizon", "-3"]),
        ("--alpha", vec!["limits", "--regime", "quadratic", "--alpha", "-1"]),
        ("--n-values", vec!["limits", "--regime", "fast-second", "--n-values", "100,10"]),
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(stderr(&o).contains(flag), "{args:?}: {}", stderr(&o));
        assert!(o.stdout.is_empty());
    }
    assert_eq!(run(&["limits", "--regime", "bogus"]).status.code(), Some(2));
    assert_eq!(run(&["eval", "--mu1", "1"]).status.code(), Some(2));
}

#[test]
fn sample_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let go = |name: &str, seed: &str, threads: Option<&str>| {
        let path = dir.path().join(name);
        let mut c = bin();
        c.args([
            "sample", "--mu1", "1", "--mu2", "1", "--n", "1", "--samples", "20000", "--seed", seed, "--output",
            path.to_str().unwrap(),
        ]);
        if let Some(t) = threads {
            c.env("MUT2WAIT_THREADS", t);
        }
        let o = c.output().unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
        (fs::read(&path).unwrap(), o.stdout)
    };
    let a = go("a", "7", None);
    assert_eq!(a, go("b", "7", None));
    assert_eq!(a, go("c", "7", Some("1")));
    assert_eq!(a, go("d", "7", Some("5")));
    assert_ne!(a.0, go("e", "8", None).0);
}

#[test]
fn sample_summary() {
    let dir = tempfile::tempdir().unwrap();
    let draws = dir.path().join("draws.txt");
    let summary = dir.path().join("summary.json");
    let o = run(&[
        "sample", "--mu1", "1", "--mu2", "1", "--n", "1", "--samples", "1000000", "--seed", "11", "--output",
        draws.to_str().unwrap(), "--summary", summary.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(
        keys(&v),
        ["n", "censored", "mean", "q05", "q25", "median", "q75", "q95", "seed", "model", "params"]
    );
    assert_eq!(v["n"], 1_000_000);
    assert_eq!(v["model"], "paper");
    assert_eq!(v["seed"], 11);
    // Exact median is 1.4611862275734109 and the mean is e - 1.
    assert!((v["median"].as_f64().unwrap() - 1.461_186).abs() < 5e-3);
    assert!((v["mean"].as_f64().unwrap() - (1f64.exp() - 1.0)).abs() < 5e-3);

    let values = read_draws(&draws);
    assert_eq!(values.len(), 1_000_000);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    assert_eq!(mean, v["mean"].as_f64().unwrap());
}

#[test]
fn sample_mean_with_fast_second_step() {
    let dir = tempfile::tempdir().unwrap();
    let draws = dir.path().join("draws.txt");
    let o = run(&[
        "sample", "--mu1", "1", "--mu2", "1e6", "--n", "1", "--samples", "200000", "--seed", "5", "--output",
        draws.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    // τ₂ is essentially Exp(1) here.
    assert!((v["mean"].as_f64().unwrap() - 1.0).abs() < 0.01);
}

#[test]
fn moran_sample_rejects_fractional_population() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "sample", "--mu1", "1", "--mu2", "1", "--n", "2.5", "--samples", "10", "--model", "moran", "--output",
        dir.path().join("x").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn compare_paper_model() {
    let o = run(&["compare", "--mu1", "1", "--mu2", "1", "--n", "1", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(keys(&v), ["n", "ks", "dkw", "delta", "pass", "model", "params", "seed"]);
    assert_eq!(keys(&v["params"]), ["mu1", "mu2", "n"]);
    assert_eq!(v["n"], 1_000_000);
    assert_eq!(v["pass"], true);
    assert_eq!(v["model"], "paper");
    assert_eq!(v["delta"], 1e-3);
    assert!(v["ks"].as_f64().unwrap() < 0.002);
}

#[test]
fn compare_report_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = run(&[
        "compare", "--mu1", "0.1", "--mu2", "10", "--n", "1", "--samples", "10000", "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["n"], 10_000);
}

#[test]
fn compare_moran_single_cell_and_no_reference() {
    let o = run(&["compare", "--mu1", "1", "--mu2", "2", "--n", "1", "--model", "moran"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["model"], "moran");

    let o = run(&["compare", "--mu1", "1", "--mu2", "2", "--n", "5", "--model", "moran"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(o.stdout.is_empty());
}

#[test]
fn compare_fails_on_tiny_tolerance() {
    // δ close to 1 makes the DKW band narrower than the typical KS distance.
    let o = run(&["compare", "--mu1", "1", "--mu2", "1", "--n", "1", "--samples", "100", "--delta", "0.999999"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], false);
    assert_eq!(o.status.code(), Some(1));
}

fn limits(args: &[&str]) -> Vec<Vec<f64>> {
    let mut full = vec!["limits"];
    full.extend(args);
    let o = run(&full);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = parse_csv(&stdout(&o));
    assert_eq!(header, ["n", "gap"]);
    rows
}

#[test]
fn limit_regimes() {
    let fast = limits(&["--regime", "fast-second"]);
    let n: Vec<f64> = fast.iter().map(|r| r[0]).collect();
    assert_eq!(n, [1e2, 1e4, 1e6]);
    assert!(fast.windows(2).all(|w| w[1][1] < w[0][1]));
    assert!(fast[2][1] < 1e-2);

    assert!(limits(&["--regime", "fixed-ratio", "--alpha", "2.5"]).iter().all(|r| r[1] < 1e-12));

    let quad = limits(&["--regime", "quadratic"]);
    assert!(quad[quad.len() - 1][1] < 1e-3);

    let custom = limits(&["--regime", "fast-second", "--n-values", "10,1000"]);
    assert_eq!(custom.len(), 2);
}

#[test]
fn csv_output_round_trips() {
    let text = stdout(&run(&EVAL));
    let (header, rows) = parse_csv(&text);
    let mut again = header.join(",") + "\n";
    for r in rows {
        let cells: Vec<String> = r.iter().map(|x| format!("{x:?}")).collect();
        again += &(cells.join(",") + "\n");
    }
    assert_eq!(again, text);
}
