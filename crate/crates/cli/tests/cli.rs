use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use poolmax::RngSpec;
use rand::Rng;
use rand_distr::StandardNormal;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_poolmax"))
}

fn poolmax(args: &[&str]) -> Output {
    bin()
        .args(args)
        .env_remove("POOLMAX_THREADS")
        .output()
        .expect("spawn poolmax")
}

fn write_csv(dir: &Path, name: &str, ids: &[String], rows: &[Vec<f64>]) -> PathBuf {
    let path = dir.join(name);
    let mut s = ids.join(",");
    s.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| v.to_string()).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    fs::write(&path, s).unwrap();
    path
}

fn ids(p: usize) -> Vec<String> {
    (0..p).map(|j| format!("a{j}")).collect()
}

fn normal_rows(n: usize, p: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut g = RngSpec::new(seed).generator();
    (0..n)
        .map(|_| (0..p).map(|_| g.sample(StandardNormal)).collect())
        .collect()
}

fn binary_panel(dir: &Path, n: usize, p: usize, seed: u64) -> PathBuf {
    let mut g = RngSpec::new(seed).generator();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..p)
                .map(|_| if g.random::<f64>() < 0.01 { 0.99 } else { -0.01 })
                .collect()
        })
        .collect();
    write_csv(dir, "x.csv", &ids(p), &rows)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn pool_test_happy_path() {
    let dir = TempDir::new().unwrap();
    let x = binary_panel(dir.path(), 500, 100, 1);
    let out = dir.path().join("r.json");
    let o = poolmax(&[
        "pool-test",
        "--in",
        s(&x),
        "--q",
        "49",
        "--d",
        "200",
        "--alpha",
        "0.05",
        "--B",
        "1000",
        "--seed",
        "7",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r: poolmax::TestResult = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r.method_tag, poolmax::MethodTag::SubsetsPool);
    assert!(r.p_value >= 1.0 / 1001.0 && r.p_value <= 1.0);
    assert_eq!(r.reject, r.statistic > r.critical_value);
}

#[test]
fn not_coprime_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let x = binary_panel(dir.path(), 50, 100, 2);
    let o = poolmax(&["pool-test", "--q", "50", "--in", s(&x)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("q must be coprime with p"), "{err}");
    assert!(err.contains("--q 49"), "{err}");
}

#[test]
fn usage_data_and_degenerate_exit_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(poolmax(&["pool-test", "--bogus"]).status.code(), Some(2));
    assert_eq!(poolmax(&["naive-test"]).status.code(), Some(2));
    assert_eq!(
        poolmax(&["naive-test", "--in", "/nonexistent/x.csv"]).status.code(),
        Some(3)
    );

    let ragged = dir.path().join("ragged.csv");
    fs::write(&ragged, "a,b\n1,2\n3\n").unwrap();
    let o = poolmax(&["naive-test", "--in", s(&ragged)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));

    let header = dir.path().join("header.csv");
    fs::write(&header, "a,b\n").unwrap();
    assert_eq!(poolmax(&["naive-test", "--in", s(&header)]).status.code(), Some(3));

    let flat = write_csv(dir.path(), "flat.csv", &ids(3), &vec![vec![0.5, 0.5, 0.5]; 10]);
    assert_eq!(poolmax(&["naive-test", "--in", s(&flat)]).status.code(), Some(4));
    assert_eq!(
        poolmax(&["pool-test", "--in", s(&flat), "--q", "2"]).status.code(),
        Some(4)
    );
    assert_eq!(
        poolmax(&["naive-test", "--in", s(&flat), "--alpha", "1.5"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn help_documents_defaults() {
    let o = poolmax(&["pool-test", "--help"]);
    assert_eq!(o.status.code(), Some(0));
    let h = String::from_utf8_lossy(&o.stdout);
    for needle in ["default: 49", "default: 2p", "default: 1000", "default: 0.05"] {
        assert!(h.contains(needle), "missing {needle}:\n{h}");
    }
    let h = String::from_utf8_lossy(&poolmax(&["backtest", "--help"]).stdout).to_string();
    assert!(h.contains("default: 0.01") && h.contains("default: 3000"), "{h}");
}

#[test]
fn naive_and_marginal_outputs() {
    let dir = TempDir::new().unwrap();
    let x = binary_panel(dir.path(), 300, 20, 3);
    let o = poolmax(&["naive-test", "--in", s(&x), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("method,statistic,critical_value,p_value,reject,alpha\nNaive,"));

    let o = poolmax(&[
        "marginal-test",
        "--in",
        s(&x),
        "--B",
        "200",
        "--seed",
        "3",
        "--per-subset",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let r: poolmax::TestResult = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r.per_subset_t.unwrap().len(), 20);
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = TempDir::new().unwrap();
    let x = binary_panel(dir.path(), 200, 30, 4);
    let run = |threads: &str| {
        bin()
            .args(["pool-test", "--in", s(&x), "--q", "7", "--B", "300", "--seed", "1"])
            .env("POOLMAX_THREADS", threads)
            .output()
            .unwrap()
            .stdout
    };
    let one = run("1");
    assert!(!one.is_empty());
    assert_eq!(one, run("3"));
    let flag = poolmax(&[
        "--threads",
        "2",
        "pool-test",
        "--in",
        s(&x),
        "--q",
        "7",
        "--B",
        "300",
        "--seed",
        "1",
    ]);
    assert_eq!(one, flag.stdout);
}

#[test]
fn subsets_check_reports_witness() {
    let o = poolmax(&["subsets-check", "--p", "6", "--q", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["identifiable"], false);
    assert_eq!(v["gcd"], 3);
    let w: Vec<f64> = serde_json::from_value(v["witness"].clone()).unwrap();
    for l in 0..6 {
        assert_eq!((0..3).map(|k| w[(l + k) % 6]).sum::<f64>(), 0.0);
    }
    let v: serde_json::Value =
        serde_json::from_slice(&poolmax(&["subsets-check", "--p", "5", "--q", "2"]).stdout).unwrap();
    assert_eq!(v["identifiable"], true);
    assert_eq!(
        poolmax(&["subsets-check", "--p", "100", "--q", "3"]).status.code(),
        Some(2)
    );
}

#[test]
fn simulate_writes_sweep_csv() {
    let o = poolmax(&[
        "simulate",
        "--model",
        "B2",
        "--n",
        "100",
        "--p",
        "10",
        "--p0",
        "2",
        "--q",
        "3,7",
        "--d",
        "20",
        "--B",
        "50",
        "--mc-reps",
        "4",
        "--seed",
        "9",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "model,q,d,method,alpha,mc_reps,reject_rate");
    assert_eq!(lines.len(), 7);
    assert_eq!(
        poolmax(&["simulate", "--p", "10", "--q", "5", "--mc-reps", "1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn backtest_from_forecast_files() {
    let dir = TempDir::new().unwrap();
    let (n, p) = (400, 10);
    let u = write_csv(dir.path(), "u.csv", &ids(p), &normal_rows(n, p, 5));
    let good = write_csv(
        dir.path(),
        "good.csv",
        &ids(p),
        &vec![vec![2.326_347_874_040_841; p]; n],
    );
    let low = write_csv(dir.path(), "low.csv", &ids(p), &vec![vec![1.0; p]; n]);
    let out = dir.path().join("table.csv");
    let o = poolmax(&[
        "backtest",
        "--in",
        s(&u),
        "--forecast",
        &format!("good={}", s(&good)),
        "--forecast",
        &format!("low={}", s(&low)),
        "--q",
        "3",
        "--B",
        "200",
        "--seed",
        "2",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "method,good,low");
    assert_eq!(lines[1].split(',').count(), 3);
    // the low forecast is rejected by validation and beaten by the good one
    let row: Vec<&str> = lines[2].split(',').collect();
    assert!(row[2].parse::<f64>().unwrap() < 0.05);
    assert!(row[1].parse::<f64>().unwrap() > 0.5);

    let o = poolmax(&["backtest", "--in", s(&u), "--forecast", "missing-equals"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn backtest_with_rolling_forecasts() {
    let dir = TempDir::new().unwrap();
    let p = 3;
    let u = write_csv(dir.path(), "u.csv", &ids(p), &normal_rows(330, p, 6));
    let save = dir.path().join("fc");
    let o = poolmax(&[
        "backtest",
        "--in",
        s(&u),
        "--methods",
        "empirical,skewt",
        "--window",
        "300",
        "--refit-every",
        "10",
        "--q",
        "2",
        "--B",
        "100",
        "--format",
        "json",
        "--save-forecasts",
        s(&save),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rep: poolmax::backtest::BacktestReport = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rep.method_names, ["empirical", "skewt"]);
    assert_eq!(rep.validation.len(), 2);
    assert_eq!(rep.comparative.len(), 1);
    let saved = poolmax_cli::ingest_panel(&save.join("skewt.csv")).unwrap();
    assert_eq!(saved.data.shape(), (30, 3));
}

#[test]
fn taildep_with_groups() {
    let dir = TempDir::new().unwrap();
    let mut rows = normal_rows(500, 3, 7);
    for r in &mut rows {
        r[2] = r[0];
    }
    let z = write_csv(dir.path(), "z.csv", &ids(3), &rows);
    let groups = dir.path().join("g.csv");
    fs::write(&groups, "id,group\na0,fin\na1,energy\na2,fin\n").unwrap();
    let o = poolmax(&["taildep", "--in", s(&z), "--groups", s(&groups)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "id,group,a1,a0,a2");
    assert!(lines[2].starts_with("a0,fin,"));
    assert!(lines[2].ends_with(",1,1"));
    assert_eq!(
        poolmax(&["taildep", "--in", s(&z), "--u", "0.7"]).status.code(),
        Some(2)
    );
}
