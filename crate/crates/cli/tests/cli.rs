use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn tariff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tariff"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn json(args: &[&str]) -> Value {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let out = tariff(&all);
    assert!(out.status.success(), "{args:?} failed: {}", stderr(&out));
    serde_json::from_slice(&out.stdout).expect("valid JSON report")
}

fn generate(dir: &TempDir, name: &str, kind: &[&str]) -> PathBuf {
    let path = dir.path().join(name);
    let mut args = vec!["gen"];
    args.extend_from_slice(kind);
    args.extend_from_slice(&["-o", path.to_str().unwrap()]);
    let out = tariff(&args);
    assert!(
        out.status.success(),
        "gen {kind:?} failed: {}",
        stderr(&out)
    );
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn regime_profit(report: &Value, regime: &str) -> String {
    report["regimes"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["regime"] == regime)
        .and_then(|r| r["profit"]["exact"].as_str())
        .unwrap_or("refused")
        .to_string()
}

#[test]
fn compare_on_usage_gap() {
    let dir = TempDir::new().unwrap();
    let file = generate(&dir, "gap.json", &["usage-gap"]);
    let report = json(&["compare", s(&file)]);
    assert_eq!(regime_profit(&report, "full"), "3/4");
    assert_eq!(regime_profit(&report, "usage"), "1/2");
    assert_eq!(regime_profit(&report, "upfront"), "3/4");
    assert_eq!(regime_profit(&report, "mandatory"), "3/4");
    assert_eq!(report["sandwich"], true);
}

#[test]
fn reduce_partition_messages() {
    let out = tariff(&["reduce-partition", "--items", "1,1"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "PARTITION EXISTS (profit 9/2 = 9M/4)");
    let out = tariff(&["reduce-partition", "--items", "1,2"]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("NO PARTITION"), "{}", stdout(&out));
}

#[test]
fn bad_probability_row_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("bad.json");
    std::fs::write(
        &file,
        r#"{"T":1,"A":2,"Q":2,"mu":[1],"costs":[0,0],"p":[[1,0],["0.4","1/2"]],"v":[[1,2]]}"#,
    )
    .unwrap();
    let out = tariff(&["solve", s(&file)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("p row 1"), "{}", stderr(&out));
    assert_eq!(stderr(&out).lines().count(), 1);
}

#[test]
fn malformed_and_inconsistent_files_exit_2() {
    let dir = TempDir::new().unwrap();
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{").unwrap();
    assert_eq!(tariff(&["solve", s(&broken)]).status.code(), Some(2));
    let wrong = dir.path().join("wrong.json");
    std::fs::write(
        &wrong,
        r#"{"T":2,"A":1,"Q":1,"mu":[1],"costs":[0],"p":[[1]],"v":[[1]]}"#,
    )
    .unwrap();
    let out = tariff(&["solve", s(&wrong)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("mu"));
    assert_eq!(
        tariff(&["solve", "/nonexistent/instance.json"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn size_guard_exits_3() {
    let dir = TempDir::new().unwrap();
    let file = generate(
        &dir,
        "big.json",
        &[
            "random",
            "--types",
            "5",
            "--actions",
            "3",
            "--outcomes",
            "3",
        ],
    );
    let out = tariff(&["solve", s(&file)]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("size guard"));
}

#[test]
fn generated_files_solve_without_validation_errors() {
    let dir = TempDir::new().unwrap();
    let kinds: [&[&str]; 6] = [
        &["hmu", "--mu", "1/6,1/3,1/2"],
        &["usage-gap"],
        &["partition", "--items", "1,2,3"],
        &["counterexample"],
        &["random", "--types", "3", "--seed", "7"],
        &["random", "--types", "2", "--seed", "3", "--single-param"],
    ];
    for (i, kind) in kinds.iter().enumerate() {
        let file = generate(&dir, &format!("g{i}.json"), kind);
        let out = tariff(&["solve", s(&file), "--regime", "full"]);
        assert!(out.status.success(), "{kind:?}: {}", stderr(&out));
    }
}

#[test]
fn hmu_worst_case_gap() {
    let dir = TempDir::new().unwrap();
    let file = generate(&dir, "h.json", &["hmu", "--mu", "1/4,3/4"]);
    let full = json(&["solve", s(&file), "--regime", "full"]);
    let upfront = json(&["solve", s(&file), "--regime", "upfront"]);
    assert_eq!(full["profit"]["exact"], "7/4");
    assert_eq!(full["h_mu"]["exact"], "7/4");
    assert_eq!(upfront["profit"]["exact"], "1");
}

#[test]
fn reports_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let file = generate(&dir, "r.json", &["random", "--types", "3", "--seed", "11"]);
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("seconds");
        v
    };
    let a = strip(json(&["solve", s(&file)]));
    let b = strip(json(&["--threads", "1", "solve", s(&file)]));
    assert_eq!(a, b);
}

#[test]
fn fptas_respects_the_guarantee() {
    let dir = TempDir::new().unwrap();
    let file = generate(
        &dir,
        "f.json",
        &["random", "--types", "2", "--outcomes", "3", "--seed", "5"],
    );
    let exact = json(&["solve", s(&file)]);
    let approx = json(&["fptas", s(&file), "--eps", "1/10"]);
    let parse =
        |v: &Value| tariff_core::rational::parse(v["profit"]["exact"].as_str().unwrap()).unwrap();
    let (r, a) = (parse(&exact), parse(&approx));
    assert!(a <= r);
    assert!(a >= r * tariff_core::rational::ratio(9, 10));
    assert_eq!(
        tariff(&["fptas", s(&file), "--eps", "2"]).status.code(),
        Some(2)
    );
}

#[test]
fn single_param_counterexample() {
    let dir = TempDir::new().unwrap();
    let file = generate(&dir, "c.json", &["counterexample"]);
    let report = json(&["single-param", s(&file)]);
    assert_eq!(report["exact"]["exact"], "7/6");
    assert_eq!(report["zero_costs"], false);
    let gap = generate(&dir, "gap.json", &["usage-gap"]);
    assert_eq!(tariff(&["single-param", s(&gap)]).status.code(), Some(2));
}

#[test]
fn check_menu_reports_violations() {
    let dir = TempDir::new().unwrap();
    let inst = generate(&dir, "gap.json", &["usage-gap"]);
    let good = dir.path().join("good.json");
    std::fs::write(
        &good,
        r#"{"contracts":[{"action":0,"w":"3/4","x":[0,0]},{"action":0,"w":"3/4","x":["0","0"]}]}"#,
    )
    .unwrap();
    let report = json(&["check-menu", s(&inst), s(&good)]);
    assert_eq!(report["profit"]["exact"], "3/4");
    assert_eq!(report["diagnostics"]["ic_ir"], true);

    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"contracts":[{"action":0,"w":"3/4","x":[0,0]},{"action":0,"w":1,"x":["EXCLUDE",0]}]}"#,
    )
    .unwrap();
    let out = tariff(&["check-menu", s(&inst), s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("type 1 strictly prefers contract 0"));

    let mandatory = tariff(&["check-menu", s(&inst), s(&bad), "--regime", "mandatory"]);
    assert_eq!(mandatory.status.code(), Some(2));
    assert!(stderr(&mandatory).contains("EXCLUDE"));

    let opt_out = dir.path().join("opt.json");
    std::fs::write(
        &opt_out,
        r#"{"contracts":[{"action":0,"w":"3/4","x":[0,0]},null]}"#,
    )
    .unwrap();
    let report = json(&["check-menu", s(&inst), s(&opt_out)]);
    assert_eq!(report["diagnostics"]["types"][1]["choice"], Value::Null);
}
