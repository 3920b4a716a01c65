use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    format!("{}/../../data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symquant")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn validate_reports_dimensions() {
    let o = run(&["validate", &data("sl2.json")]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("dim k: 1") && s.contains("dim p: 2"), "{s}");
    assert!(s.contains("iwasawa: valid"));
}

#[test]
fn bch_order_one() {
    let o = run(&["bch", "--order", "1"]);
    assert_eq!(stdout(&o).trim(), "bch: X + Y");
}

#[test]
fn rouviere_product_on_omega() {
    let o = run(&["star-rou", &data("sl2.json"), "--p", "omega", "--q", "omega"]);
    assert_eq!(o.status.code(), Some(0));
    // The determinant form of J^(1/2) gives +16/15.
    assert_eq!(stdout(&o).trim(), "P # Q: omega^2 + 16/15");
    let o = run(&["star-cf", &data("sl2.json"), "--p", "omega", "--q", "omega"]);
    assert!(stdout(&o).contains("P *_CF Q: omega^2 - 16/15"));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["bch", "--order", "x"]).status.code(), Some(1));
    assert_eq!(run(&["validate", "/nonexistent.json"]).status.code(), Some(1));
    assert_eq!(run(&["star-rou", &data("sl2.json"), "--p", "nope", "--q", "omega"]).status.code(), Some(1));
    let o = run(&["star-rou", &data("sl2.json"), "--p", "H", "--q", "omega"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not k-invariant"));
    assert_eq!(run(&["bch", "--order", "99"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn json_report_is_deterministic() {
    let dir = std::env::temp_dir();
    let graph = dir.join("symquant_cli_wedge.json");
    std::fs::write(&graph, r#"{"n": 1, "m": 2, "edges": [[0, 1, "+"], [0, 2, "+"]]}"#).unwrap();
    let mut reports = Vec::new();
    let out = dir.join("symquant_cli_report.json");
    for _ in 0..2 {
        let o = run(&["graph-weight", graph.to_str().unwrap(), "--samples", "20000", "--seed", "9", "--json", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
        reports.push(v);
    }
    assert_eq!(reports[0]["results"], reports[1]["results"]);
    assert_eq!(reports[0]["inputs_digest"], reports[1]["inputs_digest"]);
    let w = &reports[0]["results"][1];
    assert_eq!(w["label"], "weight");
    assert!((w["value"].as_f64().unwrap() - 0.5).abs() < 5.0 * w["error"].as_f64().unwrap());
    assert!(reports[0]["inputs_digest"].as_str().unwrap().starts_with("sha256:"));
}

#[test]
fn exact_results_in_json() {
    let out = std::env::temp_dir().join("symquant_cli_char.json");
    let o = run(&[
        "char",
        &data("solvable.json"),
        "--p",
        "w",
        "--at",
        "1,1,-1,0",
        "--polarization",
        "x;y;z",
        "--json",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["results"][0]["exact"], "4");
    assert_eq!(v["command"][0], "char");
}

#[test]
fn remaining_subcommands_run() {
    let cases: Vec<Vec<String>> = vec![
        vec!["zsym".into(), "--order".into(), "3".into()],
        vec!["invariants".into(), data("solvable.json"), "--degree".into(), "2".into()],
        vec!["star-dk".into(), data("sl2.json"), "--f".into(), "H".into(), "--g".into(), "X".into()],
        vec!["e-series".into(), data("sl2.json")],
        vec!["hc-project".into(), data("sl2.json"), "--p".into(), "omega".into()],
        vec!["duflo-check".into(), data("semidirect.json"), "--lambda".into(), "trk".into(), "--degree".into(), "2".into()],
        vec!["densities".into(), data("diag_sl2.json"), "--order".into(), "4".into()],
    ];
    for args in cases {
        let a: Vec<&str> = args.iter().map(String::as_str).collect();
        let o = run(&a);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let s = stdout(&run(&["hc-project", &data("sl2.json"), "--p", "omega"]));
    assert!(s.contains("restriction: H^2") && s.contains("uea projection: H^2 - 2*H"), "{s}");
    let s = stdout(&run(&["zsym", "--order", "3"]));
    assert!(s.starts_with("z_sym: X + Y"), "{s}");
}
