use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
        .display()
        .to_string()
}

fn ccl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ccl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json_lines(out: &Output) -> Vec<Value> {
    stdout(out)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn validate_exit_codes() {
    let ok = ccl(&["validate", &data("friends.ccl")]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).starts_with("valid"));
    let bad = ccl(&["validate", &data("bad-mass.ccl")]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(!stdout(&bad).is_empty());
    assert_eq!(
        ccl(&["validate", &data("no-such-file.ccl")]).status.code(),
        Some(2)
    );
}

#[test]
fn parse_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.ccl");
    std::fs::write(&path, "p :- .\n").unwrap();
    assert_eq!(
        ccl(&["validate", path.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn infer_documented_intervals() {
    let friends = json_lines(&ccl(&["infer", &data("friends.ccl"), "--method", "vertex"]));
    assert_eq!(friends[0]["lower"], "8/25");
    assert_eq!(friends[0]["upper"], "2/5");
    assert_eq!(friends[0]["lower_dec"], 0.32);
    let urn = json_lines(&ccl(&[
        "infer",
        &data("urn-merged.ccl"),
        "--query",
        "\\+ a1g, \\+ a2r",
        "--method",
        "lp",
    ]));
    assert_eq!(
        (&urn[0]["lower"], &urn[0]["upper"]),
        (&Value::from("1/2"), &Value::from("7/10"))
    );
    let icl = json_lines(&ccl(&["infer", &data("urn.ccl"), "--method", "icl"]));
    assert_eq!(icl[0]["value"], "14/25");
}

#[test]
fn psat_method_agrees_with_lp() {
    for name in ["urn-merged.ccl", "friends-merged.ccl", "ranking-three.ccl"] {
        let lp = &json_lines(&ccl(&["infer", &data(name), "--method", "lp"]))[0];
        let ps = &json_lines(&ccl(&[
            "infer",
            &data(name),
            "--method",
            "psat",
            "--epsilon",
            "2^-10",
        ]))[0];
        let eps = 1.0 / 1024.0;
        let (l, u) = (
            lp["lower_dec"].as_f64().unwrap(),
            lp["upper_dec"].as_f64().unwrap(),
        );
        let (pl, pu) = (
            ps["lower_dec"].as_f64().unwrap(),
            ps["upper_dec"].as_f64().unwrap(),
        );
        assert!(
            pl <= l && l - pl <= eps && pu >= u && pu - u <= eps,
            "{name}: {lp} vs {ps}"
        );
        let vertex = &json_lines(&ccl(&["infer", &data(name), "--method", "vertex"]))[0];
        assert_eq!(
            (&vertex["lower"], &vertex["upper"]),
            (&lp["lower"], &lp["upper"])
        );
    }
}

#[test]
fn lp_refuses_several_spaces() {
    assert_eq!(
        ccl(&["infer", &data("friends.ccl"), "--method", "lp"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn psat_export_writes_dimacs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("hard.cnf");
    let out = ccl(&[
        "psat-export",
        &data("urn-merged.ccl"),
        "--alpha",
        "1/2",
        "--dimacs",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.lines().next().unwrap().starts_with("1 "));
    assert!(text.lines().any(|l| l.starts_with("3/10 ")));
    let dimacs = std::fs::read_to_string(&path).unwrap();
    assert!(dimacs.lines().any(|l| l.starts_with("p cnf 6 ")));
}

#[test]
fn rank_echoes_counts() {
    let out = ccl(&["rank", &data("three-objects.rankings")]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(
        v["counts"]["counts"],
        serde_json::json!([[8, 6, 4], [5, 4, 9], [5, 8, 5]])
    );
    assert_eq!(v["counts"]["total"], 18);
    assert_eq!(v["pairs"].as_array().unwrap().len(), 3);
}

#[test]
fn rankings_and_counts_give_the_same_bounds() {
    let a: Value =
        serde_json::from_str(&stdout(&ccl(&["rank", &data("three-objects.rankings")]))).unwrap();
    let b: Value =
        serde_json::from_str(&stdout(&ccl(&["rank", &data("three-objects.counts.csv")]))).unwrap();
    assert_eq!(a["counts"], b["counts"]);
    for (x, y) in a["pairs"]
        .as_array()
        .unwrap()
        .iter()
        .zip(b["pairs"].as_array().unwrap())
    {
        for key in [
            "pair",
            "interval",
            "ccl_verdict",
            "icl_value",
            "icl_verdict",
        ] {
            assert_eq!(x[key], y[key], "{key}");
        }
        assert_eq!(y["truth"], Value::Null);
    }
}

#[test]
fn single_ranking_without_prior_is_determinate() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.rankings");
    std::fs::write(&path, "b,c,a,d\n").unwrap();
    let out = ccl(&["rank", path.to_str().unwrap(), "--smoothing", "0"]);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["aggregate"]["determinacy_rate"], 1.0);
    assert!(v["pairs"]
        .as_array()
        .unwrap()
        .iter()
        .all(|p| p["ccl_verdict"] != "indeterminate"));
}

#[test]
fn output_is_deterministic() {
    for args in [
        vec!["infer".to_string(), data("friends.ccl")],
        vec![
            "rank".to_string(),
            data("three-objects.rankings"),
            "--method".into(),
            "psat".into(),
        ],
        vec![
            "rank".to_string(),
            "--synthetic".into(),
            "4".into(),
            "--seed".into(),
            "7".into(),
        ],
        vec![
            "worlds".to_string(),
            data("friends.ccl"),
            "--format".into(),
            "json".into(),
        ],
    ] {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        assert_eq!(ccl(&args).stdout, ccl(&args).stdout, "{args:?}");
    }
}

#[test]
fn unknown_flags_are_rejected() {
    let out = ccl(&["infer", &data("friends.ccl"), "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("frobnicate"));
}

#[test]
fn worlds_table_lists_classes() {
    let text = stdout(&ccl(&["worlds", &data("friends.ccl")]));
    assert!(text.contains("choice space 2"));
    let merged = stdout(&ccl(&["worlds", &data("friends.ccl"), "--merge"]));
    assert!(!merged.contains("choice space 2"));
}
