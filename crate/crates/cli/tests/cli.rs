use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn pbdnf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pbdnf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(args: &[&str]) -> Value {
    let out = pbdnf(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pbdnf-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn k3() -> String {
    scratch("k3.json", r#"{"n":3,"edges":[[0,1],[1,2],[0,2]]}"#)
        .to_string_lossy()
        .into_owned()
}

#[test]
fn check_triangle_cut() {
    let r = report(&["check", "--input", &k3()]);
    assert_eq!(r["result"]["submodular"], true);
    assert_eq!(r["result"]["monotone"], false);
    assert_eq!(r["run"]["subcommand"], "check");
    assert!(r["timestamp"].is_u64());
}

#[test]
fn decompose_verifies() {
    let r = report(&["decompose", "--input", &k3(), "--verify"]);
    let v = &r["result"]["verify"];
    assert_eq!(v["exact"], true);
    assert!(v["pos_width"].as_u64().unwrap() <= 2);
    assert!(v["neg_width"].as_u64().unwrap() <= 2);
    let formula = serde_json::to_string(&r["result"]["formula"]).unwrap();
    let path = scratch("k3-dnf.json", &formula);
    let table = report(&["table", "--input", path.to_str().unwrap()]);
    assert_eq!(table["result"]["values"], serde_json::json!([0, 2, 2, 2, 2, 2, 2, 0]));
}

#[test]
fn switchlab_row_within_bound() {
    let csv = std::env::temp_dir().join(format!("pbdnf-switch-{}.csv", std::process::id()));
    let r = report(&[
        "switchlab",
        "--k",
        "2",
        "--r",
        "2",
        "--p",
        "0.0357",
        "--s",
        "3",
        "--trials",
        "10000",
        "--seed",
        "7",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    let row = &r["result"]["rows"][0];
    assert!(row["p_hat"].as_f64().unwrap() <= row["bound"].as_f64().unwrap());
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("k,r,n,p,s,trials,p_hat"));
    assert_eq!(lines.count(), 1);
}

#[test]
fn reports_are_deterministic() {
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("timestamp");
        v
    };
    for args in [
        &["gen", "--gen", "formula:n=9,k=2,r=3,s=5", "--seed", "11"][..],
        &[
            "switchlab",
            "--k",
            "1",
            "--r",
            "2",
            "--p",
            "0.05",
            "--trials",
            "500",
            "--seed",
            "3",
        ],
        &["learn", "--gen", "zoo:n=7", "--submodular", "--seed", "5"],
        &[
            "learn",
            "--gen",
            "formula:n=8,k=2,r=2,s=3",
            "--backend",
            "sampled",
            "--theta",
            "0.2",
            "--bucket-samples",
            "20000",
            "--coefficient-samples",
            "5000",
            "--seed",
            "9",
        ],
    ] {
        assert_eq!(strip(report(args)), strip(report(args)), "{args:?}");
    }
}

#[test]
fn learn_exact_is_exact() {
    let r = report(&["learn", "--gen", "formula:n=10,k=2,r=3,s=4", "--seed", "2"]);
    assert_eq!(r["result"]["error"]["error"], 0.0);
    assert_eq!(r["result"]["queries"], 1024);
}

#[test]
fn tester_and_properize() {
    let r = report(&[
        "test-submodular",
        "--gen",
        "cut:n=4,edges=0-1;1-2;2-3",
        "--epsilon",
        "0.1875",
    ]);
    assert_eq!(r["result"]["outcome"]["accept"], true);
    let r = report(&["properize", "--gen", "zoo:n=4", "--seed", "1"]);
    assert_eq!(r["result"]["target_distance"], 0.0);
}

#[test]
fn dry_run_validates_without_computing() {
    let r = report(&["learn", "--gen", "zoo:n=6", "--dry-run"]);
    assert_eq!(r["result"]["dry_run"], true);
    for sub in ["check", "table", "decompose", "wht", "properize", "test-submodular"] {
        let r = report(&[sub, "--gen", "zoo:n=4", "--dry-run"]);
        assert_eq!(r["result"]["valid"], true, "{sub}");
    }
    let r = report(&["switchlab", "--k", "2", "--r", "1", "--p", "0.1", "--dry-run"]);
    assert_eq!(r["result"]["valid"], true);
    let out = pbdnf(&["learn", "--gen", "zoo:n=6", "--backend", "sampled", "--dry-run"]);
    assert!(!out.status.success());
}

#[test]
fn errors_are_json() {
    let cases: [(&[&str], &str); 4] = [
        (&["learn", "--gen", "zoo:n=5", "--agnostic"], "agnostic_unsupported"),
        (&["check", "--gen", "bogus:n=2"], "invalid_spec"),
        (&["test-submodular", "--gen", "zoo:n=5"], "class_too_large"),
        (&["check", "--frobnicate"], "invalid_spec"),
    ];
    for (args, kind) in cases {
        let out = pbdnf(args);
        assert!(!out.status.success());
        let err: Value = serde_json::from_slice(&out.stderr).expect("stderr is JSON");
        assert_eq!(err["error"]["kind"], kind, "{args:?}");
        assert!(err["error"]["message"].is_string());
    }
}

#[test]
fn out_flag_writes_report() {
    let path = std::env::temp_dir().join(format!("pbdnf-out-{}.json", std::process::id()));
    let out = pbdnf(&[
        "eval",
        "--input",
        &k3(),
        "--point",
        "110",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(r["result"]["value"], 2);
}
