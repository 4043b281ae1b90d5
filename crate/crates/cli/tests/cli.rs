use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn irslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_irslab"))
        .args(args)
        .env_remove("IRSLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stderr));
    })
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("irslab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn eval_exact_chain_value() {
    let out = irslab(&["eval", "--measure", "mu_F", "--word", "abAB"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"][0]["value"]["exact"], "1/2^1");
    assert!(r["instance"]["convention"]
        .as_str()
        .unwrap()
        .contains("g^-1 w g"));
}

#[test]
fn eval_outside_commutator_is_zero() {
    let r = report(&irslab(&["eval", "--measure", "mu_F", "--word", "a"]));
    assert_eq!(r["result"][0]["value"]["exact"], "0/2^0");
}

#[test]
fn eval_coinduced_enclosure() {
    let out = irslab(&[
        "eval",
        "--measure",
        "mu_G",
        "--word",
        "abAB",
        "--width",
        "1e-6",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let lo = r["result"][0]["approx"][0].as_f64().unwrap();
    let hi = r["result"][0]["approx"][1].as_f64().unwrap();
    assert!(lo <= 0.288_788_095 && 0.288_788_095 <= hi && hi - lo <= 1e-6);
    assert_eq!(r["config"]["width"], "1/2^20");
}

#[test]
fn eval_joint_event() {
    let r = report(&irslab(&[
        "eval",
        "--measure",
        "mu_F",
        "--word",
        "abAB",
        "--word",
        "aabABA",
        "--joint",
    ]));
    assert_eq!(r["result"].as_array().unwrap().len(), 1);
    assert_eq!(r["result"][0]["value"]["exact"], "1/2^1");
}

#[test]
fn parse_errors_exit_2() {
    for args in [
        vec!["eval", "--measure", "mu_F", "--word", "abc"],
        vec!["eval", "--measure", "mu_X", "--word", "abAB"],
        vec!["eval", "--measure", "mu_F"],
        vec![
            "eval",
            "--measure",
            "mu_F",
            "--word",
            "abAB",
            "--width",
            "-3",
        ],
        vec!["verify", "everything"],
        vec!["family", "--a", "3/4"],
        vec!["family", "--a", "1/3"],
        vec!["frobnicate"],
    ] {
        assert_eq!(irslab(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn width_not_reached_exits_3() {
    let args = [
        "eval",
        "--measure",
        "mu_G",
        "--word",
        "abAB",
        "--width",
        "1e-12",
        "--max-factors",
        "3",
    ];
    assert_eq!(irslab(&args).status.code(), Some(3));
    let mut wide = args.to_vec();
    wide.push("--allow-wide");
    let out = irslab(&wide);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["result"][0]["width_reached"], false);
}

#[test]
fn verify_suites_pass() {
    for args in [
        vec!["verify", "chain-limits", "--n", "10"],
        vec!["verify", "mixing", "--shift", "10"],
        vec!["verify", "faithful", "--max-len", "8"],
        vec!["verify", "closure"],
        vec!["verify", "combination", "--sample", "50"],
        vec!["verify", "invariance", "--pairs", "20"],
    ] {
        let out = irslab(&args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        assert_eq!(report(&out)["pass"], true);
    }
}

#[test]
fn failing_check_exits_1() {
    // at shift e the defect is p(1 - p), far above the 1e-6 bound
    let out = irslab(&["verify", "mixing", "--shift", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["pass"], false);
}

#[test]
fn sample_matches_exact_values() {
    let out = irslab(&["sample", "--n", "10000", "--word", "abAB", "--word", ""]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let rows = &r["result"]["statistics"]["rows"];
    assert_eq!(rows[0]["pass"], true);
    assert_eq!(rows[1]["empirical"], 1.0);
}

#[test]
fn sample_replays_byte_for_byte() {
    let (a, b) = (scratch("a.json"), scratch("b.json"));
    for path in [&a, &b] {
        let out = irslab(&[
            "sample",
            "--n",
            "100",
            "--word",
            "abAB",
            "--seed",
            "42",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn thread_cap_does_not_change_output() {
    let args = ["sample", "--n", "500", "--word", "abAB", "--word", "aabABA"];
    let free = irslab(&args);
    let capped = Command::new(env!("CARGO_BIN_EXE_irslab"))
        .args(args)
        .env("IRSLAB_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(free.stdout, capped.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_irslab"))
        .args(args)
        .env("IRSLAB_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn sample_writes_csv() {
    let path = scratch("matrix.csv");
    let out = irslab(&[
        "sample",
        "--n",
        "100",
        "--word",
        "",
        "--word",
        "a",
        "--csv",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_path(&path).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["seed", "e", "a"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 100);
    assert!(rows.iter().all(|r| &r[1] == "1" && &r[2] == "0"));
}

#[test]
fn family_table_increases() {
    let out = irslab(&["family"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["strictly_increasing"], true);
    assert_eq!(r["result"]["rows"].as_array().unwrap().len(), 5);
}

#[test]
fn config_file_with_flag_override() {
    let cfg = scratch("run.json");
    std::fs::write(
        &cfg,
        r#"{"measure": {"type": "geom_gamma"}, "words": ["abAB"], "width": "1/2^8"}"#,
    )
    .unwrap();
    let r = report(&irslab(&["eval", "--config", cfg.to_str().unwrap()]));
    assert_eq!(r["result"][0]["value"]["exact"], "1/2^1");
    assert_eq!(r["config"]["width"], "1/2^8");
    let r = report(&irslab(&[
        "eval",
        "--config",
        cfg.to_str().unwrap(),
        "--word",
        "aabABA",
    ]));
    assert_eq!(r["result"][0]["value"]["exact"], "3/2^2");

    std::fs::write(&cfg, r#"{"wdith": 1}"#).unwrap();
    assert_eq!(
        irslab(&["eval", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn help_mentions_every_flag() {
    let out = irslab(&["sample", "--help"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for flag in [
        "--measure",
        "--word",
        "--n",
        "--seed",
        "--tolerance-exp",
        "--out",
        "--config",
        "--csv",
    ] {
        assert!(text.contains(flag), "{flag}");
    }
}
