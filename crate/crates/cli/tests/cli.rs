use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn window() -> (String, String) {
    let w: Value = serde_json::from_str(&std::fs::read_to_string(fixtures().join("golden/window.json")).unwrap()).unwrap();
    (w["start_ts"].to_string(), w["end_ts"].to_string())
}

fn golden(name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(fixtures().join("golden").join(name)).unwrap()).unwrap()
}

struct Env {
    dir: tempfile::TempDir,
}

impl Env {
    fn new() -> Self {
        Env {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn ccx(&self, args: &[&str]) -> Output {
        let storage = format!("sqlite:{}", self.dir.path().join("ccx.sqlite").display());
        Command::new(env!("CARGO_BIN_EXE_ccx"))
            .arg("--config-dir")
            .arg(fixtures().join("config"))
            .args(["--storage", &storage])
            .args(args)
            .output()
            .unwrap()
    }

    fn extract(&self, bridge: &str) -> Output {
        let (s, e) = window();
        let replay = fixtures().join("replay");
        self.ccx(&[
            "extract",
            "--bridge",
            bridge,
            "--start_ts",
            &s,
            "--end_ts",
            &e,
            "--replay",
            replay.to_str().unwrap(),
        ])
    }
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const BRIDGES: [&str; 5] = ["busx", "flatfee", "intentx", "msgbridge", "taxi"];

#[test]
fn extract_replay_matches_golden_counts() {
    let env = Env::new();
    let (s, e) = window();
    let replay = fixtures().join("replay");
    let out = env.ccx(&[
        "--json",
        "extract",
        "--bridge",
        "intentx",
        "--start_ts",
        &s,
        "--end_ts",
        &e,
        "--blockchains",
        "chainA",
        "chainB",
        "--replay",
        replay.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let want = golden("extract.json");
    let chains = report["chains"].as_array().unwrap();
    assert_eq!(chains.len(), 2);
    for c in chains {
        let name = if c["chain_id"] == 1 { "chainA" } else { "chainB" };
        let w = &want["intentx"][name];
        assert_eq!(c["events"], w["events"], "{name}");
        assert_eq!(c["removed_skipped"], w["removed_skipped"], "{name}");
        assert_eq!(c["start_block"], w["start_block"], "{name}");
        assert_eq!(c["end_block"], w["end_block"], "{name}");
    }
    assert!(report["failures"].as_array().unwrap().is_empty());
}

#[test]
fn inverted_window_is_a_usage_error() {
    let env = Env::new();
    let out = env.ccx(&["extract", "--bridge", "intentx", "--start_ts", "200", "--end_ts", "100"]);
    assert_eq!(code(&out), 64);
    assert!(stderr(&out).contains("--start_ts"), "{}", stderr(&out));
}

#[test]
fn unknown_blockchain_is_a_usage_error() {
    let env = Env::new();
    let (s, e) = window();
    let out = env.ccx(&["extract", "--bridge", "intentx", "--start_ts", &s, "--end_ts", &e, "--blockchains", "nowhere"]);
    assert_eq!(code(&out), 64, "{}", stderr(&out));
}

#[test]
fn unknown_bridge_lists_available_bridges() {
    let env = Env::new();
    let out = env.ccx(&["generate", "--bridge", "nope"]);
    assert_eq!(code(&out), 1);
    let err = stderr(&out);
    for b in BRIDGES {
        assert!(err.contains(b), "{err}");
    }
}

#[test]
fn bad_flags_are_usage_errors() {
    let env = Env::new();
    assert_eq!(code(&env.ccx(&["extract", "--bridge"])), 64);
    assert_eq!(code(&env.ccx(&["frobnicate"])), 64);
    assert_eq!(code(&env.ccx(&["report", "--bridge", "taxi", "--group-by", "planet", "--prices", "x", "--out", "y"])), 64);
}

#[test]
fn generate_totals_and_idempotence() {
    let env = Env::new();
    let want = golden("generate.json");
    let mut total = 0;
    for b in BRIDGES {
        assert_eq!(code(&env.extract(b)), 0);
        let mut last = None;
        for _ in 0..2 {
            let out = env.ccx(&["--json", "generate", "--bridge", b]);
            assert_eq!(code(&out), 0, "{}", stderr(&out));
            let r: Value = serde_json::from_str(&stdout(&out)).unwrap();
            assert_eq!(r["cctx_count"], want[b]["cctx_count"], "{b}");
            if let Some(prev) = &last {
                assert_eq!(prev, &r, "{b} is not idempotent");
            }
            last = Some(r);
        }
        total += last.unwrap()["cctx_count"].as_u64().unwrap();
    }
    assert_eq!(total, 12);
}

#[test]
fn generate_on_empty_store_yields_nothing() {
    let env = Env::new();
    let out = env.ccx(&["generate", "--bridge", "msgbridge"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("cctxs            0"), "{}", stdout(&out));
}

#[test]
fn report_files_match_goldens() {
    let env = Env::new();
    let prices = fixtures().join("prices.csv");
    for b in BRIDGES {
        assert_eq!(code(&env.extract(b)), 0);
        assert_eq!(code(&env.ccx(&["generate", "--bridge", b])), 0);
        let out_dir = env.dir.path().join("out").join(b);
        for g in ["pair", "layer"] {
            let out = env.ccx(&[
                "report",
                "--bridge",
                b,
                "--group-by",
                g,
                "--prices",
                prices.to_str().unwrap(),
                "--out",
                out_dir.to_str().unwrap(),
            ]);
            assert_eq!(code(&out), 0, "{}", stderr(&out));
        }
        let golden_dir = fixtures().join("golden/report").join(b);
        let mut names: Vec<_> = std::fs::read_dir(&golden_dir).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        let mut got: Vec<_> = std::fs::read_dir(&out_dir).unwrap().map(|e| e.unwrap().file_name()).collect();
        got.sort();
        assert_eq!(names, got, "{b}");
        for n in names {
            assert_eq!(
                std::fs::read(out_dir.join(&n)).unwrap(),
                std::fs::read(golden_dir.join(&n)).unwrap(),
                "{b}/{}",
                n.to_string_lossy()
            );
        }
        let layer: Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary_layer.json")).unwrap()).unwrap();
        assert!(layer["summaries"].as_array().unwrap().len() <= 4);
    }
}

#[test]
fn missing_price_file_is_a_usage_error() {
    let env = Env::new();
    let out = env.ccx(&["report", "--bridge", "taxi", "--prices", "/no/such/prices.csv", "--out", "x"]);
    assert_eq!(code(&out), 64);
}

#[test]
fn export_writes_events_and_cctxs() {
    let env = Env::new();
    assert_eq!(code(&env.extract("flatfee")), 0);
    assert_eq!(code(&env.ccx(&["generate", "--bridge", "flatfee"])), 0);
    let out_dir = env.dir.path().join("export");
    let out = env.ccx(&["export", "--bridge", "flatfee", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let cctxs = std::fs::read_to_string(out_dir.join("flatfee_cctxs.csv")).unwrap();
    assert_eq!(cctxs.lines().count(), 3);
}
