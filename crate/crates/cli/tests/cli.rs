use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn depeg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_depeg")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Value {
    let out = depeg(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

const SMALL: &str = r#"{
  "cit": {"block_size": 2048, "hash_size": 32, "batch": 4, "layers": 2, "base_size": 32, "rate": "0.5"},
  "oracle": {"num_nodes": 16, "beta": "0.25", "gamma": "0.5", "p_th": 0.001},
  "mu": 4,
  "seed": 3,
  "construction": {"algorithm": "de-peg"},
  "simulation": {"rounds": 2, "adversary": {"kind": "worst_case", "budget": 100}, "transcript": true}
}"#;

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("config.json");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn pipeline(config: &str, out: &Path) -> Vec<Value> {
    let out = out.to_str().unwrap();
    ["construct", "analyze", "plan", "cost", "simulate"]
        .iter()
        .map(|c| ok(&[c, "--config", config, "--out", out]))
        .collect()
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.push((p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn pipeline_runs_and_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), SMALL);
    let a = pipeline(&config, &tmp.path().join("a"));
    let b = pipeline(&config, &tmp.path().join("b"));
    assert_eq!(a, b);
    let sim = &a[4];
    assert_eq!(sim["rounds"], 2);
    assert_eq!(sim["committed_but_unavailable"], 0);
    let ta = tree(&tmp.path().join("a"));
    assert_eq!(ta, tree(&tmp.path().join("b")));
    let names: Vec<&str> = ta.iter().map(|(n, _)| n.as_str()).collect();
    for want in ["analysis.json", "codes/layer1.alist", "cost.csv", "plan.json", "reports/layer2.txt", "transcript.jsonl"] {
        assert!(names.contains(&want), "{want} missing from {names:?}");
    }
}

#[test]
fn every_output_names_config_hash_and_version() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), SMALL);
    pipeline(&config, &tmp.path().join("o"));
    let plan: Value = serde_json::from_slice(&fs::read(tmp.path().join("o/plan.json")).unwrap()).unwrap();
    let hash = plan["provenance"]["config_hash"].as_str().unwrap().to_string();
    assert_eq!(hash.len(), 64);
    for (name, bytes) in tree(&tmp.path().join("o")) {
        let text = String::from_utf8(bytes).unwrap();
        assert!(text.contains(&hash), "{name} lacks the config hash");
        assert!(text.contains(env!("CARGO_PKG_VERSION")), "{name} lacks the version");
    }
    // another seed is another config
    let out = tmp.path().join("p");
    ok(&["construct", "--config", &config, "--out", out.to_str().unwrap(), "--seed", "4"]);
    let meta = fs::read_to_string(out.join("construction.json")).unwrap();
    assert!(!meta.contains(&hash));
}

#[test]
fn zero_cover_and_zero_k_cost_only_the_root() {
    let tmp = tempfile::tempdir().unwrap();
    let text = SMALL.replace("\"mu\": 4,", "\"mu\": 4, \"k\": 0, \"cover_sizes\": [0, 0],");
    let config = write_config(tmp.path(), &text);
    let out = tmp.path().join("o");
    ok(&["cost", "--config", &config, "--out", out.to_str().unwrap()]);
    let mut r = csv::Reader::from_path(out.join("cost.csv")).unwrap();
    let h = r.headers().unwrap().clone();
    let row = r.records().next().unwrap().unwrap();
    let col = |name: &str| row[h.iter().position(|x| x == name).unwrap()].to_string();
    // N t y with t = 16 root hashes
    assert_eq!(col("C_root"), format!("{:.6}", (16.0 * 16.0 * 32.0) / 1e9));
    assert_eq!(col("C_T"), col("C_root"));
    assert_eq!(col("C_s"), "0.000000");
    assert_eq!(col("C_v"), "0.000000");
}

#[test]
fn cost_reads_cover_sizes_from_the_analysis() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("o");
    let o = out.to_str().unwrap();
    ok(&["construct", "--config", &config, "--out", o]);
    let a = ok(&["analyze", "--config", &config, "--out", o]);
    ok(&["cost", "--config", &config, "--out", o]);
    let sizes: Vec<String> = a["layers"].as_array().unwrap().iter().map(|l| l["cover_size"].to_string()).collect();
    let csv = fs::read_to_string(out.join("cost.csv")).unwrap();
    assert!(csv.contains(&format!("\"({})\"", sizes.join(","))), "{csv}");
}

#[test]
fn bad_config_gives_error_record() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), &SMALL.replace("\"mu\": 4,", "\"mu\": 40,"));
    let out = depeg(&["construct", "--config", &config, "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "config");

    let config = write_config(tmp.path(), &SMALL.replace("\"beta\": \"0.25\"", "\"beta\": 0.25"));
    let out = depeg(&["construct", "--config", &config, "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let config = write_config(tmp.path(), SMALL);
    let out = depeg(&["plan", "--config", &config, "--out", tmp.path().join("nothing").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "missing_input");
}

#[test]
fn monte_carlo_validity_mode() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("o");
    let o = out.to_str().unwrap();
    ok(&["construct", "--config", &config, "--out", o]);
    ok(&["analyze", "--config", &config, "--out", o]);
    ok(&["--threads", "2", "plan", "--config", &config, "--out", o, "--mode", "monte-carlo", "--trials", "5000"]);
    let plan: Value = serde_json::from_slice(&fs::read(out.join("plan.json")).unwrap()).unwrap();
    let v = &plan["result"]["validity"][0];
    assert_eq!(v["verdict"], "estimate");
    assert_eq!(v["trials"], 5000);
}

#[test]
fn reproduce_table1_and_table2() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tmp.path().to_str().unwrap();
    let v = ok(&["reproduce", "table1", "--out", o]);
    // exact drawing count gives 59 at mu = 20
    assert_eq!(v["k_star"], serde_json::json!([67, 64, 61, 59, 56]));
    let v = ok(&["reproduce", "table2", "--out", o, "--trials", "10000"]);
    assert_eq!(v["N"], serde_json::json!([138, 185, 232]));
    let t2 = fs::read_to_string(tmp.path().join("table2.csv")).unwrap();
    assert!(t2.starts_with("p_th,N,k_min,C_T_full,C_T_distinct,k_star_baseline,C_T_baseline,k_star,C_T_PEG,C_T_DE_PEG"));
}

#[test]
fn reproduce_fig2_small_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tmp.path().to_str().unwrap();
    let v = ok(&["reproduce", "fig2", "--out", o, "--nodes", "1000,2000", "--betas", "0.45,0.49"]);
    assert_eq!(v["rows"], 16);
    let text = fs::read_to_string(tmp.path().join("fig2.csv")).unwrap();
    assert_eq!(text.lines().count(), 17);
}
