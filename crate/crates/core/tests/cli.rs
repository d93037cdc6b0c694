use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn rsrepair(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rsrepair")).args(args).output().expect("spawn rsrepair")
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

fn build(dir: &TempDir, name: &str, args: &[&str]) -> String {
    let out = dir.path().join(name);
    let mut all = vec!["build"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["--out", path_str(&out)]);
    let o = rsrepair(&all);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    path_str(&out).to_string()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn build_universal_spec() {
    let dir = TempDir::new().unwrap();
    let spec = build(&dir, "s.json", &["--mode", "universal", "--r", "2", "--n", "3", "--k", "1"]);
    let v = read_json(Path::new(&spec));
    assert_eq!(v["primes"], serde_json::json!([3, 5, 7]));
    assert_eq!(v["sub_packetization"], 210);
    assert_eq!(v["beta_degree"], 2);
}

#[test]
fn build_two_erasure_spec() {
    let dir = TempDir::new().unwrap();
    let spec = build(&dir, "s.json", &["--mode", "two-erasure", "--d", "2", "--n", "4", "--k", "2"]);
    let v = read_json(Path::new(&spec));
    assert_eq!(v["primes"], serde_json::json!([3, 5, 7, 11]));
    assert_eq!(v["sub_packetization"], 2310);
}

#[test]
fn build_rejects_k_equal_n() {
    let o = rsrepair(&["build", "--mode", "universal", "--r", "1", "--n", "3", "--k", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("k < n required"));
}

#[test]
fn build_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = build(&dir, "a.json", &["--mode", "universal", "--r", "2", "--n", "4", "--k", "2"]);
    let b = build(&dir, "b.json", &["--mode", "universal", "--r", "2", "--n", "4", "--k", "2"]);
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
}

#[test]
fn repair_single_erasure() {
    let dir = TempDir::new().unwrap();
    let spec = build(&dir, "s.json", &["--mode", "universal", "--r", "2", "--n", "3", "--k", "1"]);
    let out = dir.path().join("t.json");
    let o = rsrepair(&[
        "repair",
        "--spec",
        &spec,
        "--failed",
        "2",
        "--helpers",
        "1,3",
        "--trials",
        "25",
        "--seed",
        "7",
        "--out",
        path_str(&out),
    ]);
    assert!(o.status.success());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("exact=25/25 total=210 cutset=210"), "{stdout}");
    let t = read_json(&out);
    assert_eq!(t["pass"], true);
    assert_eq!(t["runs"][0]["planned"]["total"], 210);
    assert_eq!(t["runs"][0]["trials"].as_array().unwrap().len(), 25);
    let hex = t["runs"][0]["trials"][0]["payloads"][0]["hex"].as_str().unwrap();
    assert_eq!(hex.len(), 2 * 105usize.div_ceil(8));
}

#[test]
fn repair_two_erasures() {
    let dir = TempDir::new().unwrap();
    let spec = build(&dir, "s.json", &["--mode", "universal", "--r", "2", "--n", "4", "--k", "2"]);
    let out = dir.path().join("t.json");
    let o = rsrepair(&[
        "repair",
        "--spec",
        &spec,
        "--failed",
        "1,2",
        "--helpers",
        "3,4",
        "--trials",
        "2",
        "--out",
        path_str(&out),
    ]);
    assert!(o.status.success());
    let t = read_json(&out);
    assert_eq!(t["runs"][0]["planned"]["total"], 4620);
    assert_eq!(t["runs"][0]["trials"][1]["metered"], 4620);
}

#[test]
fn repair_all_subsets() {
    let dir = TempDir::new().unwrap();
    let spec = build(&dir, "s.json", &["--mode", "universal", "--r", "2", "--n", "3", "--k", "1"]);
    let o = rsrepair(&["repair", "--spec", &spec, "--failed", "all", "--h", "1", "--helpers", "all", "--d", "1"]);
    assert!(o.status.success());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("failed=")).count(), 6);
}

#[test]
fn repair_rejects_failed_helper() {
    let dir = TempDir::new().unwrap();
    let spec = build(&dir, "s.json", &["--mode", "universal", "--r", "2", "--n", "3", "--k", "1"]);
    let o = rsrepair(&["repair", "--spec", &spec, "--failed", "1", "--helpers", "1,3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn repair_transcripts_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let spec = build(&dir, "s.json", &["--mode", "universal", "--r", "2", "--n", "3", "--k", "1"]);
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let o = rsrepair(&[
            "repair",
            "--spec",
            &spec,
            "--failed",
            "3",
            "--trials",
            "4",
            "--seed",
            seed,
            "--out",
            path_str(&out),
        ]);
        assert!(o.status.success());
        fs::read(out).unwrap()
    };
    assert_eq!(run("a.json", "5"), run("b.json", "5"));
    assert_ne!(run("a.json", "5"), run("c.json", "6"));
}

#[test]
fn table_rows_and_ratios() {
    let dir = TempDir::new().unwrap();
    let spec = build(&dir, "s.json", &["--mode", "universal", "--r", "2", "--n", "4", "--k", "2"]);
    let o = rsrepair(&["table", "--spec", &spec]);
    assert!(o.status.success());
    let csv = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "h,d,per_helper,total,cutset,ratio,naive,whole_helpers");
    assert_eq!(rows[1], "1,2,2310,4620,4620,1,4620,4620");
    assert_eq!(rows[2], "1,3,1155,3465,3465,1,4620,6930");
    assert_eq!(rows[3], "2,2,2310,4620,4620,1,4620,4620");
}

#[test]
fn table_small_spec() {
    let dir = TempDir::new().unwrap();
    let spec = build(&dir, "s.json", &["--mode", "universal", "--r", "2", "--n", "3", "--k", "1"]);
    let csv = String::from_utf8(rsrepair(&["table", "--spec", &spec]).stdout).unwrap();
    let hd: Vec<String> = csv.lines().skip(1).map(|l| l.split(',').take(2).collect::<Vec<_>>().join(",")).collect();
    assert_eq!(hd, ["1,1", "1,2", "2,1"]);
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(5) == Some("1")));
}

#[test]
fn verify_all_passes() {
    let dir = TempDir::new().unwrap();
    let spec = build(&dir, "s.json", &["--mode", "universal", "--r", "2", "--n", "3", "--k", "1"]);
    let out = dir.path().join("r.json");
    let o = rsrepair(&["verify", "--spec", &spec, "--which", "all", "--trials", "10", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let r = read_json(&out);
    assert_eq!(r["pass"], true);
    assert!(r["reports"].as_array().unwrap().len() > 10);
}

#[test]
fn verify_ints_values() {
    let dir = TempDir::new().unwrap();
    let spec = build(&dir, "s.json", &["--mode", "two-erasure", "--d", "2", "--n", "4", "--k", "1"]);
    let out = dir.path().join("r.json");
    let o = rsrepair(&["verify", "--spec", &spec, "--which", "ints", "--out", path_str(&out)]);
    assert!(o.status.success());
    let r = read_json(&out);
    let dims: Vec<u64> = r["reports"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|x| x["name"] == "ints.intersection")
        .map(|x| x["computed"].as_u64().unwrap())
        .collect();
    assert_eq!(dims, [91, 133, 217, 247, 403, 589]);
}

#[test]
fn verify_unknown_check_is_usage_error() {
    let dir = TempDir::new().unwrap();
    let spec = build(&dir, "s.json", &["--mode", "universal", "--r", "2", "--n", "3", "--k", "1"]);
    let o = rsrepair(&["verify", "--spec", &spec, "--which", "bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("invalid value"));
}

#[test]
fn tampered_spec_is_rejected() {
    let dir = TempDir::new().unwrap();
    let spec = build(&dir, "s.json", &["--mode", "universal", "--r", "2", "--n", "3", "--k", "1"]);
    let text = fs::read_to_string(&spec).unwrap().replacen("\"beta_degree\": 2", "\"beta_degree\": 3", 1);
    fs::write(&spec, text).unwrap();
    let o = rsrepair(&["table", "--spec", &spec]);
    assert_eq!(o.status.code(), Some(2));
}
