use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn latwave(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latwave")).arg("--out").arg(dir).args(args).env_remove("LATWAVE_SEED").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn newton_of_single_monomial() {
    let dir = tempfile::tempdir().unwrap();
    let o = latwave(dir.path(), &["newton", "--monomials", "2,2"]);
    assert_eq!(o.status.code(), Some(0));
    let v = read_json(&dir.path().join("newton.json"));
    assert_eq!(v["distance"], "2");
    assert_eq!(v["principal_face"]["dim"], 0);
    assert_eq!(v["adapted"], "adapted");
}

#[test]
fn index_combine() {
    let dir = tempfile::tempdir().unwrap();
    let o = latwave(dir.path(), &["index-calc", "combine", "--alpha", "1/3,1/3,1/3", "--a", "-5/6,0", "--b", "-1,0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "-5/6,0");
}

#[test]
fn green_at_time_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = latwave(dir.path(), &["green", "--d", "2", "--t", "0", "--x", "3,4"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("green.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("d,m,t,x1,x2,value,errEst,N"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[5].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn green_prints_seventeen_digits() {
    let dir = tempfile::tempdir().unwrap();
    let o = latwave(dir.path(), &["green", "--d", "2", "--t", "1", "--x", "1,0"]);
    let out = stdout(&o);
    let value = out.lines().nth(1).unwrap().split(',').nth(5).unwrap();
    let mantissa = value.split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17);
    assert!((value.parse::<f64>().unwrap() - 0.11027476324792787).abs() < 1e-14);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(latwave(dir.path(), &["green", "--d", "2", "--t", "1", "--x", "1"]).status.code(), Some(2));
    assert_eq!(latwave(dir.path(), &["green", "--d", "3", "--t", "1e6", "--x", "0,0,0"]).status.code(), Some(3));
    assert_eq!(latwave(dir.path(), &["newton", "--monomials", "2,x"]).status.code(), Some(2));
    assert_eq!(latwave(dir.path(), &["strichartz", "--q", "2", "--r", "2"]).status.code(), Some(2));
    assert_eq!(latwave(dir.path(), &["no-such-command"]).status.code(), Some(2));
    assert_eq!(latwave(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn manifest_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let o = latwave(dir.path(), &["oscint", "--phase", "cusp", "--t", "10,100"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let m = read_json(&dir.path().join("oscint.manifest.json"));
    assert_eq!(m["subcommand"], "oscint");
    assert_eq!(m["params"]["phase"], "cusp");
    let outputs = m["outputs"].as_array().unwrap();
    assert!(outputs.iter().any(|o| o["path"] == "osc.csv" && o["sha256"].as_str().unwrap().len() == 64));

    let again = tempfile::tempdir().unwrap();
    let r = latwave(again.path(), &["--replay", dir.path().join("oscint.manifest.json").to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    assert_eq!(std::fs::read(dir.path().join("osc.csv")).unwrap(), std::fs::read(again.path().join("osc.csv")).unwrap());
}

#[test]
fn replay_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    latwave(dir.path(), &["newton", "--monomials", "2,0;0,3"]);
    let path = dir.path().join("newton.manifest.json");
    let mut m = read_json(&path);
    m["outputs"][0]["sha256"] = Value::String("0".repeat(64));
    std::fs::write(&path, serde_json::to_string(&m).unwrap()).unwrap();
    let again = tempfile::tempdir().unwrap();
    assert_eq!(latwave(again.path(), &["--replay", path.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn config_file_supplies_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# green run\nd = 2\nt = 5,6\nx = 0,0\n").unwrap();
    let o = latwave(dir.path(), &["green", "--config", cfg.to_str().unwrap(), "--t", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 2, "command-line --t wins: {out}");
    assert!(out.lines().nth(1).unwrap().starts_with("2,0.0000000000000000e0,7.0000000000000000e0,0,0,"));
}

#[test]
fn seed_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_latwave"))
        .args(["--out", dir.path().to_str().unwrap(), "strichartz", "--samples", "1", "--t-end", "1", "--seed", "3"])
        .env("LATWAVE_SEED", "11")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let m = read_json(&dir.path().join("strichartz.manifest.json"));
    assert_eq!(m["seed"], 11);
    assert_eq!(m["params"]["seed"], 11);
}

#[test]
fn quartic_and_adapted() {
    let dir = tempfile::tempdir().unwrap();
    let o = latwave(dir.path(), &["adapted", "--expr", "z1^3*z2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["verdict"], "adapted");
    assert_eq!(v["distance"], "3");
    let o = latwave(dir.path(), &["quartic", "--coeffs", "1,0,0,0,0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("quartic.json").exists());
}

#[test]
fn nls_writes_norms() {
    let dir = tempfile::tempdir().unwrap();
    let o = latwave(dir.path(), &["nls", "--d", "2", "--l", "16", "--t-end", "1", "--steps", "20", "--layout", "full"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("norms.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,l2,l4,linf,energy"));
    let v = read_json(&dir.path().join("nls.json"));
    assert_eq!(v["L"], 16);
    assert!(v["dt"].as_f64().unwrap() > 0.0);
}

#[test]
fn sigma_scan_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = latwave(dir.path(), &["sigma-scan", "--resolution", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sigma.csv")).unwrap();
    assert!(csv.starts_with("k,xi1,xi2,xi3,xi4,xi5,v1,v2,v3,v4,v5,|v|,min|eig|\n"));
    assert!(read_json(&dir.path().join("sigma.json"))["max_speed"].as_f64().unwrap() < 1.0);
}
