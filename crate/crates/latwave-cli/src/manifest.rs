//! Run manifests, `key = value` config files and argv reconstruction.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub params: Map<String, Value>,
    pub seed: Option<u64>,
    pub version: String,
    pub threads: usize,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<OutputDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Arguments that reproduce `params` for `subcommand`. Positional parameters
/// are listed in `positional` and emitted first, in order.
pub fn params_to_argv(subcommand: &str, params: &Map<String, Value>, positional: &[&str]) -> Vec<String> {
    let mut argv = vec![subcommand.to_string()];
    for key in positional {
        if let Some(v) = params.get(*key) {
            argv.push(scalar(v));
        }
    }
    for (k, v) in params {
        if positional.contains(&k.as_str()) {
            continue;
        }
        let flag = format!("--{}", k.replace('_', "-"));
        match v {
            Value::Null | Value::Bool(false) => {}
            Value::Bool(true) => argv.push(flag),
            Value::Array(items) if items.is_empty() => {}
            Value::Array(items) => {
                argv.push(flag);
                argv.push(items.iter().map(scalar).collect::<Vec<_>>().join(","));
            }
            other => {
                argv.push(flag);
                argv.push(scalar(other));
            }
        }
    }
    argv
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("config line {}: expected `key = value`", no + 1))?;
        let k = k.trim().replace('_', "-");
        if k.is_empty() {
            return Err(format!("config line {}: empty key", no + 1));
        }
        out.push((k, v.trim().trim_matches('"').to_string()));
    }
    Ok(out)
}

/// Config entries as flags; `true`/`false` values toggle switches.
pub fn config_to_argv(entries: &[(String, String)]) -> Vec<String> {
    let mut argv = Vec::new();
    for (k, v) in entries {
        match v.as_str() {
            "true" => argv.push(format!("--{k}")),
            "false" => {}
            _ => {
                argv.push(format!("--{k}"));
                argv.push(v.clone());
            }
        }
    }
    argv
}

pub fn read_manifest(path: &Path) -> Result<RunManifest, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("malformed manifest {}: {e}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn argv_from_params() {
        let p = json!({"alpha": "1/3,1/3", "flag": true, "off": false, "none": null, "t": [1.5, 2.0], "op": "combine"});
        let argv = params_to_argv("index-calc", p.as_object().unwrap(), &["op"]);
        assert_eq!(argv, ["index-calc", "combine", "--alpha", "1/3,1/3", "--flag", "--t", "1.5,2.0"]);
    }

    #[test]
    fn config_lines() {
        let c = parse_config("# comment\nt_end = 8\nlinear = true\n\nseed=3 # trailing\n").unwrap();
        assert_eq!(c, vec![("t-end".into(), "8".into()), ("linear".into(), "true".into()), ("seed".into(), "3".into())]);
        assert_eq!(config_to_argv(&c), ["--t-end", "8", "--linear", "--seed", "3"]);
        assert!(parse_config("novalue").is_err());
    }

    #[test]
    fn digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
