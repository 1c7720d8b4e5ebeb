use std::collections::BTreeMap;

use crate::error::{usage, Result};

/// Keys accepted in a config file; list-valued keys take comma-separated
/// values.
pub const KEYS: &[&str] = &[
    "source",
    "p",
    "sigma2",
    "rate",
    "n",
    "eps",
    "ref-rate",
    "alpha",
    "unbounded",
    "legacy-eps",
    "delta",
    "jobs",
    "out",
];

/// Parses `key = value` lines. Blank lines and lines starting with `#` are
/// skipped; `_` in keys is read as `-`. Unknown and repeated keys are errors.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return usage(format!("config line {}: expected key = value", i + 1));
        };
        let key = k.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return usage(format!("config line {}: unknown key {key:?}", i + 1));
        }
        let value = v.trim();
        if value.is_empty() {
            return usage(format!("config line {}: empty value for {key}", i + 1));
        }
        if out.insert(key.clone(), value.to_string()).is_some() {
            return usage(format!("config line {}: {key} given twice", i + 1));
        }
    }
    Ok(out)
}

pub(crate) fn parse_f64(key: &str, v: &str) -> Result<f64> {
    match v.trim().parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => usage(format!("{key}: not a finite number: {v:?}")),
    }
}

pub(crate) fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|t| parse_f64(key, t)).collect()
}

pub(crate) fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => usage(format!("{key}: expected true or false, got {v:?}")),
    }
}
