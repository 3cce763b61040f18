//! `key = value` config files and the reproducibility header.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Parses `key = value` lines. Blank lines and lines starting with `#` are
/// skipped; keys may use `_` or `-`.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "config line {}: expected `key = value`, got {line:?}",
                i + 1
            )));
        };
        let key = key.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(Error::Config(format!(
                "config line {}: invalid key {key:?}",
                i + 1
            )));
        }
        let value = value.trim().trim_matches('"').to_string();
        pairs.push((key, value));
    }
    Ok(pairs)
}

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--" {
            return None;
        }
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

/// Splices the flags from a `--config` file directly after the subcommand
/// so that later command-line flags win.
pub fn expand_config_args(args: Vec<OsString>) -> Result<Vec<OsString>> {
    // first token that is not a flag names the subcommand
    let Some(sub) = args
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
        .map(|p| p + 2)
    else {
        return Ok(args);
    };
    let Some(path) = config_path(&args[sub..]) else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path).map_err(|source| Error::Io {
        path: path.clone().into(),
        source,
    })?;
    let mut injected = Vec::new();
    for (key, value) in parse_config(&text)? {
        injected.push(OsString::from(format!("--{key}")));
        injected.push(OsString::from(value));
    }
    let mut out = Vec::with_capacity(args.len() + injected.len());
    out.extend_from_slice(&args[..sub]);
    out.extend(injected);
    out.extend_from_slice(&args[sub..]);
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct DatasetFingerprint {
    pub path: String,
    pub sha256: String,
    pub n: usize,
    pub d: usize,
    pub classes: usize,
}

impl DatasetFingerprint {
    pub fn of_file(path: &Path, ds: &Dataset) -> Result<Self> {
        let bytes = fs::read(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(Self {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
            n: ds.n(),
            d: ds.d(),
            classes: ds.class_count(),
        })
    }
}

/// Written at the top of every output file.
#[derive(Debug, Clone, Serialize)]
pub struct RunHeader {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: serde_json::Value,
    pub config: serde_json::Value,
    pub dataset: DatasetFingerprint,
}

impl RunHeader {
    pub fn new<C: Serialize>(
        command: &'static str,
        seed: serde_json::Value,
        config: &C,
        dataset: DatasetFingerprint,
    ) -> Result<Self> {
        Ok(Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            config: serde_json::to_value(config)?,
            dataset,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn parses_pairs_and_skips_comments() {
        let pairs = parse_config("# comment\npurity = 0.85\n\nlabel_col = class\n").unwrap();
        assert_eq!(
            pairs,
            vec![
                ("purity".to_string(), "0.85".to_string()),
                ("label-col".to_string(), "class".to_string())
            ]
        );
    }

    #[test]
    fn rejects_lines_without_equals() {
        assert!(matches!(parse_config("purity 0.8"), Err(Error::Config(_))));
    }

    #[test]
    fn file_flags_go_before_command_line_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        fs::write(&path, "purity = 0.7\nseed = 3\n").unwrap();
        let args = os(&["gbfrs", "generate-balls", "--purity", "0.9", "--config"]);
        let mut args = args;
        args.push(path.clone().into());
        let expanded = expand_config_args(args).unwrap();
        let strs: Vec<String> = expanded
            .iter()
            .map(|s| s.to_string_lossy().into_owned())
            .collect();
        assert_eq!(
            &strs[..6],
            &["gbfrs", "generate-balls", "--purity", "0.7", "--seed", "3"]
        );
        assert_eq!(&strs[6..8], &["--purity", "0.9"]);
    }

    #[test]
    fn global_flags_before_the_subcommand_stay_put() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        fs::write(&path, "seed = 3\n").unwrap();
        let mut args = os(&["gbfrs", "-v", "check", "--config"]);
        args.push(path.into());
        let expanded = expand_config_args(args).unwrap();
        assert_eq!(
            &expanded[..5],
            &os(&["gbfrs", "-v", "check", "--seed", "3"])[..]
        );
    }

    #[test]
    fn no_config_leaves_args_alone() {
        let args = os(&["gbfrs", "select", "--input", "x.csv"]);
        assert_eq!(expand_config_args(args.clone()).unwrap(), args);
    }
}
