//! `--config FILE`: `key = value` lines that preload flag defaults.
//!
//! Keys are long flag names (`fail-ratio` or `fail_ratio`). A key is applied
//! only when the chosen subcommand accepts it and the flag is not already on
//! the command line, so one file can serve several subcommands.

use std::ffi::OsString;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::Command;

pub fn parse_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("{}:{}: expected `key = value`", path.display(), no + 1);
        };
        let key = k.trim().replace('_', "-");
        let value = v.trim().trim_matches('"').to_string();
        if key.is_empty() {
            bail!("{}:{}: empty key", path.display(), no + 1);
        }
        out.push((key, value));
    }
    Ok(out)
}

/// Path given to `--config`, if any.
fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

/// Appends `--key value` for every config entry the subcommand accepts and
/// the command line does not set.
pub fn expand(args: Vec<OsString>, cmd: &Command) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let entries = parse_file(Path::new(&path))?;
    let Some(sub) = args
        .iter()
        .skip(1)
        .find_map(|a| cmd.find_subcommand(a.to_string_lossy().as_ref()))
    else {
        return Ok(args);
    };
    let known = |c: &Command, key: &str| c.get_arguments().any(|a| a.get_long() == Some(key));
    let present = |key: &str| {
        args.iter().any(|a| {
            let s = a.to_string_lossy();
            s == format!("--{key}") || s.starts_with(&format!("--{key}="))
        })
    };
    let mut out = args.clone();
    for (key, value) in entries {
        if key == "config" {
            bail!("config files cannot include other config files");
        }
        if !cmd.get_subcommands().any(|c| known(c, &key)) && !known(cmd, &key) {
            bail!("unknown config key `{key}`");
        }
        if known(sub, &key) && !present(&key) {
            log::debug!("config: --{key} {value}");
            out.push(format!("--{key}").into());
            out.push(value.into());
        }
    }
    Ok(out)
}
