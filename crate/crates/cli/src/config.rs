//! `key = value` configuration files merged into the argument list.
//!
//! Each key names a long flag of the subcommand (`n-points = 5000` is
//! `--n-points 5000`; underscores are accepted for dashes). Boolean flags take
//! `true` or `false`. A key that also appears on the command line is dropped
//! from the file, so explicit flags always win.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
}

pub fn parse(text: &str) -> Result<Vec<Entry>, String> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected `key = value`", i + 1))?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(format!("line {}: invalid key `{}`", i + 1, key));
        }
        entries.push(Entry { key, value: value.trim().to_string() });
    }
    Ok(entries)
}

/// Expands `--config PATH` in `args` (program name first, subcommand second).
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
    let entries = parse(&text).map_err(|m| CliError::usage(m).at(&path))?;
    let given: Vec<String> = args
        .iter()
        .filter_map(|a| a.to_str())
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a).to_string())
        .collect();

    let mut injected = Vec::new();
    for Entry { key, value } in entries {
        if given.contains(&key) {
            continue;
        }
        match value.as_str() {
            "true" => injected.push(OsString::from(format!("--{key}"))),
            "false" => {}
            _ => {
                injected.push(OsString::from(format!("--{key}")));
                injected.extend(value.split_whitespace().map(OsString::from));
            }
        }
    }
    let split = args.len().min(2);
    let mut out: Vec<OsString> = args[..split].to_vec();
    out.extend(injected);
    out.extend(args[split..].iter().cloned());
    Ok(out)
}

fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut iter = args.iter().skip(1);
    while let Some(a) = iter.next() {
        let s = a.to_str()?;
        if s == "--config" {
            return iter.next().map(|p| Path::new(p).to_path_buf());
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn parses_comments_and_underscores() {
        let e = parse("# run\nn_points = 500\n\nmax-generations=4 # cap\n").unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e[0], Entry { key: "n-points".into(), value: "500".into() });
        assert_eq!(e[1].value, "4");
        assert!(parse("just words\n").is_err());
    }

    #[test]
    fn flags_override_file_values() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        std::fs::write(&cfg, "n-points = 500\nrng-seed = 7\nnormalize = true\nverbose = false\n").unwrap();
        let args = os(&["bronchi", "generate", "--config", cfg.to_str().unwrap(), "--rng-seed=9"]);
        let out = expand(args).unwrap();
        let out: Vec<_> = out.iter().map(|s| s.to_str().unwrap()).collect();
        assert_eq!(
            out,
            ["bronchi", "generate", "--n-points", "500", "--normalize", "--config", cfg.to_str().unwrap(), "--rng-seed=9"]
        );
    }

    #[test]
    fn missing_config_names_the_path() {
        let err = expand(os(&["bronchi", "mesh", "--config", "/nonexistent/x.cfg"])).unwrap_err();
        assert!(err.message.contains("/nonexistent/x.cfg"));
    }
}
