//! Flat `key = value` configuration files.
//!
//! Each entry becomes the command-line flag `--key value` unless that flag
//! is already given, so flags always win. `true`/`false` values toggle
//! switches. Blank lines and lines starting with `#` are ignored.

use std::path::Path;

use crate::error::{CliError, Result};

pub fn parse(path: &Path, text: &str) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: &str| CliError::Config { path: path.display().to_string(), line: n + 1, msg: msg.into() };
        let (k, v) = line.split_once('=').ok_or_else(|| err("expected key = value"))?;
        let key = k.trim().replace('_', "-");
        let val = v.trim().to_string();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(err("bad key"));
        }
        if out.iter().any(|e| e.0 == key) {
            return Err(err(&format!("duplicate key {key}")));
        }
        out.push((key, val));
    }
    Ok(out)
}

fn has_flag(args: &[String], key: &str) -> bool {
    let long = format!("--{key}");
    let eq = format!("{long}=");
    args.iter().any(|a| a == &long || a.starts_with(&eq))
}

/// Appends config entries to `args` (after the subcommand) when the flag
/// is absent.
pub fn merge(args: &mut Vec<String>, entries: &[(String, String)]) {
    for (k, v) in entries {
        if has_flag(args, k) {
            continue;
        }
        match v.as_str() {
            "true" => args.push(format!("--{k}")),
            "false" => {}
            _ => args.push(format!("--{k}={v}")),
        }
    }
}

/// Removes `--config PATH` / `--config=PATH` from `args` and returns the
/// path.
pub fn take_config_path(args: &mut Vec<String>) -> Result<Option<String>> {
    let mut found = None;
    let mut k = 0;
    while k < args.len() {
        if args[k] == "--config" {
            if k + 1 >= args.len() {
                return Err(CliError::Usage("--config needs a path".into()));
            }
            found = Some(args.remove(k + 1));
            args.remove(k);
        } else if let Some(p) = args[k].strip_prefix("--config=") {
            found = Some(p.to_string());
            args.remove(k);
        } else {
            k += 1;
        }
    }
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn parses_and_merges() {
        let e = parse(Path::new("c"), "# run\neps = 1e-3\nx_max=3\n\nraw = true\nquiet = false\n").unwrap();
        assert_eq!(e[1], ("x-max".to_string(), "3".to_string()));
        let mut a = s(&["mmq", "marginal", "--eps", "0.01"]);
        merge(&mut a, &e);
        assert_eq!(a, s(&["mmq", "marginal", "--eps", "0.01", "--x-max=3", "--raw"]));
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(parse(Path::new("c"), "eps 1").is_err());
        assert!(parse(Path::new("c"), "a=1\na=2").is_err());
        assert!(parse(Path::new("c"), "=1").is_err());
    }

    #[test]
    fn config_flag_is_extracted() {
        let mut a = s(&["mmq", "--config", "f.cfg", "eval"]);
        assert_eq!(take_config_path(&mut a).unwrap().as_deref(), Some("f.cfg"));
        assert_eq!(a, s(&["mmq", "eval"]));
        let mut a = s(&["mmq", "eval", "--config=g"]);
        assert_eq!(take_config_path(&mut a).unwrap().as_deref(), Some("g"));
        assert!(take_config_path(&mut s(&["mmq", "--config"])).is_err());
    }
}
