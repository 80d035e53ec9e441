//! `--config file.json`: a flat object whose keys are long flag names.
//!
//! Values expand into arguments placed right after the subcommand, ahead of
//! the user's own flags. A key the user also passes on the command line is
//! skipped, so flags always win. Strings and numbers become `--key value`,
//! `true` becomes `--key` (`false` is dropped) and arrays repeat the flag.

use std::ffi::OsString;
use std::fs;

use serde_json::Value;

use crate::error::{invalid, CliResult};

/// Position of the subcommand and the `--config` path, if any.
fn scan(args: &[OsString], subcommands: &[String]) -> (Option<usize>, Option<OsString>) {
    let sub = args
        .iter()
        .skip(1)
        .position(|a| {
            a.to_str()
                .is_some_and(|s| subcommands.iter().any(|c| c == s))
        })
        .map(|p| p + 1);
    let mut config = None;
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let Some(s) = a.to_str() else { continue };
        if s == "--config" {
            config = it.next().cloned();
        } else if let Some(v) = s.strip_prefix("--config=") {
            config = Some(v.into());
        }
    }
    (sub, config)
}

fn user_sets(args: &[OsString], flag: &str) -> bool {
    let eq = format!("{flag}=");
    args.iter()
        .any(|a| a.to_str().is_some_and(|s| s == flag || s.starts_with(&eq)))
}

fn scalar_arg(key: &str, v: &Value) -> CliResult<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        _ => Err(invalid(format!(
            "config key {key:?}: expected a string or number"
        ))),
    }
}

/// Returns `args` with the config file's entries spliced in after the
/// subcommand.
pub fn expand_config(args: Vec<OsString>, subcommands: &[String]) -> CliResult<Vec<OsString>> {
    let (sub, path) = scan(&args, subcommands);
    let (Some(sub), Some(path)) = (sub, path) else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path)
        .map_err(|e| invalid(format!("config {}: {e}", path.to_string_lossy())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| invalid(format!("config {}: {e}", path.to_string_lossy())))?;
    let Value::Object(map) = value else {
        return Err(invalid("config must be a JSON object"));
    };

    let mut extra: Vec<OsString> = Vec::new();
    for (key, v) in &map {
        let flag = format!("--{}", key.replace('_', "-"));
        if flag == "--config" {
            return Err(invalid("config files cannot include other configs"));
        }
        if user_sets(&args, &flag) {
            continue;
        }
        match v {
            Value::Bool(true) => extra.push(flag.into()),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) => {
                for item in items {
                    extra.push(flag.clone().into());
                    extra.push(scalar_arg(key, item)?.into());
                }
            }
            other => {
                extra.push(flag.into());
                extra.push(scalar_arg(key, other)?.into());
            }
        }
    }
    let mut out = args[..=sub].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[sub + 1..]);
    Ok(out)
}
