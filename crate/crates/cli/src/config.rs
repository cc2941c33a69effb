//! JSON config files. Keys mirror the long flag names; nested objects are joined with
//! `-` (`{"bp": {"alpha": 0.5}}` is `--bp-alpha 0.5`), and a top-level object named
//! after a subcommand applies to that subcommand only.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::CommandFactory;
use serde_json::Value;

use crate::Cli;

fn flag_name(key: &str) -> String {
    key.replace(['_', '.'], "-")
}

fn flatten(prefix: &str, value: &Value, out: &mut BTreeMap<String, Value>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let name = if prefix.is_empty() {
                    flag_name(k)
                } else {
                    format!("{prefix}-{}", flag_name(k))
                };
                flatten(&name, v, out);
            }
        }
        _ => {
            out.insert(prefix.to_string(), value.clone());
        }
    }
}

fn scalar(v: &Value) -> Result<String> {
    Ok(match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        Value::Bool(b) => b.to_string(),
        Value::Array(items) => items.iter().map(scalar).collect::<Result<Vec<_>>>()?.join(","),
        Value::Null | Value::Object(_) => bail!("unsupported config value {v}"),
    })
}

/// Returns `args` with flags from the config file inserted right after the subcommand,
/// so that flags given on the command line take precedence.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let command = Cli::command();
    let subcommands: BTreeMap<String, BTreeSet<String>> = command
        .get_subcommands()
        .map(|s| {
            let longs = s
                .get_arguments()
                .chain(command.get_arguments().filter(|a| a.is_global_set()))
                .filter_map(|a| a.get_long().map(str::to_string))
                .collect();
            (s.get_name().to_string(), longs)
        })
        .collect();

    let mut config_path = None;
    let mut position = None;
    let mut i = 1;
    while i < args.len() {
        let a = args[i].to_string_lossy();
        if a == "--config" || a == "--out-dir" {
            if a == "--config" {
                config_path = args.get(i + 1).cloned();
            }
            i += 2;
            continue;
        }
        if let Some(p) = a.strip_prefix("--config=") {
            config_path = Some(OsString::from(p));
        } else if subcommands.contains_key(a.as_ref()) && position.is_none() {
            position = Some(i);
        }
        i += 1;
    }
    let (Some(path), Some(position)) = (config_path, position) else {
        return Ok(args);
    };
    let sub = args[position].to_string_lossy().to_string();
    let accepted = &subcommands[&sub];

    let text = std::fs::read_to_string(Path::new(&path))
        .with_context(|| format!("reading config {}", Path::new(&path).display()))?;
    let root: Value = serde_json::from_str(&text).context("parsing config")?;
    let Value::Object(map) = root else {
        bail!("config must be a JSON object");
    };
    let mut shared = Value::Object(Default::default());
    let mut specific = None;
    for (k, v) in map {
        if subcommands.contains_key(&k) && v.is_object() {
            if k == sub {
                specific = Some(v);
            }
        } else {
            shared[k] = v;
        }
    }
    let mut flags = BTreeMap::new();
    flatten("", &shared, &mut flags);
    if let Some(v) = specific {
        flatten("", &v, &mut flags);
    }

    let mut injected = Vec::new();
    for (name, value) in flags {
        if name == "config" {
            continue;
        }
        if !accepted.contains(&name) {
            if subcommands.values().any(|s| s.contains(&name)) {
                continue;
            }
            bail!("unknown config key `{name}`");
        }
        match value {
            Value::Bool(false) => {}
            Value::Bool(true) => injected.push(OsString::from(format!("--{name}"))),
            v => {
                injected.push(OsString::from(format!("--{name}")));
                injected.push(OsString::from(scalar(&v)?));
            }
        }
    }
    let mut out = args[..=position].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[position + 1..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_keys_become_flags() {
        let mut out = BTreeMap::new();
        flatten("", &serde_json::json!({"bp": {"alpha": 0.5, "max_iters": 7}, "osd.order": 3}), &mut out);
        assert_eq!(out.keys().collect::<Vec<_>>(), ["bp-alpha", "bp-max-iters", "osd-order"]);
    }

    #[test]
    fn arrays_join_with_commas() {
        assert_eq!(scalar(&serde_json::json!([3, 5])).unwrap(), "3,5");
        assert_eq!(scalar(&serde_json::json!("2x2")).unwrap(), "2x2");
    }

    #[test]
    fn without_config_args_are_untouched() {
        let args: Vec<OsString> = ["qtanner", "fixture", "--name", "d4-36"].map(OsString::from).to_vec();
        assert_eq!(expand(args.clone()).unwrap(), args);
    }
}
