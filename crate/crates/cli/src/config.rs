//! `--config file.json` support. The file is a flat object whose keys are
//! flag names; its entries are spliced into argv ahead of the user's own
//! flags, and since every option overrides itself, flags on the command
//! line win.

use std::ffi::OsString;
use std::fs;

use serde_json::Value;

fn config_path(args: &[OsString]) -> Option<String> {
    let mut it = args.iter().map(|a| a.to_string_lossy().into_owned());
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

fn scalar(v: &Value) -> Result<String, String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        other => Err(format!("unsupported value {other}")),
    }
}

/// Flags equivalent to a config document.
pub fn config_flags(doc: &Value) -> Result<Vec<OsString>, String> {
    let map = doc
        .as_object()
        .ok_or_else(|| "config file must hold a JSON object".to_string())?;
    let mut out = Vec::new();
    for (key, value) in map {
        let key = key.replace('_', "-");
        if key == "config" {
            continue;
        }
        let flag = format!("--{key}");
        match value {
            Value::Bool(true) => out.push(flag.into()),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) => {
                let parts = items.iter().map(scalar).collect::<Result<Vec<_>, _>>()?;
                out.push(flag.into());
                out.push(parts.join(",").into());
            }
            v => {
                out.push(flag.into());
                out.push(scalar(v).map_err(|e| format!("{key}: {e}"))?.into());
            }
        }
    }
    Ok(out)
}

/// `args` with the config file's flags inserted right after the
/// subcommand name.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| format!("config {path}: {e}"))?;
    let extra = config_flags(&doc)?;
    // argv[0], then the first non-flag token is the subcommand
    let pos = args
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
        .map(|p| p + 2)
        .unwrap_or(args.len());
    let mut out = args[..pos.min(args.len())].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[pos.min(args.len())..]);
    Ok(out)
}
