//! Merging of JSON configuration files with command-line overrides.

use std::fmt;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

/// A malformed invocation: bad flag values, missing required parameters or an
/// unusable configuration file. Reported with exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Unwraps a parameter that must be present after merging.
pub fn required<T>(value: Option<T>, flag: &str) -> anyhow::Result<T> {
    value.ok_or_else(|| usage(format!("missing required parameter --{flag}")))
}

/// Reads a configuration file: a JSON object whose keys are flag names.
/// Keys holding objects named after a subcommand apply to that subcommand
/// only and take precedence over top-level keys.
pub fn load(path: &Path) -> anyhow::Result<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| usage(format!("invalid config {}: {e}", path.display())))?;
    if !value.is_object() {
        return Err(usage(format!("config {} must hold a JSON object", path.display())));
    }
    Ok(value)
}

/// Layers `cli` over the relevant parts of `config`; explicit flags win.
/// `known` lists the long flag names of `command`. Top-level keys are shared
/// defaults and are skipped when they do not apply; keys in the command's own
/// section must all be known, so typos there do not pass silently.
pub fn resolve<T>(cli: &T, config: Option<&Value>, command: &str, subcommands: &[&str], known: &[&str]) -> anyhow::Result<T>
where
    T: Serialize + DeserializeOwned,
{
    let mut merged = Map::new();
    if let Some(Value::Object(cfg)) = config {
        for (k, v) in cfg {
            if !subcommands.contains(&k.as_str()) && known.contains(&k.as_str()) {
                merged.insert(k.clone(), v.clone());
            }
        }
        if let Some(section) = cfg.get(command) {
            let Value::Object(section) = section else {
                return Err(usage(format!("config section `{command}` must be an object")));
            };
            if let Some(bad) = section.keys().find(|k| !known.contains(&k.as_str())) {
                return Err(usage(format!("config key `{bad}` is not a parameter of {command}")));
            }
            merged.extend(section.clone());
        }
    }
    let Value::Object(flags) = serde_json::to_value(cli)? else { unreachable!("argument structs serialize to objects") };
    merged.extend(flags.into_iter().filter(|(_, v)| !v.is_null()));
    serde_json::from_value(Value::Object(merged)).map_err(|e| usage(format!("invalid parameters for {command}: {e}")))
}
