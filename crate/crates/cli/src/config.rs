//! Command parameters from flags and an optional JSON file.
//!
//! The file is a JSON object whose keys are the long flag names with dashes
//! replaced by underscores. Flags given on the command line override it.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::{Map, Value};

use crate::error::CliError;

/// Options shared by every command.
#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Common {
    /// JSON file with parameters; flags on the command line take precedence
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// CSV report path (standard output when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// JSON summary path (defaults to the report path with a .json extension,
    /// or standard error when there is no report path)
    #[arg(long)]
    pub summary: Option<PathBuf>,

    /// Table cache directory (overrides RESTART_GRADE_CACHE)
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,

    /// Compute potential tables without reading or writing the cache
    #[arg(long)]
    pub no_cache: bool,
}

/// Accepts a single string or number as a one-element list.
pub fn one_or_many<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<String>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Item {
        Text(String),
        Int(i64),
        Float(f64),
    }
    impl Item {
        fn into_string(self) -> String {
            match self {
                Item::Text(s) => s,
                Item::Int(i) => i.to_string(),
                Item::Float(f) => f.to_string(),
            }
        }
    }
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(Item),
        Many(Vec<Item>),
    }
    Ok(match OneOrMany::deserialize(de)? {
        OneOrMany::One(i) => vec![i.into_string()],
        OneOrMany::Many(v) => v.into_iter().map(Item::into_string).collect(),
    })
}

pub fn read_config(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(CliError::Config(format!(
            "config {} is not a JSON object",
            path.display()
        ))),
        Err(e) => Err(CliError::Config(format!("config {}: {e}", path.display()))),
    }
}

fn is_unset(v: &Value) -> bool {
    match v {
        Value::Null | Value::Bool(false) => true,
        Value::Array(a) => a.is_empty(),
        _ => false,
    }
}

/// File values overlaid with every flag that was given.
pub fn merge<T>(flags: &T, file: Option<Map<String, Value>>) -> Result<T, CliError>
where
    T: Serialize + DeserializeOwned + Default,
{
    let Value::Object(known) = serde_json::to_value(T::default())? else {
        unreachable!("command arguments serialize to an object")
    };
    let mut merged = file.unwrap_or_default();
    if let Some(k) = merged.keys().find(|k| !known.contains_key(*k)) {
        let names: Vec<&str> = known.keys().map(String::as_str).collect();
        return Err(CliError::Config(format!(
            "unknown config key {k:?}; expected one of {}",
            names.join(", ")
        )));
    }
    let Value::Object(given) = serde_json::to_value(flags)? else {
        unreachable!("command arguments serialize to an object")
    };
    for (k, v) in given {
        if !is_unset(&v) {
            merged.insert(k, v);
        }
    }
    serde_json::from_value(Value::Object(merged))
        .map_err(|e| CliError::Config(format!("config: {e}")))
}
