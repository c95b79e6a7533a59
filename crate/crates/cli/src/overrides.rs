//! Dotted command-line overrides for config keys.
//!
//! Any flag containing a dot, like `--train.batch_size 8` or
//! `--encoder.tokenizer.vocab_size=64`, is pulled out before clap parsing
//! and applied to the JSON config document at that path. Values parse as
//! JSON when they can (numbers, booleans, null, arrays) and fall back to
//! plain strings.

use anyhow::{bail, Result};
use serde_json::Value;

/// Top-level config keys that take overrides without a dotted path. Every
/// other undotted flag belongs to clap.
const TOP_LEVEL_KEYS: &[&str] = &["model", "translate", "format", "out_dir", "baseline_path"];

/// Splits argv into (args for clap, config overrides).
pub fn split_args(args: Vec<String>) -> (Vec<String>, Vec<(String, String)>) {
    let mut plain = Vec::new();
    let mut overrides = Vec::new();
    let mut iter = args.into_iter().peekable();
    while let Some(arg) = iter.next() {
        let Some(flag) = arg.strip_prefix("--") else {
            plain.push(arg);
            continue;
        };
        let key_part = flag.split('=').next().unwrap_or(flag);
        if !key_part.contains('.') && !TOP_LEVEL_KEYS.contains(&key_part) {
            plain.push(arg);
            continue;
        }
        if let Some((key, value)) = flag.split_once('=') {
            overrides.push((key.to_string(), value.to_string()));
        } else if let Some(value) = iter.next() {
            overrides.push((flag.to_string(), value));
        } else {
            // a trailing dotted flag with no value; let clap report it
            plain.push(arg);
        }
    }
    (plain, overrides)
}

/// Sets `document[path] = value`, creating intermediate objects as needed.
pub fn apply(document: &mut Value, path: &str, raw: &str) -> Result<()> {
    let parsed: Value = serde_json::from_str(raw).unwrap_or(Value::String(raw.to_string()));
    let mut current = document;
    let segments: Vec<&str> = path.split('.').collect();
    for (i, segment) in segments.iter().enumerate() {
        if segment.is_empty() {
            bail!("empty segment in override key {path:?}");
        }
        let map = match current {
            Value::Object(map) => map,
            _ => bail!("cannot override {path:?}: {segment:?} is not an object"),
        };
        if i + 1 == segments.len() {
            map.insert(segment.to_string(), parsed);
            return Ok(());
        }
        current = map
            .entry(segment.to_string())
            .or_insert_with(|| Value::Object(serde_json::Map::new()));
    }
    unreachable!("path always has at least one segment")
}
