//! Flat `key = value` run configuration files.
//!
//! Keys use the long command-line flag names without the leading dashes.
//! Underscores and dashes are interchangeable. `#` starts a comment.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::parse(
                "config",
                i + 1,
                format!("expected key = value, got '{line}'"),
            )
        })?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() {
            return Err(Error::parse("config", i + 1, "empty key"));
        }
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(Error::parse(
                "config",
                i + 1,
                format!("key '{key}' set twice"),
            ));
        }
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_normalizes_keys() {
        let m = parse_config("# run\nbudget_evals = 1000\nmode=nonintrusive # locked\n\n").unwrap();
        assert_eq!(m["budget-evals"], "1000");
        assert_eq!(m["mode"], "nonintrusive");
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(parse_config("islands 8").is_err());
        assert!(parse_config("a=1\na=2").is_err());
        assert!(parse_config("=3").is_err());
    }
}
