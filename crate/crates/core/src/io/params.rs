use std::path::Path;

use crate::error::{Result, SwarmError};
use crate::swarm::SwarmParams;

#[derive(Debug, Clone, PartialEq)]
pub struct ParamEntry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

/// Flat `key = value` lines; `#` starts a comment.
pub fn parse_params(text: &str) -> Result<Vec<ParamEntry>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| SwarmError::Parse {
            line: i + 1,
            msg: "expected `key = value`".into(),
        })?;
        out.push(ParamEntry {
            line: i + 1,
            key: k.trim().to_string(),
            value: v.trim().to_string(),
        });
    }
    Ok(out)
}

pub fn load_params(path: impl AsRef<Path>) -> Result<Vec<ParamEntry>> {
    parse_params(&std::fs::read_to_string(path)?)
}

/// Applies the entries naming [`SwarmParams`] fields and returns the rest.
pub fn apply_params(params: &mut SwarmParams, entries: Vec<ParamEntry>) -> Result<Vec<ParamEntry>> {
    let mut rest = Vec::new();
    for e in entries {
        match params.field_mut(&e.key) {
            Some(slot) => {
                *slot = e.value.parse().map_err(|_| SwarmError::Parse {
                    line: e.line,
                    msg: format!("{} expects a number, got {:?}", e.key, e.value),
                })?;
            }
            None => rest.push(e),
        }
    }
    Ok(rest)
}
