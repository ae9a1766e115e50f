//! Core configuration files.
//!
//! ```text
//! # patch a preset in place
//! [cva6]
//! frontend.mispredict_penalty = 7
//!
//! # define a new core from a preset or an earlier section
//! [narrow : c910]
//! ooo.decode_width = 2
//! memory.l1d.indexing = vipt_speculative
//! ```
//!
//! Keys are dotted paths into [`CoreConfig`]. Values are JSON literals;
//! a bare word is taken as a string.

use serde_json::Value;
use thiserror::Error;

use crate::config::{CoreConfig, PRESETS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown core preset `{0}` (known: cva6, cva6s+, c910)")]
    UnknownPreset(String),
    #[error("[{section}] unknown key `{key}`")]
    UnknownKey { section: String, key: String },
    #[error("[{section}] bad value for `{key}`: {msg}")]
    BadValue { section: String, key: String, msg: String },
    #[error("[{section}] {msg}")]
    Invalid { section: String, msg: String },
    #[error("{0}")]
    Usage(String),
    #[error("cannot read config: {0}")]
    Io(String),
}

fn parse_value(s: &str) -> Value {
    serde_json::from_str(s).unwrap_or_else(|_| Value::String(s.to_string()))
}

/// Sets one dotted key on `cfg`.
pub fn apply_override(cfg: &mut CoreConfig, key: &str, value: &str) -> Result<(), ConfigError> {
    let section = cfg.name.clone();
    let unknown = || ConfigError::UnknownKey {
        section: section.clone(),
        key: key.to_string(),
    };
    if key == "name" {
        return Err(unknown());
    }
    let mut root = serde_json::to_value(&*cfg).expect("config serialises");
    let mut node = &mut root;
    for part in key.split('.') {
        node = node.as_object_mut().and_then(|o| o.get_mut(part)).ok_or_else(unknown)?;
    }
    *node = parse_value(value);
    *cfg = serde_json::from_value(root).map_err(|e| ConfigError::BadValue {
        section: section.clone(),
        key: key.to_string(),
        msg: e.to_string(),
    })?;
    Ok(())
}

fn lookup(name: &str, defined: &[CoreConfig]) -> Option<CoreConfig> {
    defined
        .iter()
        .rev()
        .find(|c| c.name == name)
        .cloned()
        .or_else(|| CoreConfig::preset(name))
}

/// Parses a config file into the cores it defines or patches.
pub fn parse_config(text: &str) -> Result<Vec<CoreConfig>, ConfigError> {
    let mut out: Vec<CoreConfig> = Vec::new();
    let mut cur: Option<CoreConfig> = None;
    let finish = |c: Option<CoreConfig>, out: &mut Vec<CoreConfig>| -> Result<(), ConfigError> {
        if let Some(c) = c {
            c.validate().map_err(|e| ConfigError::Invalid {
                section: c.name.clone(),
                msg: e.to_string(),
            })?;
            out.retain(|o| o.name != c.name);
            out.push(c);
        }
        Ok(())
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(h) = body.strip_prefix('[') {
            let h = h.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                line,
                msg: "unterminated section header".into(),
            })?;
            finish(cur.take(), &mut out)?;
            let (name, base) = match h.split_once(':') {
                Some((n, b)) => (n.trim(), b.trim()),
                None => (h.trim(), h.trim()),
            };
            if name.is_empty() {
                return Err(ConfigError::Syntax {
                    line,
                    msg: "empty section name".into(),
                });
            }
            let mut c = lookup(base, &out).ok_or_else(|| ConfigError::UnknownPreset(base.to_string()))?;
            c.name = name.to_string();
            cur = Some(c);
            continue;
        }
        let (k, v) = body.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line,
            msg: format!("expected `key = value`, got {body:?}"),
        })?;
        let c = cur.as_mut().ok_or_else(|| ConfigError::Syntax {
            line,
            msg: "key outside any [section]".into(),
        })?;
        apply_override(c, k.trim(), v.trim())?;
    }
    finish(cur.take(), &mut out)?;
    Ok(out)
}

pub fn load_config(path: &std::path::Path) -> Result<Vec<CoreConfig>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

/// Finds `name` among file-defined cores, then the built-in presets.
pub fn resolve_core(name: &str, defined: &[CoreConfig]) -> Result<CoreConfig, ConfigError> {
    lookup(name, defined).ok_or_else(|| ConfigError::UnknownPreset(name.to_string()))
}

/// Names accepted by [`resolve_core`] with no config file.
pub fn preset_names() -> &'static [&'static str] {
    &PRESETS
}
