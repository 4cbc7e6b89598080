//! Flat `key = value` text records.
//!
//! Used for dump sidecars, stack/mask metadata, the external-denoiser request
//! and experiment configs. Blank lines and lines starting with `#` are
//! ignored; keys keep their insertion order when written.

use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvRecord {
    entries: Vec<(String, String)>,
    origin: String,
}

impl KvRecord {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut rec = KvRecord {
            entries: Vec::new(),
            origin: origin.to_string(),
        };
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Parse {
                    origin: origin.to_string(),
                    msg: format!("line {}: expected `key = value`", lineno + 1),
                });
            };
            let key = k.trim();
            if key.is_empty() {
                return Err(Error::Parse {
                    origin: origin.to_string(),
                    msg: format!("line {}: empty key", lineno + 1),
                });
            }
            if rec.get(key).is_some() {
                return Err(Error::Parse {
                    origin: origin.to_string(),
                    msg: format!("line {}: duplicate key `{key}`", lineno + 1),
                });
            }
            rec.entries.push((key.to_string(), v.trim().to_string()));
        }
        Ok(rec)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_string())?;
        Ok(())
    }

    /// Sets `key`, replacing any existing value in place.
    pub fn set(&mut self, key: &str, value: impl Display) -> &mut Self {
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(k, _)| k.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::Parse {
            origin: self.origin.clone(),
            msg: format!("missing key `{key}`"),
        })
    }

    pub fn parse_value<T: FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.require(key)?;
        raw.parse().map_err(|_| Error::Parse {
            origin: self.origin.clone(),
            msg: format!("bad value `{raw}` for `{key}`"),
        })
    }

    pub fn parse_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.get(key) {
            Some(_) => self.parse_value(key),
            None => Ok(default),
        }
    }

    pub fn origin(&self) -> &str {
        &self.origin
    }
}

impl std::fmt::Display for KvRecord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        let rec = KvRecord::parse("# c\nwidth = 4\n\nname=abc def\n", "t").unwrap();
        assert_eq!(rec.get("width"), Some("4"));
        assert_eq!(rec.get("name"), Some("abc def"));
        assert_eq!(rec.parse_value::<usize>("width").unwrap(), 4);
        assert_eq!(rec.to_string(), "width = 4\nname = abc def\n");
    }

    #[test]
    fn rejects_garbage() {
        assert!(KvRecord::parse("nonsense", "t").is_err());
        assert!(KvRecord::parse("a = 1\na = 2", "t").is_err());
        let rec = KvRecord::parse("a = x", "t").unwrap();
        assert!(rec.parse_value::<f64>("a").is_err());
        assert!(rec.require("b").is_err());
    }

    #[test]
    fn float_display_round_trips() {
        let mut rec = KvRecord::new();
        let v: f64 = 0.1 + 0.2;
        rec.set("v", v);
        let back = KvRecord::parse(&rec.to_string(), "t").unwrap();
        assert_eq!(back.parse_value::<f64>("v").unwrap().to_bits(), v.to_bits());
    }
}
