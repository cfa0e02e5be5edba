//! Shared text conventions: tab-separated fields, `#` comment lines and
//! reals written with 17 significant digits.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

pub fn real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn reals(vs: &[f64]) -> String {
    vs.iter().map(|v| real(*v)).collect::<Vec<_>>().join("\t")
}

pub fn provenance_lines(out: &mut String, provenance: &[(String, String)]) {
    for (k, v) in provenance {
        out.push_str(&format!("# {k}={v}\n"));
    }
}

/// A parsed line with its 1-based number, for error reporting.
pub struct Line<'a> {
    pub origin: &'a str,
    pub number: usize,
    pub fields: Vec<&'a str>,
}

impl<'a> Line<'a> {
    pub fn malformed(&self, reason: impl Into<String>) -> Error {
        Error::Malformed { origin: self.origin.into(), line: self.number, reason: reason.into() }
    }

    pub fn field(&self, i: usize, name: &str) -> Result<&'a str> {
        self.fields.get(i).copied().ok_or_else(|| Error::MissingField {
            origin: self.origin.into(),
            line: self.number,
            field: name.into(),
        })
    }

    pub fn parse<T: FromStr>(&self, i: usize, name: &str) -> Result<T> {
        let raw = self.field(i, name)?;
        raw.parse().map_err(|_| self.malformed(format!("bad value {raw:?} for {name}")))
    }

    pub fn expect_len(&self, n: usize, names: &[&str]) -> Result<()> {
        if self.fields.len() < n {
            let field = names.get(self.fields.len()).copied().unwrap_or("?");
            return Err(Error::MissingField { origin: self.origin.into(), line: self.number, field: field.into() });
        }
        if self.fields.len() > n {
            return Err(self.malformed(format!("expected {n} fields, found {}", self.fields.len())));
        }
        Ok(())
    }
}

/// Non-comment, non-blank lines of `text`.
pub fn data_lines<'a>(text: &'a str, origin: &'a str) -> impl Iterator<Item = Line<'a>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .map(move |(i, l)| Line { origin, number: i + 1, fields: l.split('\t').collect() })
}

/// `key=value` pairs from `# key=value` comment lines.
pub fn read_provenance(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.strip_prefix("# "))
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

pub fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(Error::io(path))
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(Error::io(path))
}
