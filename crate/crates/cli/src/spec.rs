//! Line-oriented `key = value` spec files.
//!
//! Keys are case-insensitive, `#` starts a comment, duplicate and unknown
//! keys are errors. Every value read (or defaulted) is recorded in the echo
//! so reports carry the fully resolved configuration.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;

use serde_json::Value;

#[derive(Debug, thiserror::Error)]
pub enum SpecError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("unknown key `{key}` (allowed here: {allowed})")]
    Unknown { key: String, allowed: String },
    #[error("missing required key `{0}`")]
    Missing(String),
    #[error("key `{key}`: cannot parse `{value}`: {reason}")]
    Value { key: String, value: String, reason: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Debug, Default)]
pub struct Spec {
    values: BTreeMap<String, String>,
    echo: BTreeMap<String, Value>,
}

impl Spec {
    pub fn parse(text: &str) -> Result<Self, SpecError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| SpecError::Syntax { line: i + 1, text: raw.to_string() })?;
            let key = k.trim().to_ascii_lowercase();
            if key.is_empty() {
                return Err(SpecError::Syntax { line: i + 1, text: raw.to_string() });
            }
            if values.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(SpecError::Duplicate { line: i + 1, key });
            }
        }
        Ok(Spec { values, echo: BTreeMap::new() })
    }

    /// Rejects keys outside `allowed`.
    pub fn restrict(&self, allowed: &[&str]) -> Result<(), SpecError> {
        for key in self.values.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(SpecError::Unknown { key: key.clone(), allowed: allowed.join(", ") });
            }
        }
        Ok(())
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn echo(&self) -> &BTreeMap<String, Value> {
        &self.echo
    }

    pub fn record(&mut self, key: &str, value: impl Into<Value>) {
        self.echo.insert(key.to_string(), value.into());
    }

    fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T, SpecError>
    where
        T::Err: Display,
    {
        v.parse().map_err(|e: T::Err| SpecError::Value { key: key.into(), value: v.into(), reason: e.to_string() })
    }

    pub fn get<T>(&mut self, key: &str) -> Result<Option<T>, SpecError>
    where
        T: FromStr + Into<Value> + Clone,
        T::Err: Display,
    {
        match self.values.get(key).cloned() {
            Some(v) => {
                let t: T = Self::parse_value(key, &v)?;
                self.record(key, t.clone());
                Ok(Some(t))
            }
            None => Ok(None),
        }
    }

    pub fn require<T>(&mut self, key: &str) -> Result<T, SpecError>
    where
        T: FromStr + Into<Value> + Clone,
        T::Err: Display,
    {
        self.get(key)?.ok_or_else(|| SpecError::Missing(key.into()))
    }

    pub fn or<T>(&mut self, key: &str, default: T) -> Result<T, SpecError>
    where
        T: FromStr + Into<Value> + Clone,
        T::Err: Display,
    {
        match self.get(key)? {
            Some(v) => Ok(v),
            None => {
                self.record(key, default.clone());
                Ok(default)
            }
        }
    }

    pub fn string(&mut self, key: &str) -> Result<String, SpecError> {
        self.require::<String>(key)
    }

    /// Comma-separated numbers.
    pub fn list(&mut self, key: &str) -> Result<Option<Vec<f64>>, SpecError> {
        let Some(v) = self.values.get(key).cloned() else { return Ok(None) };
        let out = parse_list(key, &v)?;
        self.record(key, out.clone());
        Ok(Some(out))
    }

    /// Rows separated by `;`, entries by `,`.
    pub fn rows(&mut self, key: &str) -> Result<Option<Vec<Vec<f64>>>, SpecError> {
        let Some(v) = self.values.get(key).cloned() else { return Ok(None) };
        let rows: Vec<Vec<f64>> = v.split(';').map(|r| parse_list(key, r)).collect::<Result<_, _>>()?;
        self.record(key, rows.clone());
        Ok(Some(rows))
    }
}

pub fn parse_list(key: &str, v: &str) -> Result<Vec<f64>, SpecError> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| Spec::parse_value::<f64>(key, s))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_are_case_insensitive() {
        let mut s = Spec::parse("Kind = minmax\n# comment\nN = 3 # trailing\n").unwrap();
        assert_eq!(s.string("kind").unwrap(), "minmax");
        assert_eq!(s.require::<usize>("n").unwrap(), 3);
    }

    #[test]
    fn duplicates_and_unknowns_fail() {
        assert!(matches!(Spec::parse("n = 3\nN = 4"), Err(SpecError::Duplicate { .. })));
        let s = Spec::parse("n = 3\nbogus = 1").unwrap();
        assert!(matches!(s.restrict(&["n"]), Err(SpecError::Unknown { .. })));
    }

    #[test]
    fn defaults_are_echoed() {
        let mut s = Spec::parse("").unwrap();
        assert_eq!(s.or("p", 2.0).unwrap(), 2.0);
        assert_eq!(s.echo()["p"], Value::from(2.0));
    }
}
