//! Flat `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Keys use the long
//! flag names, with `-` and `_` interchangeable. List values are comma separated.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::CliError;

#[derive(Debug, Default)]
pub struct Params {
    values: BTreeMap<String, String>,
    used: RefCell<BTreeSet<String>>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('-', "_")
}

impl Params {
    pub fn parse(text: &str) -> Result<Params, CliError> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Spec(format!("config line {}: expected key = value", n + 1)))?;
            let key = normalize(key);
            if key.is_empty() {
                return Err(CliError::Spec(format!("config line {}: empty key", n + 1)));
            }
            if values.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(CliError::Spec(format!("config line {}: duplicate key '{key}'", n + 1)));
            }
        }
        Ok(Params { values, used: RefCell::default() })
    }

    pub fn load(path: &Path) -> Result<Params, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Spec(format!("cannot read config {}: {e}", path.display())))?;
        Params::parse(&text)
    }

    fn raw(&self, key: &str) -> Option<&str> {
        let key = normalize(key);
        let v = self.values.get(&key).map(|s| s.as_str());
        self.used.borrow_mut().insert(key);
        v
    }

    /// The flag if given, else the file value, else `None`.
    pub fn get<T>(&self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        let file = self.raw(key);
        if flag.is_some() {
            return Ok(flag);
        }
        file.map(|s| {
            s.parse::<T>()
                .map_err(|e| CliError::Spec(format!("config key '{key}' = '{s}': {e}")))
        })
        .transpose()
    }

    /// Like `get` for comma-separated lists; an empty flag list counts as absent.
    pub fn list<T>(&self, key: &str, flag: Vec<T>) -> Result<Vec<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        let file = self.raw(key);
        if !flag.is_empty() {
            return Ok(flag);
        }
        match file {
            None => Ok(Vec::new()),
            Some(s) => s
                .split(',')
                .map(str::trim)
                .filter(|p| !p.is_empty())
                .map(|p| {
                    p.parse::<T>().map_err(|e| {
                        CliError::Spec(format!("config key '{key}' item '{p}': {e}"))
                    })
                })
                .collect(),
        }
    }

    /// Keys present in the file that no resolver asked for.
    pub fn unused(&self) -> Vec<String> {
        let used = self.used.borrow();
        self.values.keys().filter(|k| !used.contains(*k)).cloned().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let p = Params::parse("# sweep\nbeta = 1.25\nburn-in=10\nsides = 800, 950,1100\n").unwrap();
        assert_eq!(p.get::<f64>("beta", None).unwrap(), Some(1.25));
        assert_eq!(p.get("beta", Some(2.0)).unwrap(), Some(2.0));
        assert_eq!(p.get::<u64>("burn_in", None).unwrap(), Some(10));
        assert_eq!(p.list::<usize>("sides", vec![]).unwrap(), vec![800, 950, 1100]);
        assert_eq!(p.list("sides", vec![5usize]).unwrap(), vec![5]);
        assert_eq!(p.get::<u64>("seed", None).unwrap(), None);
        assert!(p.unused().is_empty());
    }

    #[test]
    fn reports_bad_lines() {
        assert!(Params::parse("beta 1.0").is_err());
        assert!(Params::parse("beta = 1\nbeta = 2").is_err());
        let p = Params::parse("beta = hot\nextra = 1").unwrap();
        assert!(p.get::<f64>("beta", None).is_err());
        assert_eq!(p.unused(), vec!["extra".to_string()]);
    }
}
