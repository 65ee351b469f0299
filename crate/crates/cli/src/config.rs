//! `key=value` configuration files and flag/config/default resolution.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

/// Keys accepted in a configuration file. They match the long flag names.
pub const KEYS: &[&str] = &[
    "method",
    "s",
    "k-neighbors",
    "knn-k",
    "mu",
    "gamma",
    "rho",
    "sigma",
    "beta",
    "epsilon",
    "max-iters",
    "max-linesearch",
    "p",
    "tmax",
    "step",
    "pca-dim",
    "per-label-train",
    "trials",
    "seed",
    "labels",
    "per-group",
    "dim",
    "signal-gap",
    "noise-sigma",
    "distractor-sigma",
    "distractor-dims",
    "signal-dims",
    "label-jitter",
];

#[derive(Debug, Default, Clone, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                anyhow!("config line {}: expected key=value, got {raw:?}", no + 1)
            })?;
            let key = k.trim().replace('_', "-");
            if !KEYS.contains(&key.as_str()) {
                bail!("config line {}: unknown key {:?}", no + 1, k.trim());
            }
            values.insert(key, v.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| anyhow!("config key {key}: invalid value {v:?}: {e}")),
        }
    }

    /// Flag value if given, else the config value, else `None`.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }
}

/// Comma-separated numbers, as in `--labels 0,1,2`.
#[derive(Debug, Clone, PartialEq)]
pub struct NumberList<T>(pub Vec<T>);

impl<T: FromStr> FromStr for NumberList<T>
where
    T::Err: std::fmt::Display,
{
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let items = s
            .split(',')
            .map(|x| x.trim().parse::<T>().map_err(|e| format!("{x:?}: {e}")))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        if items.is_empty() {
            return Err("empty list".into());
        }
        Ok(Self(items))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_blank_lines() {
        let c = ConfigFile::parse("# defaults\n\nmu = 1e-3  # weight\nmax_iters=7\n").unwrap();
        assert_eq!(c.get::<f64>("mu").unwrap(), Some(1e-3));
        assert_eq!(c.get::<usize>("max-iters").unwrap(), Some(7));
        assert_eq!(c.get::<usize>("trials").unwrap(), None);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_lines() {
        assert!(ConfigFile::parse("colour = red").is_err());
        assert!(ConfigFile::parse("mu").is_err());
        let c = ConfigFile::parse("mu = lots").unwrap();
        assert!(c.get::<f64>("mu").is_err());
    }

    #[test]
    fn flags_win_over_config() {
        let c = ConfigFile::parse("trials = 3").unwrap();
        assert_eq!(c.pick(Some(9usize), "trials").unwrap(), Some(9));
        assert_eq!(c.pick(None::<usize>, "trials").unwrap(), Some(3));
        assert_eq!(c.pick(None::<usize>, "seed").unwrap(), None);
    }

    #[test]
    fn number_lists() {
        let l: NumberList<f64> = "0, 1.5,2".parse().unwrap();
        assert_eq!(l.0, vec![0.0, 1.5, 2.0]);
        assert!("1,,2".parse::<NumberList<f64>>().is_err());
    }
}
