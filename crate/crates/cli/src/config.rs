use std::fs;
use std::path::Path;

use coker_core::{Error, Result};
use serde::Deserialize;

/// Values of `n`, either as a list or as range text like `2..8`.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum NValues {
    List(Vec<u32>),
    Text(String),
}

impl NValues {
    pub fn resolve(&self) -> Result<Vec<u32>> {
        match self {
            NValues::List(v) => Ok(v.clone()),
            NValues::Text(s) => parse_n_values(s),
        }
    }
}

/// Batch configuration read with `--config`. Flags given on the command line win.
#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub ring: Option<String>,
    pub entry: Option<String>,
    pub u: Option<i32>,
    pub n: Option<NValues>,
    pub samples: Option<u64>,
    pub invariant: Option<String>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub resamples: Option<usize>,
    pub max_module: Option<u32>,
    pub trials: Option<usize>,
    pub epsilon: Option<String>,
    pub epsilon0: Option<String>,
    pub epsilon_prime: Option<String>,
    pub theta_max: Option<f64>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::usage(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(format!("{}: {e}", path.display())))
    }
}

/// `5`, `2..8` (inclusive), `2..=8`, or `2,4,6`.
pub fn parse_n_values(s: &str) -> Result<Vec<u32>> {
    let bad = || Error::parse(format!("unrecognised range of n '{s}'"));
    let s = s.trim();
    if let Some((a, b)) = s.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let (a, b): (u32, u32) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_n_values("2..5").unwrap(), [2, 3, 4, 5]);
        assert_eq!(parse_n_values("2..=3").unwrap(), [2, 3]);
        assert_eq!(parse_n_values("4").unwrap(), [4]);
        assert_eq!(parse_n_values("2, 6").unwrap(), [2, 6]);
        assert!(parse_n_values("5..2").is_err());
        assert!(parse_n_values("a").is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let ok: Config = serde_json::from_str(r#"{"ring": "Z/4", "n": "2..4", "seed": 3}"#).unwrap();
        assert_eq!(ok.n.unwrap().resolve().unwrap(), [2, 3, 4]);
        let list: Config = serde_json::from_str(r#"{"n": [3, 5]}"#).unwrap();
        assert_eq!(list.n.unwrap().resolve().unwrap(), [3, 5]);
        assert!(serde_json::from_str::<Config>(r#"{"ring": "Z/4", "sample": 10}"#).is_err());
    }
}
