//! Flat `key = value` configuration. Blank lines and `#` comments are
//! ignored; unknown keys are errors so misspelled weights do not pass
//! silently.

use std::collections::BTreeMap;
use std::fmt::Write;

use thiserror::Error;

use crate::clustering::Linkage;
use crate::{Costs, Distance, Scalar, ShardId, SimTime, Weight, Weights};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: invalid value {value:?} for {key}")]
    InvalidValue { line: usize, key: String, value: String },
    #[error("invalid value {value:?} for {key}")]
    Override { key: String, value: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub k: usize,
    pub linkage: Linkage,
    /// Cut the dendrogram at this distance instead of at `k` clusters.
    pub cut_distance: Option<Distance>,
    pub weights: Weights,
    pub epsilon: f64,
    pub seed: u64,
    /// Triple count of generated datasets.
    pub triples: usize,
    pub endpoints: BTreeMap<ShardId, String>,
    pub cost: Costs,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            k: 3,
            linkage: Linkage::Single,
            cut_distance: None,
            weights: Weights::default(),
            epsilon: 0.15,
            seed: 1,
            triples: 15_000,
            endpoints: BTreeMap::new(),
            cost: Costs::default(),
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let mut config = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or(ConfigError::Syntax { line })?;
            config.set(key.trim(), value.trim()).map_err(|e| match e {
                SetError::Unknown => ConfigError::UnknownKey { line, key: key.trim().to_owned() },
                SetError::Invalid => {
                    ConfigError::InvalidValue { line, key: key.trim().to_owned(), value: value.trim().to_owned() }
                }
            })?;
        }
        Ok(config)
    }

    /// Sets one key as if it were a line of the file.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        self.set(key, value).map_err(|_| ConfigError::Override { key: key.to_owned(), value: value.to_owned() })
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), SetError> {
        fn parse<T: std::str::FromStr>(v: &str) -> Result<T, SetError> {
            v.parse().map_err(|_| SetError::Invalid)
        }
        fn cost(v: &str) -> Result<SimTime, SetError> {
            SimTime::parse_decimal(v).filter(|c| *c >= SimTime::from_integer(0)).ok_or(SetError::Invalid)
        }
        match key {
            "k" => self.k = parse::<usize>(value).ok().filter(|k| *k >= 1).ok_or(SetError::Invalid)?,
            "linkage" => self.linkage = parse(value)?,
            "cut_distance" => {
                let d = Distance::parse_decimal(value).ok_or(SetError::Invalid)?;
                if d < Distance::from_integer(0) || d > Distance::from_integer(1) {
                    return Err(SetError::Invalid);
                }
                self.cut_distance = Some(d);
            }
            "epsilon" => self.epsilon = parse::<f64>(value).ok().filter(|e| *e >= 0.0).ok_or(SetError::Invalid)?,
            "seed" => self.seed = parse(value)?,
            "triples" => self.triples = parse(value)?,
            "call_latency" => self.cost.call_latency = cost(value)?,
            "per_row_cost" => self.cost.per_row_cost = cost(value)?,
            "local_match_cost" => self.cost.local_match_cost = cost(value)?,
            _ => {
                if let Some(i) = key.strip_prefix('w').and_then(|n| n.parse::<usize>().ok()).filter(|i| (1..=7).contains(i)) {
                    let w: Weight = parse::<Weight>(value).ok().filter(|w| *w >= 0.0 && w.is_finite()).ok_or(SetError::Invalid)?;
                    self.weights.w[i - 1] = w;
                } else if let Some(shard) = key.strip_prefix("endpoint.") {
                    let shard: usize = shard.parse().map_err(|_| SetError::Unknown)?;
                    if value.is_empty() || value.contains(['<', '>', ' ']) {
                        return Err(SetError::Invalid);
                    }
                    self.endpoints.insert(ShardId(shard), value.to_owned());
                } else {
                    return Err(SetError::Unknown);
                }
            }
        }
        Ok(())
    }

    /// Endpoint label for each of `k` shards; unset ones get a placeholder.
    pub fn endpoint_map(&self, k: usize) -> BTreeMap<ShardId, String> {
        (0..k)
            .map(|i| {
                let s = ShardId(i);
                (s, self.endpoints.get(&s).cloned().unwrap_or_else(|| format!("http://shard{i}.local/sparql")))
            })
            .collect()
    }

    /// Text that parses back to this configuration.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "k = {}", self.k);
        let _ = writeln!(out, "linkage = {}", self.linkage);
        if let Some(d) = &self.cut_distance {
            let _ = writeln!(out, "cut_distance = {d}");
        }
        for (i, w) in self.weights.w.iter().enumerate() {
            let _ = writeln!(out, "w{} = {w}", i + 1);
        }
        let _ = writeln!(out, "epsilon = {}", self.epsilon);
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "triples = {}", self.triples);
        let _ = writeln!(out, "call_latency = {}", self.cost.call_latency);
        let _ = writeln!(out, "per_row_cost = {}", self.cost.per_row_cost);
        let _ = writeln!(out, "local_match_cost = {}", self.cost.local_match_cost);
        for (s, e) in &self.endpoints {
            let _ = writeln!(out, "endpoint.{} = {e}", s.0);
        }
        out
    }
}

enum SetError {
    Unknown,
    Invalid,
}
