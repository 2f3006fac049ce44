//! Flat `key=value` experiment configuration with a canonical text form.
//!
//! Values keep their parsed kind: integers, exact rationals (`4/5`),
//! decimals, bare strings, and comma lists of scalars. The canonical
//! serialization sorts keys and prints decimals in their shortest
//! round-trip form, so the config hash is stable across platforms and the
//! text format round-trips losslessly.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;
use sha2::{Digest, Sha256};

use pam_core::hurst::{HurstParams, HurstValue};
use pam_core::moments::MomentConfig;

use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum ConfigValue {
    Int(i64),
    Rational(Rational64),
    Float(f64),
    Str(String),
    List(Vec<ConfigValue>),
}

impl ConfigValue {
    fn parse_scalar(token: &str) -> Result<ConfigValue> {
        let token = token.trim();
        if token.is_empty() {
            return Err(CliError::Config("empty value".into()));
        }
        let digits = token.strip_prefix(['-', '+'].as_ref()).unwrap_or(token);
        if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
            return token
                .parse::<i64>()
                .map(ConfigValue::Int)
                .map_err(|_| CliError::Config(format!("integer out of range: {token}")));
        }
        if let Some((n, d)) = token.split_once('/') {
            if let (Ok(n), Ok(d)) = (n.trim().parse::<i64>(), d.trim().parse::<i64>()) {
                if d == 0 {
                    return Err(CliError::Config(format!("zero denominator: {token}")));
                }
                return Ok(ConfigValue::Rational(Rational64::new(n, d)));
            }
        }
        if let Ok(x) = token.parse::<f64>() {
            if !x.is_finite() {
                return Err(CliError::Config(format!("non-finite number: {token}")));
            }
            if token.bytes().any(|b| b.is_ascii_digit()) {
                return Ok(ConfigValue::Float(x));
            }
        }
        if token.chars().any(char::is_whitespace) {
            return Err(CliError::Config(format!(
                "string values may not contain whitespace: {token}"
            )));
        }
        Ok(ConfigValue::Str(token.to_string()))
    }

    fn parse(text: &str) -> Result<ConfigValue> {
        if text.contains(',') {
            let items = text
                .split(',')
                .map(ConfigValue::parse_scalar)
                .collect::<Result<Vec<_>>>()?;
            Ok(ConfigValue::List(items))
        } else {
            ConfigValue::parse_scalar(text)
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            ConfigValue::Int(i) => Some(*i as f64),
            ConfigValue::Rational(r) => Some(*r.numer() as f64 / *r.denom() as f64),
            ConfigValue::Float(x) => Some(*x),
            _ => None,
        }
    }

    fn as_hurst_value(&self) -> Option<HurstValue> {
        match self {
            ConfigValue::Int(i) => HurstValue::exact(*i, 1).ok(),
            ConfigValue::Rational(r) => HurstValue::exact(*r.numer(), *r.denom()).ok(),
            ConfigValue::Float(x) => Some(HurstValue::approx(*x)),
            _ => None,
        }
    }
}

impl fmt::Display for ConfigValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigValue::Int(i) => write!(f, "{i}"),
            ConfigValue::Rational(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            ConfigValue::Float(x) => write!(f, "{x:?}"),
            ConfigValue::Str(s) => write!(f, "{s}"),
            ConfigValue::List(items) => {
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{item}")?;
                }
                Ok(())
            }
        }
    }
}

fn valid_key(key: &str) -> bool {
    !key.is_empty()
        && !key.starts_with('.')
        && !key.ends_with('.')
        && !key.contains("..")
        && key
            .bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_' || b == b'.')
}

/// Parsed experiment configuration: a sorted map of typed values.
#[derive(Clone, Debug, Default)]
pub struct ExperimentConfig {
    entries: BTreeMap<String, ConfigValue>,
}

impl ExperimentConfig {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Parse the flat text format: one `key=value` per line, `#` comments,
    /// blank lines ignored, duplicate keys rejected.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected key=value, got `{line}`", lineno + 1))
            })?;
            let key = key.trim();
            if !valid_key(key) {
                return Err(CliError::Config(format!("line {}: bad key `{key}`", lineno + 1)));
            }
            let value = ConfigValue::parse(value)?;
            if entries.insert(key.to_string(), value).is_some() {
                return Err(CliError::Config(format!("duplicate key `{key}`")));
            }
        }
        Ok(ExperimentConfig { entries })
    }

    /// Apply a `--set key=value` override, replacing any existing entry.
    pub fn apply_set(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("expected key=value, got `{assignment}`")))?;
        let key = key.trim();
        if !valid_key(key) {
            return Err(CliError::Config(format!("bad key `{key}`")));
        }
        self.entries.insert(key.to_string(), ConfigValue::parse(value)?);
        Ok(())
    }

    /// Canonical serialization: sorted keys, one line each, shortest
    /// round-trip decimals.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for (key, value) in &self.entries {
            out.push_str(key);
            out.push('=');
            out.push_str(&value.to_string());
            out.push('\n');
        }
        out
    }

    /// Hex digest of the canonical serialization.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        let mut hex = String::with_capacity(64);
        for byte in digest {
            use fmt::Write;
            write!(hex, "{byte:02x}").expect("writing to a string");
        }
        hex
    }

    /// Key-to-canonical-value map, for echoing inputs into records.
    pub fn echo(&self) -> BTreeMap<String, String> {
        self.entries
            .iter()
            .map(|(k, v)| (k.clone(), v.to_string()))
            .collect()
    }

    pub fn get(&self, key: &str) -> Option<&ConfigValue> {
        self.entries.get(key)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(v) => v
                .as_f64()
                .map(Some)
                .ok_or_else(|| CliError::Config(format!("`{key}` must be a number"))),
        }
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        self.opt_f64(key)?
            .ok_or_else(|| CliError::Config(format!("missing required key `{key}`")))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.opt_f64(key)?.unwrap_or(default))
    }

    pub fn opt_u64(&self, key: &str) -> Result<Option<u64>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(ConfigValue::Int(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(_) => Err(CliError::Config(format!(
                "`{key}` must be a nonnegative integer"
            ))),
        }
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        Ok(self.opt_u64(key)?.unwrap_or(default))
    }

    pub fn u32(&self, key: &str) -> Result<u32> {
        self.opt_u64(key)?
            .ok_or_else(|| CliError::Config(format!("missing required key `{key}`")))?
            .try_into()
            .map_err(|_| CliError::Config(format!("`{key}` out of range")))
    }

    pub fn u32_or(&self, key: &str, default: u32) -> Result<u32> {
        match self.opt_u64(key)? {
            None => Ok(default),
            Some(v) => v
                .try_into()
                .map_err(|_| CliError::Config(format!("`{key}` out of range"))),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.opt_u64(key)? {
            None => Ok(default),
            Some(v) => v
                .try_into()
                .map_err(|_| CliError::Config(format!("`{key}` out of range"))),
        }
    }

    pub fn opt_str(&self, key: &str) -> Result<Option<&str>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(ConfigValue::Str(s)) => Ok(Some(s)),
            Some(_) => Err(CliError::Config(format!("`{key}` must be a string"))),
        }
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> Result<&'a str> {
        Ok(self.opt_str(key)?.unwrap_or(default))
    }

    pub fn opt_f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some(value) = self.entries.get(key) else {
            return Ok(None);
        };
        let items: Option<Vec<f64>> = match value {
            ConfigValue::List(items) => items.iter().map(ConfigValue::as_f64).collect(),
            scalar => scalar.as_f64().map(|x| vec![x]),
        };
        items
            .map(Some)
            .ok_or_else(|| CliError::Config(format!("`{key}` must be a list of numbers")))
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>> {
        self.opt_f64_list(key)?
            .ok_or_else(|| CliError::Config(format!("missing required key `{key}`")))
    }

    /// Hurst exponents from `hurst.h0` and `hurst.h`, exact when written
    /// as integers or rationals.
    pub fn hurst(&self) -> Result<HurstParams> {
        let h0 = self
            .entries
            .get("hurst.h0")
            .ok_or_else(|| CliError::Config("missing required key `hurst.h0`".into()))?
            .as_hurst_value()
            .ok_or_else(|| CliError::Config("`hurst.h0` must be a number".into()))?;
        let spatial = match self
            .entries
            .get("hurst.h")
            .ok_or_else(|| CliError::Config("missing required key `hurst.h`".into()))?
        {
            ConfigValue::List(items) => items
                .iter()
                .map(ConfigValue::as_hurst_value)
                .collect::<Option<Vec<_>>>(),
            scalar => scalar.as_hurst_value().map(|v| vec![v]),
        }
        .ok_or_else(|| CliError::Config("`hurst.h` must be a list of numbers".into()))?;
        HurstParams::new(h0, spatial).map_err(CliError::from)
    }

    /// Monte Carlo sample counts from the `mc.*` section, with the
    /// estimator defaults where unset.
    pub fn mc(&self) -> Result<MomentConfig> {
        let defaults = MomentConfig::default();
        Ok(MomentConfig {
            ensembles: self.usize_or("mc.paths", defaults.ensembles)?,
            spectral: self.usize_or("mc.spectral_samples", defaults.spectral)?,
            steps: self.usize_or("mc.steps", defaults.steps)?,
            seed: self.u64_or("mc.seed", defaults.seed)?,
        })
    }
}
