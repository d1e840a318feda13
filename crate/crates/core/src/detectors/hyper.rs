//! Hyperparameter values, assignments and grids.

use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::FitErrorKind;

/// A single hyperparameter value as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HpValue {
    Int(i64),
    Float(f64),
    Text(String),
}

impl fmt::Display for HpValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HpValue::Int(v) => write!(f, "{v}"),
            HpValue::Float(v) => write!(f, "{v}"),
            HpValue::Text(v) => f.write_str(v),
        }
    }
}

impl From<i64> for HpValue {
    fn from(v: i64) -> Self {
        HpValue::Int(v)
    }
}

impl From<f64> for HpValue {
    fn from(v: f64) -> Self {
        HpValue::Float(v)
    }
}

impl From<&str> for HpValue {
    fn from(v: &str) -> Self {
        HpValue::Text(v.to_string())
    }
}

/// One point of a grid: parameter name to value, in declaration order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HyperParams(pub IndexMap<String, HpValue>);

impl fmt::Display for HyperParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, v) in &self.0 {
            if !first {
                f.write_str(";")?;
            }
            write!(f, "{k}={v}")?;
            first = false;
        }
        Ok(())
    }
}

type HpResult<T> = std::result::Result<T, FitErrorKind>;

fn invalid(msg: String) -> FitErrorKind {
    FitErrorKind::InvalidHyperparameter(msg)
}

impl HyperParams {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl Into<HpValue>) -> Self {
        self.0.insert(key.to_string(), value.into());
        self
    }

    pub fn get(&self, key: &str) -> Option<&HpValue> {
        self.0.get(key)
    }

    pub fn f64_or(&self, key: &str, default: f64) -> HpResult<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(HpValue::Int(v)) => Ok(*v as f64),
            Some(HpValue::Float(v)) => Ok(*v),
            Some(HpValue::Text(t)) => t.parse().map_err(|_| invalid(format!("{key}={t} is not a number"))),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> HpResult<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(HpValue::Int(v)) if *v >= 0 => Ok(*v as usize),
            Some(v) => Err(invalid(format!("{key}={v} is not a nonnegative integer"))),
        }
    }

    pub fn u64_or(&self, key: &str, default: u64) -> HpResult<u64> {
        self.usize_or(key, default as usize).map(|v| v as u64)
    }

    pub fn text_or<'a>(&'a self, key: &str, default: &'a str) -> HpResult<&'a str> {
        match self.get(key) {
            None => Ok(default),
            Some(HpValue::Text(t)) => Ok(t),
            Some(v) => Err(invalid(format!("{key}={v} is not a string option"))),
        }
    }

    /// Neighbour count: a positive integer, or `"<fraction>N"` meaning
    /// `ceil(fraction * n_train)` (at least 1).
    pub fn neighbors(&self, key: &str, default: usize, n_train: usize) -> HpResult<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(HpValue::Int(v)) if *v >= 1 => Ok(*v as usize),
            Some(HpValue::Text(t)) => resolve_fraction_of_n(t, n_train)
                .ok_or_else(|| invalid(format!("{key}={t} is not of the form <fraction>N"))),
            Some(v) => Err(invalid(format!("{key}={v} is not a neighbour count"))),
        }
    }
}

/// `"0.01N"` with `n = 2000` gives 20. Rounds up, tolerating binary
/// representation error in the product.
pub fn resolve_fraction_of_n(text: &str, n: usize) -> Option<usize> {
    let frac: f64 = text.trim().strip_suffix(['N', 'n'])?.trim().parse().ok()?;
    if !(frac > 0.0) || !frac.is_finite() {
        return None;
    }
    let raw = frac * n as f64;
    Some(((raw - 1e-9 * raw.max(1.0)).ceil() as usize).max(1))
}

/// Parameter name to candidate values, as declared in configuration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamGrid(pub IndexMap<String, Vec<HpValue>>);

impl ParamGrid {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with<V: Into<HpValue>>(mut self, key: &str, values: impl IntoIterator<Item = V>) -> Self {
        self.0.insert(key.to_string(), values.into_iter().map(Into::into).collect());
        self
    }

    /// Cartesian product in declaration order; the last parameter varies
    /// fastest. An empty grid expands to a single empty assignment.
    pub fn expand(&self) -> Vec<HyperParams> {
        let mut out = vec![HyperParams::new()];
        for (key, values) in &self.0 {
            let mut next = Vec::with_capacity(out.len() * values.len());
            for base in &out {
                for v in values {
                    let mut hp = base.clone();
                    hp.0.insert(key.clone(), v.clone());
                    next.push(hp);
                }
            }
            out = next;
        }
        out
    }
}
