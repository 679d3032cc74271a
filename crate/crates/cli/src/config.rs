use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::ValueEnum;
use monosum::borel::SummationConfig;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Float,
    Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Float coefficients at or below this modulus count as zero.
    pub residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { residual: 1e-10 }
    }
}

/// Everything a run depends on; embedded verbatim in every report.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub command: String,
    pub mode: Mode,
    pub output: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub summation: SummationConfig,
    pub tolerances: Tolerances,
    /// Command parameters such as `series`, `monomial` or `level`.
    pub params: BTreeMap<String, Value>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.tolerances.residual;
        if !(t > 0.0) {
            bail!("tolerances.residual must be positive, got {t}");
        }
        let s = &self.summation;
        if !(s.root_radius > 0.0) || !(s.cluster_tol > 0.0) {
            bail!("root_radius and cluster_tol must be positive");
        }
        s.quadrature.validate()?;
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.params.insert(key.to_string(), value.into());
    }

    pub fn set_opt<T: Into<Value>>(&mut self, key: &str, value: Option<T>) {
        if let Some(v) = value {
            self.set(key, v);
        }
    }

    pub fn has(&self, key: &str) -> bool {
        self.params.contains_key(key)
    }

    /// A parameter as text; numbers are accepted and printed.
    pub fn text(&self, key: &str) -> Result<String> {
        match self.params.get(key) {
            Some(Value::String(s)) => Ok(s.clone()),
            Some(Value::Number(n)) => Ok(n.to_string()),
            Some(Value::Array(items)) => Ok(items.iter().map(plain).collect::<Vec<_>>().join(",")),
            Some(other) => Err(anyhow!("parameter '{key}' has unsupported value {other}")),
            None => Err(anyhow!("missing required parameter --{}", key.replace('_', "-"))),
        }
    }

    /// A list parameter: a JSON array of strings, or one `;`-separated string.
    pub fn list(&self, key: &str) -> Result<Vec<String>> {
        match self.params.get(key) {
            Some(Value::Array(items)) => Ok(items.iter().map(plain).collect()),
            Some(Value::String(s)) => Ok(s.split(';').map(|p| p.trim().to_string()).filter(|p| !p.is_empty()).collect()),
            Some(other) => Err(anyhow!("parameter '{key}' must be a list, got {other}")),
            None => Err(anyhow!("missing required parameter --{}", key.replace('_', "-"))),
        }
    }

    pub fn path(&self, key: &str) -> Result<PathBuf> {
        self.text(key).map(PathBuf::from)
    }

    pub fn number<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        if !self.has(key) {
            return Ok(None);
        }
        let text = self.text(key)?;
        text.trim()
            .parse()
            .map(Some)
            .map_err(|_| anyhow!("parameter '{key}' is not a valid number: '{text}'"))
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// `"a,b"` into two integers.
pub fn parse_pair(text: &str, what: &str) -> Result<(usize, usize)> {
    let v = parse_usizes(text, what)?;
    match v.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => bail!("{what} '{text}' must have the form a,b"),
    }
}

pub fn parse_usizes(text: &str, what: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| anyhow!("{what} '{text}' must list nonnegative integers")))
        .collect()
}
