//! Decomposition along a monomial, Gevrey bounds in a monomial, and the
//! invariants of summability levels.

use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::{BivariateSeries, MonomialIndex};

/// `f = sum_n f_n (x1^p x2^q)^n` where no `f_n` contains a monomial
/// divisible by `x1^p x2^q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct TDecomposition<S> {
    pub monomial: MonomialIndex,
    pub layers: Vec<BivariateSeries<S>>,
    pub source_trunc: usize,
}

pub fn t_decompose<S: Scalar>(f: &BivariateSeries<S>, monomial: MonomialIndex) -> TDecomposition<S> {
    let MonomialIndex { p, q } = monomial;
    let trunc = f.trunc();
    let count = trunc / (p + q) + 1;
    let mut layers: Vec<BivariateSeries<S>> = (0..count)
        .map(|n| BivariateSeries::zero(f.shape(), trunc - n * (p + q)))
        .collect();
    for ((a, b), v) in f.terms() {
        let n = (a / p).min(b / q);
        layers[n].accumulate((a - n * p, b - n * q), v.to_vec());
    }
    TDecomposition { monomial, layers, source_trunc: trunc }
}

/// Inverse of [`t_decompose`]. Layers absent from the list count as zero.
pub fn t_recompose<S: Scalar>(d: &TDecomposition<S>) -> Result<BivariateSeries<S>> {
    let MonomialIndex { p, q } = d.monomial;
    let shape = match d.layers.first() {
        Some(l) => l.shape(),
        None => return Ok(BivariateSeries::zero(crate::series::Shape::SCALAR, d.source_trunc)),
    };
    let mut trunc = d.source_trunc;
    for (n, layer) in d.layers.iter().enumerate() {
        if layer.shape() != shape {
            return Err(Error::ShapeMismatch { expected: shape, found: layer.shape() });
        }
        for ((m, j), _) in layer.terms() {
            if m >= p && j >= q {
                return Err(Error::LayerSupport { layer: n, m, j });
            }
        }
        trunc = trunc.min(layer.trunc() + n * (p + q));
    }
    let mut out = BivariateSeries::zero(shape, trunc);
    for (n, layer) in d.layers.iter().enumerate() {
        for ((m, j), v) in layer.terms() {
            out.accumulate((m + n * p, j + n * q), v.to_vec());
        }
    }
    Ok(out)
}

/// `log min{n!^{1/p}, m!^{1/q}}`.
pub fn log_min_factorial(n: usize, m: usize, monomial: MonomialIndex) -> f64 {
    let a = ln_factorial(n as u64) / monomial.p as f64;
    let b = ln_factorial(m as u64) / monomial.q as f64;
    a.min(b)
}

fn coeff_norm<S: Scalar>(v: &[S]) -> f64 {
    v.iter().map(|x| x.modulus().powi(2)).sum::<f64>().sqrt()
}

/// Outcome of testing `|a_{n,m}| <= C A^{n+m} min{n!^{s/p}, m!^{s/q}}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Certificate {
    Bound { c: f64, a: f64 },
    /// Per-degree roots `(|a|/min{..})^{1/(n+m)}` grew at every step.
    Refused { growth: Vec<(usize, f64)> },
}

impl Certificate {
    pub fn is_bound(&self) -> bool {
        matches!(self, Certificate::Bound { .. })
    }
}

/// Relative margin below which consecutive roots count as equal.
const GROWTH_MARGIN: f64 = 1e-9;

pub fn gevrey_certificate<S: Scalar>(
    f: &BivariateSeries<S>,
    monomial: MonomialIndex,
    s: f64,
    degree_floor: usize,
) -> Result<Certificate> {
    if !(s >= 0.0) {
        return Err(Error::Invalid(format!("Gevrey order must be nonnegative, got {s}")));
    }
    if degree_floor > f.trunc() {
        return Err(Error::EmptyWindow { floor: degree_floor, trunc: f.trunc() });
    }
    let mut log_rho: std::collections::BTreeMap<usize, f64> = Default::default();
    for ((n, m), v) in f.terms() {
        let d = n + m;
        if d < degree_floor {
            continue;
        }
        let norm = coeff_norm(v);
        if norm == 0.0 {
            continue;
        }
        let value = norm.ln() - s * log_min_factorial(n, m, monomial);
        let slot = log_rho.entry(d).or_insert(f64::NEG_INFINITY);
        *slot = slot.max(value);
    }
    if log_rho.is_empty() {
        return Ok(Certificate::Bound { c: 0.0, a: 1.0 });
    }
    let roots: Vec<(usize, f64)> = log_rho
        .iter()
        .filter(|(d, _)| **d > 0)
        .map(|(d, lr)| (*d, (lr / *d as f64).exp()))
        .collect();
    let increasing = roots.len() >= 3
        && roots.windows(2).all(|w| w[1].1 > w[0].1 * (1.0 + GROWTH_MARGIN));
    if increasing {
        return Ok(Certificate::Refused { growth: roots });
    }
    let a = roots.iter().map(|r| r.1).fold(0.0, f64::max);
    let a = if a > 0.0 { a } else { 1.0 };
    let c = log_rho
        .iter()
        .map(|(d, lr)| (lr - *d as f64 * a.ln()).exp())
        .fold(0.0, f64::max);
    Ok(Certificate::Bound { c, a })
}

/// Fitted Gevrey data for a series in one monomial.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GevreyEstimate {
    pub monomial: MonomialIndex,
    pub s_hat: f64,
    pub c_hat: f64,
    pub a_hat: f64,
    pub window: (usize, usize),
    pub residual: f64,
}

impl GevreyEstimate {
    /// Value of the fitted bound at `(n, m)`, on the log scale.
    pub fn fitted_log(&self, n: usize, m: usize) -> f64 {
        self.c_hat.ln()
            + (n + m) as f64 * self.a_hat.ln()
            + self.s_hat * log_min_factorial(n, m, self.monomial)
    }
}

const S_MAX: f64 = 6.0;
const S_STEP: f64 = 0.005;

struct Envelope {
    rows: Vec<(usize, f64, f64)>,
}

impl Envelope {
    /// Least-squares line through the per-degree maxima of
    /// `log|a| - s log min{..}`; returns (intercept, slope, ssr, max error).
    fn fit(&self, s: f64) -> (f64, f64, f64, f64) {
        let mut best: std::collections::BTreeMap<usize, f64> = Default::default();
        for &(d, lmf, la) in &self.rows {
            let v = la - s * lmf;
            let slot = best.entry(d).or_insert(f64::NEG_INFINITY);
            *slot = slot.max(v);
        }
        let k = best.len() as f64;
        let mean_d = best.keys().map(|d| *d as f64).sum::<f64>() / k;
        let mean_v = best.values().sum::<f64>() / k;
        let sdd: f64 = best.keys().map(|d| (*d as f64 - mean_d).powi(2)).sum();
        let sdv: f64 = best.iter().map(|(d, v)| (*d as f64 - mean_d) * (v - mean_v)).sum();
        let slope = sdv / sdd;
        let intercept = mean_v - slope * mean_d;
        let mut ssr = 0.0;
        let mut worst: f64 = 0.0;
        for (d, v) in &best {
            let e = v - intercept - slope * *d as f64;
            ssr += e * e;
            worst = worst.max(e.abs());
        }
        (intercept, slope, ssr, worst)
    }
}

/// Estimate over total degrees `[trunc/3, trunc]`.
pub fn gevrey_estimate<S: Scalar>(f: &BivariateSeries<S>, monomial: MonomialIndex) -> Result<GevreyEstimate> {
    let lo = f.trunc().div_ceil(3);
    gevrey_estimate_in(f, monomial, lo, f.trunc())
}

/// For every trial order `s` the per-degree maxima of
/// `log|a| - s log min{n!^{1/p}, m!^{1/q}}` are fitted by a line
/// `log C + (n+m) log A`; `s_hat` minimizes the residual, ties going to
/// the smaller order.
pub fn gevrey_estimate_in<S: Scalar>(
    f: &BivariateSeries<S>,
    monomial: MonomialIndex,
    lo: usize,
    hi: usize,
) -> Result<GevreyEstimate> {
    let rows: Vec<(usize, f64, f64)> = f
        .terms()
        .filter(|((n, m), _)| (lo..=hi).contains(&(n + m)))
        .filter_map(|((n, m), v)| {
            let norm = coeff_norm(v);
            (norm > 0.0).then(|| (n + m, log_min_factorial(n, m, monomial), norm.ln()))
        })
        .collect();
    let mut degrees: Vec<usize> = rows.iter().map(|r| r.0).collect();
    degrees.sort_unstable();
    degrees.dedup();
    if degrees.len() < 3 {
        return Err(Error::DegenerateWindow { distinct: degrees.len() });
    }
    let env = Envelope { rows };
    let objective = |s: f64| env.fit(s).2;

    let steps = (S_MAX / S_STEP).round() as usize;
    let grid: Vec<(f64, f64)> = (0..=steps)
        .map(|i| {
            let s = i as f64 * S_STEP;
            (s, objective(s))
        })
        .collect();
    let min_val = grid.iter().map(|g| g.1).fold(f64::INFINITY, f64::min);
    let tie = 1e-12 * (1.0 + min_val);
    let idx = grid.iter().position(|g| g.1 <= min_val + tie).unwrap_or(0);

    // Golden-section refinement inside the neighbouring grid cells.
    let mut a = grid[idx.saturating_sub(1)].0;
    let mut b = grid[(idx + 1).min(steps)].0;
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..60 {
        if b - a < 1e-9 {
            break;
        }
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if objective(c) <= objective(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let refined = 0.5 * (a + b);
    let s_hat = if objective(refined) < grid[idx].1 - tie {
        refined
    } else {
        grid[idx].0
    }
    .max(0.0);
    let (intercept, slope, _, worst) = env.fit(s_hat);
    Ok(GevreyEstimate {
        monomial,
        s_hat,
        c_hat: intercept.exp(),
        a_hat: slope.exp(),
        window: (lo, hi),
        residual: worst,
    })
}

/// "k-summable in x1^p x2^q".
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SummabilityLevel {
    pub p: usize,
    pub q: usize,
    pub k: Rational64,
}

impl SummabilityLevel {
    pub fn new(p: usize, q: usize, k: Rational64) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::Invalid(format!("level exponents must be positive, got ({p},{q})")));
        }
        if !k.is_positive() {
            return Err(Error::Invalid(format!("level k must be positive, got {k}")));
        }
        Ok(SummabilityLevel { p, q, k })
    }

    pub fn monomial(&self) -> MonomialIndex {
        MonomialIndex { p: self.p, q: self.q }
    }

    pub fn k_f64(&self) -> f64 {
        *self.k.numer() as f64 / *self.k.denom() as f64
    }
}

impl fmt::Display for SummabilityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.p, self.q, self.k)
    }
}

pub fn parse_rational64(text: &str) -> Result<Rational64> {
    let text = text.trim();
    let bad = || Error::Input(format!("invalid rational '{text}'"));
    let r = match text.split_once('/') {
        Some((a, b)) => {
            let a: i64 = a.trim().parse().map_err(|_| bad())?;
            let b: i64 = b.trim().parse().map_err(|_| bad())?;
            if b == 0 {
                return Err(bad());
            }
            Rational64::new(a, b)
        }
        None => Rational64::from_integer(text.parse().map_err(|_| bad())?),
    };
    Ok(r)
}

impl FromStr for SummabilityLevel {
    type Err = Error;

    /// Parses `p,q,k` with `k` an integer or a fraction `a/b`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::Input(format!("level '{s}' must have the form p,q,k")));
        }
        let int = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::Input(format!("invalid exponent '{t}' in level '{s}'")))
        };
        let level = SummabilityLevel::new(int(parts[0])?, int(parts[1])?, parse_rational64(parts[2])?);
        level.map_err(|e| Error::Input(e.to_string()))
    }
}

#[derive(Serialize, Deserialize)]
struct LevelRepr {
    p: usize,
    q: usize,
    k: serde_json::Value,
}

impl Serialize for SummabilityLevel {
    fn serialize<Z: serde::Serializer>(&self, z: Z) -> std::result::Result<Z::Ok, Z::Error> {
        LevelRepr { p: self.p, q: self.q, k: serde_json::Value::from(self.k.to_string()) }.serialize(z)
    }
}

impl<'de> Deserialize<'de> for SummabilityLevel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = LevelRepr::deserialize(d)?;
        let k = match &repr.k {
            serde_json::Value::String(s) => parse_rational64(s),
            serde_json::Value::Number(n) => n
                .as_i64()
                .map(Rational64::from_integer)
                .ok_or_else(|| Error::Input(format!("k must be an integer or 'a/b', got {n}"))),
            other => Err(Error::Input(format!("invalid k {other}"))),
        }
        .map_err(serde::de::Error::custom)?;
        SummabilityLevel::new(repr.p, repr.q, k).map_err(serde::de::Error::custom)
    }
}

/// `(k p, k q)`: two levels describe the same class exactly when these agree.
pub fn canonical_level(level: &SummabilityLevel) -> (Rational64, Rational64) {
    let p = Rational64::from_integer(level.p as i64);
    let q = Rational64::from_integer(level.q as i64);
    (level.k * p, level.k * q)
}

/// Bound on the Gevrey order in `to` of a series that is `s`-Gevrey in `from`.
pub fn cross_monomial_order(s: f64, from: MonomialIndex, to: MonomialIndex) -> f64 {
    if s.is_zero() {
        return 0.0;
    }
    let r1 = to.p as f64 / from.p as f64;
    let r2 = to.q as f64 / from.q as f64;
    r1.max(r2) * s
}
