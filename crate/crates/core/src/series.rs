//! Truncated bivariate power series with scalar, vector or matrix
//! coefficients, together with the blow-up substitutions.
//!
//! A series stores only its nonzero coefficients, keyed by bidegree `(n, m)`
//! (the exponents of `x1` and `x2`). Every series carries a total-degree
//! truncation order: coefficients of bidegree `n + m <= trunc` are known
//! (absent means zero), coefficients beyond it are unknown. Arithmetic keeps
//! track of how far results are determined and never reports more.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dimensions of a coefficient; scalars are `1x1`, vectors `lx1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub rows: usize,
    pub cols: usize,
}

impl Shape {
    pub const SCALAR: Shape = Shape { rows: 1, cols: 1 };

    pub fn new(rows: usize, cols: usize) -> Self {
        Shape { rows, cols }
    }
    pub fn vector(len: usize) -> Self {
        Shape { rows: len, cols: 1 }
    }
    pub fn square(dim: usize) -> Self {
        Shape { rows: dim, cols: dim }
    }
    pub fn is_scalar(&self) -> bool {
        self.rows == 1 && self.cols == 1
    }
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Shape of a product; a scalar factor broadcasts.
    pub fn product(self, right: Shape) -> Result<Shape> {
        if self.is_scalar() {
            Ok(right)
        } else if right.is_scalar() {
            Ok(self)
        } else if self.cols == right.rows {
            Ok(Shape::new(self.rows, right.cols))
        } else {
            Err(Error::IncompatibleShapes { left: self, right })
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

/// The monomial `x1^p x2^q`, `p, q >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MonomialIndex {
    pub p: usize,
    pub q: usize,
}

impl MonomialIndex {
    pub fn new(p: usize, q: usize) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::Invalid(format!(
                "monomial exponents must be positive, got ({p},{q})"
            )));
        }
        Ok(MonomialIndex { p, q })
    }

    pub fn degree(&self) -> usize {
        self.p + self.q
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlowupAxis {
    /// `(x1, x2) -> (x1 x2^N, x2)`
    Pi1,
    /// `(x1, x2) -> (x1, x1^M x2)`
    Pi2,
}

/// A power of one of the two point blow-up charts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlowupMap {
    pub axis: BlowupAxis,
    pub power: usize,
}

impl BlowupMap {
    pub fn new(axis: BlowupAxis, power: usize) -> Result<Self> {
        if power == 0 {
            return Err(Error::Invalid("blow-up power must be at least 1".into()));
        }
        Ok(BlowupMap { axis, power })
    }

    pub fn pi1(power: usize) -> Self {
        BlowupMap { axis: BlowupAxis::Pi1, power: power.max(1) }
    }

    pub fn pi2(power: usize) -> Self {
        BlowupMap { axis: BlowupAxis::Pi2, power: power.max(1) }
    }

    /// Image bidegree of the monomial `x1^n x2^m`.
    pub fn map_bidegree(&self, n: usize, m: usize) -> (usize, usize) {
        match self.axis {
            BlowupAxis::Pi1 => (n, m + self.power * n),
            BlowupAxis::Pi2 => (n + self.power * m, m),
        }
    }
}

impl fmt::Display for BlowupMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let axis = match self.axis {
            BlowupAxis::Pi1 => "pi1",
            BlowupAxis::Pi2 => "pi2",
        };
        write!(f, "{axis}^{}", self.power)
    }
}

impl std::str::FromStr for BlowupMap {
    type Err = Error;

    /// Parses `pi1`, `pi2^3` and the like.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Input(format!("blow-up '{s}' must look like pi1^N or pi2^N"));
        let (axis, power) = s.trim().split_once('^').unwrap_or((s.trim(), "1"));
        let axis = match axis {
            "pi1" => BlowupAxis::Pi1,
            "pi2" => BlowupAxis::Pi2,
            _ => return Err(bad()),
        };
        let power: usize = power.trim().parse().map_err(|_| bad())?;
        BlowupMap::new(axis, power).map_err(|_| bad())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Var {
    X1,
    X2,
}

/// Row-major product of two coefficient blocks with scalar broadcasting.
pub(crate) fn block_mul<S: Scalar>(a: &[S], sa: Shape, b: &[S], sb: Shape) -> Vec<S> {
    if sa.is_scalar() {
        return b.iter().map(|v| a[0].clone() * v.clone()).collect();
    }
    if sb.is_scalar() {
        return a.iter().map(|v| v.clone() * b[0].clone()).collect();
    }
    let mut out = vec![S::zero(); sa.rows * sb.cols];
    for i in 0..sa.rows {
        for k in 0..sa.cols {
            let aik = &a[i * sa.cols + k];
            if aik.is_zero() {
                continue;
            }
            for j in 0..sb.cols {
                let prod = aik.clone() * b[k * sb.cols + j].clone();
                let slot = &mut out[i * sb.cols + j];
                *slot = slot.clone() + prod;
            }
        }
    }
    out
}

fn all_zero<S: Scalar>(v: &[S]) -> bool {
    v.iter().all(|x| x.is_zero())
}

#[derive(Clone, Debug, PartialEq)]
pub struct BivariateSeries<S> {
    shape: Shape,
    trunc: usize,
    terms: BTreeMap<(usize, usize), Vec<S>>,
}

impl<S: Scalar> BivariateSeries<S> {
    pub fn zero(shape: Shape, trunc: usize) -> Self {
        BivariateSeries { shape, trunc, terms: BTreeMap::new() }
    }

    /// Builds a series from `((n, m), value)` entries; duplicates are summed.
    pub fn from_entries<I>(entries: I, trunc: usize, shape: Shape) -> Result<Self>
    where
        I: IntoIterator<Item = ((usize, usize), Vec<S>)>,
    {
        let mut out = Self::zero(shape, trunc);
        for ((n, m), value) in entries {
            if n + m > trunc {
                return Err(Error::BeyondTruncation { n, m, trunc });
            }
            if value.len() != shape.len() {
                return Err(Error::ShapeMismatch {
                    expected: shape,
                    found: Shape::new(value.len(), 1),
                });
            }
            out.accumulate((n, m), value);
        }
        Ok(out)
    }

    pub fn from_scalar_entries<I>(entries: I, trunc: usize) -> Result<Self>
    where
        I: IntoIterator<Item = ((usize, usize), S)>,
    {
        Self::from_entries(
            entries.into_iter().map(|(k, v)| (k, vec![v])),
            trunc,
            Shape::SCALAR,
        )
    }

    pub fn constant(value: Vec<S>, shape: Shape, trunc: usize) -> Result<Self> {
        Self::from_entries([((0, 0), value)], trunc, shape)
    }

    pub fn scalar_constant(value: S, trunc: usize) -> Self {
        let mut out = Self::zero(Shape::SCALAR, trunc);
        out.accumulate((0, 0), vec![value]);
        out
    }

    pub fn identity(dim: usize, trunc: usize) -> Self {
        let mut v = vec![S::zero(); dim * dim];
        for i in 0..dim {
            v[i * dim + i] = S::one();
        }
        let mut out = Self::zero(Shape::square(dim), trunc);
        out.accumulate((0, 0), v);
        out
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = ((usize, usize), &[S])> + '_ {
        self.terms.iter().map(|(k, v)| (*k, v.as_slice()))
    }

    /// Stored coefficient, `None` when it is zero (or unknown).
    pub fn get(&self, n: usize, m: usize) -> Option<&[S]> {
        self.terms.get(&(n, m)).map(Vec::as_slice)
    }

    pub fn coeff_or_zero(&self, n: usize, m: usize) -> Vec<S> {
        self.get(n, m)
            .map(<[S]>::to_vec)
            .unwrap_or_else(|| vec![S::zero(); self.shape.len()])
    }

    /// Adds `value` to the coefficient at `(n, m)`; terms beyond the
    /// truncation order are dropped.
    pub(crate) fn accumulate(&mut self, key: (usize, usize), value: Vec<S>) {
        if key.0 + key.1 > self.trunc {
            return;
        }
        match self.terms.get_mut(&key) {
            Some(slot) => {
                for (s, v) in slot.iter_mut().zip(value) {
                    *s = s.clone() + v;
                }
                if all_zero(slot) {
                    self.terms.remove(&key);
                }
            }
            None => {
                if !all_zero(&value) {
                    self.terms.insert(key, value);
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero_within(&self, tol: f64) -> bool {
        self.terms
            .values()
            .all(|v| v.iter().all(|x| x.is_negligible(tol)))
    }

    /// Lowest total degree carrying a non-negligible coefficient.
    pub fn valuation(&self, tol: f64) -> Option<usize> {
        self.terms
            .iter()
            .filter(|(_, v)| v.iter().any(|x| !x.is_negligible(tol)))
            .map(|((n, m), _)| n + m)
            .min()
    }

    /// Largest coefficient modulus.
    pub fn max_norm(&self) -> f64 {
        self.terms
            .values()
            .flat_map(|v| v.iter().map(Scalar::modulus))
            .fold(0.0, f64::max)
    }

    /// Drops known coefficients above `order` when `order < trunc`.
    pub fn truncated(&self, order: usize) -> Self {
        if order >= self.trunc {
            return self.clone();
        }
        BivariateSeries {
            shape: self.shape,
            trunc: order,
            terms: self
                .terms
                .iter()
                .filter(|((n, m), _)| n + m <= order)
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
        }
    }

    /// Homogeneous part of total degree `d`.
    pub fn homogeneous_part(&self, d: usize) -> impl Iterator<Item = ((usize, usize), &[S])> + '_ {
        self.terms
            .range((0, d)..=(d, 0))
            .filter(move |((n, m), _)| n + m == d)
            .map(|(k, v)| (*k, v.as_slice()))
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch { expected: self.shape, found: other.shape });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.truncated(self.trunc.min(other.trunc));
        for (k, v) in &other.terms {
            out.accumulate(*k, v.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.map_values(|v| -v.clone())
    }

    pub fn scale(&self, factor: &S) -> Self {
        if factor.is_zero() {
            return Self::zero(self.shape, self.trunc);
        }
        self.map_values(|v| factor.clone() * v.clone())
    }

    fn map_values(&self, f: impl Fn(&S) -> S) -> Self {
        let mut out = Self::zero(self.shape, self.trunc);
        for (k, v) in &self.terms {
            out.accumulate(*k, v.iter().map(&f).collect());
        }
        out
    }

    /// Converts coefficients to another scalar type.
    pub fn convert<T: Scalar>(&self, f: impl Fn(&S) -> T) -> BivariateSeries<T> {
        let mut out = BivariateSeries::zero(self.shape, self.trunc);
        for (k, v) in &self.terms {
            out.accumulate(*k, v.iter().map(&f).collect());
        }
        out
    }

    pub fn to_float(&self) -> BivariateSeries<Complex64> {
        self.convert(Scalar::to_c64)
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let shape = self.shape.product(other.shape)?;
        let trunc = self.trunc.min(other.trunc);
        let mut acc: BTreeMap<(usize, usize), Vec<S>> = BTreeMap::new();
        for ((n1, m1), a) in &self.terms {
            let d1 = n1 + m1;
            if d1 > trunc {
                continue;
            }
            for ((n2, m2), b) in &other.terms {
                if d1 + n2 + m2 > trunc {
                    continue;
                }
                let prod = block_mul(a, self.shape, b, other.shape);
                let key = (n1 + n2, m1 + m2);
                match acc.get_mut(&key) {
                    Some(slot) => {
                        for (s, v) in slot.iter_mut().zip(prod) {
                            *s = s.clone() + v;
                        }
                    }
                    None => {
                        acc.insert(key, prod);
                    }
                }
            }
        }
        acc.retain(|_, v| !all_zero(v));
        Ok(BivariateSeries { shape, trunc, terms: acc })
    }

    /// Multiplication by the exact monomial `x1^a x2^b`; the result is
    /// determined `a + b` degrees further.
    pub fn mul_monomial(&self, a: usize, b: usize) -> Self {
        BivariateSeries {
            shape: self.shape,
            trunc: self.trunc + a + b,
            terms: self
                .terms
                .iter()
                .map(|((n, m), v)| ((n + a, m + b), v.clone()))
                .collect(),
        }
    }

    /// Exact division by `x1^a x2^b`.
    pub fn div_monomial(&self, a: usize, b: usize) -> Result<Self> {
        if a + b > self.trunc + 1 {
            return Err(Error::TruncationTooSmall { trunc: self.trunc, needed: a + b });
        }
        let mut terms = BTreeMap::new();
        for ((n, m), v) in &self.terms {
            if *n < a || *m < b {
                return Err(Error::NotDivisible { a, b });
            }
            terms.insert((n - a, m - b), v.clone());
        }
        Ok(BivariateSeries {
            shape: self.shape,
            trunc: (self.trunc + 1).saturating_sub(a + b).saturating_sub(1),
            terms,
        })
    }

    /// Term-wise partial derivative; known one degree less.
    pub fn derivative(&self, var: Var) -> Self {
        let trunc = self.trunc.saturating_sub(1);
        let mut out = Self::zero(self.shape, trunc);
        for ((n, m), v) in &self.terms {
            let (e, key) = match var {
                Var::X1 if *n > 0 => (*n, (n - 1, *m)),
                Var::X2 if *m > 0 => (*m, (*n, m - 1)),
                _ => continue,
            };
            let factor = S::from_i64(e as i64);
            out.accumulate(key, v.iter().map(|x| factor.clone() * x.clone()).collect());
        }
        out
    }

    /// Composition with a blow-up chart. Substitution only raises total
    /// degree, so the truncation order is preserved.
    pub fn pullback(&self, map: &BlowupMap) -> Self {
        let mut out = Self::zero(self.shape, self.trunc);
        for ((n, m), v) in &self.terms {
            out.accumulate(map.map_bidegree(*n, *m), v.clone());
        }
        out
    }

    /// Sum of the stored terms at a point.
    pub fn evaluate(&self, x1: &S, x2: &S) -> Vec<S> {
        let mut total = vec![S::zero(); self.shape.len()];
        let mut pow1 = vec![S::one()];
        let mut pow2 = vec![S::one()];
        for ((n, m), v) in &self.terms {
            while pow1.len() <= *n {
                let next = pow1.last().cloned().unwrap_or_else(S::one) * x1.clone();
                pow1.push(next);
            }
            while pow2.len() <= *m {
                let next = pow2.last().cloned().unwrap_or_else(S::one) * x2.clone();
                pow2.push(next);
            }
            let w = pow1[*n].clone() * pow2[*m].clone();
            for (t, c) in total.iter_mut().zip(v) {
                *t = t.clone() + w.clone() * c.clone();
            }
        }
        total
    }

    /// Lie bracket `AB - BA` of square matrix series.
    pub fn bracket(&self, other: &Self) -> Result<Self> {
        if !self.shape.is_square() {
            return Err(Error::NotSquare(self.shape));
        }
        if !other.shape.is_square() {
            return Err(Error::NotSquare(other.shape));
        }
        self.check_same_shape(other)?;
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// Entry `(i, j)` as a scalar series.
    pub fn entry(&self, i: usize, j: usize) -> Result<BivariateSeries<S>> {
        if i >= self.shape.rows || j >= self.shape.cols {
            return Err(Error::Invalid(format!("entry ({i},{j}) outside shape {}", self.shape)));
        }
        let idx = i * self.shape.cols + j;
        let mut out = BivariateSeries::zero(Shape::SCALAR, self.trunc);
        for (k, v) in &self.terms {
            out.accumulate(*k, vec![v[idx].clone()]);
        }
        Ok(out)
    }

    /// Constant coefficient as a row-major block.
    pub fn constant_term(&self) -> Vec<S> {
        self.coeff_or_zero(0, 0)
    }

    /// Assembles a block matrix from equally shaped blocks.
    pub fn block_matrix(blocks: &[Vec<BivariateSeries<S>>]) -> Result<Self> {
        let first = blocks
            .first()
            .and_then(|row| row.first())
            .ok_or_else(|| Error::Invalid("empty block matrix".into()))?;
        let bs = first.shape;
        let brows = blocks.len();
        let bcols = blocks[0].len();
        let shape = Shape::new(brows * bs.rows, bcols * bs.cols);
        let mut trunc = usize::MAX;
        for row in blocks {
            if row.len() != bcols {
                return Err(Error::Invalid("ragged block matrix".into()));
            }
            for b in row {
                if b.shape != bs {
                    return Err(Error::ShapeMismatch { expected: bs, found: b.shape });
                }
                trunc = trunc.min(b.trunc);
            }
        }
        let mut terms: BTreeMap<(usize, usize), Vec<S>> = BTreeMap::new();
        for (bi, row) in blocks.iter().enumerate() {
            for (bj, b) in row.iter().enumerate() {
                for ((n, m), v) in &b.terms {
                    if n + m > trunc {
                        continue;
                    }
                    let slot = terms
                        .entry((*n, *m))
                        .or_insert_with(|| vec![S::zero(); shape.len()]);
                    for i in 0..bs.rows {
                        for j in 0..bs.cols {
                            let r = bi * bs.rows + i;
                            let c = bj * bs.cols + j;
                            slot[r * shape.cols + c] = v[i * bs.cols + j].clone();
                        }
                    }
                }
            }
        }
        Ok(BivariateSeries { shape, trunc, terms })
    }

    /// Serializes to the JSON series format.
    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|((n, m), v)| {
                if self.shape.is_scalar() {
                    let (re, im) = v[0].to_json_parts();
                    json!({ "n": n, "m": m, "re": re, "im": im })
                } else {
                    let entries: Vec<Value> = v
                        .iter()
                        .map(|x| {
                            let (re, im) = x.to_json_parts();
                            json!({ "re": re, "im": im })
                        })
                        .collect();
                    json!({ "n": n, "m": m, "entries": entries })
                }
            })
            .collect();
        json!({
            "trunc": self.trunc,
            "shape": [self.shape.rows, self.shape.cols],
            "terms": terms,
        })
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let bad = |msg: &str| Error::Input(format!("series JSON: {msg}"));
        let trunc = value
            .get("trunc")
            .and_then(Value::as_u64)
            .ok_or_else(|| bad("missing integer 'trunc'"))? as usize;
        let shape = match value.get("shape") {
            None => Shape::SCALAR,
            Some(Value::Array(dims)) => {
                let dim = |i: usize| dims.get(i).and_then(Value::as_u64).map(|d| d as usize);
                match (dims.len(), dim(0), dim(1)) {
                    (0, _, _) => Shape::SCALAR,
                    (1, Some(r), _) => Shape::vector(r),
                    (2, Some(r), Some(c)) => Shape::new(r, c),
                    _ => return Err(bad("'shape' must be [rows, cols]")),
                }
            }
            Some(_) => return Err(bad("'shape' must be an array")),
        };
        if shape.is_empty() {
            return Err(bad("'shape' must be nonempty"));
        }
        let zero = Value::from(0);
        let mut entries = Vec::new();
        let terms = match value.get("terms") {
            None => &[][..],
            Some(Value::Array(t)) => t.as_slice(),
            Some(_) => return Err(bad("'terms' must be an array")),
        };
        for term in terms {
            let n = term.get("n").and_then(Value::as_u64).ok_or_else(|| bad("term without 'n'"))?;
            let m = term.get("m").and_then(Value::as_u64).ok_or_else(|| bad("term without 'm'"))?;
            let values = match term.get("entries") {
                Some(Value::Array(list)) => list
                    .iter()
                    .map(|e| {
                        S::from_json_parts(
                            e.get("re").unwrap_or(&zero),
                            e.get("im").unwrap_or(&zero),
                        )
                    })
                    .collect::<Result<Vec<S>>>()?,
                Some(_) => return Err(bad("'entries' must be an array")),
                None => vec![S::from_json_parts(
                    term.get("re").unwrap_or(&zero),
                    term.get("im").unwrap_or(&zero),
                )?],
            };
            entries.push(((n as usize, m as usize), values));
        }
        Self::from_entries(entries, trunc, shape)
    }
}

impl<S: Scalar> Serialize for BivariateSeries<S> {
    fn serialize<Z: Serializer>(&self, serializer: Z) -> std::result::Result<Z::Ok, Z::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de, S: Scalar> Deserialize<'de> for BivariateSeries<S> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let value = Value::deserialize(deserializer)?;
        Self::from_json(&value).map_err(serde::de::Error::custom)
    }
}
