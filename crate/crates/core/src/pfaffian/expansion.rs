//! Polynomials in the unknown `y = (y_1, .., y_l)` whose coefficients are
//! truncated series in `(x1, x2)`.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::{BivariateSeries, BlowupMap, Shape, Var};

/// `sum_alpha c_alpha(x1, x2) y^alpha`; every coefficient has the same shape
/// and the expansion as a whole is known up to total x-degree `trunc`.
#[derive(Clone, Debug, PartialEq)]
pub struct YExpansion<S> {
    nvars: usize,
    shape: Shape,
    trunc: usize,
    terms: BTreeMap<Vec<u32>, BivariateSeries<S>>,
}

fn add_index(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn unit_index(nvars: usize, j: usize) -> Vec<u32> {
    let mut a = vec![0; nvars];
    a[j] = 1;
    a
}

impl<S: Scalar> YExpansion<S> {
    pub fn zero(nvars: usize, shape: Shape, trunc: usize) -> Self {
        YExpansion { nvars, shape, trunc, terms: BTreeMap::new() }
    }

    /// Builds an expansion; its truncation is the smallest coefficient
    /// truncation (or `trunc` when smaller).
    pub fn from_terms<I>(nvars: usize, shape: Shape, trunc: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, BivariateSeries<S>)>,
    {
        let mut out = Self::zero(nvars, shape, trunc);
        for (alpha, series) in terms {
            out.add_term(alpha, series)?;
        }
        Ok(out)
    }

    pub fn add_term(&mut self, alpha: Vec<u32>, series: BivariateSeries<S>) -> Result<()> {
        if alpha.len() != self.nvars {
            return Err(Error::Invalid(format!(
                "multi-index {alpha:?} has length {}, expected {}",
                alpha.len(),
                self.nvars
            )));
        }
        if series.shape() != self.shape {
            return Err(Error::ShapeMismatch { expected: self.shape, found: series.shape() });
        }
        if series.trunc() < self.trunc {
            self.set_trunc(series.trunc());
        }
        let series = series.truncated(self.trunc);
        let sum = match self.terms.remove(&alpha) {
            Some(prev) => prev.add(&series)?,
            None => series,
        };
        if !sum.is_zero() {
            self.terms.insert(alpha, sum);
        }
        Ok(())
    }

    fn set_trunc(&mut self, trunc: usize) {
        self.trunc = trunc;
        let terms = std::mem::take(&mut self.terms);
        self.terms = terms
            .into_iter()
            .map(|(a, s)| (a, s.truncated(trunc)))
            .filter(|(_, s)| !s.is_zero())
            .collect();
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &BivariateSeries<S>)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, alpha: &[u32]) -> BivariateSeries<S> {
        self.terms
            .get(alpha)
            .cloned()
            .unwrap_or_else(|| BivariateSeries::zero(self.shape, self.trunc))
    }

    pub fn y_degree(&self) -> u32 {
        self.terms.keys().map(|a| a.iter().sum::<u32>()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero_within(&self, tol: f64) -> bool {
        self.terms.values().all(|s| s.is_zero_within(tol))
    }

    pub fn max_norm(&self) -> f64 {
        self.terms.values().map(BivariateSeries::max_norm).fold(0.0, f64::max)
    }

    /// Lowest x-degree of a non-negligible coefficient.
    pub fn valuation(&self, tol: f64) -> Option<usize> {
        self.terms.values().filter_map(|s| s.valuation(tol)).min()
    }

    /// Applies a coefficient-wise map; the new truncation is the smallest
    /// produced (or `trunc_hint` when there are no terms).
    pub fn try_map<F>(&self, trunc_hint: usize, f: F) -> Result<Self>
    where
        F: Fn(&BivariateSeries<S>) -> Result<BivariateSeries<S>>,
    {
        let mapped: Vec<(Vec<u32>, BivariateSeries<S>)> = self
            .terms
            .iter()
            .map(|(a, s)| Ok((a.clone(), f(s)?)))
            .collect::<Result<_>>()?;
        let trunc = mapped.iter().map(|(_, s)| s.trunc()).min().unwrap_or(trunc_hint).min(trunc_hint);
        let shape = mapped.first().map(|(_, s)| s.shape()).unwrap_or(self.shape);
        Self::from_terms(self.nvars, shape, trunc, mapped)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.nvars != other.nvars {
            return Err(Error::Invalid("expansions in different numbers of unknowns".into()));
        }
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch { expected: self.shape, found: other.shape });
        }
        let mut out = self.clone();
        if other.trunc < out.trunc {
            out.set_trunc(other.trunc);
        }
        for (a, s) in &other.terms {
            out.add_term(a.clone(), s.clone())?;
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for s in out.terms.values_mut() {
            *s = s.neg();
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = Self::zero(self.nvars, self.shape, self.trunc);
        for (a, s) in &self.terms {
            let v = s.scale(c);
            if !v.is_zero() {
                out.terms.insert(a.clone(), v);
            }
        }
        out
    }

    pub fn mul_monomial(&self, a: usize, b: usize) -> Self {
        let mut out = Self::zero(self.nvars, self.shape, self.trunc + a + b);
        for (al, s) in &self.terms {
            out.terms.insert(al.clone(), s.mul_monomial(a, b));
        }
        out
    }

    pub fn div_monomial(&self, a: usize, b: usize) -> Result<Self> {
        let hint = (self.trunc + 1).saturating_sub(a + b).saturating_sub(1);
        self.try_map(hint, |s| s.div_monomial(a, b))
    }

    pub fn derivative(&self, var: Var) -> Self {
        self.try_map(self.trunc.saturating_sub(1), |s| Ok(s.derivative(var)))
            .expect("derivatives keep shapes")
    }

    pub fn pullback(&self, map: &BlowupMap) -> Self {
        self.try_map(self.trunc, |s| Ok(s.pullback(map))).expect("pullbacks keep shapes")
    }

    pub fn truncated(&self, order: usize) -> Self {
        let mut out = self.clone();
        if order < out.trunc {
            out.set_trunc(order);
        }
        out
    }

    /// `m(x) * c_alpha(x)` for every coefficient.
    pub fn left_mul(&self, m: &BivariateSeries<S>) -> Result<Self> {
        let shape = m.shape().product(self.shape)?;
        let mut out = Self::zero(self.nvars, shape, self.trunc.min(m.trunc()));
        for (a, s) in &self.terms {
            out.add_term(a.clone(), m.mul(s)?)?;
        }
        Ok(out)
    }

    /// Product of expansions (coefficient shapes multiply as series do).
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let shape = self.shape.product(other.shape)?;
        let mut out = Self::zero(self.nvars, shape, self.trunc.min(other.trunc));
        for (a, s) in &self.terms {
            for (b, t) in &other.terms {
                out.add_term(add_index(a, b), s.mul(t)?)?;
            }
        }
        Ok(out)
    }

    /// `d/dy_j`.
    pub fn dy(&self, j: usize) -> Self {
        let mut out = Self::zero(self.nvars, self.shape, self.trunc);
        for (a, s) in &self.terms {
            if a[j] == 0 {
                continue;
            }
            let mut b = a.clone();
            b[j] -= 1;
            out.add_term(b, s.scale(&S::from_i64(a[j] as i64))).expect("same shape");
        }
        out
    }

    /// Row `j` of a vector-valued expansion, as a scalar expansion.
    pub fn component(&self, j: usize) -> Result<Self> {
        let mut out = Self::zero(self.nvars, Shape::SCALAR, self.trunc);
        for (a, s) in &self.terms {
            out.add_term(a.clone(), s.entry(j, 0)?)?;
        }
        Ok(out)
    }

    /// The directional term `(df/dy) g = sum_j (d f/d y_j) g_j`.
    pub fn jacobian_apply(&self, g: &Self) -> Result<Self> {
        let mut out = Self::zero(self.nvars, self.shape, self.trunc.min(g.trunc));
        for j in 0..self.nvars {
            let term = self.dy(j).mul(&g.component(j)?)?;
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// `f(x, y(x))` for a vector series `y`, known up to `min(trunc, y.trunc, order)`.
    pub fn substitute(&self, y: &BivariateSeries<S>, order: usize) -> Result<BivariateSeries<S>> {
        if y.shape() != Shape::vector(self.nvars) {
            return Err(Error::ShapeMismatch { expected: Shape::vector(self.nvars), found: y.shape() });
        }
        let trunc = self.trunc.min(y.trunc()).min(order);
        let comps: Vec<BivariateSeries<S>> = (0..self.nvars)
            .map(|j| y.entry(j, 0).map(|c| c.truncated(trunc)))
            .collect::<Result<_>>()?;
        let mut powers: Vec<Vec<BivariateSeries<S>>> = comps
            .iter()
            .map(|c| vec![BivariateSeries::scalar_constant(S::one(), trunc), c.clone()])
            .collect();
        let mut total = BivariateSeries::zero(self.shape, trunc);
        for (alpha, coeff) in &self.terms {
            let mut mono = BivariateSeries::scalar_constant(S::one(), trunc);
            for (j, &e) in alpha.iter().enumerate() {
                while powers[j].len() <= e as usize {
                    let next = powers[j].last().expect("nonempty").mul(&comps[j])?;
                    powers[j].push(next);
                }
                if e > 0 {
                    mono = mono.mul(&powers[j][e as usize])?;
                }
            }
            total = total.add(&coeff.truncated(trunc).mul(&mono)?)?;
        }
        Ok(total)
    }

    /// Constant (`x = 0`) coefficients, as a polynomial in `y`.
    pub fn constant_part(&self) -> Vec<(Vec<u32>, Vec<S>)> {
        self.terms
            .iter()
            .filter_map(|(a, s)| s.get(0, 0).map(|v| (a.clone(), v.to_vec())))
            .collect()
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(a, s)| json!({ "alpha": a, "series": s.to_json() }))
            .collect();
        Value::Array(terms)
    }

    pub fn from_json(value: &Value, nvars: usize, trunc: usize) -> Result<Self> {
        let list = value
            .as_array()
            .ok_or_else(|| Error::Input("expansion must be a list of {alpha, series}".into()))?;
        let mut out = Self::zero(nvars, Shape::vector(nvars), trunc);
        for item in list {
            let alpha: Vec<u32> = item
                .get("alpha")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Input("expansion term without 'alpha'".into()))?
                .iter()
                .map(|v| {
                    v.as_u64()
                        .map(|x| x as u32)
                        .ok_or_else(|| Error::Input("multi-index entries must be nonnegative integers".into()))
                })
                .collect::<Result<_>>()?;
            let series = BivariateSeries::from_json(
                item.get("series").ok_or_else(|| Error::Input("expansion term without 'series'".into()))?,
            )?;
            out.add_term(alpha, series).map_err(|e| Error::Input(e.to_string()))?;
        }
        Ok(out)
    }
}

/// Evaluates constant coefficients `sum_alpha c_alpha y^alpha` at a point.
pub fn evaluate_constant<S: Scalar>(part: &[(Vec<u32>, Vec<S>)], y: &[S], len: usize) -> Vec<S> {
    let mut out = vec![S::zero(); len];
    for (alpha, c) in part {
        let mut w = S::one();
        for (j, &e) in alpha.iter().enumerate() {
            for _ in 0..e {
                w = w * y[j].clone();
            }
        }
        for (o, v) in out.iter_mut().zip(c) {
            *o = o.clone() + w.clone() * v.clone();
        }
    }
    out
}

/// Jacobian (row-major `len x nvars`) of the constant polynomial at `y`.
pub fn constant_jacobian<S: Scalar>(part: &[(Vec<u32>, Vec<S>)], y: &[S], len: usize) -> Vec<S> {
    let nvars = y.len();
    let mut out = vec![S::zero(); len * nvars];
    for (alpha, c) in part {
        for j in 0..nvars {
            if alpha[j] == 0 {
                continue;
            }
            let mut w = S::from_i64(alpha[j] as i64);
            for (i, &e) in alpha.iter().enumerate() {
                let e = if i == j { e - 1 } else { e };
                for _ in 0..e {
                    w = w * y[i].clone();
                }
            }
            for r in 0..len {
                out[r * nvars + j] = out[r * nvars + j].clone() + w.clone() * c[r].clone();
            }
        }
    }
    out
}
