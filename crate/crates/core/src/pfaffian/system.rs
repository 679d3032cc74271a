use serde_json::{json, Value};

use super::expansion::{unit_index, YExpansion};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::{BivariateSeries, BlowupAxis, BlowupMap, Shape, Var};

/// Exponents `(p, q, p', q')` of
/// `x2^q x1^{p+1} dy/dx1 = f1`, `x1^{p'} x2^{q'+1} dy/dx2 = f2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Exponents {
    pub p: usize,
    pub q: usize,
    pub p2: usize,
    pub q2: usize,
}

impl Exponents {
    pub fn new(p: usize, q: usize, p2: usize, q2: usize) -> Result<Self> {
        if p == 0 || q == 0 || p2 == 0 || q2 == 0 {
            return Err(Error::Exponents(format!("exponents must be positive, got ({p},{q},{p2},{q2})")));
        }
        Ok(Exponents { p, q, p2, q2 })
    }

    pub fn as_array(&self) -> [usize; 4] {
        [self.p, self.q, self.p2, self.q2]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PfaffianSystem<S> {
    pub exponents: Exponents,
    pub dim: usize,
    /// Cap on the degree in `y` of both right-hand sides.
    pub d_y: u32,
    pub f1: YExpansion<S>,
    pub f2: YExpansion<S>,
}

impl<S: Scalar> PfaffianSystem<S> {
    pub fn new(exponents: Exponents, dim: usize, d_y: u32, f1: YExpansion<S>, f2: YExpansion<S>) -> Result<Self> {
        for (name, f) in [("f1", &f1), ("f2", &f2)] {
            if f.nvars() != dim || f.shape() != Shape::vector(dim) {
                return Err(Error::Invalid(format!("{name} must take and return vectors of length {dim}")));
            }
            if f.y_degree() > d_y {
                return Err(Error::Invalid(format!("{name} has degree {} in y, above the cap {d_y}", f.y_degree())));
            }
        }
        Ok(PfaffianSystem { exponents, dim, d_y, f1, f2 })
    }

    pub fn trunc(&self) -> usize {
        self.f1.trunc().min(self.f2.trunc())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "exponents": self.exponents.as_array(),
            "dim": self.dim,
            "d_y": self.d_y,
            "trunc": self.trunc(),
            "f1": self.f1.to_json(),
            "f2": self.f2.to_json(),
        })
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let bad = |m: &str| Error::Input(format!("system JSON: {m}"));
        let exps: Vec<usize> = value
            .get("exponents")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing 'exponents'"))?
            .iter()
            .map(|v| v.as_u64().map(|x| x as usize).ok_or_else(|| bad("exponents must be integers")))
            .collect::<Result<_>>()?;
        if exps.len() != 4 {
            return Err(bad("'exponents' must list p, q, p', q'"));
        }
        let exponents = Exponents::new(exps[0], exps[1], exps[2], exps[3]).map_err(|e| bad(&e.to_string()))?;
        let dim = value.get("dim").and_then(Value::as_u64).ok_or_else(|| bad("missing 'dim'"))? as usize;
        if dim == 0 {
            return Err(bad("'dim' must be positive"));
        }
        let trunc = value.get("trunc").and_then(Value::as_u64).map(|t| t as usize).unwrap_or(usize::MAX);
        let empty = Value::Array(Vec::new());
        let f1 = YExpansion::from_json(value.get("f1").unwrap_or(&empty), dim, trunc)?;
        let f2 = YExpansion::from_json(value.get("f2").unwrap_or(&empty), dim, trunc)?;
        let cap = f1.y_degree().max(f2.y_degree());
        let d_y = value.get("d_y").and_then(Value::as_u64).map(|d| d as u32).unwrap_or(cap);
        let trunc = f1.trunc().min(f2.trunc());
        if trunc == usize::MAX {
            return Err(bad("'trunc' is required when f1 and f2 are empty"));
        }
        Self::new(exponents, dim, d_y, f1.truncated(trunc), f2.truncated(trunc)).map_err(|e| bad(&e.to_string()))
    }
}

/// Matrix whose column `j` is the `y_j` coefficient of `f`.
fn linear_part<S: Scalar>(f: &YExpansion<S>) -> Result<BivariateSeries<S>> {
    let l = f.nvars();
    let row: Vec<BivariateSeries<S>> = (0..l).map(|j| f.coefficient(&unit_index(l, j))).collect();
    BivariateSeries::block_matrix(&[row])
}

/// `A = df1/dy(x, 0)` and `B = df2/dy(x, 0)`.
pub fn linear_parts<S: Scalar>(sys: &PfaffianSystem<S>) -> Result<(BivariateSeries<S>, BivariateSeries<S>)> {
    Ok((linear_part(&sys.f1)?, linear_part(&sys.f2)?))
}

/// Difference of the two sides of the complete integrability identity,
/// known up to `min(order, trunc)`; the y-degree is kept in full.
pub fn integrability_residual<S: Scalar>(sys: &PfaffianSystem<S>, order: usize) -> Result<YExpansion<S>> {
    let Exponents { p, q, p2, q2 } = sys.exponents;
    let (f1, f2) = (&sys.f1, &sys.f2);
    let lhs = f1
        .mul_monomial(p2, q2)
        .scale(&S::from_i64(-(q as i64)))
        .add(&f1.derivative(Var::X2).mul_monomial(p2, q2 + 1))?
        .add(&f1.jacobian_apply(f2)?)?;
    let rhs = f2
        .mul_monomial(p, q)
        .scale(&S::from_i64(-(p2 as i64)))
        .add(&f2.derivative(Var::X1).mul_monomial(p + 1, q))?
        .add(&f2.jacobian_apply(f1)?)?;
    Ok(lhs.sub(&rhs)?.truncated(order))
}

/// `x1^{p'} x2^{q'} (x2 dA/dx2 - q A) - x1^p x2^q (x1 dB/dx1 - p' B) + [A, B]`.
pub fn linear_integrability_residual<S: Scalar>(
    a: &BivariateSeries<S>,
    b: &BivariateSeries<S>,
    exponents: Exponents,
) -> Result<BivariateSeries<S>> {
    let Exponents { p, q, p2, q2 } = exponents;
    if !a.shape().is_square() {
        return Err(Error::NotSquare(a.shape()));
    }
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch { expected: a.shape(), found: b.shape() });
    }
    let qa = a.scale(&S::from_i64(q as i64));
    let first = a.derivative(Var::X2).mul_monomial(0, 1).sub(&qa)?.mul_monomial(p2, q2);
    let pb = b.scale(&S::from_i64(p2 as i64));
    let second = b.derivative(Var::X1).mul_monomial(1, 0).sub(&pb)?.mul_monomial(p, q);
    first.sub(&second)?.add(&a.bracket(b)?)
}

/// `t1^e1 t2^e2 f` with possibly negative exponents.
fn shift<S: Scalar>(f: &YExpansion<S>, e1: i64, e2: i64) -> Result<YExpansion<S>> {
    let up = f.mul_monomial(e1.max(0) as usize, e2.max(0) as usize);
    up.div_monomial((-e1).max(0) as usize, (-e2).max(0) as usize)
}

/// The system satisfied by `y o pi` for a blow-up chart `pi`.
pub fn pullback_system<S: Scalar>(sys: &PfaffianSystem<S>, map: &BlowupMap) -> Result<PfaffianSystem<S>> {
    let Exponents { p, q, p2, q2 } = sys.exponents;
    let (p, q, p2, q2) = (p as i64, q as i64, p2 as i64, q2 as i64);
    let n = map.power as i64;
    let f1 = sys.f1.pullback(map);
    let f2 = sys.f2.pullback(map);
    let factor = S::from_i64(n);
    let (f1, f2, exps) = match map.axis {
        BlowupAxis::Pi1 => {
            let corr = shift(&f1, p2 - p, n * (p2 - p) + q2 - q)?.scale(&factor);
            let f2 = f2.add(&corr)?;
            (f1, f2, (p, n * p + q, p2, n * p2 + q2))
        }
        BlowupAxis::Pi2 => {
            let corr = shift(&f2, p - p2 + n * (q - q2), q - q2)?.scale(&factor);
            let f1 = f1.add(&corr)?;
            (f1, f2, (p + n * q, q, p2 + n * q2, q2))
        }
    };
    let trunc = f1.trunc().min(f2.trunc());
    let exponents = Exponents::new(exps.0 as usize, exps.1 as usize, exps.2 as usize, exps.3 as usize)?;
    PfaffianSystem::new(exponents, sys.dim, sys.d_y, f1.truncated(trunc), f2.truncated(trunc))
}
