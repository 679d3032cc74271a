use serde::{Deserialize, Serialize};

use super::expansion::{constant_jacobian, evaluate_constant, YExpansion};
use super::system::{Exponents, PfaffianSystem};
use crate::error::{Error, Result};
use crate::linalg::{max_modulus, Lu};
use crate::scalar::Scalar;
use crate::series::{BivariateSeries, Shape, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    /// `x2^q x1^{p+1} dy/dx1 = f1`
    One,
    /// `x1^{p'} x2^{q'+1} dy/dx2 = f2`
    Two,
}

impl Side {
    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(Side::One),
            2 => Ok(Side::Two),
            _ => Err(Error::Input(format!("side must be 1 or 2, got {i}"))),
        }
    }

    pub fn other(self) -> Self {
        match self {
            Side::One => Side::Two,
            Side::Two => Side::One,
        }
    }
}

fn side_data<S: Scalar>(sys: &PfaffianSystem<S>, side: Side) -> (&YExpansion<S>, Var, (usize, usize)) {
    let Exponents { p, q, p2, q2 } = sys.exponents;
    match side {
        Side::One => (&sys.f1, Var::X1, (p, q)),
        Side::Two => (&sys.f2, Var::X2, (p2, q2)),
    }
}

/// Left side `x^shift * (x_var d/dx_var) y` of one equation.
fn left_side<S: Scalar>(y: &BivariateSeries<S>, var: Var, shift: (usize, usize)) -> BivariateSeries<S> {
    let euler = match var {
        Var::X1 => y.derivative(Var::X1).mul_monomial(1, 0),
        Var::X2 => y.derivative(Var::X2).mul_monomial(0, 1),
    };
    euler.mul_monomial(shift.0, shift.1)
}

const NEWTON_STEPS: usize = 50;
const NEWTON_TOL: f64 = 1e-13;

/// Root `y0` of `f(0, 0, y0) = 0` reached from `y = 0`.
fn constant_root<S: Scalar>(f: &YExpansion<S>, dim: usize) -> Result<Vec<S>> {
    let part = f.constant_part();
    let mut y = vec![S::zero(); dim];
    let g0 = evaluate_constant(&part, &y, dim);
    if g0.iter().all(|v| v.is_zero()) {
        return Ok(y);
    }
    let scale = max_modulus(&g0).max(1.0);
    let steps = if S::EXACT { 1 } else { NEWTON_STEPS };
    for _ in 0..steps {
        let g = evaluate_constant(&part, &y, dim);
        let j = constant_jacobian(&part, &y, dim);
        let lu = Lu::factor(&j, dim).map_err(|_| {
            Error::ConstantTerm("f(0,0,y) = 0 has a singular Jacobian along the Newton path".into())
        })?;
        let delta = lu.solve(&g);
        for (yi, d) in y.iter_mut().zip(delta) {
            *yi = yi.clone() - d;
        }
        let g = evaluate_constant(&part, &y, dim);
        let done = if S::EXACT { g.iter().all(|v| v.is_zero()) } else { max_modulus(&g) <= NEWTON_TOL * scale };
        if done {
            return Ok(y);
        }
    }
    Err(Error::ConstantTerm(format!(
        "no solution of f(0,0,y) = 0 found near y = 0 (|f(0,0,0)| = {:.3e})",
        max_modulus(&g0)
    )))
}

/// Unique formal solution of one equation through total degree `order`.
///
/// The constant term solves `f(0, 0, y0) = 0`; afterwards each
/// homogeneous degree is one linear solve with `df/dy(0, 0, y0)`, because
/// the left side only sees terms `p + q` degrees lower.
pub fn formal_solve<S: Scalar>(sys: &PfaffianSystem<S>, side: Side, order: usize) -> Result<BivariateSeries<S>> {
    let (f, var, shift) = side_data(sys, side);
    let l = sys.dim;
    if f.trunc() < order {
        return Err(Error::TruncationTooSmall { trunc: f.trunc(), needed: order });
    }
    let y0 = constant_root(f, l)?;
    let j0 = constant_jacobian(&f.constant_part(), &y0, l);
    let lu = Lu::factor(&j0, l).map_err(|_| {
        Error::SingularLinearPart(format!(
            "the linear part of f{} at the origin is singular",
            if side == Side::One { 1 } else { 2 }
        ))
    })?;
    let mut y = BivariateSeries::from_entries([((0, 0), y0)], order, Shape::vector(l))?;
    for d in 1..=order {
        let known = f.substitute(&y.truncated(d), d)?;
        let lhs = left_side(&y, var, shift);
        let mut updates = Vec::new();
        for n in 0..=d {
            let m = d - n;
            let rhs: Vec<S> = lhs
                .coeff_or_zero(n, m)
                .into_iter()
                .zip(known.coeff_or_zero(n, m))
                .map(|(a, b)| a - b)
                .collect();
            if rhs.iter().all(|v| v.is_zero()) {
                continue;
            }
            updates.push(((n, m), lu.solve(&rhs)));
        }
        for (key, v) in updates {
            y.accumulate(key, v);
        }
    }
    Ok(y)
}

/// `x^shift (x_var d/dx_var) y - f(x, y)` for the equation on `side`,
/// up to `min(order, trunc)`.
pub fn equation_residual<S: Scalar>(
    sys: &PfaffianSystem<S>,
    side: Side,
    y: &BivariateSeries<S>,
    order: usize,
) -> Result<BivariateSeries<S>> {
    let (f, var, shift) = side_data(sys, side);
    let order = order.min(y.trunc()).min(f.trunc());
    let lhs = left_side(y, var, shift).truncated(order);
    lhs.sub(&f.substitute(y, order)?)
}

/// Residual of the equation `side_checked` for a solution of the other one.
pub fn cross_check_other_side<S: Scalar>(
    sys: &PfaffianSystem<S>,
    y: &BivariateSeries<S>,
    side_checked: Side,
    order: usize,
) -> Result<BivariateSeries<S>> {
    equation_residual(sys, side_checked, y, order)
}
