//! Coefficient fields: double-precision complex numbers and exact complex
//! rationals.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{Error, Result};

/// Exact complex rational scalar.
pub type ExactComplex = Complex<BigRational>;

/// Field operations required from series coefficients.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    /// True when arithmetic is exact, so zero tests need no tolerance.
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;
    fn from_c64(z: Complex64) -> Self;
    fn to_c64(&self) -> Complex64;

    /// Modulus as a float, used for pivoting and tolerances.
    fn modulus(&self) -> f64 {
        self.to_c64().norm()
    }

    /// Zero test: exact for rational mode, `|z| <= tol` for floats.
    fn is_negligible(&self, tol: f64) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.modulus() <= tol
        }
    }

    fn to_json_parts(&self) -> (Value, Value);
    fn from_json_parts(re: &Value, im: &Value) -> Result<Self>;
}

fn json_f64(v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| Error::Input(format!("number out of range: {n}"))),
        Value::String(s) => parse_rational(s)?
            .to_f64()
            .ok_or_else(|| Error::Input(format!("rational out of range: {s}"))),
        Value::Null => Ok(0.0),
        other => Err(Error::Input(format!("expected a number, got {other}"))),
    }
}

fn json_rational(v: &Value) -> Result<BigRational> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(BigRational::from_integer(BigInt::from(i)))
            } else {
                let f = n
                    .as_f64()
                    .ok_or_else(|| Error::Input(format!("number out of range: {n}")))?;
                BigRational::from_float(f)
                    .ok_or_else(|| Error::Input(format!("non-finite number {f}")))
            }
        }
        Value::String(s) => parse_rational(s),
        Value::Null => Ok(BigRational::zero()),
        other => Err(Error::Input(format!("expected a number, got {other}"))),
    }
}

/// Parses `"a"` or `"a/b"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Input(format!("invalid rational literal '{s}'"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => {
            if let Ok(i) = s.parse::<BigInt>() {
                return Ok(BigRational::from_integer(i));
            }
            let f: f64 = s.parse().map_err(|_| bad())?;
            BigRational::from_float(f).ok_or_else(bad)
        }
    }
}

fn rational_to_json(r: &BigRational) -> Value {
    if r.is_integer() {
        if let Some(i) = r.numer().to_i64() {
            return Value::from(i);
        }
    }
    Value::String(format!("{}/{}", r.numer(), r.denom()))
}

impl Scalar for Complex64 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }
    fn from_c64(z: Complex64) -> Self {
        z
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn modulus(&self) -> f64 {
        self.norm()
    }
    fn to_json_parts(&self) -> (Value, Value) {
        (Value::from(self.re), Value::from(self.im))
    }
    fn from_json_parts(re: &Value, im: &Value) -> Result<Self> {
        Ok(Complex64::new(json_f64(re)?, json_f64(im)?))
    }
}

impl Scalar for ExactComplex {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        Complex::new(BigRational::from_integer(BigInt::from(v)), BigRational::zero())
    }
    fn from_c64(z: Complex64) -> Self {
        let conv = |f: f64| BigRational::from_float(f).unwrap_or_else(BigRational::zero);
        Complex::new(conv(z.re), conv(z.im))
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
    fn modulus(&self) -> f64 {
        let re = self.re.abs().to_f64().unwrap_or(f64::INFINITY);
        let im = self.im.abs().to_f64().unwrap_or(f64::INFINITY);
        re.hypot(im)
    }
    fn to_json_parts(&self) -> (Value, Value) {
        (rational_to_json(&self.re), rational_to_json(&self.im))
    }
    fn from_json_parts(re: &Value, im: &Value) -> Result<Self> {
        Ok(Complex::new(json_rational(re)?, json_rational(im)?))
    }
}

/// Exact rational complex from a numerator/denominator pair.
pub fn exact(num: i64, den: i64) -> ExactComplex {
    Complex::new(
        BigRational::new(BigInt::from(num), BigInt::from(den)),
        BigRational::zero(),
    )
}

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
