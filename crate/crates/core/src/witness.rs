//! Model series used as benchmarks and probes.

use crate::scalar::Scalar;
use crate::series::BivariateSeries;

/// `a_{n,m} = (-|n-m|)^{min(n,m)}` with `a_{0,0} = 0`.
///
/// Its monomial decomposition in `x1 x2` is `sum (x1^n + x2^n)/(1 + n t)`
/// with `t = x1 x2`, so the series is 1-Gevrey and 1-summable in `x1 x2`.
pub fn poincare_series<S: Scalar>(trunc: usize) -> BivariateSeries<S> {
    let mut entries = Vec::new();
    for d in 1..=trunc {
        for n in 0..=d {
            let m = d - n;
            let low = n.min(m) as u32;
            let gap = (n as i64 - m as i64).abs();
            if gap == 0 {
                continue;
            }
            let value = (-gap).checked_pow(low);
            let coeff = match value {
                Some(v) => S::from_i64(v),
                None => {
                    let base = S::from_i64(-gap);
                    (0..low).fold(S::one(), |acc, _| acc * base.clone())
                }
            };
            entries.push(((n, m), coeff));
        }
    }
    BivariateSeries::from_scalar_entries(entries, trunc).expect("terms lie within trunc")
}

/// `sum_n (x1^p x2^q)^n`.
pub fn geometric_diagonal<S: Scalar>(p: usize, q: usize, trunc: usize) -> BivariateSeries<S> {
    let step = (p + q).max(1);
    let entries = (0..=trunc / step).map(|n| ((n * p, n * q), S::one()));
    BivariateSeries::from_scalar_entries(entries, trunc).expect("terms lie within trunc")
}

/// `sum_n n! (x1^p x2^q)^n` with exact integer coefficients.
pub fn factorial_diagonal<S: Scalar>(p: usize, q: usize, trunc: usize) -> BivariateSeries<S> {
    let step = (p + q).max(1);
    let mut fact = S::one();
    let mut entries = Vec::new();
    for n in 0..=trunc / step {
        if n > 0 {
            fact = fact * S::from_i64(n as i64);
        }
        entries.push(((n * p, n * q), fact.clone()));
    }
    BivariateSeries::from_scalar_entries(entries, trunc).expect("terms lie within trunc")
}
