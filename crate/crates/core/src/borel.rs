//! Borel transform, Padé continuation and truncated Laplace integration
//! of one-variable series, and their use for summing in a monomial.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::factorial;
use statrs::function::gamma::ln_gamma;

use crate::asymptotics::{t_decompose, SummabilityLevel};
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, Lu};
use crate::series::{BivariateSeries, Shape};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variable {
    T,
    Xi,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnivariateSeries {
    pub coeffs: Vec<Complex64>,
    pub var: Variable,
}

impl UnivariateSeries {
    pub fn new(coeffs: Vec<Complex64>, var: Variable) -> Self {
        UnivariateSeries { coeffs, var }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        horner(&self.coeffs, z)
    }
}

fn horner(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + a)
}

/// `Gamma(1 + x)`, exact on integers.
fn gamma_one_plus(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() < 1e-12 && r >= 0.0 && r <= 170.0 {
        factorial(r as u64)
    } else {
        ln_gamma(1.0 + x).exp()
    }
}

/// `a_n -> a_n / Gamma(1 + n/k)`.
pub fn formal_borel(u: &UnivariateSeries, k: f64) -> Result<UnivariateSeries> {
    if !(k > 0.0) {
        return Err(Error::Invalid(format!("Borel order must be positive, got {k}")));
    }
    let coeffs = u
        .coeffs
        .iter()
        .enumerate()
        .map(|(n, a)| a / gamma_one_plus(n as f64 / k))
        .collect();
    Ok(UnivariateSeries { coeffs, var: Variable::Xi })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Pole {
    pub location: Complex64,
    pub residue: Complex64,
}

/// `P(xi) / Q(xi)` with `Q(0) = 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PadeApproximant {
    pub numerator: Vec<Complex64>,
    pub denominator: Vec<Complex64>,
    pub degrees: (usize, usize),
    /// Largest input coefficient modulus, the reference for residues.
    pub scale: f64,
}

/// Poles whose residue falls below this fraction of the coefficient scale
/// are treated as numerator/denominator near-cancellations.
pub const SPURIOUS_RESIDUE: f64 = 1e-5;

impl PadeApproximant {
    pub fn evaluate(&self, xi: Complex64) -> Complex64 {
        horner(&self.numerator, xi) / horner(&self.denominator, xi)
    }

    /// Roots of the denominator with their residues.
    pub fn poles(&self) -> Vec<Pole> {
        let m = self.denominator.len().saturating_sub(1);
        if m == 0 {
            return Vec::new();
        }
        let lead = self.denominator[m];
        let mut companion = vec![Complex64::new(0.0, 0.0); m * m];
        for i in 1..m {
            companion[i * m + i - 1] = Complex64::new(1.0, 0.0);
        }
        for j in 0..m {
            companion[j * m + m - 1] = -self.denominator[j] / lead;
        }
        let derivative: Vec<Complex64> = self
            .denominator
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * i as f64)
            .collect();
        eigenvalues(&companion, m)
            .into_iter()
            .map(|r| Pole { location: r, residue: horner(&self.numerator, r) / horner(&derivative, r) })
            .collect()
    }

    /// Poles carrying a non-negligible residue.
    pub fn genuine_poles(&self) -> Vec<Pole> {
        let floor = SPURIOUS_RESIDUE * self.scale.max(f64::MIN_POSITIVE);
        self.poles()
            .into_iter()
            .filter(|p| p.residue.norm() >= floor && p.location.is_finite())
            .collect()
    }
}

/// Requested degrees are clipped to the data (numerator first); a singular
/// denominator system lowers `M` until it is solvable, ending at the
/// polynomial itself.
pub fn pade_continue(u: &UnivariateSeries, l: usize, m: usize) -> Result<PadeApproximant> {
    let c = &u.coeffs;
    if c.is_empty() {
        return Err(Error::Invalid("Padé approximation of an empty series".into()));
    }
    let l = l.min(c.len() - 1);
    let mut m = m.min(c.len() - 1 - l);
    let coeff = |i: isize| if i < 0 { Complex64::new(0.0, 0.0) } else { c[i as usize] };
    let q = loop {
        if m == 0 {
            break vec![Complex64::new(1.0, 0.0)];
        }
        let mut mat = Vec::with_capacity(m * m);
        let mut rhs = Vec::with_capacity(m);
        for k in l + 1..=l + m {
            for j in 1..=m {
                mat.push(coeff(k as isize - j as isize));
            }
            rhs.push(-c[k]);
        }
        match Lu::factor(&mat, m) {
            Ok(lu) => {
                let mut q = vec![Complex64::new(1.0, 0.0)];
                q.extend(lu.solve(&rhs));
                break q;
            }
            Err(_) => m -= 1,
        }
    };
    let qmax = q.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut q = q;
    while q.len() > 1 && q.last().is_some_and(|z| z.norm() <= 1e-14 * qmax) {
        q.pop();
    }
    let numerator: Vec<Complex64> = (0..=l)
        .map(|i| (0..=i.min(q.len() - 1)).map(|j| q[j] * c[i - j]).sum())
        .collect();
    let scale = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let degrees = (l, q.len() - 1);
    Ok(PadeApproximant { numerator, denominator: q, degrees, scale })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    /// Rays are cut at `xi_max_factor * |t|`.
    pub xi_max_factor: f64,
    pub panels: usize,
    pub nodes: usize,
    /// Angular clearance (radians) required between the ray and any pole.
    pub pole_margin: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { xi_max_factor: 40.0, panels: 8, nodes: 64, pole_margin: 0.1 }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nodes < 8 {
            return Err(Error::Invalid(format!("at least 8 quadrature nodes are required, got {}", self.nodes)));
        }
        if self.panels == 0 {
            return Err(Error::Invalid("at least one quadrature panel is required".into()));
        }
        if !(self.xi_max_factor > 0.0) || !(self.pole_margin > 0.0) {
            return Err(Error::Invalid("xi_max_factor and pole_margin must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LaplaceValue {
    pub value: Complex64,
    pub tail_bound: f64,
}

/// Signed angular distance folded to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut r = (a + PI).rem_euclid(2.0 * PI) - PI;
    if r <= -PI {
        r += 2.0 * PI;
    }
    r
}

/// Smallest `a` with `a k` a positive integer, up to 16; otherwise `1/k`.
fn ray_exponent(k: f64) -> f64 {
    (1..=16)
        .map(f64::from)
        .find(|a| {
            let n = a * k;
            n >= 1.0 - 1e-12 && (n - n.round()).abs() < 1e-9
        })
        .unwrap_or(1.0 / k)
}

/// Order-`k` Laplace integral of `approx` along the ray of direction `d`,
/// cut at `xi_max_factor |t|`.
///
/// With `xi = v^a e^{id}` the integral becomes
/// `int_0^V approx(v^a e^{id}) k a w v^{ak-1} e^{-w v^{ak}} dv`,
/// `w = (e^{id}/t)^k`, where `a` is the denominator of `k` so the integrand
/// is smooth at the origin. Irrational `k` falls back to `a = 1/k`.
pub fn laplace_sum(
    approx: &PadeApproximant,
    k: f64,
    t: Complex64,
    d: f64,
    cfg: &QuadratureConfig,
) -> Result<LaplaceValue> {
    cfg.validate()?;
    if !(k > 0.0) {
        return Err(Error::Invalid(format!("Laplace order must be positive, got {k}")));
    }
    if t.norm() == 0.0 {
        return Ok(LaplaceValue { value: approx.evaluate(Complex64::new(0.0, 0.0)), tail_bound: 0.0 });
    }
    let ray = Complex64::from_polar(1.0, d);
    let w = (ray / t).powf(k);
    if !(w.re > 0.0) {
        return Err(Error::DecayViolated { direction: d, t_re: t.re, t_im: t.im });
    }
    for pole in approx.genuine_poles() {
        if wrap_angle(pole.location.arg() - d).abs() < cfg.pole_margin {
            return Err(Error::PoleOnRay { re: pole.location.re, im: pole.location.im, direction: d });
        }
    }
    let rule = GaussLegendre::new(NonZeroUsize::new(cfg.nodes).expect("validated"));
    let xi_max = cfg.xi_max_factor * t.norm();
    let a = ray_exponent(k);
    let ak = a * k;
    let upper = xi_max.powf(1.0 / a);
    let width = upper / cfg.panels as f64;
    let mut total = Complex64::new(0.0, 0.0);
    let mut sup: f64 = 0.0;
    for panel in 0..cfg.panels {
        let start = panel as f64 * width;
        for &(x, wt) in rule.as_node_weight_pairs() {
            let v = start + 0.5 * width * (x + 1.0);
            let f = approx.evaluate(ray * v.powf(a));
            sup = sup.max(f.norm());
            let jac = k * a * v.powf(ak - 1.0);
            total += f * w * jac * (-w * v.powf(ak)).exp() * (0.5 * width * wt);
        }
    }
    let upper = xi_max.powf(k);
    let endpoint = approx.evaluate(ray * xi_max).norm();
    sup = sup.max(endpoint);
    let tail_bound = sup * w.norm() / w.re * (-w.re * upper).exp();
    Ok(LaplaceValue { value: total, tail_bound })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SummationConfig {
    pub pade: (usize, usize),
    pub quadrature: QuadratureConfig,
    /// Only poles within this modulus count as singular directions.
    pub root_radius: f64,
    /// Directions closer than this (radians) are merged.
    pub cluster_tol: f64,
}

impl Default for SummationConfig {
    fn default() -> Self {
        SummationConfig { pade: (18, 18), quadrature: QuadratureConfig::default(), root_radius: 20.0, cluster_tol: 0.05 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SumSample {
    pub point: (Complex64, Complex64),
    pub t: Complex64,
    pub value: Complex64,
    pub tail_bound: f64,
}

fn require_scalar(f: &BivariateSeries<Complex64>) -> Result<()> {
    if !f.shape().is_scalar() {
        return Err(Error::ShapeMismatch { expected: Shape::SCALAR, found: f.shape() });
    }
    Ok(())
}

/// Values of the layers `f_n` at a point, as a series in `t`.
fn layer_series(f: &BivariateSeries<Complex64>, level: &SummabilityLevel, point: (Complex64, Complex64)) -> UnivariateSeries {
    let dec = t_decompose(f, level.monomial());
    let coeffs = dec.layers.iter().map(|layer| layer.evaluate(&point.0, &point.1)[0]).collect();
    UnivariateSeries { coeffs, var: Variable::T }
}

fn monomial_value(level: &SummabilityLevel, point: (Complex64, Complex64)) -> Complex64 {
    point.0.powu(level.p as u32) * point.1.powu(level.q as u32)
}

fn borel_pade_at(
    f: &BivariateSeries<Complex64>,
    level: &SummabilityLevel,
    point: (Complex64, Complex64),
    degrees: (usize, usize),
) -> Result<PadeApproximant> {
    let u = layer_series(f, level, point);
    let b = formal_borel(&u, level.k_f64())?;
    pade_continue(&b, degrees.0, degrees.1)
}

/// The `k`-sum in `x1^p x2^q` along `d` of a scalar series at each point;
/// points are processed in parallel, results keep input order.
pub fn sum_in_monomial(
    f: &BivariateSeries<Complex64>,
    level: &SummabilityLevel,
    d: f64,
    points: &[(Complex64, Complex64)],
    cfg: &SummationConfig,
) -> Result<Vec<SumSample>> {
    require_scalar(f)?;
    cfg.quadrature.validate()?;
    points
        .par_iter()
        .map(|&point| {
            let approx = borel_pade_at(f, level, point, cfg.pade)?;
            let t = monomial_value(level, point);
            let lv = laplace_sum(&approx, level.k_f64(), t, d, &cfg.quadrature)?;
            Ok(SumSample { point, t, value: lv.value, tail_bound: lv.tail_bound })
        })
        .collect()
}

/// Arguments of the genuine Borel-plane poles within `root_radius`,
/// merged when closer than `cluster_tol`. Degrees exceeding the data are
/// clipped towards the diagonal so the denominator keeps room for poles.
pub fn estimate_singular_directions(
    f: &BivariateSeries<Complex64>,
    level: &SummabilityLevel,
    point: (Complex64, Complex64),
    degrees: (usize, usize),
    cfg: &SummationConfig,
) -> Result<Vec<f64>> {
    require_scalar(f)?;
    let available = f.trunc() / level.monomial().degree();
    let m = degrees.1.min(available / 2);
    let l = degrees.0.min(available - m);
    let approx = borel_pade_at(f, level, point, (l, m))?;
    let mut angles: Vec<f64> = approx
        .genuine_poles()
        .into_iter()
        .filter(|p| p.location.norm() <= cfg.root_radius)
        .map(|p| wrap_angle(p.location.arg()))
        .collect();
    angles.sort_by(f64::total_cmp);
    Ok(cluster_angles(&angles, cfg.cluster_tol))
}

fn cluster_angles(sorted: &[f64], tol: f64) -> Vec<f64> {
    let mut clusters: Vec<Vec<f64>> = Vec::new();
    for &a in sorted {
        match clusters.last_mut() {
            Some(c) if a - c[c.len() - 1] <= tol => c.push(a),
            _ => clusters.push(vec![a]),
        }
    }
    if clusters.len() > 1 {
        let first = clusters[0][0];
        let last = *clusters[clusters.len() - 1].last().expect("nonempty");
        if first + 2.0 * PI - last <= tol {
            let tail = clusters.pop().expect("nonempty");
            clusters[0].extend(tail);
        }
    }
    clusters
        .into_iter()
        .map(|c| {
            let (s, co) = c.iter().fold((0.0, 0.0), |(s, co), a| (s + a.sin(), co + a.cos()));
            wrap_angle(s.atan2(co))
        })
        .collect()
}
