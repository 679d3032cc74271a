use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use monosum::asymptotics::{gevrey_certificate, gevrey_estimate, t_decompose, t_recompose, SummabilityLevel, TDecomposition};
use monosum::borel::{estimate_singular_directions, sum_in_monomial};
use monosum::pfaffian::{
    classify_spectra, cross_check_other_side, equation_residual, formal_solve, integrability_residual,
    linear_integrability_residual, linear_parts, pullback_system, rank_reduce, Exponents, PfaffianSystem, Side,
};
use monosum::tauberian::{classify_pair, levels_compatible, normalize_by_blowups};
use monosum::witness::{factorial_diagonal, geometric_diagonal, poincare_series};
use monosum::{BivariateSeries, BlowupMap, MonomialIndex, Scalar};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::config::{parse_pair, parse_usizes, Mode, RunConfig};
use crate::output::{csv_text, fmt_f64};

/// JSON result plus optional CSV plot data.
pub struct Outcome {
    pub result: Value,
    pub csv: Option<String>,
}

impl Outcome {
    fn json(result: Value) -> Self {
        Outcome { result, csv: None }
    }
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing JSON in {}", path.display()))
}

/// A series file, a decomposition, or a `decompose` or `witness` report.
fn load_series<S: Scalar>(path: &Path) -> Result<BivariateSeries<S>> {
    let mut value = read_json(path)?;
    if value.pointer("/result/terms").is_some() {
        value = value["result"].take();
    }
    let dec = value
        .pointer("/result/decomposition")
        .or_else(|| value.get("decomposition"))
        .or_else(|| value.get("layers").map(|_| &value));
    match dec {
        Some(d) => {
            let d: TDecomposition<S> =
                serde_json::from_value(d.clone()).with_context(|| format!("decomposition in {}", path.display()))?;
            Ok(t_recompose(&d)?)
        }
        None => Ok(BivariateSeries::from_json(&value)?),
    }
}

fn load_system<S: Scalar>(path: &Path) -> Result<PfaffianSystem<S>> {
    let value = read_json(path)?;
    let sys = value.pointer("/result/system").unwrap_or(&value);
    Ok(PfaffianSystem::from_json(sys)?)
}

/// A constant matrix: nested arrays of numbers, or a series whose
/// constant term is taken. Returns the row-major entries and the dimension.
fn load_matrix<S: Scalar>(path: &Path) -> Result<(Vec<S>, usize)> {
    let value = read_json(path)?;
    if let Value::Array(rows) = &value {
        let dim = rows.len();
        let zero = Value::from(0);
        let mut out = Vec::with_capacity(dim * dim);
        for row in rows {
            let row = row.as_array().filter(|r| r.len() == dim).ok_or_else(|| {
                anyhow!("matrix in {} must be a square array of rows", path.display())
            })?;
            for entry in row {
                let (re, im) = match entry {
                    Value::Object(_) => (entry.get("re").unwrap_or(&zero), entry.get("im").unwrap_or(&zero)),
                    _ => (entry, &zero),
                };
                out.push(S::from_json_parts(re, im)?);
            }
        }
        if dim == 0 {
            bail!("matrix in {} is empty", path.display());
        }
        return Ok((out, dim));
    }
    let series = BivariateSeries::<S>::from_json(&value)?;
    if !series.shape().is_square() {
        bail!("matrix series in {} must be square, found {}", path.display(), series.shape());
    }
    Ok((series.constant_term(), series.shape().rows))
}

fn monomial(cfg: &RunConfig) -> Result<MonomialIndex> {
    let (p, q) = parse_pair(&cfg.text("monomial")?, "monomial")?;
    Ok(MonomialIndex::new(p, q)?)
}

fn level(cfg: &RunConfig, key: &str) -> Result<SummabilityLevel> {
    Ok(cfg.text(key)?.parse()?)
}

fn exponents(cfg: &RunConfig) -> Result<Exponents> {
    let text = cfg.text("exponents")?;
    match parse_usizes(&text, "exponents")?.as_slice() {
        [p, q, p2, q2] => Ok(Exponents::new(*p, *q, *p2, *q2)?),
        _ => bail!("exponents '{text}' must have the form p,q,p',q'"),
    }
}

fn complex(text: &str) -> Result<Complex64> {
    text.trim().parse().map_err(|_| anyhow!("'{text}' is not a complex number (use forms like 0.2 or 0.1+0.3i)"))
}

/// `x1,x2` with complex coordinates.
fn point(text: &str) -> Result<(Complex64, Complex64)> {
    match text.split(',').collect::<Vec<_>>().as_slice() {
        [a, b] => Ok((complex(a)?, complex(b)?)),
        _ => bail!("point '{text}' must have the form x1,x2"),
    }
}

fn decompose<S: Scalar>(cfg: &RunConfig) -> Result<Outcome> {
    let f = load_series::<S>(&cfg.path("series")?)?;
    let d = t_decompose(&f, monomial(cfg)?);
    Ok(Outcome::json(json!({ "layer_count": d.layers.len(), "decomposition": d })))
}

fn frobenius<S: Scalar>(v: &[S]) -> f64 {
    v.iter().map(|x| x.modulus().powi(2)).sum::<f64>().sqrt()
}

fn gevrey<S: Scalar>(cfg: &RunConfig) -> Result<Outcome> {
    let f = load_series::<S>(&cfg.path("series")?)?;
    let mono = monomial(cfg)?;
    let est = gevrey_estimate(&f, mono)?;
    let s = cfg.number::<f64>("s")?.unwrap_or(est.s_hat);
    let floor = cfg.number::<usize>("floor")?.unwrap_or(est.window.0);
    let certificate = gevrey_certificate(&f, mono, s, floor)?;
    let mut rows: Vec<(usize, usize, f64)> = f
        .terms()
        .filter_map(|((n, m), v)| {
            let norm = frobenius(v);
            (norm > 0.0).then(|| (n, m, norm.ln()))
        })
        .collect();
    rows.sort_by_key(|&(n, m, _)| (n + m, n));
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|&(n, m, la)| vec![(n + m).to_string(), fmt_f64(la), fmt_f64(est.fitted_log(n, m))])
        .collect();
    let mut cert = serde_json::to_value(&certificate)?;
    cert["order"] = json!(s);
    cert["degree_floor"] = json!(floor);
    Ok(Outcome {
        result: json!({
            "estimate": est,
            "certificate": cert,
            "note": "fit window and the 0.15 consistency tolerance are engineering choices, not derived bounds",
        }),
        csv: Some(csv_text(&["degree", "log_norm", "fitted_log"], &table)?),
    })
}

fn levels(cfg: &RunConfig) -> Result<Outcome> {
    let candidate = level(cfg, "candidate")?;
    let components = cfg
        .list("components")?
        .iter()
        .map(|s| s.parse::<SummabilityLevel>())
        .collect::<monosum::Result<Vec<_>>>()?;
    let verdict = levels_compatible(&candidate, &components)?;
    let mut all = vec![candidate];
    all.extend(components.iter().copied());
    let pairs: Vec<Value> = (0..all.len())
        .flat_map(|i| (i + 1..all.len()).map(move |j| (i, j)))
        .map(|(i, j)| json!({ "first": i, "second": j, "class": classify_pair(&all[i], &all[j]) }))
        .collect();
    let transcript = normalize_by_blowups(&all)?;
    Ok(Outcome::json(json!({
        "compatible": verdict.compatible,
        "verdict": verdict,
        "pairs": pairs,
        "normalization": transcript,
    })))
}

fn sum(cfg: &RunConfig) -> Result<Outcome> {
    let f = load_series::<Complex64>(&cfg.path("series")?)?;
    let lvl = level(cfg, "level")?;
    let direction = cfg.number::<f64>("direction")?.unwrap_or(0.0);
    let points = if cfg.has("points") { cfg.list("points")? } else { Vec::new() };
    let points = points.iter().map(|p| point(p)).collect::<Result<Vec<_>>>()?;
    let samples = sum_in_monomial(&f, &lvl, direction, &points, &cfg.summation)?;
    let table: Vec<Vec<String>> = samples
        .iter()
        .map(|s| {
            [s.point.0.re, s.point.0.im, s.point.1.re, s.point.1.im, s.value.re, s.value.im, s.tail_bound]
                .map(fmt_f64)
                .to_vec()
        })
        .collect();
    let header = ["re_x1", "im_x1", "re_x2", "im_x2", "re_value", "im_value", "tail_bound"];
    Ok(Outcome {
        result: json!({ "level": lvl, "direction": direction, "samples": samples }),
        csv: Some(csv_text(&header, &table)?),
    })
}

fn singular(cfg: &RunConfig) -> Result<Outcome> {
    let f = load_series::<Complex64>(&cfg.path("series")?)?;
    let lvl = level(cfg, "level")?;
    let pt = point(&cfg.text("point")?)?;
    let degrees = cfg.summation.pade;
    let directions = estimate_singular_directions(&f, &lvl, pt, degrees, &cfg.summation)?;
    Ok(Outcome::json(json!({ "level": lvl, "point": pt, "directions": directions })))
}

fn side(cfg: &RunConfig) -> Result<Side> {
    let i = cfg.number::<u8>("side")?.unwrap_or(1);
    Ok(Side::from_index(i)?)
}

fn pfaffian_solve<S: Scalar>(cfg: &RunConfig) -> Result<Outcome> {
    let sys = load_system::<S>(&cfg.path("system")?)?;
    let side = side(cfg)?;
    let order = cfg.number::<usize>("order")?.unwrap_or(sys.trunc());
    let tol = cfg.tolerances.residual;
    let y = formal_solve(&sys, side, order)?;
    let own = equation_residual(&sys, side, &y, order)?;
    let other = cross_check_other_side(&sys, &y, side.other(), order)?;
    Ok(Outcome::json(json!({
        "side": side,
        "order": order,
        "solution": y,
        "residual_valuation": own.valuation(tol),
        "other_side_residual_valuation": other.valuation(tol),
        "other_side_satisfied": other.is_zero_within(tol),
    })))
}

fn pfaffian_check<S: Scalar>(cfg: &RunConfig) -> Result<Outcome> {
    let sys = load_system::<S>(&cfg.path("system")?)?;
    let order = cfg.number::<usize>("order")?.unwrap_or(sys.trunc());
    let tol = cfg.tolerances.residual;
    let residual = integrability_residual(&sys, order)?;
    let (a, b) = linear_parts(&sys)?;
    let linear = linear_integrability_residual(&a, &b, sys.exponents)?.truncated(order);
    let spectra = classify_spectra(sys.exponents, &a.constant_term(), &b.constant_term(), sys.dim)?;
    Ok(Outcome::json(json!({
        "order": order.min(residual.trunc()),
        "integrable": residual.is_zero_within(tol),
        "residual_valuation": residual.valuation(tol),
        "residual": residual.to_json(),
        "linear_integrable": linear.is_zero_within(tol),
        "linear_residual_valuation": linear.valuation(tol),
        "spectral": spectra,
    })))
}

fn pfaffian_classify<S: Scalar>(cfg: &RunConfig) -> Result<Outcome> {
    let exps = exponents(cfg)?;
    let (a, da) = load_matrix::<S>(&cfg.path("a")?)?;
    let (b, db) = load_matrix::<S>(&cfg.path("b")?)?;
    if da != db {
        bail!("A is {da}x{da} but B is {db}x{db}");
    }
    let d = classify_spectra(exps, &a, &b, da)?;
    Ok(Outcome::json(json!({ "exponents": exps.as_array(), "diagnosis": d })))
}

fn pfaffian_reduce<S: Scalar>(cfg: &RunConfig) -> Result<Outcome> {
    let exps = exponents(cfg)?;
    let a = load_series::<S>(&cfg.path("a")?)?;
    let b = load_series::<S>(&cfg.path("b")?)?;
    let pair = rank_reduce(&a, &b, exps)?;
    let tol = cfg.tolerances.residual;
    Ok(Outcome::json(json!({
        "exponents": exps.as_array(),
        "residual_zero": pair.residual.is_zero_within(tol),
        "residual_valuation": pair.residual.valuation(tol),
        "reduced": pair,
    })))
}

fn pfaffian_pullback<S: Scalar>(cfg: &RunConfig) -> Result<Outcome> {
    let sys = load_system::<S>(&cfg.path("system")?)?;
    let map: BlowupMap = cfg.text("map")?.parse()?;
    let pulled = pullback_system(&sys, &map)?;
    let tol = cfg.tolerances.residual;
    let before = integrability_residual(&sys, sys.trunc())?.is_zero_within(tol);
    let after = integrability_residual(&pulled, pulled.trunc())?.is_zero_within(tol);
    Ok(Outcome::json(json!({
        "map": map.to_string(),
        "integrable_before": before,
        "integrable_after": after,
        "system": pulled.to_json(),
    })))
}

fn witness<S: Scalar>(cfg: &RunConfig) -> Result<Outcome> {
    let trunc = cfg.number::<usize>("trunc")?.ok_or_else(|| anyhow!("missing required parameter --trunc"))?;
    let (p, q) = if cfg.has("monomial") { parse_pair(&cfg.text("monomial")?, "monomial")? } else { (1, 1) };
    MonomialIndex::new(p, q)?;
    let series: BivariateSeries<S> = match cfg.text("kind")?.as_str() {
        "poincare" => poincare_series(trunc),
        "euler" => factorial_diagonal(p, q, trunc),
        "geometric" => geometric_diagonal(p, q, trunc),
        other => bail!("unknown witness kind '{other}' (expected poincare, euler or geometric)"),
    };
    Ok(Outcome::json(series.to_json()))
}

fn generic<S: Scalar>(cfg: &RunConfig) -> Result<Outcome> {
    match cfg.command.as_str() {
        "witness" => witness::<S>(cfg),
        "decompose" => decompose::<S>(cfg),
        "gevrey" => gevrey::<S>(cfg),
        "pfaffian solve" => pfaffian_solve::<S>(cfg),
        "pfaffian check" => pfaffian_check::<S>(cfg),
        "pfaffian classify" => pfaffian_classify::<S>(cfg),
        "pfaffian reduce" => pfaffian_reduce::<S>(cfg),
        "pfaffian pullback" => pfaffian_pullback::<S>(cfg),
        other => bail!("unknown command '{other}'"),
    }
}

/// Runs the configured command; `levels` is always exact and the
/// summation commands always work in floating point.
pub fn dispatch(cfg: &RunConfig) -> Result<Outcome> {
    match cfg.command.as_str() {
        "levels" => levels(cfg),
        "sum" => sum(cfg),
        "singular" => singular(cfg),
        _ => match cfg.mode {
            Mode::Float => generic::<Complex64>(cfg),
            Mode::Rational => generic::<monosum::ExactComplex>(cfg),
        },
    }
}
