//! Compatibility of summability levels across monomials, blow-up
//! normalization of level lists, and witness series.

use num_complex::Complex64;
use num_rational::Rational64;
use serde::{Deserialize, Serialize, Serializer};
use statrs::function::factorial::factorial;
use statrs::function::gamma::ln_gamma;

use crate::asymptotics::{canonical_level, gevrey_certificate, Certificate, SummabilityLevel};
use crate::error::{Error, Result};
use crate::series::{BivariateSeries, BlowupMap};

fn ser_invariants<Z: Serializer>(v: &[(Rational64, Rational64)], z: Z) -> std::result::Result<Z::Ok, Z::Error> {
    let text: Vec<[String; 2]> = v.iter().map(|(a, b)| [a.to_string(), b.to_string()]).collect();
    text.serialize(z)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CompatibilityReason {
    ProportionalLevels,
    InvariantMismatch,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompatibilityVerdict {
    pub compatible: bool,
    pub reason: CompatibilityReason,
    /// Candidate invariant first, then one per component.
    #[serde(serialize_with = "ser_invariants")]
    pub invariants: Vec<(Rational64, Rational64)>,
}

pub fn levels_compatible(
    candidate: &SummabilityLevel,
    components: &[SummabilityLevel],
) -> Result<CompatibilityVerdict> {
    if components.is_empty() {
        return Err(Error::Invalid("at least one component level is required".into()));
    }
    let target = canonical_level(candidate);
    let mut invariants = vec![target];
    invariants.extend(components.iter().map(canonical_level));
    let compatible = invariants.iter().all(|inv| *inv == target);
    let reason = if compatible {
        CompatibilityReason::ProportionalLevels
    } else {
        CompatibilityReason::InvariantMismatch
    };
    Ok(CompatibilityVerdict { compatible, reason, invariants })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum IntersectionCase {
    MaxBelow,
    MinAbove,
    Mixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "class")]
pub enum PairClass {
    SameClass,
    ConvergentIntersection { case: IntersectionCase },
}

fn ratio(a: usize, b: usize) -> Rational64 {
    Rational64::new(a as i64, b as i64)
}

/// Levels `(p,q,k)` and `(p',q',l)`: either the same class, or a pair whose
/// common members are convergent, tagged by how `l/k` sits relative to
/// `p/p'` and `q/q'`.
pub fn classify_pair(a: &SummabilityLevel, b: &SummabilityLevel) -> PairClass {
    if canonical_level(a) == canonical_level(b) {
        return PairClass::SameClass;
    }
    let rp = ratio(a.p, b.p);
    let rq = ratio(a.q, b.q);
    let lk = b.k / a.k;
    let case = if rp.max(rq) < lk {
        IntersectionCase::MaxBelow
    } else if lk < rp.min(rq) {
        IntersectionCase::MinAbove
    } else {
        IntersectionCase::Mixed
    };
    PairClass::ConvergentIntersection { case }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TranscriptStep {
    pub map: BlowupMap,
    pub before: Vec<SummabilityLevel>,
    pub after: Vec<SummabilityLevel>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Terminal {
    /// Sorted by `k p`, both `k p` and `k q` strictly increase.
    Strict { levels: Vec<SummabilityLevel> },
    /// Two input levels already describe the same class.
    Coincidence { first: usize, second: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormalizationTranscript {
    pub steps: Vec<TranscriptStep>,
    pub terminal: Terminal,
}

/// Level `(p,q,k)` seen through a blow-up chart.
pub fn pullback_level(level: &SummabilityLevel, map: &BlowupMap) -> SummabilityLevel {
    let (p, q) = map.map_bidegree(level.p, level.q);
    SummabilityLevel { p, q, k: level.k }
}

fn sorted_invariants(levels: &[SummabilityLevel]) -> Vec<(Rational64, Rational64)> {
    let mut inv: Vec<_> = levels.iter().map(canonical_level).collect();
    inv.sort();
    inv
}

/// Whether sorting by `k p` leaves both `k p` and `k q` strictly increasing.
pub fn is_strict_terminal(levels: &[SummabilityLevel]) -> bool {
    sorted_invariants(levels)
        .windows(2)
        .all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1)
}

fn apply(levels: &[SummabilityLevel], map: BlowupMap) -> Vec<SummabilityLevel> {
    levels.iter().map(|l| pullback_level(l, &map)).collect()
}

/// Smallest `M >= 1` making every `k p + M k q` distinct.
fn separating_power(inv: &[(Rational64, Rational64)]) -> usize {
    let mut bad = Vec::new();
    for (i, x) in inv.iter().enumerate() {
        for y in &inv[i + 1..] {
            if x.1 != y.1 {
                let m = (y.0 - x.0) / (x.1 - y.1);
                if m.is_integer() && *m.numer() >= 1 {
                    bad.push(*m.numer() as usize);
                }
            }
        }
    }
    (1..).find(|m| !bad.contains(m)).expect("finitely many excluded powers")
}

/// Smallest integer `N >= 1` strictly above every
/// `(b_i - b_{i+1}) / (a_{i+1} - a_i)` along the `a`-sorted list.
fn ordering_power(inv: &[(Rational64, Rational64)]) -> usize {
    let mut bound = Rational64::from_integer(0);
    for w in inv.windows(2) {
        let r = (w[0].1 - w[1].1) / (w[1].0 - w[0].0);
        bound = bound.max(r);
    }
    (bound.floor().to_integer() + 1).max(1) as usize
}

pub fn normalize_by_blowups(levels: &[SummabilityLevel]) -> Result<NormalizationTranscript> {
    if levels.len() < 2 {
        return Err(Error::Invalid("normalization needs at least two levels".into()));
    }
    for i in 0..levels.len() {
        for j in i + 1..levels.len() {
            if canonical_level(&levels[i]) == canonical_level(&levels[j]) {
                return Ok(NormalizationTranscript {
                    steps: Vec::new(),
                    terminal: Terminal::Coincidence { first: i, second: j },
                });
            }
        }
    }
    // Blow-ups act injectively on invariants, so no coincidence appears later.
    let mut current = levels.to_vec();
    let mut steps = Vec::new();
    loop {
        if is_strict_terminal(&current) {
            return Ok(NormalizationTranscript { steps, terminal: Terminal::Strict { levels: current } });
        }
        let inv = sorted_invariants(&current);
        let tied = inv.windows(2).any(|w| w[0].0 == w[1].0);
        let map = if tied {
            BlowupMap::pi2(separating_power(&inv))
        } else {
            BlowupMap::pi1(ordering_power(&inv))
        };
        let after = apply(&current, map);
        steps.push(TranscriptStep { map, before: current, after: after.clone() });
        current = after;
    }
}

/// The two monomial levels standing for "k-summable in x1" and
/// "l-summable in x2" after pulling back by `pi1 o pi2`.
pub fn one_variable_levels(k: Rational64, l: Rational64) -> Result<(SummabilityLevel, SummabilityLevel)> {
    Ok((SummabilityLevel::new(2, 1, k)?, SummabilityLevel::new(1, 1, l)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WitnessKind {
    EulerDiagonal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessSpec {
    pub level: SummabilityLevel,
    pub kind: WitnessKind,
    pub trunc: usize,
}

/// `Gamma(1 + r)` for rational `r >= 0`.
fn gamma_one_plus(r: Rational64) -> f64 {
    if r.is_integer() {
        factorial(r.to_integer() as u64)
    } else {
        ln_gamma(1.0 + *r.numer() as f64 / *r.denom() as f64).exp()
    }
}

/// `sum_n Gamma(1 + n/k) (x1^p x2^q)^n`.
pub fn make_witness(spec: &WitnessSpec) -> Result<BivariateSeries<Complex64>> {
    let SummabilityLevel { p, q, k } = spec.level;
    if spec.trunc < p + q {
        return Err(Error::TruncationTooSmall { trunc: spec.trunc, needed: p + q });
    }
    let entries = (0..=spec.trunc / (p + q)).map(|n| {
        let c = gamma_one_plus(Rational64::from_integer(n as i64) / k);
        ((n * p, n * q), Complex64::new(c, 0.0))
    });
    BivariateSeries::from_scalar_entries(entries, spec.trunc)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeConsistency {
    Consistent,
    /// The coefficient bound holds although the levels are incompatible:
    /// a Gevrey bound alone does not decide summability.
    BoundDespiteIncompatibleLevels,
    /// Compatible levels but the bound was refused: truncation too small.
    RefusedDespiteCompatibleLevels,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeReport {
    pub candidate: SummabilityLevel,
    pub components: Vec<SummabilityLevel>,
    pub order: f64,
    pub certificate: Certificate,
    pub compatibility: CompatibilityVerdict,
    pub consistency: ProbeConsistency,
}

pub fn probe_sum(components: &[WitnessSpec], candidate: &SummabilityLevel) -> Result<ProbeReport> {
    let first = components
        .first()
        .ok_or_else(|| Error::Invalid("at least one witness is required".into()))?;
    let mut sum = make_witness(first)?;
    for spec in &components[1..] {
        sum = sum.add(&make_witness(spec)?)?;
    }
    let order = 1.0 / candidate.k_f64();
    let certificate = gevrey_certificate(&sum, candidate.monomial(), order, 0)?;
    let levels: Vec<SummabilityLevel> = components.iter().map(|c| c.level).collect();
    let compatibility = levels_compatible(candidate, &levels)?;
    let consistency = match (certificate.is_bound(), compatibility.compatible) {
        (true, false) => ProbeConsistency::BoundDespiteIncompatibleLevels,
        (false, true) => ProbeConsistency::RefusedDespiteCompatibleLevels,
        _ => ProbeConsistency::Consistent,
    };
    Ok(ProbeReport { candidate: *candidate, components: levels, order, certificate, compatibility, consistency })
}
