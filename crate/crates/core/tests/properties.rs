use monosum::asymptotics::{canonical_level, t_decompose, t_recompose, SummabilityLevel};
use monosum::borel::{formal_borel, laplace_sum, pade_continue, QuadratureConfig, UnivariateSeries, Variable};
use monosum::pfaffian::{classify_spectra, spectral_case, Exponents};
use monosum::scalar::exact;
use monosum::tauberian::{classify_pair, normalize_by_blowups, pullback_level, PairClass};
use monosum::{BivariateSeries, BlowupMap, ExactComplex, MonomialIndex, Shape, Var};
use num_complex::Complex64;
use num_rational::Rational64;
use proptest::prelude::*;

type E = BivariateSeries<ExactComplex>;

fn series_strategy(shape: Shape, max_trunc: usize) -> impl Strategy<Value = E> {
    (2..=max_trunc).prop_flat_map(move |trunc| {
        let term = ((0..=trunc), (0..=trunc), prop::collection::vec(-5i64..=5, shape.len()));
        prop::collection::vec(term, 0..12).prop_map(move |raw| {
            let entries = raw
                .into_iter()
                .filter(|(n, m, _)| n + m <= trunc)
                .map(|(n, m, v)| ((n, m), v.into_iter().map(|x| exact(x, 1)).collect::<Vec<_>>()));
            E::from_entries(entries, trunc, shape).unwrap()
        })
    })
}

fn same_trunc(a: &E, b: &E) -> (E, E) {
    let t = a.trunc().min(b.trunc());
    (a.truncated(t), b.truncated(t))
}

fn blowup() -> impl Strategy<Value = BlowupMap> {
    (any::<bool>(), 1usize..=3).prop_map(|(first, n)| if first { BlowupMap::pi1(n) } else { BlowupMap::pi2(n) })
}

fn level() -> impl Strategy<Value = SummabilityLevel> {
    (1usize..=4, 1usize..=4, 1i64..=6, 1i64..=3)
        .prop_map(|(p, q, n, d)| SummabilityLevel::new(p, q, Rational64::new(n, d)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ring_axioms(f in series_strategy(Shape::square(2), 8),
                   g in series_strategy(Shape::square(2), 8),
                   h in series_strategy(Shape::square(2), 8)) {
        let t = f.trunc().min(g.trunc()).min(h.trunc());
        let (f, g, h) = (f.truncated(t), g.truncated(t), h.truncated(t));
        prop_assert_eq!(f.mul(&g).unwrap().mul(&h).unwrap(), f.mul(&g.mul(&h).unwrap()).unwrap());
        prop_assert_eq!(
            f.mul(&g.add(&h).unwrap()).unwrap(),
            f.mul(&g).unwrap().add(&f.mul(&h).unwrap()).unwrap()
        );
        prop_assert_eq!(f.mul(&E::identity(2, t)).unwrap(), f.clone());
        prop_assert!(f.add(&f.neg()).unwrap().is_zero());
    }

    #[test]
    fn pullback_is_a_ring_morphism(f in series_strategy(Shape::SCALAR, 10),
                                   g in series_strategy(Shape::SCALAR, 10),
                                   map in blowup()) {
        let (f, g) = same_trunc(&f, &g);
        let t = f.trunc();
        let lhs = f.mul(&g).unwrap().pullback(&map).truncated(t);
        let rhs = f.pullback(&map).mul(&g.pullback(&map)).unwrap().truncated(t);
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(
            f.add(&g).unwrap().pullback(&map),
            f.pullback(&map).add(&g.pullback(&map)).unwrap()
        );
    }

    #[test]
    fn derivative_obeys_leibniz(f in series_strategy(Shape::square(2), 8),
                                g in series_strategy(Shape::square(2), 8),
                                x2 in any::<bool>()) {
        let var = if x2 { Var::X2 } else { Var::X1 };
        let (f, g) = same_trunc(&f, &g);
        let lhs = f.mul(&g).unwrap().derivative(var);
        let rhs = f.derivative(var).mul(&g).unwrap().add(&f.mul(&g.derivative(var)).unwrap()).unwrap();
        let t = lhs.trunc().min(rhs.trunc());
        prop_assert_eq!(lhs.truncated(t), rhs.truncated(t));
    }

    #[test]
    fn bracket_is_a_lie_bracket(a in series_strategy(Shape::square(2), 6),
                                b in series_strategy(Shape::square(2), 6),
                                c in series_strategy(Shape::square(2), 6)) {
        let t = a.trunc().min(b.trunc()).min(c.trunc());
        let (a, b, c) = (a.truncated(t), b.truncated(t), c.truncated(t));
        prop_assert!(a.bracket(&b).unwrap().add(&b.bracket(&a).unwrap()).unwrap().is_zero());
        let jacobi = a.bracket(&b.bracket(&c).unwrap()).unwrap()
            .add(&b.bracket(&c.bracket(&a).unwrap()).unwrap()).unwrap()
            .add(&c.bracket(&a.bracket(&b).unwrap()).unwrap()).unwrap();
        prop_assert!(jacobi.is_zero());
    }

    #[test]
    fn decomposition_round_trip(f in series_strategy(Shape::square(2), 20), p in 1usize..=4, q in 1usize..=4) {
        let d = t_decompose(&f, MonomialIndex::new(p, q).unwrap());
        for layer in &d.layers {
            prop_assert!(layer.terms().all(|((m, j), _)| m < p || j < q));
        }
        prop_assert_eq!(t_recompose(&d).unwrap(), f);
    }

    #[test]
    fn canonical_level_ignores_rescaling(l in level(), m in 1usize..=4) {
        let scaled = SummabilityLevel::new(l.p * m, l.q * m, l.k / Rational64::from_integer(m as i64)).unwrap();
        prop_assert_eq!(canonical_level(&l), canonical_level(&scaled));
        prop_assert_eq!(classify_pair(&l, &scaled), PairClass::SameClass);
    }

    #[test]
    fn blowups_transport_invariants(l in level(), map in blowup()) {
        let (a, b) = canonical_level(&l);
        let n = Rational64::from_integer(map.power as i64);
        let expected = match map.axis {
            monosum::BlowupAxis::Pi1 => (a, b + n * a),
            monosum::BlowupAxis::Pi2 => (a + n * b, b),
        };
        prop_assert_eq!(canonical_level(&pullback_level(&l, &map)), expected);
    }

    #[test]
    fn normalization_preserves_same_class(levels in prop::collection::vec(level(), 2..=4)) {
        let tr = normalize_by_blowups(&levels).unwrap();
        for step in &tr.steps {
            for i in 0..step.before.len() {
                for j in 0..step.before.len() {
                    let before = classify_pair(&step.before[i], &step.before[j]) == PairClass::SameClass;
                    let after = classify_pair(&step.after[i], &step.after[j]) == PairClass::SameClass;
                    prop_assert_eq!(before, after);
                }
            }
        }
    }

    #[test]
    fn borel_is_linear(u in prop::collection::vec(-3.0f64..3.0, 1..20),
                       v in prop::collection::vec(-3.0f64..3.0, 1..20),
                       a in -2.0f64..2.0, k in 0.5f64..3.0) {
        let n = u.len().min(v.len());
        let mk = |c: &[f64]| UnivariateSeries::new(c[..n].iter().map(|&x| Complex64::new(x, 0.0)).collect(), Variable::T);
        let combo: Vec<f64> = (0..n).map(|i| a * u[i] + v[i]).collect();
        let lhs = formal_borel(&mk(&combo), k).unwrap();
        let bu = formal_borel(&mk(&u), k).unwrap();
        let bv = formal_borel(&mk(&v), k).unwrap();
        for i in 0..n {
            let rhs = bu.coeffs[i] * a + bv.coeffs[i];
            prop_assert!((lhs.coeffs[i] - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
        }
    }

    #[test]
    fn laplace_recovers_polynomials(c in prop::collection::vec(-2.0f64..2.0, 1..6),
                                    t in 0.05f64..0.5, d in -0.5f64..0.5, k in prop::sample::select(vec![1.0, 1.5, 2.0, 3.0])) {
        let u = UnivariateSeries::new(c.iter().map(|&x| Complex64::new(x, 0.0)).collect(), Variable::T);
        let b = formal_borel(&u, k).unwrap();
        let approx = pade_continue(&b, c.len() - 1, 0).unwrap();
        let t = Complex64::new(t, 0.0);
        let got = laplace_sum(&approx, k, t, d / k, &QuadratureConfig::default()).unwrap();
        let want = u.evaluate(t);
        prop_assert!((got.value - want).norm() < 1e-9, "{} vs {}", got.value, want);
    }

    #[test]
    fn spectral_verdict_survives_scaling(a in prop::collection::vec(-3i64..=3, 4),
                                         b in prop::collection::vec(-3i64..=3, 4),
                                         s in 1i64..=5,
                                         e in (1usize..=3, 1usize..=3, 1usize..=3, 1usize..=3)) {
        let exps = Exponents::new(e.0, e.1, e.2, e.3).unwrap();
        let to_c = |v: &[i64], f: f64| v.iter().map(|&x| Complex64::new(x as f64 * f, 0.0)).collect::<Vec<_>>();
        let base = classify_spectra(exps, &to_c(&a, 1.0), &to_c(&b, 1.0), 2).unwrap();
        let scaled = classify_spectra(exps, &to_c(&a, s as f64), &to_c(&b, s as f64), 2).unwrap();
        prop_assert_eq!(base.case, spectral_case(exps));
        prop_assert_eq!(base.a_nilpotent, scaled.a_nilpotent);
        prop_assert_eq!(base.b_nilpotent, scaled.b_nilpotent);
        prop_assert_eq!(base.violated, scaled.violated);
    }
}

fn alternating_euler(len: usize) -> UnivariateSeries {
    let mut f = 1.0;
    let coeffs = (0..len)
        .map(|n| {
            if n > 0 {
                f *= n as f64;
            }
            Complex64::new(if n % 2 == 0 { f } else { -f }, 0.0)
        })
        .collect();
    UnivariateSeries::new(coeffs, Variable::T)
}

#[test]
fn sum_is_direction_independent_between_singular_rays() {
    let b = formal_borel(&alternating_euler(30), 1.0).unwrap();
    let approx = pade_continue(&b, 14, 14).unwrap();
    let t = Complex64::new(0.1, 0.0);
    let cfg = QuadratureConfig::default();
    let reference = laplace_sum(&approx, 1.0, t, 0.0, &cfg).unwrap().value;
    for d in [-0.6, -0.3, 0.3, 0.6] {
        let v = laplace_sum(&approx, 1.0, t, d, &cfg).unwrap().value;
        assert!((v - reference).norm() < 1e-10, "direction {d}: {v} vs {reference}");
    }
}

#[test]
fn quadrature_refinement_converges() {
    let b = formal_borel(&alternating_euler(30), 1.0).unwrap();
    let approx = pade_continue(&b, 14, 14).unwrap();
    let t = Complex64::new(0.2, 0.0);
    let coarse = QuadratureConfig { panels: 4, nodes: 16, ..Default::default() };
    let fine = QuadratureConfig { panels: 16, nodes: 64, ..Default::default() };
    let a = laplace_sum(&approx, 1.0, t, 0.0, &coarse).unwrap();
    let b = laplace_sum(&approx, 1.0, t, 0.0, &fine).unwrap();
    assert!((a.value - b.value).norm() < 1e-8);
    assert!(b.tail_bound < 1e-12);
}

#[test]
fn laplace_recovers_polynomials_below_order_one() {
    // The k < 1 kernel decays slowly, so the ray has to reach much further.
    let cfg = QuadratureConfig { xi_max_factor: 4000.0, panels: 64, ..Default::default() };
    let u = UnivariateSeries::new(vec![c(1.0), c(-2.0), c(0.5)], Variable::T);
    for k in [0.5, 2.0 / 3.0] {
        let approx = pade_continue(&formal_borel(&u, k).unwrap(), 2, 0).unwrap();
        let t = c(0.2);
        let got = laplace_sum(&approx, k, t, 0.0, &cfg).unwrap();
        assert!((got.value - u.evaluate(t)).norm() < 1e-9, "k = {k}: {}", got.value);
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}
