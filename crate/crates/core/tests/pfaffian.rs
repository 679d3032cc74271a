use monosum::pfaffian::models::{affine_system, closing_example};
use monosum::pfaffian::{
    classify_spectra, cross_check_other_side, equation_residual, formal_solve, integrability_residual,
    linear_integrability_residual, linear_parts, pullback_system, rank_reduce, Exponents, PfaffianSystem, Side,
    SpectralCase, YExpansion,
};
use monosum::scalar::exact;
use monosum::{BivariateSeries, BlowupMap, Error, ExactComplex, Shape};

type E = BivariateSeries<ExactComplex>;

fn e(v: i64) -> ExactComplex {
    exact(v, 1)
}

fn exps(p: usize, q: usize, p2: usize, q2: usize) -> Exponents {
    Exponents::new(p, q, p2, q2).unwrap()
}

fn scalar_vec(entries: &[((usize, usize), i64)], trunc: usize) -> E {
    E::from_entries(entries.iter().map(|&(k, v)| (k, vec![e(v)])), trunc, Shape::vector(1)).unwrap()
}

fn one_dim(terms: Vec<(u32, E)>, trunc: usize) -> YExpansion<ExactComplex> {
    YExpansion::from_terms(1, Shape::vector(1), trunc, terms.into_iter().map(|(a, s)| (vec![a], s))).unwrap()
}

fn matrix(vals: &[i64], dim: usize, trunc: usize) -> E {
    E::constant(vals.iter().map(|&v| e(v)).collect(), Shape::square(dim), trunc).unwrap()
}

#[test]
fn linear_parts_examples() {
    let sys = closing_example(exps(1, 1, 1, 1), &[e(3), e(-1)], 6).unwrap();
    let (a, b) = linear_parts(&sys).unwrap();
    assert_eq!(a, E::identity(2, 6));
    assert_eq!(b, E::identity(2, 6));

    let xy = scalar_vec(&[((1, 1), 1)], 6);
    let quad = scalar_vec(&[((0, 0), 5)], 6);
    let f1 = one_dim(vec![(1, xy.clone()), (2, quad)], 6);
    let sys = PfaffianSystem::new(exps(1, 1, 1, 1), 1, 2, f1, one_dim(vec![], 6)).unwrap();
    let (a, _) = linear_parts(&sys).unwrap();
    assert_eq!(a, E::from_scalar_entries([((1, 1), e(1))], 6).unwrap());
}

#[test]
fn closing_example_residuals() {
    let c = [e(2)];
    let r = integrability_residual(&closing_example(exps(1, 1, 1, 1), &c, 10).unwrap(), 10).unwrap();
    assert!(r.is_zero());

    let r = integrability_residual(&closing_example(exps(1, 2, 1, 1), &c, 10).unwrap(), 10).unwrap();
    // (x1 x2^2 - 2 x1 x2)(y - c)
    assert_eq!(r.coefficient(&[1]), scalar_vec(&[((1, 2), 1), ((1, 1), -2)], 10));
    assert_eq!(r.coefficient(&[0]), scalar_vec(&[((1, 2), -2), ((1, 1), 4)], 10));

    let zero = PfaffianSystem::new(exps(2, 1, 1, 3), 1, 1, one_dim(vec![], 10), one_dim(vec![], 10)).unwrap();
    assert!(integrability_residual(&zero, 10).unwrap().is_zero());
}

#[test]
fn linear_residual_examples() {
    let a = matrix(&[1, 2, 0, 3], 2, 8);
    let b = a.scale(&exact(2, 3));
    assert!(linear_integrability_residual(&a, &b, exps(3, 2, 3, 2)).unwrap().is_zero());

    let id = E::identity(2, 8);
    let zero = E::zero(Shape::square(2), 8);
    let r = linear_integrability_residual(&id, &zero, exps(1, 1, 1, 1)).unwrap();
    assert_eq!(r, id.mul_monomial(1, 1).scale(&e(-1)).truncated(8));
    assert!(linear_integrability_residual(&zero, &zero, exps(1, 2, 3, 1)).unwrap().is_zero());
    assert!(linear_integrability_residual(&id, &E::zero(Shape::square(3), 8), exps(1, 1, 1, 1)).is_err());
}

#[test]
fn linear_residual_is_linear_block_of_full_residual() {
    let a = E::from_entries(
        [((0, 0), vec![e(1), e(2), e(0), e(-1)]), ((1, 0), vec![e(0), e(1), e(3), e(0)]), ((0, 2), vec![e(1), e(0), e(0), e(2)])],
        8,
        Shape::square(2),
    )
    .unwrap();
    let b = E::from_entries(
        [((0, 0), vec![e(0), e(1), e(1), e(0)]), ((1, 1), vec![e(2), e(0), e(-1), e(1)])],
        8,
        Shape::square(2),
    )
    .unwrap();
    let col = |m: &E, j: usize| {
        let l = m.shape().rows;
        let entries = m.terms().map(|(k, v)| (k, (0..l).map(|i| v[i * l + j].clone()).collect::<Vec<_>>()));
        E::from_entries(entries, m.trunc(), Shape::vector(l)).unwrap()
    };
    let expansion = |m: &E| {
        YExpansion::from_terms(2, Shape::vector(2), 8, [(vec![1, 0], col(m, 0)), (vec![0, 1], col(m, 1))]).unwrap()
    };
    let ex = exps(2, 1, 1, 2);
    let sys = PfaffianSystem::new(ex, 2, 1, expansion(&a), expansion(&b)).unwrap();
    let full = integrability_residual(&sys, 8).unwrap();
    let lin = linear_integrability_residual(&a, &b, ex).unwrap();
    assert_eq!(full.coefficient(&[1, 0]), col(&lin, 0).truncated(full.trunc()));
    assert_eq!(full.coefficient(&[0, 1]), col(&lin, 1).truncated(full.trunc()));
}

fn factorial(n: i64) -> i64 {
    (1..=n).product()
}

#[test]
fn solver_reproduces_factorials() {
    let f1 = one_dim(vec![(0, scalar_vec(&[((1, 0), -1)], 31)), (1, scalar_vec(&[((0, 0), 1)], 31))], 31);
    let sys = PfaffianSystem::new(exps(1, 1, 1, 1), 1, 1, f1, one_dim(vec![], 31)).unwrap();
    let y = formal_solve(&sys, Side::One, 31).unwrap();
    for n in 0..=15 {
        assert_eq!(y.get(n + 1, n).map(|v| v[0].clone()), Some(e(factorial(n as i64))), "n = {n}");
    }
    assert_eq!(y.num_terms(), 16);
    let r = equation_residual(&sys, Side::One, &y, 31).unwrap();
    assert!(r.is_zero());
}

#[test]
fn solver_constant_solutions() {
    let c = [e(3), e(-2)];
    let sys = closing_example(exps(1, 1, 1, 1), &c, 8).unwrap();
    let y = formal_solve(&sys, Side::One, 8).unwrap();
    assert_eq!(y, E::constant(c.to_vec(), Shape::vector(2), 8).unwrap());
    assert!(cross_check_other_side(&sys, &y, Side::Two, 8).unwrap().is_zero());

    let uneven = closing_example(exps(1, 2, 1, 1), &c, 8).unwrap();
    let y = formal_solve(&uneven, Side::One, 8).unwrap();
    assert!(cross_check_other_side(&uneven, &y, Side::Two, 8).unwrap().is_zero());

    let f = one_dim(vec![(1, scalar_vec(&[((0, 0), 1)], 8))], 8);
    let sys = PfaffianSystem::new(exps(1, 1, 1, 1), 1, 1, f.clone(), f).unwrap();
    let y = formal_solve(&sys, Side::One, 8).unwrap();
    assert!(y.is_zero());
    assert!(cross_check_other_side(&sys, &y, Side::Two, 8).unwrap().is_zero());
}

#[test]
fn solver_rejects_singular_linear_part() {
    let f = one_dim(vec![(2, scalar_vec(&[((0, 0), 1)], 8)), (0, scalar_vec(&[((1, 0), 1)], 8))], 8);
    let sys = PfaffianSystem::new(exps(1, 1, 1, 1), 1, 2, f.clone(), f).unwrap();
    assert!(matches!(formal_solve(&sys, Side::One, 8), Err(Error::SingularLinearPart(_))));
    let g = one_dim(vec![(2, scalar_vec(&[((0, 0), 1)], 8)), (0, scalar_vec(&[((0, 0), 1)], 8))], 8);
    let sys = PfaffianSystem::new(exps(1, 1, 1, 1), 1, 2, g.clone(), g).unwrap();
    assert!(matches!(formal_solve(&sys, Side::Two, 8), Err(Error::ConstantTerm(_))));
}

#[test]
fn spectral_examples() {
    let id = [e(1), e(0), e(0), e(1)];
    let zero = vec![e(0); 4];
    let d = classify_spectra(exps(1, 2, 1, 1), &id, &zero, 2).unwrap();
    assert_eq!(d.case, SpectralCase::ANilpotentRequired);
    assert!(d.violated);

    let a = [e(2), e(0), e(0), e(4)];
    let b = [e(3), e(0), e(0), e(6)];
    let d = classify_spectra(exps(2, 3, 2, 3), &a, &b, 2).unwrap();
    assert_eq!(d.case, SpectralCase::EigenPairing);
    assert!(!d.violated);
    assert_eq!(d.pairs.len(), 2);
    for pair in &d.pairs {
        assert!((pair.lambda * 3.0 - pair.mu * 2.0).norm() < 1e-12);
    }

    let upper = [e(0), e(5), e(0), e(0)];
    let d = classify_spectra(exps(1, 1, 2, 2), &id, &upper, 2).unwrap();
    assert_eq!(d.case, SpectralCase::BNilpotentRequired);
    assert!(!d.violated);

    let d = classify_spectra(exps(2, 1, 1, 2), &upper, &upper, 2).unwrap();
    assert_eq!(d.case, SpectralCase::BothNilpotentRequired);
    assert!(!d.violated);
    assert!(classify_spectra(exps(1, 1, 1, 1), &id, &[e(1)], 2).is_err());
}

#[test]
fn rank_reduction_examples() {
    let a = matrix(&[1, 2, 3, 4], 2, 10);
    let b = matrix(&[0, 1, 1, 0], 2, 10);
    let red = rank_reduce(&a, &b, exps(1, 2, 1, 3)).unwrap();
    assert_eq!(red.a_tilde, a);
    assert_eq!(red.b_tilde, b);

    let red = rank_reduce(&a, &b, exps(2, 1, 2, 1)).unwrap();
    let t = red.a_tilde.trunc();
    assert_eq!(t, 4);
    let mut expected = vec![vec![E::zero(Shape::square(2), t); 2]; 2];
    expected[0][0] = a.truncated(t);
    expected[1][1] = a.truncated(t).sub(&E::identity(2, t).mul_monomial(1, 1).truncated(t)).unwrap();
    assert_eq!(red.a_tilde, E::block_matrix(&expected).unwrap());
    let mut expected_b = vec![vec![E::zero(Shape::square(2), t); 2]; 2];
    expected_b[0][0] = b.truncated(t);
    expected_b[1][1] = b.truncated(t);
    assert_eq!(red.b_tilde, E::block_matrix(&expected_b).unwrap());

    let b = a.scale(&exact(3, 2));
    let ex = exps(2, 3, 2, 3);
    assert!(linear_integrability_residual(&a, &b, ex).unwrap().is_zero());
    assert!(rank_reduce(&a, &b, ex).unwrap().residual.is_zero());
    assert!(matches!(rank_reduce(&a, &b, exps(2, 1, 1, 1)), Err(Error::Exponents(_))));
}

#[test]
fn rank_reduction_of_nonconstant_pair() {
    // A = x1 M, B = 0 with p = 2: A_1 = M and the x1-dependence moves into
    // the off-diagonal blocks.
    let m = matrix(&[1, 0, 0, 2], 2, 9).mul_monomial(1, 0).truncated(9);
    let zero = E::zero(Shape::square(2), 9);
    let red = rank_reduce(&m, &zero, exps(2, 1, 2, 1)).unwrap();
    let t = red.a_tilde.trunc();
    let block = red.a_tilde.entry(2, 0).unwrap();
    assert_eq!(block, E::from_scalar_entries([((0, 0), e(1))], t).unwrap());
    let upper = red.a_tilde.entry(0, 2).unwrap();
    assert_eq!(upper, E::from_scalar_entries([((1, 0), e(1))], t).unwrap());
}

#[test]
fn pullback_examples() {
    let c = [e(1)];
    let sys = closing_example(exps(1, 1, 1, 1), &c, 10).unwrap();
    let pulled = pullback_system(&sys, &BlowupMap::pi1(1)).unwrap();
    assert_eq!(pulled.exponents, exps(1, 2, 1, 2));
    assert_eq!(pulled.f1, sys.f1.pullback(&BlowupMap::pi1(1)));
    let expected = sys.f2.pullback(&BlowupMap::pi1(1)).add(&sys.f1.pullback(&BlowupMap::pi1(1))).unwrap();
    assert_eq!(pulled.f2, expected);
    assert!(integrability_residual(&pulled, 10).unwrap().is_zero());

    let pulled = pullback_system(&sys, &BlowupMap::pi2(1)).unwrap();
    assert_eq!(pulled.exponents, exps(2, 1, 2, 1));
    assert!(integrability_residual(&pulled, 10).unwrap().is_zero());

    let uneven = closing_example(exps(2, 1, 1, 1), &c, 10).unwrap();
    assert!(matches!(pullback_system(&uneven, &BlowupMap::pi1(1)), Err(Error::NotDivisible { .. })));
}

#[test]
fn affine_commuting_systems_are_integrable() {
    let a = [e(1), e(2), e(0), e(3)];
    let b: Vec<ExactComplex> = a.iter().map(|v| v.clone() * exact(2, 3)).collect();
    let sys = affine_system(exps(3, 2, 3, 2), &a, &b, &[e(1), e(-1)], 10).unwrap();
    assert!(integrability_residual(&sys, 10).unwrap().is_zero());
}

#[test]
fn system_json_round_trip() {
    let sys = closing_example(exps(1, 2, 3, 1), &[exact(1, 2), e(4)], 6).unwrap();
    let back = PfaffianSystem::<ExactComplex>::from_json(&sys.to_json()).unwrap();
    assert_eq!(back, sys);
}
