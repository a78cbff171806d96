//! Growth classification, denominators, pullbacks and the purity report.

use mahler_core::examples::{non_minimal_operator, rs_operator, rudin_shapiro_series};
use mahler_core::growth::{
    classify_by_roots, classify_empirical, coefficient_heights, extend_generalized_solution,
    mahler_denominator_candidate, pullback_operator, pullback_series, pullback_series_inverse,
    purity_report, GrowthLabel, PurityBounds,
};
use mahler_core::operators::MahlerOperator;
use mahler_core::reduction::solution_basis;
use mahler_core::scalar::{q, qi, vp, Q, Scalar};
use mahler_core::series::{Prec, TruncatedPuiseux};
use mahler_core::xi::{GeneralizedSeries, XiExpr, XiIndex};

#[test]
fn rs_heights_are_zero_and_c5() {
    let f = rudin_shapiro_series(1024);
    let hs = coefficient_heights(&f, &qi(0), &qi(1024)).unwrap();
    assert!(hs.len() >= 1000);
    assert!(hs.iter().all(|(_, h)| *h == 0.0));
    let class = classify_empirical(&hs).unwrap();
    assert_eq!(class.label, GrowthLabel::C5);
}

#[test]
fn constant_series_heights() {
    let f = TruncatedPuiseux::from_terms(
        (0..128).map(|i| (qi(i), Scalar::from_i64(3))),
        Prec::At(qi(128)),
    );
    let hs = coefficient_heights(&f, &qi(0), &qi(128)).unwrap();
    let class = classify_empirical(&hs).unwrap();
    assert_eq!(class.label, GrowthLabel::C5);
}

/// The Puiseux correction g of the second Rudin-Shapiro solution: extend it
/// far enough to see the denominator growth v_2(g_{2^n}) = -(n+1).
#[test]
fn rs_g_series_fails_c4() {
    let op = rs_operator();
    let basis = solution_basis(&op, &qi(12)).unwrap();
    // find the e_{-1/2} element
    let y = basis
        .iter()
        .find(|y| y.terms().any(|((c, _), _)| c == &Scalar::from_q(q(-1, 2))))
        .expect("e_{-1/2} element");
    let ext = extend_generalized_solution(&op, y, &qi(1040)).unwrap();
    // normalize: xi coefficient F = s/2 f_RS, g = G / (2 F(0))
    let rs_idx = XiIndex::new(vec![0], vec![Scalar::from_i64(-2)], vec![qi(1)]).unwrap();
    let e = ext.coefficient_of(&Scalar::from_q(q(-1, 2)), 0);
    let f_part = e.coefficient_of(&rs_idx);
    let g_part = e.puiseux_part();
    let f0 = f_part.coefficient(&qi(0));
    assert!(!f0.is_zero());
    let s = Scalar::from_i64(2).mul(&f0);
    let sinv = s.inv().unwrap();
    let g = g_part.scalar_mul(&sinv);
    // paper values
    assert_eq!(g.coefficient(&qi(0)), Scalar::from_q(q(1, 3)), "g_0");
    assert_eq!(g.coefficient(&qi(1)), Scalar::from_q(q(5, 6)), "g_1");
    for n in 1..=10u32 {
        let c = g.coefficient(&qi(1i64 << n));
        let r = c.as_rational().unwrap();
        assert_eq!(vp(r, 2), -((n as i64) + 1), "v_2(g_(2^{n}))");
    }
    // heights at gamma = 2^n grow at least linearly in n
    for n in 1..=10u32 {
        let c = g.coefficient(&qi(1i64 << n));
        let h = mahler_core::heights::weil_height(&c).unwrap();
        let bound = ((n + 1) as f64) * (2.0f64).ln();
        assert!(h >= bound - 1e-9, "h = {h} < {bound} at n = {n}");
    }
    // classifier: not C4/C5 (the log-lower-bound is visible)
    let hs = coefficient_heights(&g, &qi(0), &qi(1030)).unwrap();
    let class = classify_empirical(&hs).unwrap();
    assert!(
        !class.label.satisfies(GrowthLabel::C4),
        "g classified {} although its heights grow like log H",
        class.label
    );
    assert_eq!(class.label, GrowthLabel::C3);
}

#[test]
fn denominator_candidates() {
    // f = 1: candidate 1
    let one = TruncatedPuiseux::one().truncate(&qi(24));
    let rep = mahler_denominator_candidate(&one, 2, 3, 3).unwrap();
    assert_eq!(rep.candidate.as_deref(), Some(&[Q::from_integer(1.into())][..]));
    let class = classify_by_roots(&rep, 2);
    assert_eq!(class.label, GrowthLabel::C3);
    // f_RS: a_0 = 1 in eq:RS
    let f = rudin_shapiro_series(64);
    let rep = mahler_denominator_candidate(&f, 2, 3, 3).unwrap();
    assert_eq!(rep.candidate.as_deref(), Some(&[Q::from_integer(1.into())][..]));
    // the Laurent solution of the non-minimal equation: candidate carries
    // the root 1/2
    let op = non_minimal_operator();
    let seed = mahler_core::series::series(&[(-1, 1, -1, 1), (3, 1, 1, 1)]).truncate(&qi(2));
    let f = op.extend_solution(&seed, &qi(40)).unwrap();
    let rep = mahler_denominator_candidate(&f, 2, 3, 4).unwrap();
    let cand = rep.candidate.clone().unwrap();
    // monic part of 1 - 2z is z - 1/2
    assert_eq!(cand, vec![q(-1, 2), qi(1)]);
    let class = classify_by_roots(&rep, 2);
    assert_eq!(class.label, GrowthLabel::C1, "root 1/2 is not a root of unity");
    // non-Laurent input: explicit zero denominator
    let half = TruncatedPuiseux::monomial(q(1, 2), Scalar::one()).truncate(&qi(9));
    let rep = mahler_denominator_candidate(&half, 2, 2, 2).unwrap();
    assert!(rep.candidate.is_none());
}

#[test]
fn root_classification_orders() {
    // candidate (1 - z^2): roots 1 (order 1) and -1 (order 2): C2, not C3
    let rep = mahler_core::growth::DenominatorReport {
        candidate: Some(vec![qi(-1), qi(0), qi(1)]), // z^2 - 1 monic
        provenance: None,
        z_power: 0,
        roots: mahler_core::growth::classify_factor_roots(&[qi(-1), qi(0), qi(1)]).unwrap(),
    };
    let class = classify_by_roots(&rep, 2);
    assert_eq!(class.label, GrowthLabel::C2);
    // all roots with order sharing a factor with p = 2: (z + 1): C3
    let roots = mahler_core::growth::classify_factor_roots(&[qi(1), qi(1)]).unwrap();
    let rep = mahler_core::growth::DenominatorReport {
        candidate: Some(vec![qi(1), qi(1)]),
        provenance: None,
        z_power: 0,
        roots,
    };
    assert_eq!(classify_by_roots(&rep, 2).label, GrowthLabel::C3);
    // monotonicity: C3 satisfies C2 satisfies C1
    assert!(GrowthLabel::C3.satisfies(GrowthLabel::C2));
    assert!(GrowthLabel::C2.satisfies(GrowthLabel::C1));
}

#[test]
fn pullback_on_operator() {
    // eq:RS with nu = 3, k = 0: coefficients (1, z^3 - 1, -2z^3)
    let op = rs_operator();
    let pulled = pullback_operator(&op, 3, 0).unwrap();
    assert_eq!(pulled.coeff(0), TruncatedPuiseux::one());
    assert_eq!(
        pulled.coeff(1),
        mahler_core::series::series(&[(1, 1, 3, 1), (-1, 1, 0, 1)])
    );
    assert_eq!(pulled.coeff(2), mahler_core::series::series(&[(-2, 1, 3, 1)]));
    // gcd(nu, p) must be 1
    assert!(pullback_operator(&op, 2, 1).is_err());
}

#[test]
fn pullback_roundtrip_on_series() {
    let idx = XiIndex::new(
        vec![1, 0],
        vec![Scalar::from_i64(2), Scalar::from_i64(-1)],
        vec![qi(1), q(1, 3)],
    )
    .unwrap();
    let e = XiExpr::term(
        idx,
        mahler_core::series::series(&[(3, 1, -1, 1), (1, 2, 2, 1)]),
    );
    let g = GeneralizedSeries::term(Scalar::from_q(q(-1, 2)), 2, e);
    let fwd = pullback_series(&g, 2, 3, 2).unwrap();
    let back = pullback_series_inverse(&fwd, 2, 3, 2).unwrap();
    assert_eq!(back, g);
    // identity parameters
    let same = pullback_series(&g, 2, 1, 0).unwrap();
    assert_eq!(same, g);
}

#[test]
fn purity_of_trivial_series() {
    // f = 1 with operator M - 1: single-element basis, C5, trivially pure
    let one = GeneralizedSeries::from_puiseux(TruncatedPuiseux::one().truncate(&qi(80)));
    let report = purity_report(&one, 2, &PurityBounds::default(), None).unwrap();
    assert_eq!(report.operator.order(), 1);
    assert_eq!(report.basis_classes, vec![GrowthLabel::C5]);
    assert!(report.agreement.iter().all(|a| *a));
}

#[test]
fn purity_counterexample_for_rudin_shapiro() {
    let f = GeneralizedSeries::from_puiseux(rudin_shapiro_series(64));
    let mut bounds = PurityBounds::default();
    bounds.classify_to = 1040;
    let report = purity_report(&f, 2, &bounds, None).unwrap();
    // the guessed operator is eq:RS
    assert_eq!(
        mahler_core::guessing::normalize_operator(&report.operator),
        mahler_core::guessing::normalize_operator(&rs_operator())
    );
    assert_eq!(report.basis_classes.len(), 2);
    // one class is C5 (the Rudin-Shapiro series), the other fails C4
    let c5s = report.basis_classes.iter().filter(|l| **l == GrowthLabel::C5).count();
    let fails_c4 = report
        .basis_classes
        .iter()
        .filter(|l| !l.satisfies(GrowthLabel::C4))
        .count();
    assert_eq!(c5s, 1, "classes {:?}", report.basis_classes);
    assert_eq!(fails_c4, 1, "classes {:?}", report.basis_classes);
    // agreement at r = 1, 2, 3; disagreement at r = 4, 5
    assert!(report.agreement[0] && report.agreement[1] && report.agreement[2]);
    assert!(!report.agreement[3] && !report.agreement[4]);
}

#[test]
fn purity_warns_on_non_minimal_equation() {
    // supply eq:non_mini for the constant solution 1
    let one = GeneralizedSeries::from_puiseux(TruncatedPuiseux::one().truncate(&qi(80)));
    let op = non_minimal_operator();
    let report = purity_report(&one, 2, &PurityBounds::default(), Some(&op)).unwrap();
    assert!(
        report.warnings.iter().any(|w| w.contains("not minimal")),
        "warnings: {:?}",
        report.warnings
    );
}

#[test]
fn divisibility_chain_on_synthesized_pair() {
    // g: the Laurent solution with candidate (z - 1/2); f := e g - a_1 sigma(g)
    // with e = 1, a_1 = z; then candidate(g) divides e * candidate(f).
    let op = non_minimal_operator();
    let seed = mahler_core::series::series(&[(-1, 1, -1, 1), (3, 1, 1, 1)]).truncate(&qi(2));
    let g = op.extend_solution(&seed, &qi(60)).unwrap();
    let rep_g = mahler_denominator_candidate(&g, 2, 3, 4).unwrap();
    let a1 = TruncatedPuiseux::monomial(qi(1), Scalar::one());
    let f = g.sub(&a1.mul(&g.sigma(2)));
    let rep_f = mahler_denominator_candidate(&f, 2, 3, 6).unwrap();
    let cg = rep_g.candidate.unwrap();
    let cf = rep_f.candidate.unwrap();
    // cg | 1 * cf exactly
    let (_, rem) = mahler_core::scalar::poly_divmod(&cf, &cg);
    assert!(
        mahler_core::scalar::is_zero_poly(&rem),
        "candidate {:?} does not divide {:?}",
        cg,
        cf
    );
}

#[test]
fn pullback_preserves_empirical_class() {
    // class of f equals class of its pullback for detectable classes
    let f = rudin_shapiro_series(600);
    let hs = coefficient_heights(&f, &qi(0), &qi(600)).unwrap();
    let c0 = classify_empirical(&hs).unwrap();
    let g = GeneralizedSeries::from_puiseux(f);
    let pulled = pullback_series(&g, 2, 3, 1).unwrap();
    let pf = pulled.coefficient_of(&Scalar::one(), 0).puiseux_part();
    let hs2 = coefficient_heights(&pf, &qi(0), &qi(3600)).unwrap();
    let c1 = classify_empirical(&hs2).unwrap();
    assert_eq!(c0.label, c1.label);
}
