//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//!
//! Run with `cargo test --release --test acceptance -- --nocapture` to see
//! the lines; every tolerance is pinned in the assertions themselves.

use mahler_core::error::CoreError;
use num_traits::{One, Signed, Zero};
use mahler_core::examples::{non_minimal_operator, rs_operator, rudin_shapiro_series};
use mahler_core::growth::{
    classify_empirical, coefficient_heights, extend_generalized_solution, pullback_operator,
    pullback_series, pullback_series_inverse, purity_report, GrowthLabel, PurityBounds,
};
use mahler_core::guessing::{guess_minimal_operator, normalize_operator};
use mahler_core::heights::{weil_height, weil_height_q};
use mahler_core::matrix::Matrix;
use mahler_core::operators::{equation_to_companion, gauge_apply, newton_polygon, MahlerOperator};
use mahler_core::dunford::{dunford_additive, dunford_multiplicative};
use mahler_core::reduction::{reduce_to_constant, solution_basis, sylvester_negative, sylvester_positive, verify_gauge};
use mahler_core::scalar::{q, qi, vp, Q, Scalar};
use mahler_core::series::{Prec, TruncatedPuiseux};
use mahler_core::xi::{
    standardize, xi_multiply, xi_shift, xi_sigma_inverse_sum, GeneralizedSeries, Window, XiExpr,
    XiIndex,
};
use mahler_core::RatFun;

struct Rng(u64);

impl Rng {
    fn next(&mut self) -> u64 {
        // xorshift64*, deterministic across runs
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x.wrapping_mul(0x2545F4914F6CDD1D)
    }

    fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }

    fn int(&mut self, lo: i64, hi: i64) -> i64 {
        lo + (self.below((hi - lo + 1) as u64) as i64)
    }

    fn nonzero_int(&mut self, lo: i64, hi: i64) -> i64 {
        loop {
            let v = self.int(lo, hi);
            if v != 0 {
                return v;
            }
        }
    }
}

fn pass(name: &str) {
    println!("[PASS] {name}");
}

/// Criterion 1: the non-minimal equation has the published Laurent solution
/// and the constant 1 in its solution span; exact rational equality.
#[test]
fn criterion_1_paper_exact_solution_coefficients() {
    let op = non_minimal_operator();
    let basis = solution_basis(&op, &qi(12)).unwrap();
    assert_eq!(basis.len(), 2);
    let mut fs: Vec<TruncatedPuiseux> = Vec::new();
    for y in &basis {
        for ((c, j), e) in y.terms() {
            assert!(c.is_one());
            assert_eq!(*j, 0);
            fs.push(e.puiseux_part());
        }
    }
    let c1m = fs[0].coefficient(&qi(-1));
    let c2m = fs[1].coefficient(&qi(-1));
    let c10 = fs[0].coefficient(&qi(0));
    let c20 = fs[1].coefficient(&qi(0));
    let det = c1m.mul(&c20).sub(&c2m.mul(&c10));
    assert!(!det.is_zero(), "span does not separate z^-1 and z^0");
    // Laurent normal form: coefficient -1 at z^-1, 0 at z^0
    let a = Scalar::from_i64(-1).mul(&c20).div(&det).unwrap();
    let b = c10.clone().div(&det).unwrap();
    let laurent = fs[0].scalar_mul(&a).add(&fs[1].scalar_mul(&b));
    let expected = [
        (-1i64, -1i64),
        (1, 3),
        (2, 6),
        (3, 6),
        (4, 21),
        (5, 21),
        (6, 60),
        (7, 99),
        (8, 234),
    ];
    for (e, c) in expected {
        assert_eq!(laurent.coefficient(&qi(e)), Scalar::from_i64(c), "z^{e}");
    }
    assert_eq!(laurent.coefficient(&qi(0)), Scalar::zero());
    // constant normal form
    let a = c2m.neg().div(&det).unwrap();
    let b = c1m.clone().div(&det).unwrap();
    let one = fs[0].scalar_mul(&a).add(&fs[1].scalar_mul(&b));
    assert!(one.coefficient(&qi(0)).is_one());
    for n in (1..9).chain([-1]) {
        assert_eq!(one.coefficient(&qi(n)), Scalar::zero());
    }
    pass("criterion 1: exact Laurent coefficients (-1, 3, 6, 6, 21, 21, 60, 99, 234) and the constant 1");
}

/// Criterion 2: the Rudin-Shapiro pack, all equalities exact.
#[test]
fn criterion_2_rudin_shapiro_pack() {
    let op = rs_operator();
    // exponents {1, -1/2}
    let nd = newton_polygon(&op).unwrap();
    let exps = nd.exponents().unwrap();
    assert_eq!(exps, vec![vec![Scalar::from_i64(1)], vec![Scalar::from_q(q(-1, 2))]]);
    // the F2 entry is a scalar multiple of xi_omega, and xi_omega satisfies
    // xi(z^2) = -2 xi(z) - 2/z exactly
    let sys = equation_to_companion(&op).unwrap();
    let red = reduce_to_constant(&sys, &qi(12)).unwrap();
    let omega = XiIndex::new(vec![0], vec![Scalar::from_i64(-2)], vec![qi(1)]).unwrap();
    let entry = &red.f2[(0, 1)];
    assert!(!entry.is_exactly_zero());
    for (idx, _) in entry.terms() {
        assert_eq!(idx, &omega);
    }
    let shifted = xi_shift(&omega, 1, 2).unwrap();
    let expect = XiExpr::from_index(omega.clone())
        .scalar_mul(&Scalar::from_i64(-2))
        .add(&XiExpr::from_puiseux(TruncatedPuiseux::monomial(qi(-1), Scalar::from_i64(-2))));
    assert_eq!(shifted, expect);
    // g_0 = 1/3, g_1 = 5/6, v_2(g_{2^n}) = n+1 in the denominator, heights
    let basis = solution_basis(&op, &qi(12)).unwrap();
    let y = basis
        .iter()
        .find(|y| y.terms().any(|((c, _), _)| c == &Scalar::from_q(q(-1, 2))))
        .unwrap();
    let ext = extend_generalized_solution(&op, y, &qi(1040)).unwrap();
    let e = ext.coefficient_of(&Scalar::from_q(q(-1, 2)), 0);
    let f_part = e.coefficient_of(&omega);
    let g_part = e.puiseux_part();
    let s = Scalar::from_i64(2).mul(&f_part.coefficient(&qi(0)));
    let g = g_part.scalar_mul(&s.inv().unwrap());
    assert_eq!(g.coefficient(&qi(0)), Scalar::from_q(q(1, 3)));
    assert_eq!(g.coefficient(&qi(1)), Scalar::from_q(q(5, 6)));
    for n in 1..=10u32 {
        let c = g.coefficient(&qi(1i64 << n));
        assert_eq!(vp(c.as_rational().unwrap(), 2), -((n as i64) + 1), "n = {n}");
        let h = weil_height(&c).unwrap();
        assert!(h >= ((n + 1) as f64) * (2.0f64).ln() - 1e-9);
    }
    pass("criterion 2: exponents {1, -1/2}, xi functional equation, g_0 = 1/3, g_1 = 5/6, v_2(g_(2^n)) = n+1");
}

fn random_index(rng: &mut Rng, p: u32, max_t: usize, p_power_allowed: bool) -> XiIndex {
    let t = 1 + rng.below(max_t as u64) as usize;
    let alpha: Vec<u32> = (0..t).map(|_| rng.below(3) as u32).collect();
    let lambda: Vec<Scalar> = (0..t)
        .map(|_| {
            let num = rng.nonzero_int(-3, 3);
            let den = rng.int(1, 2);
            Scalar::from_q(q(num, den))
        })
        .collect();
    let a: Vec<Q> = (0..t)
        .map(|_| {
            let num = rng.int(1, 5);
            let den = if p_power_allowed && rng.below(2) == 0 {
                p as i64 * rng.int(1, 2)
            } else {
                rng.int(1, 3)
            };
            q(num * den.signum().max(1), den)
        })
        .collect();
    XiIndex::new(alpha, lambda, a).unwrap()
}

/// Criterion 3: the standardization identity and idempotence on 200
/// randomized expressions, each verified by window-expansion equality.
#[test]
fn criterion_3_standardization() {
    // the display identity, exactly
    let p = 2;
    let raw = XiIndex::new(vec![0], vec![Scalar::one()], vec![qi(2)]).unwrap();
    let s = standardize(&XiExpr::from_index(raw), p).unwrap();
    let target = XiExpr::from_puiseux(TruncatedPuiseux::monomial(qi(-1), Scalar::one())).add(
        &XiExpr::from_index(XiIndex::new(vec![0], vec![Scalar::one()], vec![qi(1)]).unwrap()),
    );
    assert!(s.sub(&target).is_exactly_zero());
    // 200 randomized small expressions
    let mut rng = Rng(0x5EED_0003);
    for case in 0..200 {
        let p = if case % 2 == 0 { 2 } else { 3 };
        let idx = random_index(&mut rng, p, 2, true);
        let coeff = TruncatedPuiseux::monomial(
            q(-rng.int(0, 2), 1),
            Scalar::from_q(q(rng.nonzero_int(-4, 4), 1)),
        );
        let mut e = XiExpr::term(idx, coeff);
        if rng.below(2) == 0 {
            let idx2 = random_index(&mut rng, p, 1, true);
            e = e.add(&XiExpr::from_index(idx2));
        }
        let s = standardize(&e, p).unwrap();
        for (i, _) in s.terms() {
            assert!(i.is_standard(p), "case {case}: index {i} not standard");
        }
        // window (-3, -p^-8) equality, exact coefficients
        let mut w = Window::new(qi(-3), mahler_core::scalar::q_pow(&qi(p as i64), -8));
        w.depth = 9;
        assert!(
            e.windows_agree(&s, p, &w).unwrap(),
            "case {case}: standardization changed the element"
        );
        // idempotence
        let s2 = standardize(&s, p).unwrap();
        assert_eq!(s2, s, "case {case}: not idempotent");
    }
    pass("criterion 3: standardization identity + idempotence on 200 randomized expressions");
}

fn random_equation(rng: &mut Rng, p: u32, d: usize) -> Option<MahlerOperator> {
    let mut coeffs = Vec::new();
    for _ in 0..=d {
        let mut terms = Vec::new();
        for e in 0..4i64 {
            if rng.below(5) < 2 {
                let c = rng.nonzero_int(-3, 3);
                terms.push((qi(e), Scalar::from_i64(c)));
            }
        }
        coeffs.push(TruncatedPuiseux::from_terms(terms, Prec::Exact));
    }
    let op = MahlerOperator::new(p, coeffs);
    if op.order() != d || op.validate_equation().is_err() {
        return None;
    }
    Some(op)
}

/// Criterion 4: zero gauge residual for the two built-in equations and 50
/// randomized systems (d <= 3, polynomial coefficients of degree <= 3,
/// p in {2, 3}); every determinable coefficient of sigma(F1 F2) C - A F1 F2
/// is exactly zero at N = 12.
#[test]
fn criterion_4_reduction_residuals() {
    let n = qi(12);
    for op in [rs_operator(), non_minimal_operator()] {
        let sys = equation_to_companion(&op).unwrap();
        let red = reduce_to_constant(&sys, &n).unwrap();
        let rep = verify_gauge(&sys, &red, &n).unwrap();
        assert_eq!(rep.nonzero, 0, "residual for built-in {op}");
        assert!(rep.checked > 0);
    }
    let mut rng = Rng(0x5EED_0004);
    let mut done = 0usize;
    let mut rejected_splitting = 0usize;
    let mut tried = 0usize;
    while done < 50 {
        tried += 1;
        assert!(tried < 4000, "sampler stalled: {done} of 50 after {tried} tries");
        let p = if rng.below(2) == 0 { 2 } else { 3 };
        let d = 1 + rng.below(3) as usize;
        let Some(op) = random_equation(&mut rng, p, d) else { continue };
        let sys = match equation_to_companion(&op) {
            Ok(s) => s,
            Err(_) => continue,
        };
        match reduce_to_constant(&sys, &n) {
            Ok(red) => {
                let rep = verify_gauge(&sys, &red, &n).unwrap();
                assert_eq!(rep.nonzero, 0, "residual for random system {op}");
                assert!(rep.checked > 0);
                done += 1;
            }
            Err(CoreError::UnsupportedSplitting(_)) => {
                // single-extension design restriction: such samples are
                // rejected, not silently mislabeled
                rejected_splitting += 1;
                continue;
            }
            Err(e) => panic!("pipeline failed on {op}: {e}"),
        }
    }
    pass(&format!(
        "criterion 4: zero residual on eq pack + 50 randomized systems ({rejected_splitting} rejected by the single-extension rule)"
    ));
}

/// Criterion 5: both Sylvester solvers satisfy their defining equations on
/// 100 randomized instances each.
#[test]
fn criterion_5_sylvester_oracles() {
    let mut rng = Rng(0x5EED_0005);
    // positive-valuation solver, checked to truncation
    for case in 0..100 {
        let p = if case % 2 == 0 { 2 } else { 3 };
        let d1 = 1 + rng.below(2) as usize;
        let d2 = 1 + rng.below(2) as usize;
        let c1 = random_invertible(&mut rng, d1);
        let c2 = random_invertible(&mut rng, d2);
        let mut b = Matrix::<TruncatedPuiseux>::zero(d1, d2);
        for i in 0..d1 {
            for j in 0..d2 {
                let mut terms = Vec::new();
                for e in 1..4i64 {
                    if rng.below(3) == 0 {
                        terms.push((qi(e), Scalar::from_i64(rng.nonzero_int(-2, 2))));
                    }
                }
                b[(i, j)] = TruncatedPuiseux::from_terms(terms, Prec::Exact);
            }
        }
        let n = qi(14);
        let m = sylvester_positive(&c1, &c2, &b, p, &n).unwrap();
        // residual C1 M - sigma(M) C2 - B = O(z^14)
        let sm = m.map(|e| e.sigma(p));
        let lhs = scalar_to_series(&c1).mul(&m).sub(&sm.mul(&scalar_to_series(&c2)));
        let resid = lhs.sub(&b);
        for e in resid.entries() {
            assert!(e.truncate(&n).is_zero_up_to_prec(), "case {case}: residual {e}");
        }
    }
    // negative-support solver, checked via window expansion
    for case in 0..100 {
        let p = if case % 2 == 0 { 2 } else { 3 };
        let d1 = 1 + rng.below(2) as usize;
        let d2 = 1 + rng.below(2) as usize;
        let c1 = random_invertible(&mut rng, d1);
        let c2 = random_invertible(&mut rng, d2);
        let mut b = Matrix::<XiExpr>::zero(d1, d2);
        for i in 0..d1 {
            for j in 0..d2 {
                if rng.below(3) == 0 {
                    let idx = random_index(&mut rng, p, 2, false);
                    b[(i, j)] = XiExpr::term(
                        idx,
                        TruncatedPuiseux::monomial(q(-rng.int(0, 1), 1), Scalar::from_i64(rng.nonzero_int(-2, 2))),
                    );
                } else if rng.below(2) == 0 {
                    b[(i, j)] = XiExpr::from_puiseux(TruncatedPuiseux::monomial(
                        q(-rng.int(1, 3), rng.int(1, 2)),
                        Scalar::from_i64(rng.nonzero_int(-2, 2)),
                    ));
                }
            }
        }
        if b.entries().all(XiExpr::is_exactly_zero) {
            continue;
        }
        let f = match sylvester_negative(&c1, &c2, &b, p) {
            Ok(f) => f,
            Err(CoreError::UnsupportedSplitting(_)) => continue,
            Err(e) => panic!("case {case}: {e}"),
        };
        let sf = f.map(|e| e.sigma_scale(p, 1).unwrap());
        let lhs = mahler_core::reduction::mul_xi_xi(&sf, &xi_from_scalar(&c2), p)
            .sub(&mahler_core::reduction::mul_xi_xi(&xi_from_scalar(&c1), &f, p));
        let resid = lhs.sub(&b);
        let mut w = Window::new(qi(-6), q(1, 128));
        w.depth = 7;
        let zero = XiExpr::zero();
        for e in resid.entries() {
            assert!(e.windows_agree(&zero, p, &w).unwrap(), "case {case}: residual {e}");
        }
    }
    pass("criterion 5: both Sylvester solvers verified on 100 randomized instances each");
}

fn random_invertible(rng: &mut Rng, d: usize) -> Matrix<Scalar> {
    loop {
        let mut m = Matrix::<Scalar>::zero(d, d);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = Scalar::from_i64(rng.int(-3, 3));
            }
        }
        if !m.det().is_zero() {
            return m;
        }
    }
}

fn scalar_to_series(m: &Matrix<Scalar>) -> Matrix<TruncatedPuiseux> {
    m.map(|s| TruncatedPuiseux::constant(s.clone()))
}

fn xi_from_scalar(m: &Matrix<Scalar>) -> Matrix<XiExpr> {
    m.map(|s| XiExpr::from_puiseux(TruncatedPuiseux::constant(s.clone())))
}

/// Criterion 6: rewrite-oracle coherence on 100 randomized indices with
/// t <= 3 and alpha entries <= 2.
#[test]
fn criterion_6_rewrite_oracles() {
    let mut rng = Rng(0x5EED_0006);
    for case in 0..100 {
        let p = if case % 2 == 0 { 2 } else { 3 };
        let idx = random_index(&mut rng, p, 3, true);
        // xi_shift against the exact scaling route
        let j = [1i64, -1, 2][rng.below(3) as usize];
        let via_rewrite = xi_shift(&idx, j, p).unwrap();
        let scale = mahler_core::scalar::q_pow(&qi(p as i64), j);
        let via_scaling = XiExpr::from_index(idx.scale_a(&scale));
        let mut w = Window::default_for(&[idx.clone(), idx.scale_a(&scale)], p);
        w.depth = 7;
        w.eps = q(1, 64);
        assert!(
            via_rewrite.windows_agree(&via_scaling, p, &w).unwrap(),
            "case {case}: shift by {j} disagrees for {idx}"
        );
        // xi_sigma_inverse_sum against the brute-force sum (bare and shifted)
        let alpha = rng.below(3) as u32;
        let c = Scalar::from_q(q(rng.nonzero_int(-3, 3), 1));
        let gamma = q(rng.int(0, 2), 1);
        if !gamma.is_zero() || !idx.is_empty() {
            let claimed = xi_sigma_inverse_sum(alpha, &c, &gamma, &idx, p).unwrap();
            let mut w2 = Window::new(qi(-4), q(1, 64));
            w2.depth = 7;
            sumcheck(&claimed, alpha, &c, &gamma, &idx, p, &w2);
        }
        // xi_multiply against pairwise tuple convolution
        let idx2 = random_index(&mut rng, p, 4 - idx.len().min(3), false);
        let prod = xi_multiply(&XiExpr::from_index(idx.clone()), &XiExpr::from_index(idx2.clone()), p);
        let mut w3 = Window::new(qi(-4), q(1, 16));
        w3.depth = 4;
        let probes = prod.probe_set(p, &w3);
        for gamma in probes.into_iter().take(6) {
            let direct = pair_convolution(&idx, &idx2, p, &gamma);
            assert_eq!(
                prod.coefficient_at(p, &gamma).unwrap(),
                direct,
                "case {case}: product coefficient at {gamma} for {idx} * {idx2}"
            );
        }
    }
    pass("criterion 6: shift, sigma-inverse-sum and product all match the expansion oracle on 100 indices");
}

fn coefficient_of_index(i: &XiIndex, p: u32, target: &Q) -> Scalar {
    mahler_core::xi::xi_coefficient_neg(i, p, target)
}

/// Brute-force product coefficient: enumerate tuple pairs with depth bound
/// far beyond the probe depth.
fn pair_convolution(i1: &XiIndex, i2: &XiIndex, p: u32, gamma: &Q) -> Scalar {
    // exponents of xi_{i2} come from its bounded enumeration; each pairs with
    // an exact coefficient lookup on the other factor
    let mut acc = Scalar::zero();
    let mut w = Window::new(gamma - i1.a_sum() - qi(1), q(1, 16384));
    w.depth = 14;
    let h2 = mahler_core::xi::xi_expand(i2, p, &w);
    for (e2, c2) in &h2.terms {
        let need = gamma - e2;
        if need.is_zero() && i1.is_empty() {
            acc = acc.add(c2);
            continue;
        }
        if need >= Q::from_integer(0.into()) {
            continue;
        }
        let c1 = coefficient_of_index(i1, p, &-need);
        if !c1.is_zero() {
            acc = acc.add(&c1.mul(c2));
        }
    }
    if i2.is_empty() {
        // xi_{i2} = 1: the loop above misses the single exponent 0
        let c1 = coefficient_of_index(i1, p, &-(gamma.clone()));
        return c1;
    }
    acc
}

fn sumcheck(
    claimed: &XiExpr,
    alpha: u32,
    c: &Scalar,
    gamma: &Q,
    omega: &XiIndex,
    p: u32,
    w: &Window,
) {
    let pq = qi(p as i64);
    let reach = gamma + omega.a_sum();
    let probes = claimed.probe_set(p, w);
    for e in probes.into_iter().take(16) {
        let mut truth = Scalar::zero();
        let mut k = 1i64;
        loop {
            let pk = mahler_core::scalar::q_pow(&pq, k);
            if &reach / &pk < -e.clone() || k > 64 {
                break;
            }
            let target = -(e.clone() + gamma / &pk);
            let scaled = omega.scale_a(&(qi(1) / &pk));
            let coef = coefficient_of_index(&scaled, p, &target);
            if !coef.is_zero() {
                let mut kpow = Scalar::one();
                for _ in 0..alpha {
                    kpow = kpow.mul(&Scalar::from_i64(k));
                }
                truth = truth.add(&kpow.mul(&c.pow(k).unwrap()).mul(&coef));
            }
            k += 1;
        }
        assert_eq!(claimed.coefficient_at(p, &e).unwrap(), truth, "sum mismatch at {e}");
    }
}

/// Criterion 7: growth regressions on the Rudin-Shapiro material.
#[test]
fn criterion_7_growth_and_purity() {
    // f_RS over 2^10 coefficients: C5
    let f = rudin_shapiro_series(1024);
    let hs = coefficient_heights(&f, &qi(0), &qi(1024)).unwrap();
    let class = classify_empirical(&hs).unwrap();
    assert_eq!(class.label, GrowthLabel::C5);
    // the correction series g fails C4: heights at gamma = 2^n grow linearly
    let op = rs_operator();
    let basis = solution_basis(&op, &qi(12)).unwrap();
    let y = basis
        .iter()
        .find(|y| y.terms().any(|((c, _), _)| c == &Scalar::from_q(q(-1, 2))))
        .unwrap();
    let ext = extend_generalized_solution(&op, y, &qi(1040)).unwrap();
    let e = ext.coefficient_of(&Scalar::from_q(q(-1, 2)), 0);
    let g = e.puiseux_part();
    let hs = coefficient_heights(&g, &qi(0), &qi(1030)).unwrap();
    let gclass = classify_empirical(&hs).unwrap();
    assert!(!gclass.label.satisfies(GrowthLabel::C4), "g labeled {}", gclass.label);
    // purity report: agreement at r = 3, disagreement at r in {4, 5}
    let f = GeneralizedSeries::from_puiseux(rudin_shapiro_series(64));
    let bounds = PurityBounds { classify_to: 1040, ..Default::default() };
    let report = purity_report(&f, 2, &bounds, None).unwrap();
    assert!(report.agreement[2], "classes must agree at r = 3");
    assert!(!report.agreement[3] && !report.agreement[4], "classes must disagree at r = 4, 5");
    pass("criterion 7: f_RS is C5, the correction series fails C4, purity agrees at 3 and splits at 4-5");
}

/// Criterion 8: minimal-operator guessing on the two built-in equations.
#[test]
fn criterion_8_guessing() {
    // eq:RS from 60 Rudin-Shapiro coefficients
    let f = rudin_shapiro_series(60);
    let g = guess_minimal_operator(&f, 2, 3, 3).unwrap();
    assert_eq!(normalize_operator(&g.operator), normalize_operator(&rs_operator()));
    // the non-minimal equation from the Laurent solution extended to 40 terms
    let op = non_minimal_operator();
    let seed = mahler_core::series::series(&[(-1, 1, -1, 1), (3, 1, 1, 1)]).truncate(&qi(2));
    let f = op.extend_solution(&seed, &qi(40)).unwrap();
    let g = guess_minimal_operator(&f, 2, 3, 4).unwrap();
    assert_eq!(g.operator.order(), 2, "an order-1 relation must not exist within the bounds");
    assert_eq!(normalize_operator(&g.operator), normalize_operator(&op));
    pass("criterion 8: guessing recovers both built-in equations exactly, at the right orders");
}

/// Criterion 9: property suites with no paper numerics.
#[test]
fn criterion_9_property_suites() {
    let mut rng = Rng(0x5EED_0009);
    // gauge group action laws on random 2x2 rational-function matrices
    let sys = equation_to_companion(&rs_operator()).unwrap();
    let id = Matrix::<RatFun>::identity(2);
    assert_eq!(gauge_apply(&id, &sys).unwrap().matrix, sys.matrix);
    for _ in 0..10 {
        let r = random_ratfun_matrix(&mut rng, 2);
        let s = random_ratfun_matrix(&mut rng, 2);
        let rs_mat = r.mul(&s);
        let lhs = gauge_apply(&rs_mat, &sys).unwrap();
        let rhs = gauge_apply(&r, &gauge_apply(&s, &sys).unwrap()).unwrap();
        assert_eq!(lhs.matrix, rhs.matrix, "(RS)[A] = R[S[A]]");
    }
    // Dunford exactness on random small matrices
    for _ in 0..20 {
        let d = 2 + rng.below(2) as usize;
        let m = random_invertible(&mut rng, d);
        let (dd, nn) = dunford_additive(&m).unwrap();
        assert_eq!(dd.add(&nn), m);
        assert!(nn.pow(d).is_zero());
        assert_eq!(dd.mul(&nn), nn.mul(&dd));
        let (u, ds) = dunford_multiplicative(&m).unwrap();
        assert_eq!(u.mul(&ds), m);
        assert_eq!(u.mul(&ds), ds.mul(&u));
        assert!(u.sub(&Matrix::identity(d)).pow(d).is_zero());
    }
    // Weil height subadditivity on random rationals
    for _ in 0..200 {
        let a = q(rng.int(-99, 99), rng.int(1, 99));
        let b = q(rng.nonzero_int(-99, 99), rng.int(1, 99));
        let ha = weil_height_q(&a);
        let hb = weil_height_q(&b);
        assert!(weil_height_q(&(&a * &b)) <= ha + hb + 1e-9);
        assert!(weil_height_q(&(&a + &b)) <= ha + hb + (2.0f64).ln() + 1e-9);
    }
    // pullback round-trips on random generalized series
    for case in 0..10 {
        let p = if case % 2 == 0 { 2 } else { 3 };
        let idx = random_index(&mut rng, p, 2, true);
        let e = XiExpr::term(
            idx,
            TruncatedPuiseux::monomial(q(rng.int(-2, 2), rng.int(1, 3)), Scalar::from_i64(rng.nonzero_int(-3, 3))),
        );
        let g = GeneralizedSeries::term(Scalar::from_q(q(rng.nonzero_int(-2, 2), 1)), rng.below(3) as usize, e);
        let nu = if p == 2 { 3 } else { 2 };
        let fwd = pullback_series(&g, p, nu, 1).unwrap();
        let back = pullback_series_inverse(&fwd, p, nu, 1).unwrap();
        assert_eq!(back, g, "pullback round trip");
        // identity parameters
        assert_eq!(pullback_series(&g, p, 1, 0).unwrap(), g);
    }
    // operator pullback coefficient rule
    let pulled = pullback_operator(&rs_operator(), 3, 0).unwrap();
    assert_eq!(pulled.coeff(1), mahler_core::series::series(&[(1, 1, 3, 1), (-1, 1, 0, 1)]));
    // filtration-degree bounds: products add, sigma preserves
    for case in 0..20 {
        let p = if case % 2 == 0 { 2 } else { 3 };
        let i1 = random_index(&mut rng, p, 2, false);
        let i2 = random_index(&mut rng, p, 2, false);
        let e1 = XiExpr::from_index(i1.clone());
        let e2 = XiExpr::from_index(i2.clone());
        let prod = xi_multiply(&e1, &e2, p);
        assert!(
            prod.filtration_degree() <= i1.len() + i2.len(),
            "degree {} > {} + {}",
            prod.filtration_degree(),
            i1.len(),
            i2.len()
        );
        let shifted = mahler_core::xi::xi_shift_expr(&e1, 1, p).unwrap();
        assert!(shifted.filtration_degree() <= e1.filtration_degree());
    }
    pass("criterion 9: action laws, Dunford exactness, height subadditivity, pullback round-trips, filtration bounds");
}

fn random_ratfun_matrix(rng: &mut Rng, d: usize) -> Matrix<RatFun> {
    loop {
        let mut m = Matrix::<RatFun>::zero(d, d);
        for i in 0..d {
            for j in 0..d {
                let mut terms = Vec::new();
                for e in 0..3i64 {
                    if rng.below(2) == 0 {
                        terms.push((qi(e), Scalar::from_i64(rng.int(-2, 2))));
                    }
                }
                m[(i, j)] = RatFun::from_poly(TruncatedPuiseux::from_terms(terms, Prec::Exact));
            }
        }
        let probe = m.map(|r| r.num().constant_term());
        if !probe.det().is_zero() {
            return m;
        }
    }
}
