//! Standard decompositions.
//!
//! Every xi expression rewrites uniquely over indices whose `a`-entries are
//! `p`-reduced (numerator and denominator prime to `p`); Puiseux coefficients
//! absorb the rest. The rewriting follows the inductive formula
//! `xi_w = sum_k k^{alpha_1} L^k sigma^{-k}(z^{-a_1} xi_tail)` and reduces
//! each sum `sum_k k^a L^k sigma^{-k}(z^{-g} xi)` by the p-adic valuation `u`
//! of `g = eta p^u`:
//!
//! - `u = 0`: a single standard index (prepend).
//! - `u > 0`: split at `k <= u`; the finite part is a shifted standard
//!   expression, the tail restarts with `g = eta` after rewriting
//!   `sigma^{-u}(xi)` over the family.
//! - `u < 0`: pull `sigma^{v}` out (`v = -u`) and subtract the overshoot.
//!
//! Nonterminal recursion always shortens the index, so the depth is bounded
//! by the tuple length; the budget is a safety net, not a tuning knob.

use num_traits::Signed;

use crate::error::{CoreError, Result};
use crate::scalar::{q_pow, qi, split_p_part, Q, Scalar};
use crate::series::TruncatedPuiseux;

use super::rewrite::{xi_shift, xi_shift_expr};
use super::{GeneralizedSeries, XiExpr, XiIndex};

/// Recursion budget; valid inputs stay far below it.
pub const DEFAULT_BUDGET: u32 = 64;

/// Standardizes an expression: same element, all indices p-reduced.
pub fn standardize(e: &XiExpr, p: u32) -> Result<XiExpr> {
    standardize_options(e, p, DEFAULT_BUDGET)
}

pub fn standardize_options(e: &XiExpr, p: u32, budget: u32) -> Result<XiExpr> {
    let mut out = XiExpr::zero();
    for (idx, f) in e.terms() {
        let std_idx = standardize_index(idx, p, budget)?;
        out = out.add(&std_idx.puiseux_mul(f));
    }
    Ok(out.mark_standard(p))
}

/// Standardizes a generalized series coefficient by coefficient.
pub fn standardize_series(g: &GeneralizedSeries, p: u32) -> Result<GeneralizedSeries> {
    let mut out = GeneralizedSeries::zero();
    for ((c, j), e) in g.terms() {
        out = out.add(&GeneralizedSeries::term(c.clone(), *j, standardize(e, p)?));
    }
    Ok(out)
}

fn standardize_index(idx: &XiIndex, p: u32, budget: u32) -> Result<XiExpr> {
    if budget == 0 {
        return Err(CoreError::RecursionBudgetExceeded);
    }
    if idx.is_empty() {
        return Ok(XiExpr::one());
    }
    if idx.is_standard(p) {
        return Ok(XiExpr::from_index(idx.clone()));
    }
    let tail_std = standardize_index(&idx.tail(), p, budget - 1)?;
    let lam = idx.lambda_product();
    let alpha1 = idx.alpha[0];
    let a1 = &idx.a[0];
    let mut out = XiExpr::zero();
    for (om, coeff) in tail_std.terms() {
        for (e, c) in coeff.terms() {
            // coefficient monomial c z^{e} with e <= 0
            let gamma = a1 - e;
            let part = standard_sum(alpha1, &lam, &gamma, om, p, budget - 1)?;
            out = out.add(&part.scalar_mul(c));
        }
    }
    Ok(out)
}

/// Standard form of `sum_{k>=1} k^alpha lam^k sigma^{-k}(z^{-gamma} xi_om)`
/// for `gamma > 0` and a standard index `om`.
fn standard_sum(
    alpha: u32,
    lam: &Scalar,
    gamma: &Q,
    om: &XiIndex,
    p: u32,
    budget: u32,
) -> Result<XiExpr> {
    if budget == 0 {
        return Err(CoreError::RecursionBudgetExceeded);
    }
    debug_assert!(gamma.is_positive());
    let (eta, u) = split_p_part(gamma, p);
    if u == 0 {
        let lam0 = lam.div(&om.lambda_product())?;
        return Ok(XiExpr::from_index(om.prepend(alpha, lam0, gamma.clone())?));
    }
    let pq = qi(p as i64);
    if u > 0 {
        let mut out = XiExpr::zero();
        // k = 1..u: k^alpha lam^k z^{-eta p^{u-k}} sigma^{-k}(xi_om)
        for k in 1..=u {
            let shifted = xi_shift(om, -k, p)?;
            let mut kpow = Scalar::one();
            for _ in 0..alpha {
                kpow = kpow.mul(&Scalar::from_i64(k));
            }
            let coef = kpow.mul(&lam.pow(k)?);
            let mono = TruncatedPuiseux::monomial(-(&eta * q_pow(&pq, u - k)), coef);
            out = out.add(&shifted.puiseux_mul(&mono));
        }
        // tail: T = sigma^{-u}(xi_om), restart each monomial with g = eta + theta
        let t_expr = xi_shift(om, -u, p)?;
        let lam_u = lam.pow(u)?;
        for (om2, r) in t_expr.terms() {
            for (e, c) in r.terms() {
                let theta = -e.clone();
                debug_assert!(!theta.is_negative());
                for i in 0..=alpha {
                    let bin = Scalar::from_q(super::binomial(alpha as usize, i as usize));
                    let upow = Scalar::from_i64(u).pow((alpha - i) as i64)?;
                    let coef = bin.mul(&upow).mul(&lam_u).mul(c);
                    let inner = standard_sum(i, lam, &(&eta + &theta), om2, p, budget - 1)?;
                    out = out.add(&inner.scalar_mul(&coef));
                }
            }
        }
        Ok(out)
    } else {
        let v = -u;
        // base = z^{-eta} sigma^{v}(xi_om)
        let base = xi_shift(om, v, p)?
            .puiseux_mul(&TruncatedPuiseux::monomial(-eta.clone(), Scalar::one()));
        let mut out = XiExpr::zero();
        let lam_mv = lam.pow(-v)?;
        // main part: sum_{k>=1} (k-v)^alpha lam^{k-v} sigma^{-k}(base)
        for (om2, r) in base.terms() {
            for (e, c) in r.terms() {
                let theta = -e.clone();
                debug_assert!(theta.is_positive());
                for i in 0..=alpha {
                    let bin = Scalar::from_q(super::binomial(alpha as usize, i as usize));
                    let vpow = Scalar::from_i64(-v).pow((alpha - i) as i64)?;
                    let coef = bin.mul(&vpow).mul(&lam_mv).mul(c);
                    let inner = standard_sum(i, lam, &theta, om2, p, budget - 1)?;
                    out = out.add(&inner.scalar_mul(&coef));
                }
            }
        }
        // overshoot: k = 1..v of the same summand, subtracted
        for k in 1..=v {
            let term = xi_shift_expr(&base, -k, p)?;
            let kv = k - v; // <= 0
            let mut kvpow = Scalar::one();
            for _ in 0..alpha {
                kvpow = kvpow.mul(&Scalar::from_i64(kv));
            }
            let coef = kvpow.mul(&lam.pow(kv)?);
            out = out.sub(&term.scalar_mul(&coef));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::q;
    use crate::xi::Window;
    use alloc::vec;
    use alloc::vec::Vec;

    fn idx(alpha: &[u32], lambda: &[i64], a: &[(i64, i64)]) -> XiIndex {
        XiIndex::new(
            alpha.to_vec(),
            lambda.iter().map(|&l| Scalar::from_i64(l)).collect(),
            a.iter().map(|&(n, d)| q(n, d)).collect(),
        )
        .unwrap()
    }

    fn check_standard(e: &XiExpr, p: u32) {
        for (i, _) in e.terms() {
            assert!(i.is_standard(p), "index {i} is not standard");
        }
        assert!(e.is_marked_standard());
    }

    #[test]
    fn the_display_identity() {
        // xi_{(0),(1),(p)} = z^{-1} + xi_{(0),(1),(1)}
        let p = 2;
        let e = XiExpr::from_index(idx(&[0], &[1], &[(2, 1)]));
        let s = standardize(&e, p).unwrap();
        check_standard(&s, p);
        let expected = XiExpr::from_puiseux(TruncatedPuiseux::monomial(qi_(-1), Scalar::one()))
            .add(&XiExpr::from_index(idx(&[0], &[1], &[(1, 1)])));
        assert_eq!(s, expected.mark_standard(p));
    }

    fn qi_(n: i64) -> Q {
        crate::scalar::qi(n)
    }

    #[test]
    fn already_standard_is_fixed() {
        let p = 2;
        let e = XiExpr::from_index(idx(&[1, 0], &[2, -1], &[(1, 1), (3, 1)]))
            .scalar_mul(&Scalar::from_i64(5));
        let s = standardize(&e, p).unwrap();
        assert_eq!(s, e.clone().mark_standard(p));
        // idempotence
        let s2 = standardize(&s, p).unwrap();
        assert_eq!(s2, s);
    }

    #[test]
    fn negative_valuation_entry() {
        // xi_{(0),(1),(1/p)} standardizes; verified on a window
        let p = 2;
        let raw = idx(&[0], &[1], &[(1, 2)]);
        let e = XiExpr::from_index(raw.clone());
        let s = standardize(&e, p).unwrap();
        check_standard(&s, p);
        let w = Window::new(qi_(-3), q(1, 256));
        assert!(e.windows_agree(&s, p, &w).unwrap());
    }

    #[test]
    fn mixed_entries_against_oracle() {
        let p = 2;
        let cases: Vec<XiIndex> = vec![
            idx(&[0], &[1], &[(4, 1)]),
            idx(&[1], &[-2], &[(2, 1)]),
            idx(&[0], &[3], &[(3, 4)]),
            idx(&[0, 0], &[1, 1], &[(2, 1), (1, 1)]),
            idx(&[1, 0], &[2, 1], &[(1, 1), (1, 2)]),
            idx(&[0, 1], &[1, -1], &[(1, 2), (6, 1)]),
        ];
        for i in cases {
            let e = XiExpr::from_index(i.clone());
            let s = standardize(&e, p).unwrap();
            check_standard(&s, p);
            let w = Window::new(qi_(-4), q(1, 512));
            assert!(
                e.windows_agree(&s, p, &w).unwrap(),
                "standardization changed the element for {i}"
            );
            // idempotent
            assert_eq!(standardize(&s, p).unwrap(), s);
        }
    }

    #[test]
    fn linear_over_puiseux_scalars() {
        let p = 2;
        let a = XiExpr::from_index(idx(&[0], &[1], &[(2, 1)]));
        let b = XiExpr::from_index(idx(&[0], &[1], &[(1, 2)]));
        let f = TruncatedPuiseux::monomial(q(-1, 3), Scalar::from_i64(7));
        let lhs = standardize(&a.puiseux_mul(&f).add(&b), p).unwrap();
        let rhs = standardize(&a, p).unwrap().puiseux_mul(&f).add(&standardize(&b, p).unwrap());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn uniqueness_zero_detection() {
        // a standard expression that expands to zero on a wide window must be
        // the zero map: build s - s and check
        let p = 2;
        let e = XiExpr::from_index(idx(&[0], &[1], &[(2, 1)]));
        let s = standardize(&e, p).unwrap();
        let z = s.sub(&s);
        assert!(z.is_exactly_zero());
    }

    use crate::series::TruncatedPuiseux;
}
