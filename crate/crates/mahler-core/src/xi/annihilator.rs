//! Annihilating operators for xi series, and symbolic application of
//! operators to generalized series.
//!
//! `sigma(xi_w) - L xi_w` (with `L = prod lambda`) is a combination of
//! strictly smaller indices, so composing `M - L` with an annihilator of
//! that remainder kills `xi_w`. Remainders are eliminated one term at a
//! time: for a term `q xi_m` the operator `q M - sigma(q) L_m` maps it into
//! indices strictly below `m` while keeping ramified-polynomial
//! coefficients. The resulting operator is not claimed minimal.

use alloc::vec;

use num_traits::One;

use crate::error::Result;
use crate::operators::MahlerOperator;
use crate::series::TruncatedPuiseux;

use super::rewrite::{shift_leading_split, xi_shift_expr};
use super::{GeneralizedSeries, XiExpr, XiIndex};

/// Applies an operator to a xi expression, rewriting every shift over the
/// index family.
pub fn apply_operator_xi(op: &MahlerOperator, e: &XiExpr) -> Result<XiExpr> {
    let mut acc = XiExpr::zero();
    let mut shifted = e.clone();
    for (i, a) in op.coeffs().iter().enumerate() {
        if i > 0 {
            shifted = xi_shift_expr(&shifted, 1, op.p)?;
        }
        if a.is_exactly_zero() {
            continue;
        }
        acc = acc.add(&shifted.puiseux_mul(a));
    }
    Ok(acc)
}

/// Applies an operator to a generalized series: the sigma action on labels
/// is `sigma(e_c l^j) = c e_c (l+1)^j`, and the xi parts shift over the
/// family.
pub fn apply_operator(op: &MahlerOperator, g: &GeneralizedSeries) -> Result<GeneralizedSeries> {
    let p = op.p;
    let mut acc = GeneralizedSeries::zero();
    for ((c, j), e) in g.terms() {
        // sigma^i(xi-part) over the family, reused across the binomial spread
        let mut shifted: XiExpr = e.clone();
        for (i, a) in op.coeffs().iter().enumerate() {
            if i > 0 {
                shifted = xi_shift_expr(&shifted, 1, p)?;
            }
            if a.is_exactly_zero() {
                continue;
            }
            let ci = c.pow(i as i64)?;
            let part = shifted.puiseux_mul(a);
            // (l + i)^j spreads over l^s
            for s in 0..=*j {
                let bin = super::binomial(*j, s);
                let mut ipow = crate::scalar::Q::one();
                for _ in 0..(*j - s) {
                    ipow *= crate::scalar::qi(i as i64);
                }
                let coef = crate::scalar::Scalar::from_q(bin * ipow).mul(&ci);
                acc = acc.add(&GeneralizedSeries::term(
                    c.clone(),
                    s,
                    part.scalar_mul(&coef),
                ));
            }
        }
    }
    Ok(acc)
}

/// A (not necessarily minimal) operator with ramified polynomial
/// coefficients annihilating `xi_idx`.
pub fn xi_annihilator(idx: &XiIndex, p: u32) -> Result<MahlerOperator> {
    if idx.is_empty() {
        // M - 1 kills the constant
        return Ok(MahlerOperator::new(
            p,
            vec![
                TruncatedPuiseux::constant(crate::scalar::Scalar::from_i64(-1)),
                TruncatedPuiseux::one(),
            ],
        ));
    }
    let (lam, delta) = shift_leading_split(idx, p)?;
    let base = MahlerOperator::new(
        p,
        vec![TruncatedPuiseux::constant(lam.neg()), TruncatedPuiseux::one()],
    );
    let rest = annihilate_expr(&delta, p)?;
    Ok(rest.mul(&base))
}

/// Operator sending the expression to zero, by eliminating the largest index
/// until nothing remains.
fn annihilate_expr(e: &XiExpr, p: u32) -> Result<MahlerOperator> {
    let mut cur = e.clone();
    let mut acc = MahlerOperator::identity(p);
    // each step strictly lowers the largest index in the (len, alpha, ...) order
    for _ in 0..4096 {
        if cur.is_exactly_zero() {
            return Ok(acc);
        }
        let (idx, q) = largest_term(&cur);
        let lam = idx.lambda_product();
        // B = q M - sigma(q) lam: B(q xi) = q sigma(q) (sigma(xi) - lam xi)
        let b = MahlerOperator::new(
            p,
            vec![q.sigma(p).scalar_mul(&lam).neg(), q.clone()],
        );
        cur = apply_operator_xi(&b, &cur)?;
        // by construction the leading term cancels exactly
        debug_assert!(cur.coefficient_of(&idx).is_exactly_zero() || largest_term(&cur).0 < idx);
        acc = b.mul(&acc);
    }
    Err(crate::error::CoreError::RecursionBudgetExceeded)
}

/// Largest index by (length, alpha-tuple, structural rest), with its
/// coefficient.
fn largest_term(e: &XiExpr) -> (XiIndex, TruncatedPuiseux) {
    let mut best: Option<(&XiIndex, &TruncatedPuiseux)> = None;
    for (i, c) in e.terms() {
        if c.is_exactly_zero() {
            continue;
        }
        best = match best {
            None => Some((i, c)),
            Some((bi, bc)) => {
                if rank(i) > rank(bi) {
                    Some((i, c))
                } else {
                    Some((bi, bc))
                }
            }
        };
    }
    let (i, c) = best.expect("nonzero expression");
    (i.clone(), c.clone())
}

fn rank(i: &XiIndex) -> (usize, alloc::vec::Vec<u32>, XiIndex) {
    (i.len(), i.alpha.clone(), i.clone())
}
