//! Sigma rewriting of xi series over the fixed index family.
//!
//! One sigma step satisfies, for a nonempty index `w` with `L = prod lambda`,
//!
//! ```text
//!   sigma(xi_w) = L z^{-a_1} xi_{tail} + L sum_{i=0}^{alpha_1} C(alpha_1, i) xi_{(i, alpha_rest)}
//! ```
//!
//! and the inverse step
//!
//! ```text
//!   sigma^{-1}(xi_w) = -[alpha_1 = 0] z^{-a_1/p} sigma^{-1}(xi_tail)
//!                      + L^{-1} sum_{i=0}^{alpha_1} (-1)^{alpha_1 - i} C(alpha_1, i) xi_{(i, alpha_rest)}
//! ```
//!
//! Both express the shifted series over indices with the same (or shorter)
//! `a`-tuples: the leading term reproduces `xi_w` scaled by `L^{+-1}`, all
//! remaining indices are strictly smaller (first alpha entry reduced, or a
//! shorter tuple with a nonconstant coefficient). Arbitrary shifts compose
//! the one-step rules.

use crate::error::Result;
use crate::scalar::{Q, Scalar};
use crate::series::TruncatedPuiseux;

use super::{binomial, XiExpr, XiIndex};

/// `sigma^j(xi_idx)` expanded over the index family (exact coefficients).
pub fn xi_shift(idx: &XiIndex, j: i64, p: u32) -> Result<XiExpr> {
    let mut acc = XiExpr::from_index(idx.clone());
    for _ in 0..j.unsigned_abs() {
        acc = if j > 0 { shift_expr_once(&acc, p)? } else { unshift_expr_once(&acc, p)? };
    }
    Ok(acc)
}

/// `sigma^j` of a whole expression, rewriting every index and substituting
/// the Puiseux coefficients.
pub fn xi_shift_expr(e: &XiExpr, j: i64, p: u32) -> Result<XiExpr> {
    let mut acc = e.clone();
    for _ in 0..j.unsigned_abs() {
        acc = if j > 0 { shift_expr_once(&acc, p)? } else { unshift_expr_once(&acc, p)? };
    }
    Ok(acc)
}

fn shift_expr_once(e: &XiExpr, p: u32) -> Result<XiExpr> {
    let mut out = XiExpr::zero();
    for (idx, f) in e.terms() {
        let sf = f.sigma(p);
        out = out.add(&shift_index_once(idx, p)?.puiseux_mul(&sf));
    }
    Ok(out)
}

fn unshift_expr_once(e: &XiExpr, p: u32) -> Result<XiExpr> {
    let pinv = Q::new(1.into(), (p as i64).into());
    let mut out = XiExpr::zero();
    for (idx, f) in e.terms() {
        let sf = f.mahler_substitute(&pinv)?;
        out = out.add(&unshift_index_once(idx, p)?.puiseux_mul(&sf));
    }
    Ok(out)
}

fn shift_index_once(idx: &XiIndex, _p: u32) -> Result<XiExpr> {
    if idx.is_empty() {
        return Ok(XiExpr::one());
    }
    let lam = idx.lambda_product();
    let tail = idx.tail();
    let a1 = idx.a[0].clone();
    let alpha1 = idx.alpha[0];
    // L z^{-a_1} xi_tail
    let mut out = XiExpr::term(
        tail,
        TruncatedPuiseux::monomial(-a1, lam.clone()),
    );
    for i in 0..=alpha1 {
        let c = Scalar::from_q(binomial(alpha1 as usize, i as usize)).mul(&lam);
        out = out.add(&XiExpr::from_index(idx.with_first_alpha(i)).scalar_mul(&c));
    }
    Ok(out)
}

fn unshift_index_once(idx: &XiIndex, p: u32) -> Result<XiExpr> {
    if idx.is_empty() {
        return Ok(XiExpr::one());
    }
    let lam_inv = idx.lambda_product().inv().expect("lambda entries nonzero");
    let alpha1 = idx.alpha[0];
    let mut out = XiExpr::zero();
    if alpha1 == 0 {
        // -z^{-a_1/p} sigma^{-1}(xi_tail)
        let tail_shifted = unshift_index_once(&idx.tail(), p)?;
        let e = -&idx.a[0] / Q::from_integer((p as i64).into());
        let m = TruncatedPuiseux::monomial(e, Scalar::from_i64(-1));
        out = out.add(&tail_shifted.puiseux_mul(&m));
    }
    for i in 0..=alpha1 {
        let sign = if (alpha1 - i) % 2 == 0 { 1 } else { -1 };
        let c = Scalar::from_q(binomial(alpha1 as usize, i as usize))
            .mul(&Scalar::from_i64(sign))
            .mul(&lam_inv);
        out = out.add(&XiExpr::from_index(idx.with_first_alpha(i)).scalar_mul(&c));
    }
    Ok(out)
}

/// Splits `sigma(xi_idx) = L xi_idx + delta`: returns `(L, delta)` with all
/// indices of `delta` strictly below `idx` in the well-founded order.
pub fn shift_leading_split(idx: &XiIndex, p: u32) -> Result<(Scalar, XiExpr)> {
    let lam = idx.lambda_product();
    let shifted = shift_index_once(idx, p)?;
    let delta = shifted.sub(&XiExpr::from_index(idx.clone()).scalar_mul(&lam));
    Ok((lam, delta))
}
