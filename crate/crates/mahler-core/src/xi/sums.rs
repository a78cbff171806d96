//! Closed forms for the sums `sum_{k>=1} k^alpha c^k sigma^{-k}(h)`.
//!
//! For `h = z^{-gamma} xi_w` with `gamma > 0` the sum is one xi series with
//! the entry `(alpha, c / prod(lambda), gamma)` prepended. For a bare
//! `h = xi_w` (nonempty `w`) the change of variable `m = k + k_1` turns the
//! inner sum into `g(m) = sum_{k=1}^{m-1} k^alpha (m-k)^{alpha_1} l0^k` with
//! `l0 = c / prod(lambda)`; writing `g(m) = l0^m P(m) + R(m)` with
//! polynomials `P, R` gives
//!
//! ```text
//!   sum = sum_b P_b xi_{(b,rest)  lambda_1 -> l0 lambda_1}
//!       + sum_b R_b xi_{(b,rest)}
//! ```
//!
//! with no boundary correction because `g(1) = 0`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Signed;

use crate::error::{CoreError, Result};
use crate::scalar::{Q, Scalar};

use super::{binomial, XiExpr, XiIndex};

/// Coefficients of the polynomial `P` with `l0 P(n+1) - P(n) = n^M`
/// (`l0 != 1`), ascending, degree `M`.
fn geometric_weight_poly(m: u32, l0: &Scalar) -> Vec<Scalar> {
    let deg = m as usize;
    let mut p = vec![Scalar::zero(); deg + 1];
    let shift = l0.sub(&Scalar::one());
    let shift_inv = shift.inv().expect("l0 != 1");
    // coefficient of n^i: l0 sum_{j>=i} C(j,i) p_j - p_i = [i == M]
    for i in (0..=deg).rev() {
        let mut rhs = if i == deg { Scalar::one() } else { Scalar::zero() };
        for j in (i + 1)..=deg {
            let t = l0.mul(&Scalar::from_q(binomial(j, i))).mul(&p[j]);
            rhs = rhs.sub(&t);
        }
        p[i] = rhs.mul(&shift_inv);
    }
    p
}

/// Faulhaber-style polynomial `F` with `F(n+1) - F(n) = n^M` and `F(1) = 0`,
/// ascending, degree `M + 1`.
fn faulhaber_poly(m: u32) -> Vec<Scalar> {
    let deg = m as usize + 1;
    let mut f = vec![Scalar::zero(); deg + 1];
    // coefficient of n^i in F(n+1) - F(n): sum_{j>i} C(j,i) f_j = [i == M]
    for i in (0..deg).rev() {
        let mut rhs = if i == m as usize { Scalar::one() } else { Scalar::zero() };
        for j in (i + 2)..=deg {
            let t = Scalar::from_q(binomial(j, i)).mul(&f[j]);
            rhs = rhs.sub(&t);
        }
        // the j = i+1 term has weight C(i+1, i) = i+1
        f[i + 1] = rhs.mul(&Scalar::from_i64((i as i64) + 1).inv().unwrap());
    }
    // fix F(1) = 0
    let mut at_one = Scalar::zero();
    for c in f.iter().skip(1) {
        at_one = at_one.add(c);
    }
    f[0] = at_one.neg();
    f
}

/// Writes `sum_{k=1}^{n-1} k^M l0^k = l0^n P(n) + R(n)`; returns `(P, R)`
/// (ascending coefficient vectors; `P` empty when `l0 = 1`).
pub fn power_sum_closed_form(m: u32, l0: &Scalar) -> (Vec<Scalar>, Vec<Scalar>) {
    if l0.is_one() {
        return (Vec::new(), faulhaber_poly(m));
    }
    let p = geometric_weight_poly(m, l0);
    // R = -l0 P(1), a constant
    let mut at_one = Scalar::zero();
    for c in &p {
        at_one = at_one.add(c);
    }
    let r = vec![l0.mul(&at_one).neg()];
    (p, r)
}

fn poly_eval_scalar(p: &[Scalar], n: i64) -> Scalar {
    let x = Scalar::from_i64(n);
    let mut acc = Scalar::zero();
    for c in p.iter().rev() {
        acc = acc.mul(&x).add(c);
    }
    acc
}

fn poly_scale(p: &[Scalar], s: &Scalar) -> Vec<Scalar> {
    p.iter().map(|c| c.mul(s)).collect()
}

fn poly_add_into(acc: &mut Vec<Scalar>, p: &[Scalar]) {
    if acc.len() < p.len() {
        acc.resize(p.len(), Scalar::zero());
    }
    for (i, c) in p.iter().enumerate() {
        acc[i] = acc[i].add(c);
    }
}

/// Multiplies a polynomial by `n^e`.
fn poly_shift_up(p: &[Scalar], e: usize) -> Vec<Scalar> {
    let mut out = vec![Scalar::zero(); e];
    out.extend_from_slice(p);
    out
}

/// Closed form of `sum_{k >= 1} k^alpha c^k sigma^{-k}(z^{-gamma} xi_omega)`.
///
/// `gamma >= 0`; the bare case `gamma = 0` needs a nonempty index (otherwise
/// the sum is not a Hahn series) and resolves through the power-sum split.
pub fn xi_sigma_inverse_sum(
    alpha: u32,
    c: &Scalar,
    gamma: &Q,
    omega: &XiIndex,
    _p: u32,
) -> Result<XiExpr> {
    if c.is_zero() {
        return Err(CoreError::InvalidArgument(String::from("c must be nonzero")));
    }
    if gamma.is_negative() {
        return Err(CoreError::InvalidArgument(String::from("gamma must be nonnegative")));
    }
    if gamma.is_positive() {
        let lam0 = c.div(&omega.lambda_product())?;
        let idx = omega.prepend(alpha, lam0, gamma.clone())?;
        return Ok(XiExpr::from_index(idx));
    }
    if omega.is_empty() {
        return Err(CoreError::InvalidArgument(String::from(
            "sum of sigma^{-k}(1) does not converge in Hahn series",
        )));
    }
    let lam0 = c.div(&omega.lambda_product())?;
    let alpha1 = omega.alpha[0];
    // g(n) = sum_i C(alpha1, i) (-1)^{alpha1 - i} n^i S_{alpha + alpha1 - i}(n)
    let mut p_total: Vec<Scalar> = Vec::new();
    let mut r_total: Vec<Scalar> = Vec::new();
    for i in 0..=alpha1 {
        let sign = if (alpha1 - i) % 2 == 0 { 1 } else { -1 };
        let coef = Scalar::from_q(binomial(alpha1 as usize, i as usize)).mul(&Scalar::from_i64(sign));
        let (pp, rr) = power_sum_closed_form(alpha + alpha1 - i, &lam0);
        poly_add_into(&mut p_total, &poly_scale(&poly_shift_up(&pp, i as usize), &coef));
        poly_add_into(&mut r_total, &poly_scale(&poly_shift_up(&rr, i as usize), &coef));
    }
    // sanity: g(1) = 0 guarantees there is no boundary correction
    debug_assert!(
        poly_eval_scalar(&p_total, 1).mul(&lam0).add(&poly_eval_scalar(&r_total, 1)).is_zero()
    );
    let mut out = XiExpr::zero();
    let tail = omega.tail();
    // lambda_1 -> l0 lambda_1 piece carries P, the unchanged piece carries R
    for (beta, coef) in p_total.iter().enumerate() {
        if coef.is_zero() {
            continue;
        }
        let idx = tail.prepend(beta as u32, lam0.mul(&omega.lambda[0]), omega.a[0].clone())?;
        out = out.add(&XiExpr::from_index(idx).scalar_mul(coef));
    }
    for (beta, coef) in r_total.iter().enumerate() {
        if coef.is_zero() {
            continue;
        }
        let idx = tail.prepend(beta as u32, omega.lambda[0].clone(), omega.a[0].clone())?;
        out = out.add(&XiExpr::from_index(idx).scalar_mul(coef));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, qi};
    use num_traits::Zero;
    use crate::series::TruncatedPuiseux;
    use crate::xi::{Window, xi_shift_sumcheck};

    fn idx(alpha: &[u32], lambda: &[i64], a: &[(i64, i64)]) -> XiIndex {
        XiIndex::new(
            alpha.to_vec(),
            lambda.iter().map(|&l| Scalar::from_i64(l)).collect(),
            a.iter().map(|&(n, d)| q(n, d)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn power_sum_closed_forms() {
        // sum_{k=1}^{n-1} k, l0 = 1: (n-1)n/2
        let (p, r) = power_sum_closed_form(1, &Scalar::one());
        assert!(p.is_empty());
        for n in 1..10i64 {
            let direct: i64 = (1..n).sum();
            assert_eq!(poly_eval_scalar(&r, n), Scalar::from_i64(direct));
        }
        // sum_{k=1}^{n-1} k^2 2^k
        let two = Scalar::from_i64(2);
        let (p, r) = power_sum_closed_form(2, &two);
        for n in 1..12i64 {
            let mut direct = Scalar::zero();
            for k in 1..n {
                direct = direct.add(&Scalar::from_i64(k * k).mul(&two.pow(k).unwrap()));
            }
            let closed = two.pow(n).unwrap().mul(&poly_eval_scalar(&p, n)).add(&poly_eval_scalar(&r, n));
            assert_eq!(closed, direct, "n = {n}");
        }
        // l0 = -1/2
        let half = Scalar::from_q(q(-1, 2));
        let (p, r) = power_sum_closed_form(1, &half);
        for n in 1..10i64 {
            let mut direct = Scalar::zero();
            for k in 1..n {
                direct = direct.add(&Scalar::from_i64(k).mul(&half.pow(k).unwrap()));
            }
            let closed = half.pow(n).unwrap().mul(&poly_eval_scalar(&p, n)).add(&poly_eval_scalar(&r, n));
            assert_eq!(closed, direct, "n = {n}");
        }
    }

    #[test]
    fn monomial_case_direct_definition() {
        // alpha=0, c=1, h = z^{-1}: the sum is xi_{(0),(1),(1)}
        let s = xi_sigma_inverse_sum(0, &Scalar::one(), &qi(1), &XiIndex::empty(), 2).unwrap();
        assert_eq!(s, XiExpr::from_index(idx(&[0], &[1], &[(1, 1)])));
        // alpha=1, c=2, h = z^{-1/2}: xi_{(1),(2),(1/2)}
        let s = xi_sigma_inverse_sum(1, &Scalar::from_i64(2), &q(1, 2), &XiIndex::empty(), 2).unwrap();
        assert_eq!(s, XiExpr::from_index(idx(&[1], &[2], &[(1, 2)])));
    }

    #[test]
    fn bare_xi_case_against_window_oracle() {
        // alpha=0, c=1, h = xi_{(0),(1),(1)}: direct sum equals
        // xi^{alpha=1} - xi^{alpha=0}
        let p = 2;
        let om = idx(&[0], &[1], &[(1, 1)]);
        let s = xi_sigma_inverse_sum(0, &Scalar::one(), &Q::zero(), &om, p).unwrap();
        let expected = XiExpr::from_index(idx(&[1], &[1], &[(1, 1)]))
            .sub(&XiExpr::from_index(om.clone()));
        assert_eq!(s, expected);
        // and the defining equation holds on a window:
        // sum_k k^0 c^k sigma^{-k}(h) evaluated by brute force
        let w = Window::new(qi(-2), q(1, 64));
        xi_shift_sumcheck(&s, 0, &Scalar::one(), &Q::zero(), &om, p, &w);
    }

    #[test]
    fn weighted_cases_against_oracle() {
        let p = 2;
        let w = Window::new(qi(-3), q(1, 32));
        let cases = [
            (0u32, Scalar::from_i64(2), Q::zero(), idx(&[0], &[1], &[(1, 1)])),
            (1, Scalar::from_i64(1), Q::zero(), idx(&[0], &[-2], &[(1, 1)])),
            (0, Scalar::from_q(q(1, 2)), Q::zero(), idx(&[1], &[3], &[(2, 1)])),
            (2, Scalar::from_i64(-1), Q::zero(), idx(&[0, 1], &[1, 2], &[(1, 1), (1, 3)])),
            (1, Scalar::from_i64(3), q(3, 2), idx(&[0], &[1], &[(1, 1)])),
        ];
        for (alpha, c, gamma, om) in cases {
            let s = xi_sigma_inverse_sum(alpha, &c, &gamma, &om, p).unwrap();
            xi_shift_sumcheck(&s, alpha, &c, &gamma, &om, p, &w);
        }
    }

    #[test]
    fn rejects_divergent_input() {
        assert!(xi_sigma_inverse_sum(0, &Scalar::one(), &Q::zero(), &XiIndex::empty(), 2).is_err());
        assert!(xi_sigma_inverse_sum(0, &Scalar::zero(), &qi(1), &XiIndex::empty(), 2).is_err());
    }

    #[allow(dead_code)]
    fn unused(_: TruncatedPuiseux) {}
}
