//! Products in the xi algebra.
//!
//! Products are computed in the auxiliary basis
//!
//! ```text
//!   xitilde_w(z) = sum_{1 <= k_1 < ... < k_t} k_1^{a1} ... k_t^{at}
//!                  l_1^{k_1} ... l_t^{k_t} z^{-a_1/p^{k_1} - ... - a_t/p^{k_t}}
//! ```
//!
//! where the strictly increasing summation variables are decoupled. The two
//! bases convert into each other by expanding the coefficient polynomial:
//! `xi` uses `k_1^{a1} (k_2-k_1)^{a2} ...` in the increasing variables, and
//! `xitilde` uses `k_1^{a1} (k_1+k_2)^{a2} ...` in the free variables. A
//! product of two `xitilde` series is a sum over interleavings of the two
//! variable chains where collisions may only pair a variable of the first
//! factor with one of the second; each interleaving contributes a single
//! `xitilde` index whose collided entries add the `alpha` and `a` parts and
//! multiply the `lambda` parts.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::One;

use crate::scalar::{Q, Scalar};

use super::{XiExpr, XiIndex};

/// Sparse polynomial in `t` variables over Q, keyed by exponent tuples.
type MultiPoly = BTreeMap<Vec<u32>, Q>;

fn mp_zero() -> MultiPoly {
    BTreeMap::new()
}

fn mp_const(t: usize, c: Q) -> MultiPoly {
    let mut m = BTreeMap::new();
    if !num_traits::Zero::is_zero(&c) {
        m.insert(vec![0; t], c);
    }
    m
}

fn mp_add_term(m: &mut MultiPoly, key: Vec<u32>, c: Q) {
    use num_traits::Zero;
    let e = m.entry(key).or_insert_with(Q::zero);
    *e += c;
    // cleanup happens at the end of multiplications
}

fn mp_mul(a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
    use num_traits::Zero;
    let mut out = mp_zero();
    for (ka, ca) in a {
        for (kb, cb) in b {
            let key: Vec<u32> = ka.iter().zip(kb).map(|(x, y)| x + y).collect();
            mp_add_term(&mut out, key, ca * cb);
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// `(sum_{j in vars} k_j)^e` as a polynomial in `t` variables.
fn power_of_sum(t: usize, vars: &[usize], signs: &[i64], e: u32) -> MultiPoly {
    let mut acc = mp_const(t, Q::one());
    let mut lin = mp_zero();
    for (&v, &s) in vars.iter().zip(signs) {
        let mut key = vec![0u32; t];
        key[v] = 1;
        mp_add_term(&mut lin, key, Q::from_integer(s.into()));
    }
    for _ in 0..e {
        acc = mp_mul(&acc, &lin);
    }
    acc
}

/// Expresses `xi_idx` in the `xitilde` basis: pairs `(coefficient, index)`.
/// The `lambda` and `a` tuples are unchanged; only `alpha` varies.
pub fn xi_to_tilde(idx: &XiIndex) -> Vec<(Q, XiIndex)> {
    convert(idx, true)
}

/// Expresses `xitilde_idx` in the `xi` basis.
pub fn tilde_to_xi(idx: &XiIndex) -> Vec<(Q, XiIndex)> {
    convert(idx, false)
}

fn convert(idx: &XiIndex, to_tilde: bool) -> Vec<(Q, XiIndex)> {
    let t = idx.len();
    if t == 0 {
        return vec![(Q::one(), idx.clone())];
    }
    // build the coefficient polynomial in the target variables
    let mut poly = mp_const(t, Q::one());
    for (j, &aj) in idx.alpha.iter().enumerate() {
        let factor = if to_tilde {
            // xi written over increasing variables l_1 < ... < l_t:
            // factor (l_j - l_{j-1})^{alpha_j} (l_0 = 0)
            if j == 0 {
                power_of_sum(t, &[0], &[1], aj)
            } else {
                power_of_sum(t, &[j, j - 1], &[1, -1], aj)
            }
        } else {
            // xitilde written over free variables k_1, ..., k_t with
            // l_j = k_1 + ... + k_j: factor (k_1 + ... + k_j)^{alpha_j}
            let vars: Vec<usize> = (0..=j).collect();
            let signs = vec![1i64; j + 1];
            power_of_sum(t, &vars, &signs, aj)
        };
        poly = mp_mul(&poly, &factor);
    }
    poly.into_iter()
        .map(|(key, c)| {
            let out = XiIndex { alpha: key, lambda: idx.lambda.clone(), a: idx.a.clone() };
            (c, out)
        })
        .collect()
}

/// All interleavings of the two index chains: at each step take the next
/// entry of the first factor, the next of the second, or collide both.
fn tilde_products(a: &XiIndex, b: &XiIndex) -> Vec<XiIndex> {
    fn go(
        a: &XiIndex,
        b: &XiIndex,
        i: usize,
        j: usize,
        cur: &mut (Vec<u32>, Vec<Scalar>, Vec<Q>),
        out: &mut Vec<XiIndex>,
    ) {
        if i == a.len() && j == b.len() {
            out.push(XiIndex {
                alpha: cur.0.clone(),
                lambda: cur.1.clone(),
                a: cur.2.clone(),
            });
            return;
        }
        if i < a.len() {
            cur.0.push(a.alpha[i]);
            cur.1.push(a.lambda[i].clone());
            cur.2.push(a.a[i].clone());
            go(a, b, i + 1, j, cur, out);
            cur.0.pop();
            cur.1.pop();
            cur.2.pop();
        }
        if j < b.len() {
            cur.0.push(b.alpha[j]);
            cur.1.push(b.lambda[j].clone());
            cur.2.push(b.a[j].clone());
            go(a, b, i, j + 1, cur, out);
            cur.0.pop();
            cur.1.pop();
            cur.2.pop();
        }
        if i < a.len() && j < b.len() {
            cur.0.push(a.alpha[i] + b.alpha[j]);
            cur.1.push(a.lambda[i].mul(&b.lambda[j]));
            cur.2.push(&a.a[i] + &b.a[j]);
            go(a, b, i + 1, j + 1, cur, out);
            cur.0.pop();
            cur.1.pop();
            cur.2.pop();
        }
    }
    let mut out = Vec::new();
    let mut cur = (Vec::new(), Vec::new(), Vec::new());
    go(a, b, 0, 0, &mut cur, &mut out);
    out
}

/// Product of two xi expressions; filtration degrees add. The index
/// combinatorics do not involve `p` (only expansions do), so the parameter
/// documents the ambient operator and nothing else.
pub fn xi_multiply(e1: &XiExpr, e2: &XiExpr, _p: u32) -> XiExpr {
    xi_product(e1, e2)
}

pub(crate) fn xi_product(e1: &XiExpr, e2: &XiExpr) -> XiExpr {
    let mut out = XiExpr::zero();
    for (i1, f1) in e1.terms() {
        for (i2, f2) in e2.terms() {
            let coeff = f1.mul(f2);
            if coeff.is_exactly_zero() {
                continue;
            }
            if i1.is_empty() {
                out = out.add(&XiExpr::term(i2.clone(), coeff));
                continue;
            }
            if i2.is_empty() {
                out = out.add(&XiExpr::term(i1.clone(), coeff));
                continue;
            }
            // expand both factors over xitilde, merge, convert back
            for (c1, t1) in xi_to_tilde(i1) {
                for (c2, t2) in xi_to_tilde(i2) {
                    let c12 = Scalar::from_q(&c1 * &c2);
                    for merged in tilde_products(&t1, &t2) {
                        for (c3, back) in tilde_to_xi(&merged) {
                            let s = c12.mul(&Scalar::from_q(c3));
                            out = out.add(&XiExpr::term(back, coeff.scalar_mul(&s)));
                        }
                    }
                }
            }
        }
    }
    out
}
