//! The xi-algebra of special Hahn series.
//!
//! For an index `w = (alpha, lambda, a)` with `alpha in Z_{>=0}^t`,
//! `lambda in (Qbar*)^t`, `a in Q_{>0}^t`, the Hahn series
//!
//! ```text
//!   xi_w(z) = sum_{k_1..k_t >= 1} k_1^{a1} ... k_t^{at}
//!             l_1^{k_1} l_2^{k_1+k_2} ... l_t^{k_1+...+k_t}
//!             z^{ -a_1/p^{k_1} - a_2/p^{k_1+k_2} - ... }
//! ```
//!
//! has support in the negative rationals (empty index: `xi = 1`). Finite
//! Puiseux-linear combinations of these series form a filtered algebra closed
//! under the Mahler substitution; they are the off-Puiseux content of the
//! fundamental solution matrices. This module provides the index and
//! expression types, the exact expansion oracle, the sigma rewrite rules,
//! products, sigma-inverse sums, the standard decomposition, annihilators and
//! symbolic application of operators to generalized series.

mod expand;
mod rewrite;
mod multiply;
mod sums;
mod standard;
mod annihilator;

pub use expand::{xi_expand, TruncatedHahn, Window};
pub use expand::xi_coefficient_neg;
pub use rewrite::{xi_shift, xi_shift_expr};
pub use multiply::xi_multiply;
pub use sums::{power_sum_closed_form, xi_sigma_inverse_sum};
pub use standard::{standardize, standardize_options, standardize_series};
pub use annihilator::{apply_operator, apply_operator_xi, xi_annihilator};

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::error::{CoreError, Result};
use crate::matrix::RingOps;
use crate::scalar::{is_p_reduced, Q, Scalar};
use crate::series::{Prec, TruncatedPuiseux};

/// Index of a xi series: three tuples of common length.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct XiIndex {
    pub alpha: Vec<u32>,
    pub lambda: Vec<Scalar>,
    pub a: Vec<Q>,
}

impl XiIndex {
    pub fn new(alpha: Vec<u32>, lambda: Vec<Scalar>, a: Vec<Q>) -> Result<Self> {
        if alpha.len() != lambda.len() || alpha.len() != a.len() {
            return Err(CoreError::InvalidArgument(String::from(
                "xi index tuples must have equal length",
            )));
        }
        if lambda.iter().any(Scalar::is_zero) {
            return Err(CoreError::InvalidArgument(String::from("lambda entries must be nonzero")));
        }
        if a.iter().any(|x| !x.is_positive()) {
            return Err(CoreError::InvalidArgument(String::from("a entries must be positive")));
        }
        Ok(XiIndex { alpha, lambda, a })
    }

    /// The empty index, denoting the constant 1.
    pub fn empty() -> Self {
        XiIndex { alpha: Vec::new(), lambda: Vec::new(), a: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    /// Product of the lambda entries (1 for the empty index).
    pub fn lambda_product(&self) -> Scalar {
        let mut acc = Scalar::one();
        for l in &self.lambda {
            acc = acc.mul(l);
        }
        acc
    }

    /// Index with the first coordinate of each tuple removed.
    pub fn tail(&self) -> Self {
        XiIndex {
            alpha: self.alpha[1..].to_vec(),
            lambda: self.lambda[1..].to_vec(),
            a: self.a[1..].to_vec(),
        }
    }

    /// Index with `(alpha0, lambda0, a0)` prepended.
    pub fn prepend(&self, alpha0: u32, lambda0: Scalar, a0: Q) -> Result<Self> {
        let mut alpha = Vec::with_capacity(self.len() + 1);
        alpha.push(alpha0);
        alpha.extend_from_slice(&self.alpha);
        let mut lambda = Vec::with_capacity(self.len() + 1);
        lambda.push(lambda0);
        lambda.extend_from_slice(&self.lambda);
        let mut a = Vec::with_capacity(self.len() + 1);
        a.push(a0);
        a.extend_from_slice(&self.a);
        XiIndex::new(alpha, lambda, a)
    }

    /// Index with the first alpha entry replaced.
    pub fn with_first_alpha(&self, alpha0: u32) -> Self {
        let mut alpha = self.alpha.clone();
        alpha[0] = alpha0;
        XiIndex { alpha, lambda: self.lambda.clone(), a: self.a.clone() }
    }

    /// Scales the `a` tuple by a positive rational (the sigma action is
    /// `a -> p a`).
    pub fn scale_a(&self, m: &Q) -> Self {
        assert!(m.is_positive());
        XiIndex {
            alpha: self.alpha.clone(),
            lambda: self.lambda.clone(),
            a: self.a.iter().map(|x| x * m).collect(),
        }
    }

    /// Standard indices have every `a` entry in `N_(p)`: positive rationals
    /// with numerator and denominator prime to `p`.
    pub fn is_standard(&self, p: u32) -> bool {
        self.a.iter().all(|x| is_p_reduced(x, p))
    }

    /// Sum of the `a` entries; the support of `xi` lies in `[-sum, 0)`.
    pub fn a_sum(&self) -> Q {
        let mut s = Q::zero();
        for x in &self.a {
            s += x;
        }
        s
    }
}

impl core::fmt::Display for XiIndex {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "xi[(")?;
        for (i, x) in self.alpha.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ");(")?;
        for (i, x) in self.lambda.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ");(")?;
        for (i, x) in self.a.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")]")
    }
}

/// A finite Puiseux-linear combination of xi series.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XiExpr {
    terms: BTreeMap<XiIndex, TruncatedPuiseux>,
    /// Set when every stored index is standard (unique decomposition holds).
    standard: bool,
}

impl XiExpr {
    pub fn zero() -> Self {
        XiExpr { terms: BTreeMap::new(), standard: true }
    }

    pub fn one() -> Self {
        Self::from_puiseux(TruncatedPuiseux::one())
    }

    /// A bare Puiseux series, as the coefficient of the empty index.
    pub fn from_puiseux(f: TruncatedPuiseux) -> Self {
        let mut terms = BTreeMap::new();
        if !f.is_exactly_zero() {
            terms.insert(XiIndex::empty(), f);
        }
        XiExpr { terms, standard: true }
    }

    pub fn from_index(idx: XiIndex) -> Self {
        Self::term(idx, TruncatedPuiseux::one())
    }

    pub fn term(idx: XiIndex, coeff: TruncatedPuiseux) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_exactly_zero() {
            terms.insert(idx, coeff);
        }
        XiExpr { terms, standard: false }
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&XiIndex, &TruncatedPuiseux)> {
        self.terms.iter()
    }

    pub fn coefficient_of(&self, idx: &XiIndex) -> TruncatedPuiseux {
        self.terms.get(idx).cloned().unwrap_or_else(TruncatedPuiseux::zero)
    }

    /// The coefficient of the empty index: the Puiseux part.
    pub fn puiseux_part(&self) -> TruncatedPuiseux {
        self.coefficient_of(&XiIndex::empty())
    }

    pub fn is_marked_standard(&self) -> bool {
        self.standard
    }

    pub(crate) fn mark_standard(mut self, p: u32) -> Self {
        debug_assert!(self.terms.keys().all(|i| i.is_standard(p)));
        self.standard = true;
        self
    }

    /// No coefficient is known to be nonzero.
    pub fn is_zero_up_to_prec(&self) -> bool {
        self.terms.values().all(TruncatedPuiseux::is_zero_up_to_prec)
    }

    /// Exactly the zero element.
    pub fn is_exactly_zero(&self) -> bool {
        self.terms.is_empty() || self.terms.values().all(TruncatedPuiseux::is_exactly_zero)
    }

    /// Largest index length involved: the filtration degree when the
    /// coefficients lie in the negative-exponent polynomials.
    pub fn filtration_degree(&self) -> usize {
        self.terms
            .iter()
            .filter(|(_, c)| !c.is_zero_up_to_prec())
            .map(|(i, _)| i.len())
            .max()
            .unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (i, c) in &other.terms {
            match terms.get_mut(i) {
                Some(e) => *e = e.add(c),
                None => {
                    terms.insert(i.clone(), c.clone());
                }
            }
        }
        terms.retain(|_, c| !c.is_exactly_zero());
        XiExpr { terms, standard: self.standard && other.standard }
    }

    pub fn neg(&self) -> Self {
        XiExpr {
            terms: self.terms.iter().map(|(i, c)| (i.clone(), c.neg())).collect(),
            standard: self.standard,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Multiplication by a Puiseux series (the module structure).
    pub fn puiseux_mul(&self, f: &TruncatedPuiseux) -> Self {
        let mut terms = BTreeMap::new();
        for (i, c) in &self.terms {
            let prod = c.mul(f);
            if !prod.is_exactly_zero() {
                terms.insert(i.clone(), prod);
            }
        }
        XiExpr { terms, standard: self.standard }
    }

    pub fn scalar_mul(&self, s: &Scalar) -> Self {
        self.puiseux_mul(&TruncatedPuiseux::constant(s.clone()))
    }

    /// Exact sigma action through index scaling: `sigma^j` maps the
    /// coefficient `f(z)` to `f(z^{p^j})` and `a -> p^j a`. Exact for any
    /// `j` (negative included); indices leave the standard set for `j != 0`.
    pub fn sigma_scale(&self, p: u32, j: i64) -> Result<Self> {
        let mut factor = Q::one();
        let pq = crate::scalar::qi(p as i64);
        for _ in 0..j.unsigned_abs() {
            if j > 0 {
                factor *= &pq;
            } else {
                factor /= &pq;
            }
        }
        let mut terms = BTreeMap::new();
        for (i, c) in &self.terms {
            let idx = i.scale_a(&factor);
            let coeff = c.mahler_substitute(&factor)?;
            terms.insert(idx, coeff);
        }
        Ok(XiExpr { terms, standard: false })
    }

    /// Lowest precision among the coefficients.
    pub fn min_precision(&self) -> Prec {
        let mut p = Prec::Exact;
        for c in self.terms.values() {
            p = p.min(c.prec());
        }
        p
    }
}

impl RingOps for XiExpr {
    fn ring_zero() -> Self {
        XiExpr::zero()
    }
    fn ring_one() -> Self {
        XiExpr::one()
    }
    fn ring_add(&self, other: &Self) -> Self {
        self.add(other)
    }
    fn ring_neg(&self) -> Self {
        self.neg()
    }
    fn ring_mul(&self, other: &Self) -> Self {
        multiply::xi_product(self, other)
    }
    fn ring_is_zero(&self) -> bool {
        self.is_exactly_zero()
    }
}

impl core::fmt::Display for XiExpr {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (i, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            if i.is_empty() {
                write!(f, "({c})")?;
            } else {
                write!(f, "({c})*{i}")?;
            }
        }
        Ok(())
    }
}

/// A generalized series: a finite sum over symbols `e_c l^j` with xi-algebra
/// coefficients; `sigma(e_c) = c e_c` and `sigma(l) = l + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralizedSeries {
    terms: BTreeMap<(Scalar, usize), XiExpr>,
}

impl GeneralizedSeries {
    pub fn zero() -> Self {
        GeneralizedSeries { terms: BTreeMap::new() }
    }

    /// A plain xi expression, attached to `e_1 l^0`.
    pub fn from_xi(e: XiExpr) -> Self {
        Self::term(Scalar::one(), 0, e)
    }

    pub fn from_puiseux(f: TruncatedPuiseux) -> Self {
        Self::from_xi(XiExpr::from_puiseux(f))
    }

    pub fn term(c: Scalar, j: usize, e: XiExpr) -> Self {
        assert!(!c.is_zero(), "e_c labels need nonzero c");
        let mut terms = BTreeMap::new();
        if !e.is_exactly_zero() {
            terms.insert((c, j), e);
        }
        GeneralizedSeries { terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(Scalar, usize), &XiExpr)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient_of(&self, c: &Scalar, j: usize) -> XiExpr {
        self.terms.get(&(c.clone(), j)).cloned().unwrap_or_else(XiExpr::zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (k, e) in &other.terms {
            match terms.get_mut(k) {
                Some(x) => *x = x.add(e),
                None => {
                    terms.insert(k.clone(), e.clone());
                }
            }
        }
        terms.retain(|_, e| !e.is_exactly_zero());
        GeneralizedSeries { terms }
    }

    pub fn neg(&self) -> Self {
        GeneralizedSeries { terms: self.terms.iter().map(|(k, e)| (k.clone(), e.neg())).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn puiseux_mul(&self, f: &TruncatedPuiseux) -> Self {
        let mut terms = BTreeMap::new();
        for (k, e) in &self.terms {
            let prod = e.puiseux_mul(f);
            if !prod.is_exactly_zero() {
                terms.insert(k.clone(), prod);
            }
        }
        GeneralizedSeries { terms }
    }

    pub fn scalar_mul(&self, s: &Scalar) -> Self {
        self.puiseux_mul(&TruncatedPuiseux::constant(s.clone()))
    }

    pub fn xi_mul(&self, e: &XiExpr) -> Self {
        GeneralizedSeries {
            terms: self
                .terms
                .iter()
                .map(|(k, x)| (k.clone(), x.ring_mul(e)))
                .collect(),
        }
    }

    /// One sigma step: coefficients through the exact scaling action, labels
    /// through `sigma(e_c l^j) = c e_c (l+1)^j`.
    pub fn sigma(&self, p: u32) -> Result<Self> {
        let mut out = GeneralizedSeries::zero();
        for ((c, j), e) in &self.terms {
            let se = e.sigma_scale(p, 1)?;
            // (l+1)^j expands over l^s with binomial coefficients
            for s in 0..=*j {
                let bin = binomial(*j, s);
                let scaled = se.scalar_mul(&Scalar::from_q(bin).mul(c));
                out = out.add(&GeneralizedSeries::term(c.clone(), s, scaled));
            }
        }
        Ok(out)
    }

    /// No coefficient is known to be nonzero.
    pub fn is_zero_up_to_prec(&self) -> bool {
        self.terms.values().all(XiExpr::is_zero_up_to_prec)
    }
}

impl RingOps for GeneralizedSeries {
    fn ring_zero() -> Self {
        GeneralizedSeries::zero()
    }
    fn ring_one() -> Self {
        GeneralizedSeries::from_xi(XiExpr::one())
    }
    fn ring_add(&self, other: &Self) -> Self {
        self.add(other)
    }
    fn ring_neg(&self) -> Self {
        self.neg()
    }
    fn ring_mul(&self, other: &Self) -> Self {
        // labels multiply as e_c l^i e_{c'} l^j = e_{cc'} l^{i+j}
        let mut out = GeneralizedSeries::zero();
        for ((c1, j1), e1) in self.terms() {
            for ((c2, j2), e2) in other.terms() {
                let e = multiply::xi_product(e1, e2);
                out = out.add(&GeneralizedSeries::term(c1.mul(c2), j1 + j2, e));
            }
        }
        out
    }
    fn ring_is_zero(&self) -> bool {
        self.terms.values().all(XiExpr::is_exactly_zero)
    }
}

/// Binomial coefficient as an exact rational.
pub fn binomial_pub(n: usize, k: usize) -> Q {
    binomial(n, k)
}

pub(crate) fn binomial(n: usize, k: usize) -> Q {
    if k > n {
        return Q::zero();
    }
    let mut num = Q::one();
    for i in 0..k {
        num *= Q::new(((n - i) as i64).into(), ((i + 1) as i64).into());
    }
    num
}

/// Test oracle: asserts that `claimed` equals
/// `sum_{k>=1} k^alpha c^k sigma^{-k}(z^{-gamma} xi_omega)` on the window,
/// summing the shifted contributions by brute force.
#[cfg(test)]
pub(crate) fn xi_shift_sumcheck(
    claimed: &XiExpr,
    alpha: u32,
    c: &Scalar,
    gamma: &Q,
    omega: &XiIndex,
    p: u32,
    w: &Window,
) {
    use crate::scalar::{q_pow, qi};
    let pq = qi(p as i64);
    let reach = gamma + omega.a_sum();
    let mut probes = claimed.probe_set(p, w);
    for k in 1..=w.depth as i64 {
        let pk = q_pow(&pq, k);
        let scaled = XiExpr::term(
            omega.scale_a(&(Q::one() / &pk)),
            TruncatedPuiseux::monomial(-(gamma / &pk), Scalar::one()),
        );
        probes.extend(scaled.probe_set(p, w));
        if omega.is_empty() {
            let e = -(gamma / &pk);
            if w.contains(&e) {
                probes.insert(e);
            }
        }
    }
    for e in probes {
        let mut truth = Scalar::zero();
        let mut k = 1i64;
        loop {
            let pk = q_pow(&pq, k);
            if &reach / &pk < -e.clone() {
                break;
            }
            let target = -(e.clone() + gamma / &pk);
            let scaled = omega.scale_a(&(Q::one() / &pk));
            let coef = expand::xi_coefficient_neg(&scaled, p, &target);
            if !coef.is_zero() {
                let mut kpow = Scalar::one();
                for _ in 0..alpha {
                    kpow = kpow.mul(&Scalar::from_i64(k));
                }
                truth = truth.add(&kpow.mul(&c.pow(k).unwrap()).mul(&coef));
            }
            k += 1;
            if k > 64 {
                break;
            }
        }
        let got = claimed.coefficient_at(p, &e).expect("claimed expansion exact");
        assert_eq!(got, truth, "sum oracle mismatch at exponent {e}");
    }
}

impl core::fmt::Display for GeneralizedSeries {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, ((c, j), e)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "[{e}]")?;
            if !c.is_one() {
                write!(f, "*e[{c}]")?;
            }
            if *j > 0 {
                write!(f, "*l^{j}")?;
            }
        }
        Ok(())
    }
}
