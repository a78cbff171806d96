//! Slope factorization of Mahler operators.
//!
//! An operator with Newton slopes `mu_1 < ... < mu_sigma` of multiplicities
//! `r_1, ..., r_sigma` factors as `L = a L_sigma ... L_1`, each `L_i` a
//! product of first-order pieces `(z^{nu_i} M - c) h^{-1}` where `c` runs over
//! the exponents of slope `mu_i`, `val h = 0`, `cld h = 1`, and
//!
//! ```text
//!   nu_i = (p-1) ( p^{r_1+...+r_{i-1}} (mu_i - mu_{i-1}) + ... + p^{r_1} (mu_2 - mu_1) + mu_1 ).
//! ```
//!
//! Each first-order factor is found through the right-division remainder: a
//! factor `z^nu M - w` right-divides `L` exactly when
//! `sum_i a_i z^{-mu(p^i-1)} prod_{j<i} sigma^j(w) = 0`, and with `w = c v`,
//! `v = 1 + ...`, the coefficients of `v` satisfy a triangular recurrence
//! whose pivot is `-cld(a_0)`, so extraction of the smallest slope never
//! stalls.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{CoreError, Result};
use crate::operators::{newton_polygon, MahlerOperator};
use crate::scalar::{Q, Scalar};
use crate::series::{Prec, TruncatedPuiseux};

/// One factor `(z^nu M - c) h^{-1}`.
#[derive(Debug, Clone)]
pub struct FirstOrderFactor {
    pub nu: Q,
    pub exponent: Scalar,
    /// Unit series with `val h = 0`, `cld h = 1`, truncated.
    pub h: TruncatedPuiseux,
}

impl FirstOrderFactor {
    /// Materializes the factor as an operator, truncated at `target`.
    pub fn to_operator(&self, p: u32, target: &Q) -> Result<MahlerOperator> {
        let hinv = self.h.invert_to(target)?;
        let shinv = hinv.sigma(p);
        Ok(MahlerOperator::new(
            p,
            vec![
                hinv.scalar_mul(&self.exponent.neg()),
                shinv.mul_monomial(&self.nu, &Scalar::one()),
            ],
        ))
    }
}

/// Factors grouped by slope, rightmost factor first inside each block.
#[derive(Debug, Clone)]
pub struct SlopeBlock {
    /// Slope of the edge in the original polygon.
    pub slope: Q,
    /// Common `z`-power of the block's first-order factors.
    pub nu: Q,
    pub factors: Vec<FirstOrderFactor>,
}

#[derive(Debug, Clone)]
pub struct SlopeFactorization {
    pub p: u32,
    /// Unit in front: `L = unit * L_sigma ... L_1`.
    pub unit: TruncatedPuiseux,
    /// Blocks in slope order (smallest slope first = rightmost block).
    pub blocks: Vec<SlopeBlock>,
}

impl SlopeFactorization {
    /// Recomposes `unit * L_sigma ... L_1` truncated at `target`.
    pub fn remultiply(&self, target: &Q) -> Result<MahlerOperator> {
        let mut acc = MahlerOperator::identity(self.p);
        for block in &self.blocks {
            for f in &block.factors {
                acc = f.to_operator(self.p, target)?.mul(&acc);
            }
        }
        Ok(acc.scale(&self.unit))
    }

    pub fn factor_count(&self) -> usize {
        self.blocks.iter().map(|b| b.factors.len()).sum()
    }
}

fn pow_q(p: u32, e: usize) -> Q {
    let mut b = BigInt::one();
    for _ in 0..e {
        b *= p;
    }
    Q::from_integer(b)
}

/// Coefficient at `gamma` of `base * prod_k sigma^{j_k}(v)` where the factors
/// are given as `(series, exponent scale)` pairs.
fn product_coeff_at(factors: &[(&TruncatedPuiseux, Q)], gamma: &Q) -> Scalar {
    // minimal achievable exponent of the tail, for pruning
    let mut min_tail = vec![Q::zero(); factors.len() + 1];
    for k in (0..factors.len()).rev() {
        let v = factors[k]
            .0
            .valuation_lower_bound()
            .unwrap_or_else(Q::zero);
        min_tail[k] = &min_tail[k + 1] + v * &factors[k].1;
    }
    fn go(
        factors: &[(&TruncatedPuiseux, Q)],
        min_tail: &[Q],
        k: usize,
        gamma: &Q,
    ) -> Scalar {
        if k == factors.len() {
            return if gamma.is_zero() { Scalar::one() } else { Scalar::zero() };
        }
        let (s, scale) = &factors[k];
        let mut acc = Scalar::zero();
        let budget = gamma - &min_tail[k + 1];
        for (e, c) in s.terms() {
            let scaled = e * scale;
            if scaled > budget {
                break;
            }
            let rest = go(factors, min_tail, k + 1, &(gamma - &scaled));
            if !rest.is_zero() {
                acc = acc.add(&c.mul(&rest));
            }
        }
        acc
    }
    go(factors, &min_tail, 0, gamma)
}

/// Extracts one first-order right factor `z^nu M - c v` for the current
/// first slope; returns `(nu, c, v)` with `v = 1 + O(z^+)` known to `n_w`.
fn extract_first_factor(
    op: &MahlerOperator,
    exponent: &Scalar,
    slope: &Q,
    n_w: &Q,
) -> Result<(Q, Scalar, TruncatedPuiseux)> {
    let p = op.p;
    let d = op.order();
    let nu = slope * (pow_q(p, 1) - Q::one());
    // B_i = a_i c^i z^{-mu (p^i - 1)}, normalized by the common valuation
    let mut bs: Vec<TruncatedPuiseux> = Vec::with_capacity(d + 1);
    let mut cpow = Scalar::one();
    for i in 0..=d {
        if i > 0 {
            cpow = cpow.mul(exponent);
        }
        let shift = -(slope * (pow_q(p, i) - Q::one()));
        bs.push(op.coeff(i).scalar_mul(&cpow).mul_monomial(&shift, &Scalar::one()));
    }
    let vmin = bs
        .iter()
        .filter_map(TruncatedPuiseux::valuation_lower_bound)
        .min()
        .ok_or_else(|| CoreError::FactorRecurrenceStuck(String::from("zero operator")))?;
    for b in bs.iter_mut() {
        *b = b.mul_monomial(&(-vmin.clone()), &Scalar::one());
    }
    // pivot: minus the constant term of B_0
    let pivot = bs[0].constant_term().neg();
    if pivot.is_zero() {
        return Err(CoreError::FactorRecurrenceStuck(String::from(
            "first-edge pivot vanishes; slope data is inconsistent",
        )));
    }
    let pivot_inv = pivot.inv().expect("pivot nonzero");
    // sanity: the constant terms must sum to zero when c is an exponent
    let mut ct = Scalar::zero();
    for b in &bs {
        ct = ct.add(&b.constant_term());
    }
    if !ct.is_zero() {
        return Err(CoreError::FactorRecurrenceStuck(format!(
            "chosen exponent is not a root of the edge polynomial (residual {ct})"
        )));
    }
    // available precision caps the recurrence
    let mut goal = n_w.clone();
    for b in &bs {
        if let Prec::At(n) = b.prec() {
            goal = goal.min(n.clone());
        }
    }
    // exponent lattice
    let mut k = BigInt::one();
    for b in &bs {
        for (e, _) in b.terms() {
            k = k.lcm(e.denom());
        }
    }
    let step = Q::new(BigInt::one(), k);
    let mut v = TruncatedPuiseux::one();
    let mut gamma = step.clone();
    while gamma < goal {
        // residual of sum_i B_i prod_{j<i} sigma^j(v) at gamma, with the
        // gamma coefficient of v still absent
        let mut residual = Scalar::zero();
        for (i, b) in bs.iter().enumerate() {
            let mut factors: Vec<(&TruncatedPuiseux, Q)> = Vec::with_capacity(i + 1);
            factors.push((b, Q::one()));
            for j in 0..i {
                factors.push((&v, pow_q(p, j)));
            }
            residual = residual.add(&product_coeff_at(&factors, &gamma));
        }
        if !residual.is_zero() {
            let coeff = residual.mul(&pivot_inv).neg();
            v = v.add(&TruncatedPuiseux::monomial(gamma.clone(), coeff));
        }
        gamma += &step;
    }
    Ok((nu, exponent.clone(), v.truncate(&goal)))
}

/// Solves `sigma(h) = h * v` for a unit `h = 1 + ...` given `v = 1 + ...`.
fn unit_from_multiplier(v: &TruncatedPuiseux, p: u32, goal: &Q) -> TruncatedPuiseux {
    let mut cap = goal.clone();
    if let Prec::At(n) = v.prec() {
        cap = cap.min(n.clone());
    }
    let mut k = BigInt::one();
    for (e, _) in v.terms() {
        k = k.lcm(e.denom());
    }
    let step = Q::new(BigInt::one(), k);
    let mut h = TruncatedPuiseux::one();
    let mut gamma = step.clone();
    let pq = Q::from_integer(BigInt::from(p));
    while gamma < cap {
        // h_gamma = h_{gamma/p} - sum_{0 < e <= gamma} h_{gamma - e} v_e
        let up = &gamma / &pq;
        let mut val = h.coefficient(&up);
        for (e, c) in v.terms() {
            if e.is_zero() {
                continue;
            }
            if e > &gamma {
                break;
            }
            let rest = h.coefficient(&(&gamma - e));
            if !rest.is_zero() {
                val = val.sub(&rest.mul(c));
            }
        }
        if !val.is_zero() {
            h = h.add(&TruncatedPuiseux::monomial(gamma.clone(), val));
        }
        gamma += &step;
    }
    h.truncate(&cap)
}

/// Full slope factorization `L = unit * L_sigma ... L_1` with every factor
/// coefficient known modulo `z^precision` after recomposition.
pub fn factor_by_slopes(op: &MahlerOperator, precision: &Q) -> Result<SlopeFactorization> {
    let p = op.p;
    let d = op.order();
    let nd = newton_polygon(op)?;
    let exps = nd.exponents()?;
    // working precision: survive the z^{+-nu} shifts of the recomposition
    let mut max_abs_val = Q::zero();
    for c in op.coeffs() {
        if let Some(v) = c.valuation_lower_bound() {
            let a = if v.is_negative() { -v } else { v };
            if a > max_abs_val {
                max_abs_val = a;
            }
        }
    }
    let slack = (max_abs_val + Q::one()) * pow_q(p, d) + Q::from_integer(BigInt::from(4));
    let n_w = precision + &slack;

    // predicted nu per block from the original polygon
    let mut predicted: Vec<Q> = Vec::new();
    let mut acc = Q::zero();
    let mut steps = 0usize;
    for (i, e) in nd.edges.iter().enumerate() {
        if i == 0 {
            acc = e.slope.clone();
        } else {
            acc += pow_q(p, steps) * (&e.slope - &nd.edges[i - 1].slope);
        }
        steps += e.multiplicity();
        predicted.push(&acc * (pow_q(p, 1) - Q::one()));
    }

    let mut cur = op.clone();
    let mut blocks: Vec<SlopeBlock> = Vec::new();
    for (edge_idx, edge) in nd.edges.iter().enumerate() {
        let mut roots = exps[edge_idx].clone();
        roots.sort();
        let mut block = SlopeBlock { slope: edge.slope.clone(), nu: predicted[edge_idx].clone(), factors: Vec::new() };
        for _ in 0..edge.multiplicity() {
            let cur_nd = newton_polygon(&cur)?;
            let first = cur_nd.edges.first().ok_or_else(|| {
                CoreError::FactorRecurrenceStuck(String::from("polygon exhausted early"))
            })?;
            let observed_nu = &first.slope * (pow_q(p, 1) - Q::one());
            if observed_nu != predicted[edge_idx] {
                return Err(CoreError::FactorRecurrenceStuck(format!(
                    "slope telescoping mismatch: expected nu {} found {}",
                    predicted[edge_idx], observed_nu
                )));
            }
            // pick the smallest remaining exponent that is a root of the
            // current first-edge polynomial
            let cur_roots = crate::operators::NewtonData { edges: vec![first.clone()] };
            let cur_exps = cur_roots.exponents()?.pop().unwrap();
            let c = roots
                .iter()
                .position(|r| cur_exps.contains(r))
                .map(|idx| roots.remove(idx))
                .ok_or_else(|| {
                    CoreError::FactorRecurrenceStuck(String::from(
                        "expected exponent no longer divides the quotient",
                    ))
                })?;
            let (nu, c, v) = extract_first_factor(&cur, &c, &first.slope, &n_w)?;
            let h = unit_from_multiplier(&v, p, &n_w);
            // divide off z^nu M - c v
            let w = v.scalar_mul(&c);
            let divisor = MahlerOperator::new(
                p,
                vec![w.neg(), TruncatedPuiseux::monomial(nu.clone(), Scalar::one())],
            );
            let (quo, rem) = cur.right_divide(&divisor, &n_w)?;
            if rem.coeffs().iter().any(|r| !r.is_zero_up_to_prec()) {
                return Err(CoreError::FactorRecurrenceStuck(String::from(
                    "first-order factor leaves a remainder",
                )));
            }
            // absorb sigma(h): (z^nu M - c v) = sigma(h) (z^nu M - c) h^{-1}
            let sh = h.sigma(p);
            cur = quo.mul(&MahlerOperator::new(p, vec![sh]));
            block.factors.push(FirstOrderFactor { nu, exponent: c, h });
        }
        blocks.push(block);
    }
    if cur.order() != 0 {
        return Err(CoreError::FactorRecurrenceStuck(String::from(
            "factor extraction left a nonconstant quotient",
        )));
    }
    let unit = cur.coeff(0);
    Ok(SlopeFactorization { p, unit, blocks })
}

/// Checks the recomposition `unit * L_sigma ... L_1` against `op` up to
/// `z^target` in every coefficient; returns the number of mismatching
/// known coefficients (0 means verified).
pub fn verify_factorization(
    op: &MahlerOperator,
    fac: &SlopeFactorization,
    target: &Q,
) -> Result<usize> {
    let re = fac.remultiply(target)?;
    let mut bad = 0usize;
    for i in 0..=op.order().max(re.order()) {
        let diff = op.coeff(i).sub(&re.coeff(i)).truncate(target);
        if !diff.is_zero_up_to_prec() {
            bad += diff.num_terms();
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{non_minimal_operator, rs_operator};
    use crate::scalar::{q, qi};

    #[test]
    fn constant_coefficient_product() {
        // L = (M - 1)(M - 2): slope 0, exponents {1, 2}, unit consistent with
        // cld a = prod(-c)^{-1} cld(a_0): a = (1*2)^{-1} * 2 = 1
        let p = 2;
        let l = MahlerOperator::linear_factor(p, &Q::zero(), &Scalar::from_i64(1))
            .mul(&MahlerOperator::linear_factor(p, &Q::zero(), &Scalar::from_i64(2)));
        let fac = factor_by_slopes(&l, &qi(12)).unwrap();
        assert_eq!(fac.factor_count(), 2);
        assert_eq!(verify_factorization(&l, &fac, &qi(10)).unwrap(), 0);
        // unit contract
        let a0 = l.coeff(0);
        assert_eq!(fac.unit.valuation().unwrap(), a0.valuation().unwrap());
        let mut prod = Scalar::one();
        for b in &fac.blocks {
            for f in &b.factors {
                prod = prod.mul(&f.exponent.neg());
            }
        }
        let expected_cld = prod.inv().unwrap().mul(&a0.leading_coefficient().unwrap());
        assert_eq!(fac.unit.leading_coefficient().unwrap(), expected_cld);
    }

    #[test]
    fn rs_factorization() {
        let l = rs_operator();
        let fac = factor_by_slopes(&l, &qi(12)).unwrap();
        assert_eq!(fac.blocks.len(), 2);
        assert_eq!(fac.blocks[0].nu, qi(0));
        assert_eq!(fac.blocks[1].nu, qi(1));
        assert_eq!(fac.blocks[0].factors[0].exponent, Scalar::from_i64(1));
        assert_eq!(fac.blocks[1].factors[0].exponent, Scalar::from_q(q(-1, 2)));
        assert_eq!(verify_factorization(&l, &fac, &qi(10)).unwrap(), 0);
        // h contract
        for b in &fac.blocks {
            for f in &b.factors {
                assert_eq!(f.h.valuation().unwrap(), Q::zero());
                assert_eq!(f.h.leading_coefficient().unwrap(), Scalar::one());
            }
        }
        // unit contract: val a = val a_0
        assert_eq!(fac.unit.valuation().unwrap(), l.coeff(0).valuation().unwrap());
    }

    #[test]
    fn non_minimal_factorization() {
        let l = non_minimal_operator();
        let fac = factor_by_slopes(&l, &qi(12)).unwrap();
        assert_eq!(fac.blocks.len(), 2);
        assert_eq!(verify_factorization(&l, &fac, &qi(10)).unwrap(), 0);
        assert_eq!(fac.blocks[0].factors[0].exponent, Scalar::from_i64(1));
        assert_eq!(fac.blocks[1].factors[0].exponent, Scalar::from_i64(1));
        assert_eq!(fac.blocks[1].nu, qi(2));
    }

    #[test]
    fn ramified_factorization() {
        // slope 1/2 alone: L = z M - 1 over p = 2... already first order;
        // use an order-2 with genuine ramification: (zM - 1)(M - 3)
        let p = 2;
        let l = MahlerOperator::new(
            p,
            vec![
                TruncatedPuiseux::constant(Scalar::from_i64(-1)),
                TruncatedPuiseux::monomial(Q::one(), Scalar::one()),
            ],
        )
        .mul(&MahlerOperator::linear_factor(p, &Q::zero(), &Scalar::from_i64(3)));
        let fac = factor_by_slopes(&l, &qi(12)).unwrap();
        assert_eq!(verify_factorization(&l, &fac, &qi(8)).unwrap(), 0);
    }
}
