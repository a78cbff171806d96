//! Hermite-Pade guessing of Mahler equations from truncated series.
//!
//! Searches for the lowest-order, then lowest-degree operator with polynomial
//! coefficients annihilating the input to the full available precision. The
//! unknown coefficients of `sum_{i,j} c_{i,j} z^j M^i` form an exact linear
//! system indexed by the exponents where the combination must vanish; the
//! kernel is computed over Q. Results are candidates: they carry the exponent
//! up to which annihilation was verified, never a minimality proof.

use alloc::vec::Vec;

use num_traits::Zero;

use crate::error::{CoreError, Result};
use crate::matrix::Matrix;
use crate::operators::MahlerOperator;
use crate::scalar::{qi, Q, Scalar};
use crate::series::{Prec, TruncatedPuiseux};

/// A guessed annihilating operator together with its verification bound.
#[derive(Debug, Clone)]
pub struct GuessedOperator {
    pub operator: MahlerOperator,
    /// The combination vanishes at every exponent below this bound.
    pub verified_to: Q,
}

/// Finds the lowest-order, then lowest-degree polynomial-coefficient operator
/// annihilating `f` up to its precision.
pub fn guess_minimal_operator(
    f: &TruncatedPuiseux,
    p: u32,
    max_order: usize,
    max_degree: usize,
) -> Result<GuessedOperator> {
    let Prec::At(prec) = f.prec().clone() else {
        return Err(CoreError::InvalidArgument(alloc::string::String::from(
            "guessing needs a truncated series (finite precision)",
        )));
    };
    if f.is_zero_up_to_prec() {
        return Err(CoreError::InvalidArgument(alloc::string::String::from(
            "guessing on the zero series",
        )));
    }
    // sigma powers of f, each exact where known
    let mut shifts: Vec<TruncatedPuiseux> = Vec::with_capacity(max_order + 1);
    shifts.push(f.clone());
    for _ in 0..max_order {
        shifts.push(shifts.last().unwrap().sigma(p));
    }
    for order in 1..=max_order {
        for degree in 0..=max_degree {
            if let Some(op) = try_shape(&shifts, p, order, degree, &prec) {
                return Ok(GuessedOperator { operator: op, verified_to: prec });
            }
        }
    }
    Err(CoreError::NoRelationFound)
}

fn try_shape(
    shifts: &[TruncatedPuiseux],
    p: u32,
    order: usize,
    degree: usize,
    prec: &Q,
) -> Option<MahlerOperator> {
    // columns: (i, j) -> z^j sigma^i(f); constraints: coefficient at every
    // lattice exponent below prec vanishes
    let mut columns: Vec<TruncatedPuiseux> = Vec::new();
    for i in 0..=order {
        for j in 0..=degree {
            columns.push(shifts[i].mul_monomial(&qi(j as i64), &Scalar::one()).truncate(prec));
        }
    }
    // collect the probe exponents
    let mut exps: Vec<Q> = Vec::new();
    for c in &columns {
        for (e, _) in c.terms() {
            if !exps.contains(e) {
                exps.push(e.clone());
            }
        }
    }
    exps.sort();
    if exps.is_empty() {
        return None;
    }
    let rows = exps.len();
    let cols = columns.len();
    let mut m = Matrix::<Scalar>::zero(rows, cols);
    for (jcol, c) in columns.iter().enumerate() {
        for (e, v) in c.terms() {
            let irow = exps.binary_search(e).ok()?;
            m[(irow, jcol)] = v.clone();
        }
    }
    let kernel = m.kernel_basis();
    // pick a kernel vector with nonzero a_0 and nonzero a_order
    'next: for k in &kernel {
        let coeff_poly = |i: usize| -> Vec<Scalar> { k[i * (degree + 1)..(i + 1) * (degree + 1)].to_vec() };
        if coeff_poly(0).iter().all(Scalar::is_zero) || coeff_poly(order).iter().all(Scalar::is_zero) {
            continue 'next;
        }
        let mut coeffs = Vec::with_capacity(order + 1);
        for i in 0..=order {
            let poly = coeff_poly(i);
            coeffs.push(TruncatedPuiseux::from_terms(
                poly.into_iter().enumerate().map(|(j, c)| (qi(j as i64), c)),
                Prec::Exact,
            ));
        }
        return Some(normalize_operator(&MahlerOperator::new(p, coeffs)));
    }
    None
}

/// Canonical unit normalization: integer coefficients, content one, positive
/// leading coefficient of `a_0`.
pub fn normalize_operator(op: &MahlerOperator) -> MahlerOperator {
    use num_bigint::BigInt;
    use num_integer::Integer;
    use num_traits::{One, Signed};
    // gather all rational coefficients; bail out (no-op) on field elements
    let mut denom_lcm = BigInt::one();
    let mut numer_gcd = BigInt::zero();
    for c in op.coeffs() {
        for (_, s) in c.terms() {
            let Some(r) = s.as_rational() else { return op.clone() };
            denom_lcm = denom_lcm.lcm(r.denom());
            numer_gcd = numer_gcd.gcd(r.numer());
        }
    }
    if numer_gcd.is_zero() {
        return op.clone();
    }
    let mut scale = Q::new(denom_lcm, numer_gcd);
    // sign: leading coefficient of a_0 positive
    if let Ok(lead) = op.coeff(0).leading_coefficient() {
        if let Some(r) = lead.as_rational() {
            if (r * &scale).is_negative() {
                scale = -scale;
            }
        }
    }
    let s = Scalar::from_q(scale);
    let coeffs = op.coeffs().iter().map(|c| c.scalar_mul(&s)).collect();
    MahlerOperator::new(op.p, coeffs)
}

impl MahlerOperator {
    /// Extends a series solution coefficient by coefficient using the
    /// equation itself: at each new exponent the unknown enters through the
    /// valuation term of `a_0`. Works on the integer shifts of the input
    /// lattice.
    pub fn extend_solution(&self, f: &TruncatedPuiseux, to: &Q) -> Result<TruncatedPuiseux> {
        self.extend_solution_inhomogeneous(f, &TruncatedPuiseux::zero(), to)
    }

    /// Extends a solution of `L(f) = rhs`: at each new exponent `m` the
    /// unknown coefficient enters the residual at `m + val(a_0)` through the
    /// pivot `cld(a_0)`; every other reference points strictly below `m`.
    /// Incremental: one step costs one pass over the operator coefficients.
    pub fn extend_solution_inhomogeneous(
        &self,
        f: &TruncatedPuiseux,
        rhs: &TruncatedPuiseux,
        to: &Q,
    ) -> Result<TruncatedPuiseux> {
        let a0 = self.coeff(0);
        let v0 = a0.valuation()?;
        let pivot = a0.leading_coefficient()?;
        let pivot_inv = pivot.inv().map_err(|_| CoreError::DivisionByZeroSeries)?;
        let Prec::At(start) = f.prec().clone() else {
            return Ok(f.clone());
        };
        if let Prec::At(n) = rhs.prec() {
            if n < &(to.clone() + &v0) {
                return Err(CoreError::PrecisionLoss(alloc::string::String::from(
                    "inhomogeneous side known below the extension target",
                )));
            }
        }
        // lattice step from the known parts
        use num_integer::Integer;
        use num_traits::One;
        let mut k = num_bigint::BigInt::one();
        for (e, _) in f.terms() {
            k = k.lcm(e.denom());
        }
        for (e, _) in rhs.terms() {
            k = k.lcm(e.denom());
        }
        k = k.lcm(start.denom());
        let step = Q::new(num_bigint::BigInt::one(), k);
        let pq = qi(self.p as i64);
        let mut cur: alloc::collections::BTreeMap<Q, Scalar> =
            f.terms().map(|(e, c)| (e.clone(), c.clone())).collect();
        let mut m = start.clone();
        while &m < to {
            // residual coefficient at m + v0, with f_m treated as zero
            let target = &m + &v0;
            let mut acc = rhs.coefficient(&target).neg();
            let mut ppow = Q::one();
            for i in 0..=self.order() {
                if i > 0 {
                    ppow *= &pq;
                }
                for (e, a) in self.coeff(i).terms() {
                    let need = (&target - e) / &ppow;
                    if need >= m {
                        if i == 0 && e == &v0 {
                            continue; // the pivot slot
                        }
                        if need > m {
                            // a forward reference would be needed; the pivot
                            // is not dominant at this exponent
                            return Err(CoreError::PrecisionLoss(alloc::format!(
                                "extension needs coefficient at {need} before {m}"
                            )));
                        }
                        if i == 0 {
                            continue; // same-step alias of the pivot slot
                        }
                        return Err(CoreError::PrecisionLoss(alloc::string::String::from(
                            "extension pivot collides with a shifted term",
                        )));
                    }
                    if let Some(c) = cur.get(&need) {
                        acc = acc.add(&a.mul(c));
                    }
                }
            }
            let val = acc.mul(&pivot_inv).neg();
            if !val.is_zero() {
                cur.insert(m.clone(), val);
            }
            m += &step;
        }
        Ok(TruncatedPuiseux::from_terms(cur, Prec::At(m)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{non_minimal_operator, rs_operator, rudin_shapiro_series};
    use crate::scalar::q;

    #[test]
    fn constant_has_order_one_relation() {
        let f = TruncatedPuiseux::one().truncate(&qi(20));
        let g = guess_minimal_operator(&f, 2, 3, 3).unwrap();
        assert_eq!(g.operator.order(), 1);
        // M - 1 up to unit normalization (sign fixed by cld(a_0) > 0)
        let n = normalize_operator(&g.operator);
        assert_eq!(n.coeff(0), TruncatedPuiseux::constant(Scalar::from_i64(1)));
        assert_eq!(n.coeff(1), TruncatedPuiseux::constant(Scalar::from_i64(-1)));
        assert_eq!(g.verified_to, qi(20));
    }

    #[test]
    fn recovers_rs_equation() {
        let f = rudin_shapiro_series(60);
        let g = guess_minimal_operator(&f, 2, 3, 3).unwrap();
        let expect = normalize_operator(&rs_operator());
        assert_eq!(normalize_operator(&g.operator), expect);
    }

    #[test]
    fn recovers_non_minimal_equation_at_order_two() {
        // seed: f = -z^{-1} + 3z + 6z^2 + ... extended by the recurrence
        let seed = crate::series::series(&[
            (-1, 1, -1, 1),
            (3, 1, 1, 1),
            (6, 1, 2, 1),
            (6, 1, 3, 1),
            (21, 1, 4, 1),
            (21, 1, 5, 1),
            (60, 1, 6, 1),
            (99, 1, 7, 1),
            (234, 1, 8, 1),
        ])
        .truncate(&qi(9));
        let op = non_minimal_operator();
        let f = op.extend_solution(&seed, &qi(40)).unwrap();
        // the recurrence must reproduce the seed and annihilate to precision
        let g = guess_minimal_operator(&f, 2, 3, 4).unwrap();
        assert_eq!(g.operator.order(), 2, "order-1 relation must not exist");
        assert_eq!(normalize_operator(&g.operator), normalize_operator(&op));
    }

    #[test]
    fn extend_solution_reproduces_known_coefficients() {
        let op = non_minimal_operator();
        let seed = crate::series::series(&[(-1, 1, -1, 1), (3, 1, 1, 1)]).truncate(&qi(2));
        let f = op.extend_solution(&seed, &qi(9)).unwrap();
        let expect = [(2i64, 6i64), (3, 6), (4, 21), (5, 21), (6, 60), (7, 99), (8, 234)];
        for (e, c) in expect {
            assert_eq!(f.coefficient(&qi(e)), Scalar::from_i64(c), "coefficient of z^{e}");
        }
        // residual vanishes on the checked window
        let r = op.apply_series(&f);
        assert!(r.is_zero_up_to_prec(), "residual {r}");
    }

    #[test]
    fn no_relation_within_bounds() {
        // a series with random-looking coefficients and tight bounds
        let f = TruncatedPuiseux::from_terms(
            (0..20).map(|i| (qi(i), Scalar::from_q(q(1, (i * i + 1) * 7 + 3)))),
            Prec::At(qi(20)),
        );
        assert!(matches!(
            guess_minimal_operator(&f, 2, 2, 1),
            Err(CoreError::NoRelationFound)
        ));
    }
}
