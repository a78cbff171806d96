//! Truncated Puiseux/Laurent series with explicit precision bookkeeping.
//!
//! A series is a finite map from rational exponents to scalars together with
//! a precision: either `Exact` (a honest ramified Laurent polynomial, every
//! coefficient known) or `At(N)` meaning coefficients at exponents `>= N` are
//! unknown. Precision propagates pessimistically: operations never claim a
//! coefficient they cannot certify.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;

use num_traits::{Signed, Zero};

use crate::error::{CoreError, Result};
use crate::matrix::RingOps;
use crate::scalar::{qi, Q, Scalar};

/// Precision of a truncated series.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Prec {
    /// Every coefficient is known (ramified Laurent polynomial).
    Exact,
    /// Coefficients with exponent `>= N` are unknown.
    At(Q),
}

impl Prec {
    pub fn min(&self, other: &Prec) -> Prec {
        match (self, other) {
            (Prec::Exact, p) => p.clone(),
            (p, Prec::Exact) => p.clone(),
            (Prec::At(a), Prec::At(b)) => Prec::At(a.min(b).clone()),
        }
    }

    pub fn shift(&self, by: &Q) -> Prec {
        match self {
            Prec::Exact => Prec::Exact,
            Prec::At(n) => Prec::At(n + by),
        }
    }

    pub fn scale(&self, by: &Q) -> Prec {
        match self {
            Prec::Exact => Prec::Exact,
            Prec::At(n) => Prec::At(n * by),
        }
    }

    pub fn covers(&self, exp: &Q) -> bool {
        match self {
            Prec::Exact => true,
            Prec::At(n) => exp < n,
        }
    }

    pub fn at_least(&self, bound: &Q) -> bool {
        match self {
            Prec::Exact => true,
            Prec::At(n) => n >= bound,
        }
    }
}

/// A truncated Puiseux series: exact scalar coefficients on a finite support
/// of rational exponents, plus a precision bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedPuiseux {
    terms: BTreeMap<Q, Scalar>,
    prec: Prec,
}

impl TruncatedPuiseux {
    pub fn zero() -> Self {
        TruncatedPuiseux { terms: BTreeMap::new(), prec: Prec::Exact }
    }

    pub fn zero_at(prec: Q) -> Self {
        TruncatedPuiseux { terms: BTreeMap::new(), prec: Prec::At(prec) }
    }

    pub fn one() -> Self {
        Self::monomial(Q::zero(), Scalar::one())
    }

    /// `c * z^e`, exact.
    pub fn monomial(e: Q, c: Scalar) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        TruncatedPuiseux { terms, prec: Prec::Exact }
    }

    pub fn constant(c: Scalar) -> Self {
        Self::monomial(Q::zero(), c)
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Q, Scalar)>, prec: Prec) -> Self {
        let mut map = BTreeMap::new();
        for (e, c) in terms {
            if c.is_zero() {
                continue;
            }
            let entry = map.entry(e).or_insert_with(Scalar::zero);
            *entry = entry.add(&c);
        }
        map.retain(|_, c| !c.is_zero());
        let mut s = TruncatedPuiseux { terms: map, prec };
        s.enforce_prec();
        s
    }

    /// Integer-exponent power series from a coefficient slice, exact.
    pub fn from_coeffs(coeffs: &[i64]) -> Self {
        Self::from_terms(
            coeffs.iter().enumerate().map(|(i, &c)| (qi(i as i64), Scalar::from_i64(c))),
            Prec::Exact,
        )
    }

    fn enforce_prec(&mut self) {
        if let Prec::At(n) = &self.prec {
            let n = n.clone();
            self.terms.retain(|e, _| e < &n);
        }
    }

    pub fn prec(&self) -> &Prec {
        &self.prec
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.prec, Prec::Exact)
    }

    /// True when no coefficient is known to be nonzero.
    pub fn is_zero_up_to_prec(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when the series is exactly the zero element.
    pub fn is_exactly_zero(&self) -> bool {
        self.terms.is_empty() && self.is_exact()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Q, &Scalar)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, e: &Q) -> Scalar {
        self.terms.get(e).cloned().unwrap_or_else(Scalar::zero)
    }

    /// Smallest exponent with a known nonzero coefficient.
    pub fn valuation(&self) -> Result<Q> {
        self.terms.keys().next().cloned().ok_or(CoreError::IndeterminateValuation)
    }

    /// Coefficient at the valuation ("coefficient of least degree").
    pub fn leading_coefficient(&self) -> Result<Scalar> {
        let v = self.valuation()?;
        Ok(self.terms[&v].clone())
    }

    /// Lower bound for the valuation usable even when no term is known.
    pub fn valuation_lower_bound(&self) -> Option<Q> {
        match self.terms.keys().next() {
            Some(v) => Some(v.clone()),
            None => match &self.prec {
                Prec::Exact => None, // exactly zero: valuation is +infinity
                Prec::At(n) => Some(n.clone()),
            },
        }
    }

    /// Least common ramification of the stored exponents.
    pub fn ramification(&self) -> u64 {
        use num_integer::Integer;
        let mut k = num_bigint::BigInt::from(1);
        for e in self.terms.keys() {
            k = k.lcm(e.denom());
        }
        if let Prec::At(n) = &self.prec {
            k = k.lcm(n.denom());
        }
        u64::try_from(k).unwrap_or(u64::MAX)
    }

    pub fn add(&self, other: &Self) -> Self {
        let prec = self.prec.min(&other.prec);
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            let entry = terms.entry(e.clone()).or_insert_with(Scalar::zero);
            *entry = entry.add(c);
        }
        terms.retain(|_, c| !c.is_zero());
        let mut s = TruncatedPuiseux { terms, prec };
        s.enforce_prec();
        s
    }

    pub fn neg(&self) -> Self {
        TruncatedPuiseux {
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c.neg())).collect(),
            prec: self.prec.clone(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scalar_mul(&self, s: &Scalar) -> Self {
        if s.is_zero() {
            return TruncatedPuiseux { terms: BTreeMap::new(), prec: self.prec.clone() };
        }
        TruncatedPuiseux {
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c.mul(s))).collect(),
            prec: self.prec.clone(),
        }
    }

    /// Multiply by the monomial `c * z^e` (a unit), exact on precision shift.
    pub fn mul_monomial(&self, e: &Q, c: &Scalar) -> Self {
        assert!(!c.is_zero());
        TruncatedPuiseux {
            terms: self.terms.iter().map(|(x, y)| (x + e, y.mul(c))).collect(),
            prec: self.prec.shift(e),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        // precision: unknown tail of one factor meets the valuation of the other
        let prec = match (&self.prec, &other.prec) {
            (Prec::Exact, Prec::Exact) => Prec::Exact,
            _ => {
                let pa = match (&self.prec, other.valuation_lower_bound()) {
                    (Prec::At(n), Some(v)) => Prec::At(n + v),
                    (Prec::At(_), None) => Prec::Exact, // other is exactly zero
                    (Prec::Exact, _) => Prec::Exact,
                };
                let pb = match (&other.prec, self.valuation_lower_bound()) {
                    (Prec::At(n), Some(v)) => Prec::At(n + v),
                    (Prec::At(_), None) => Prec::Exact,
                    (Prec::Exact, _) => Prec::Exact,
                };
                pa.min(&pb)
            }
        };
        let mut terms: BTreeMap<Q, Scalar> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e = e1 + e2;
                if !prec.covers(&e) {
                    continue;
                }
                let t = c1.mul(c2);
                if t.is_zero() {
                    continue;
                }
                let entry = terms.entry(e).or_insert_with(Scalar::zero);
                *entry = entry.add(&t);
            }
        }
        terms.retain(|_, c| !c.is_zero());
        TruncatedPuiseux { terms, prec }
    }

    /// Substitution `z -> z^m` for positive rational `m`: exponents scale by
    /// `m`, precision scales accordingly.
    pub fn mahler_substitute(&self, m: &Q) -> Result<Self> {
        if !m.is_positive() {
            return Err(CoreError::InvalidArgument(String::from(
                "Mahler substitution needs a positive exponent factor",
            )));
        }
        Ok(TruncatedPuiseux {
            terms: self.terms.iter().map(|(e, c)| (e * m, c.clone())).collect(),
            prec: self.prec.scale(m),
        })
    }

    /// `z -> z^p` for the integer Mahler operator.
    pub fn sigma(&self, p: u32) -> Self {
        self.mahler_substitute(&qi(p as i64)).expect("p >= 2")
    }

    /// Truncate to precision `At(n)` (or keep stricter existing precision).
    pub fn truncate(&self, n: &Q) -> Self {
        let prec = self.prec.min(&Prec::At(n.clone()));
        let mut s = TruncatedPuiseux { terms: self.terms.clone(), prec };
        s.enforce_prec();
        s
    }

    /// Part with exponents `< 0`, exact as a polynomial (precision permitting).
    pub fn strict_negative_part(&self) -> Result<Self> {
        if !self.prec.covers(&Q::zero()) && !matches!(self.prec, Prec::Exact) {
            return Err(CoreError::PrecisionLoss(String::from(
                "negative part requested below available precision",
            )));
        }
        Ok(TruncatedPuiseux {
            terms: self.terms.iter().filter(|(e, _)| e.is_negative()).map(|(e, c)| (e.clone(), c.clone())).collect(),
            prec: Prec::Exact,
        })
    }

    /// Part with exponents `<= 0`, exact as a polynomial.
    pub fn nonpositive_part(&self) -> Result<Self> {
        let neg = self.strict_negative_part()?;
        Ok(neg.add(&Self::constant(self.coefficient(&Q::zero()))))
    }

    /// Part with exponents `> 0`, carrying the original precision.
    pub fn strict_positive_part(&self) -> Self {
        TruncatedPuiseux {
            terms: self.terms.iter().filter(|(e, _)| e.is_positive()).map(|(e, c)| (e.clone(), c.clone())).collect(),
            prec: self.prec.clone(),
        }
    }

    pub fn constant_term(&self) -> Scalar {
        self.coefficient(&Q::zero())
    }

    /// Multiplicative inverse of a unit: the result equals `self^{-1}` up to
    /// `O(z^target)`, capped by what the input precision supports.
    pub fn invert_to(&self, target: &Q) -> Result<Self> {
        let v = self.valuation().map_err(|_| CoreError::DivisionByZeroSeries)?;
        let lead = self.terms[&v].clone();
        let lead_inv = lead.inv().map_err(|_| CoreError::DivisionByZeroSeries)?;
        // u = z^{-v} self / lead = 1 + w with val w > 0
        let u = self.mul_monomial(&(-v.clone()), &lead_inv);
        let w = u.sub(&Self::one());
        if w.is_exactly_zero() {
            return Ok(Self::monomial(-v, lead_inv));
        }
        // the geometric series needs internal precision target + v
        let goal = match &self.prec {
            Prec::Exact => target + &v,
            Prec::At(n) => (n - &v).min(target + &v).clone(),
        };
        let mut acc = Self::one().truncate(&goal);
        if !w.is_zero_up_to_prec() {
            let wv = w.valuation()?;
            if !wv.is_positive() {
                return Err(CoreError::InvalidArgument(String::from(
                    "series unit has non-dominant leading term",
                )));
            }
            let minus_w = w.neg();
            let mut power = Self::one().truncate(&goal);
            let mut steps = Q::zero();
            while steps < goal {
                power = power.mul(&minus_w).truncate(&goal);
                if power.is_zero_up_to_prec() {
                    break;
                }
                acc = acc.add(&power);
                steps += &wv;
            }
        }
        Ok(acc.mul_monomial(&(-v.clone()), &lead_inv))
    }

    /// `self / other` up to `O(z^target)`.
    pub fn div_to(&self, other: &Self, target: &Q) -> Result<Self> {
        let vs = self.valuation_lower_bound().unwrap_or_else(Q::zero);
        let inv = other.invert_to(&(target - vs))?;
        Ok(self.mul(&inv).truncate(target))
    }

    /// Exact division: succeeds only when the remainder vanishes identically;
    /// both inputs must be exact.
    pub fn div_exact(&self, other: &Self) -> Result<Self> {
        if !self.is_exact() || !other.is_exact() {
            return Err(CoreError::PrecisionLoss(String::from("exact division on truncated input")));
        }
        if self.is_exactly_zero() {
            return Ok(Self::zero());
        }
        let vo = other.valuation().map_err(|_| CoreError::DivisionByZeroSeries)?;
        let lead = other.leading_coefficient()?;
        let lead_inv = lead.inv().map_err(|_| CoreError::DivisionByZeroSeries)?;
        let mut rem = self.clone();
        let mut quo = Self::zero();
        for _ in 0..=(self.num_terms() * other.num_terms().max(1) + self.num_terms() + 8) {
            if rem.is_exactly_zero() {
                return Ok(quo);
            }
            let vr = rem.valuation()?;
            let cr = rem.leading_coefficient()?;
            let t = Self::monomial(&vr - &vo, cr.mul(&lead_inv));
            quo = quo.add(&t);
            rem = rem.sub(&t.mul(other));
            // valuation must strictly increase or the division does not terminate
        }
        Err(CoreError::InvalidArgument(String::from("exact division leaves a remainder")))
    }

    /// Formats with ascending exponents; used by Display.
    fn fmt_ascending(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        if self.terms.is_empty() {
            write!(f, "0")?;
        } else {
            for (i, (e, c)) in self.terms.iter().enumerate() {
                if i > 0 {
                    write!(f, " + ")?;
                }
                if e.is_zero() {
                    write!(f, "{c}")?;
                } else if c.is_one() {
                    write!(f, "z^({e})")?;
                } else {
                    write!(f, "{c}*z^({e})")?;
                }
            }
        }
        if let Prec::At(n) = &self.prec {
            write!(f, " + O(z^({n}))")?;
        }
        Ok(())
    }
}

impl core::fmt::Display for TruncatedPuiseux {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        self.fmt_ascending(f)
    }
}

impl RingOps for TruncatedPuiseux {
    fn ring_zero() -> Self {
        TruncatedPuiseux::zero()
    }
    fn ring_one() -> Self {
        TruncatedPuiseux::one()
    }
    fn ring_add(&self, other: &Self) -> Self {
        self.add(other)
    }
    fn ring_neg(&self) -> Self {
        self.neg()
    }
    fn ring_mul(&self, other: &Self) -> Self {
        self.mul(other)
    }
    fn ring_is_zero(&self) -> bool {
        self.is_zero_up_to_prec()
    }
}

/// Parse helper used by tests: builds `sum c_i z^{e_i}` from rational pairs.
pub fn series(terms: &[(i64, i64, i64, i64)]) -> TruncatedPuiseux {
    // (coeff_num, coeff_den, exp_num, exp_den)
    TruncatedPuiseux::from_terms(
        terms.iter().map(|&(cn, cd, en, ed)| {
            (Q::new(en.into(), ed.into()), Scalar::from_q(Q::new(cn.into(), cd.into())))
        }),
        Prec::Exact,
    )
}

/// Geometric-series error message helper kept out of the struct namespace.
pub fn require_precision(p: &Prec, needed: &Q, what: &str) -> Result<()> {
    if p.at_least(needed) {
        Ok(())
    } else {
        Err(CoreError::PrecisionLoss(format!("{what}: need precision {needed}")))
    }
}
