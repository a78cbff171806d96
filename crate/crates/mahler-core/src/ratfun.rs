//! Exact ramified rational functions: quotients of Laurent polynomials in
//! `z^{1/k}`. System matrices keep these as entries so gauge actions, cyclic
//! vectors and Newton data stay exact; truncation happens only at the edges
//! of the reduction pipeline.

use alloc::string::String;

use num_traits::Zero;

use crate::error::{CoreError, Result};
use crate::matrix::RingOps;
use crate::scalar::{Q, Scalar};
use crate::series::TruncatedPuiseux;

/// `num / den` with both parts exact Laurent polynomials, `den != 0`.
#[derive(Debug, Clone)]
pub struct RatFun {
    num: TruncatedPuiseux,
    den: TruncatedPuiseux,
}

impl RatFun {
    pub fn new(num: TruncatedPuiseux, den: TruncatedPuiseux) -> Result<Self> {
        if !num.is_exact() || !den.is_exact() {
            return Err(CoreError::InvalidArgument(String::from(
                "rational functions need exact numerator and denominator",
            )));
        }
        if den.is_exactly_zero() {
            return Err(CoreError::DivisionByZeroSeries);
        }
        Ok(RatFun { num, den }.normalized())
    }

    pub fn from_poly(p: TruncatedPuiseux) -> Self {
        assert!(p.is_exact());
        RatFun { num: p, den: TruncatedPuiseux::one() }
    }

    pub fn zero() -> Self {
        Self::from_poly(TruncatedPuiseux::zero())
    }

    pub fn one() -> Self {
        Self::from_poly(TruncatedPuiseux::one())
    }

    pub fn constant(c: Scalar) -> Self {
        Self::from_poly(TruncatedPuiseux::constant(c))
    }

    pub fn num(&self) -> &TruncatedPuiseux {
        &self.num
    }

    pub fn den(&self) -> &TruncatedPuiseux {
        &self.den
    }

    fn normalized(mut self) -> Self {
        // pull the denominator to valuation 0 with leading coefficient 1
        if let (Ok(v), Ok(c)) = (self.den.valuation(), self.den.leading_coefficient()) {
            let cinv = c.inv().expect("nonzero leading coefficient");
            self.den = self.den.mul_monomial(&(-v.clone()), &cinv);
            self.num = self.num.mul_monomial(&(-v), &cinv);
        }
        // cancel exactly when the division goes through
        if !self.num.is_exactly_zero() && self.den.num_terms() > 1 {
            if let Ok(q) = self.num.div_exact(&self.den) {
                self.num = q;
                self.den = TruncatedPuiseux::one();
            }
        }
        if self.num.is_exactly_zero() {
            self.den = TruncatedPuiseux::one();
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_exactly_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den == TruncatedPuiseux::one()
    }

    pub fn add(&self, other: &Self) -> Self {
        RatFun {
            num: self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            den: self.den.mul(&other.den),
        }
        .normalized()
    }

    pub fn neg(&self) -> Self {
        RatFun { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        RatFun { num: self.num.mul(&other.num), den: self.den.mul(&other.den) }.normalized()
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(CoreError::DivisionByZeroSeries);
        }
        RatFun::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn sigma(&self, p: u32) -> Self {
        RatFun { num: self.num.sigma(p), den: self.den.sigma(p) }.normalized()
    }

    pub fn mahler_substitute(&self, m: &Q) -> Result<Self> {
        Ok(RatFun {
            num: self.num.mahler_substitute(m)?,
            den: self.den.mahler_substitute(m)?,
        }
        .normalized())
    }

    /// Exact valuation: `val num - val den`.
    pub fn valuation(&self) -> Result<Q> {
        Ok(self.num.valuation().map_err(|_| CoreError::IndeterminateValuation)?
            - self.den.valuation().map_err(|_| CoreError::IndeterminateValuation)?)
    }

    pub fn leading_coefficient(&self) -> Result<Scalar> {
        self.num
            .leading_coefficient()?
            .div(&self.den.leading_coefficient()?)
    }

    /// Truncated expansion to `O(z^target)`.
    pub fn expand_to(&self, target: &Q) -> Result<TruncatedPuiseux> {
        if self.is_polynomial() {
            return Ok(self.num.truncate(target));
        }
        self.num.div_to(&self.den, target)
    }

    /// The exact Laurent polynomial, if the denominator is trivial.
    pub fn as_polynomial(&self) -> Option<&TruncatedPuiseux> {
        if self.is_polynomial() {
            Some(&self.num)
        } else {
            None
        }
    }

    /// Value at z = 0 when the valuation is nonnegative.
    pub fn value_at_zero(&self) -> Result<Scalar> {
        match self.valuation() {
            Ok(v) if v.is_zero() => self.leading_coefficient(),
            Ok(v) if v > Q::zero() => Ok(Scalar::zero()),
            Ok(_) => Err(CoreError::InvalidArgument(String::from("pole at z = 0"))),
            Err(_) => Ok(Scalar::zero()),
        }
    }
}

impl PartialEq for RatFun {
    fn eq(&self, other: &Self) -> bool {
        self.num.mul(&other.den) == other.num.mul(&self.den)
    }
}

impl Eq for RatFun {}

impl RingOps for RatFun {
    fn ring_zero() -> Self {
        RatFun::zero()
    }
    fn ring_one() -> Self {
        RatFun::one()
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
        self.is_zero()
    }
}

impl core::fmt::Display for RatFun {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        if self.is_polynomial() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

pub use crate::series::require_precision;
