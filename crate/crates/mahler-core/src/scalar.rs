//! Exact scalars: rationals and elements of a single number-field extension.
//!
//! The base field is Q. One simple extension `Q[x]/(m(x))` is supported per
//! computation; elements of the extension are polynomials in the generator of
//! degree `< deg m`, always kept reduced. A value whose tail coefficients all
//! vanish collapses back to the rational representation, so equality is plain
//! structural equality.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{CoreError, Result};

/// Arbitrary-precision rational, kept in lowest terms with positive denominator.
pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// p-adic valuation of a nonzero rational: `v_p(num) - v_p(den)`.
pub fn vp(x: &Q, p: u32) -> i64 {
    assert!(!x.is_zero(), "vp of zero");
    let p = BigInt::from(p);
    let mut v: i64 = 0;
    let mut n = x.numer().abs();
    while (&n % &p).is_zero() {
        n /= &p;
        v += 1;
    }
    let mut d = x.denom().abs();
    while (&d % &p).is_zero() {
        d /= &p;
        v -= 1;
    }
    v
}

/// Writes `x = eta * p^u` with `v_p(eta) = 0`; returns `(eta, u)`.
pub fn split_p_part(x: &Q, p: u32) -> (Q, i64) {
    let u = vp(x, p);
    let pq = qi(p as i64);
    let mut eta = x.clone();
    let mut k = u;
    while k > 0 {
        eta /= &pq;
        k -= 1;
    }
    while k < 0 {
        eta *= &pq;
        k += 1;
    }
    (eta, u)
}

/// Is `x` in `N_(p)`: positive, denominator coprime with `p`, numerator not
/// divisible by `p`? These are exactly the admissible entries of standard
/// xi indices.
pub fn is_p_reduced(x: &Q, p: u32) -> bool {
    x.is_positive() && vp(x, p) == 0
}

pub fn q_pow(x: &Q, e: i64) -> Q {
    if e >= 0 {
        let mut r = Q::one();
        for _ in 0..e {
            r *= x;
        }
        r
    } else {
        let mut r = Q::one();
        let inv = x.recip();
        for _ in 0..(-e) {
            r *= &inv;
        }
        r
    }
}

/// A simple extension field `Q[x]/(m(x))` with `m` monic irreducible of
/// degree at least 2. Irreducibility is the caller's responsibility; the
/// eigen machinery only builds fields from factors it has certified.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NumberField {
    /// Monic minimal polynomial of the generator, ascending coefficients,
    /// length `deg + 1`, last entry 1.
    min_poly: Vec<Q>,
}

impl NumberField {
    pub fn new(min_poly: Vec<Q>) -> Arc<Self> {
        assert!(min_poly.len() >= 3, "extension degree must be >= 2");
        assert!(min_poly.last().unwrap().is_one(), "minimal polynomial must be monic");
        Arc::new(NumberField { min_poly })
    }

    pub fn degree(&self) -> usize {
        self.min_poly.len() - 1
    }

    pub fn min_poly(&self) -> &[Q] {
        &self.min_poly
    }

    /// Reduces a coefficient vector modulo the minimal polynomial.
    fn reduce(&self, coeffs: &mut Vec<Q>) {
        let deg = self.degree();
        while coeffs.len() > deg {
            let top = coeffs.pop().unwrap();
            if top.is_zero() {
                continue;
            }
            let k = coeffs.len() - deg;
            for i in 0..deg {
                let t = &top * &self.min_poly[i];
                coeffs[k + i] -= t;
            }
        }
        while coeffs.len() > 1 && coeffs.last().map_or(false, Zero::is_zero) {
            coeffs.pop();
        }
    }
}

/// An exact scalar: a rational, or an element of one shared extension field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scalar {
    Rat(Q),
    Ext(Arc<NumberField>, Vec<Q>),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Rat(Q::zero())
    }

    pub fn one() -> Self {
        Scalar::Rat(Q::one())
    }

    pub fn from_q(x: Q) -> Self {
        Scalar::Rat(x)
    }

    pub fn from_i64(n: i64) -> Self {
        Scalar::Rat(qi(n))
    }

    /// The generator of `field`.
    pub fn generator(field: &Arc<NumberField>) -> Self {
        let mut c = vec![Q::zero(), Q::one()];
        if field.degree() == 1 {
            c.pop();
        }
        Scalar::Ext(field.clone(), c)
    }

    /// Element of `field` with the given coordinates in the power basis.
    pub fn in_field(field: &Arc<NumberField>, mut coeffs: Vec<Q>) -> Self {
        field.reduce(&mut coeffs);
        if coeffs.len() <= 1 {
            return Scalar::Rat(coeffs.pop().unwrap_or_else(Q::zero));
        }
        Scalar::Ext(field.clone(), coeffs)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rat(x) => x.is_zero(),
            Scalar::Ext(..) => false, // reduced representation never stores a rational as Ext
        }
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Scalar::Rat(x) if x.is_one())
    }

    pub fn as_rational(&self) -> Option<&Q> {
        match self {
            Scalar::Rat(x) => Some(x),
            Scalar::Ext(..) => None,
        }
    }

    pub fn field(&self) -> Option<&Arc<NumberField>> {
        match self {
            Scalar::Rat(_) => None,
            Scalar::Ext(f, _) => Some(f),
        }
    }

    /// Coordinates in the power basis of `field` (constant vector for rationals).
    pub fn coords(&self, field: &Arc<NumberField>) -> Vec<Q> {
        let mut v = match self {
            Scalar::Rat(x) => vec![x.clone()],
            Scalar::Ext(f, c) => {
                assert_eq!(f.min_poly, field.min_poly, "mixed extension fields");
                c.clone()
            }
        };
        v.resize(field.degree(), Q::zero());
        v
    }

    fn common_field<'a>(&'a self, other: &'a Scalar) -> Result<Option<&'a Arc<NumberField>>> {
        match (self.field(), other.field()) {
            (None, None) => Ok(None),
            (Some(f), None) | (None, Some(f)) => Ok(Some(f)),
            (Some(f), Some(g)) => {
                if f.min_poly == g.min_poly {
                    Ok(Some(f))
                } else {
                    Err(CoreError::UnsupportedSplitting(String::from(
                        "arithmetic across two distinct extensions",
                    )))
                }
            }
        }
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        self.try_add(other).expect("scalar field mismatch")
    }

    pub fn try_add(&self, other: &Scalar) -> Result<Scalar> {
        match self.common_field(other)? {
            None => Ok(Scalar::Rat(self.as_rational().unwrap() + other.as_rational().unwrap())),
            Some(f) => {
                let f = f.clone();
                let a = self.coords(&f);
                let b = other.coords(&f);
                let sum: Vec<Q> = a.iter().zip(b.iter()).map(|(x, y)| x + y).collect();
                Ok(Scalar::in_field(&f, sum))
            }
        }
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Rat(x) => Scalar::Rat(-x),
            Scalar::Ext(f, c) => Scalar::Ext(f.clone(), c.iter().map(|x| -x).collect()),
        }
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        self.try_mul(other).expect("scalar field mismatch")
    }

    pub fn try_mul(&self, other: &Scalar) -> Result<Scalar> {
        match self.common_field(other)? {
            None => Ok(Scalar::Rat(self.as_rational().unwrap() * other.as_rational().unwrap())),
            Some(f) => {
                let f = f.clone();
                let a = self.coords(&f);
                let b = other.coords(&f);
                let mut prod = vec![Q::zero(); a.len() + b.len() - 1];
                for (i, x) in a.iter().enumerate() {
                    if x.is_zero() {
                        continue;
                    }
                    for (j, y) in b.iter().enumerate() {
                        if !y.is_zero() {
                            prod[i + j] += x * y;
                        }
                    }
                }
                Ok(Scalar::in_field(&f, prod))
            }
        }
    }

    pub fn inv(&self) -> Result<Scalar> {
        match self {
            Scalar::Rat(x) => {
                if x.is_zero() {
                    return Err(CoreError::InvalidArgument(String::from("inverse of zero")));
                }
                Ok(Scalar::Rat(x.recip()))
            }
            Scalar::Ext(f, c) => {
                // extended Euclid for c(x) mod m(x)
                let m = f.min_poly.clone();
                let (g, s, _) = poly_xgcd(c, &m);
                if g.len() != 1 || g[0].is_zero() {
                    return Err(CoreError::InvalidArgument(String::from(
                        "element not invertible: minimal polynomial is reducible",
                    )));
                }
                let ginv = g[0].recip();
                let coeffs: Vec<Q> = s.iter().map(|x| x * &ginv).collect();
                Ok(Scalar::in_field(f, coeffs))
            }
        }
    }

    pub fn div(&self, other: &Scalar) -> Result<Scalar> {
        self.try_mul(&other.inv()?)
    }

    pub fn pow(&self, e: i64) -> Result<Scalar> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut r = Scalar::one();
        for _ in 0..e.unsigned_abs() {
            r = r.mul(&base);
        }
        Ok(r)
    }

    /// Minimal polynomial over Q of this element, monic ascending.
    pub fn minimal_polynomial(&self) -> Vec<Q> {
        match self {
            Scalar::Rat(x) => vec![-x.clone(), Q::one()],
            Scalar::Ext(f, _) => {
                // first linear dependency among the powers 1, x, x^2, ...
                let deg = f.degree();
                let mut pows: Vec<Vec<Q>> = Vec::with_capacity(deg + 1);
                let mut cur = Scalar::one();
                for _ in 0..=deg {
                    pows.push(cur.coords(f));
                    cur = cur.mul(self);
                }
                for k in 1..=deg {
                    // solve sum_{i<k} c_i pow_i = -pow_k
                    if let Some(coeffs) = solve_q_system(&pows[..k], &pows[k], deg) {
                        let mut m: Vec<Q> = coeffs.into_iter().map(|c| -c).collect();
                        m.push(Q::one());
                        return m;
                    }
                }
                unreachable!("powers of a field element of degree d are dependent by degree d");
            }
        }
    }
}

/// Solves `sum_i x_i rows[i] = target` over Q, vectors of length `n`.
fn solve_q_system(rows: &[Vec<Q>], target: &[Q], n: usize) -> Option<Vec<Q>> {
    let k = rows.len();
    // column-major Gaussian elimination on the k x n system (transposed view)
    let mut a = vec![vec![Q::zero(); k + 1]; n];
    for j in 0..n {
        for (i, r) in rows.iter().enumerate() {
            a[j][i] = r.get(j).cloned().unwrap_or_else(Q::zero);
        }
        a[j][k] = target.get(j).cloned().unwrap_or_else(Q::zero);
    }
    let mut piv_rows: Vec<usize> = Vec::new();
    let mut r = 0usize;
    for c in 0..k {
        let Some(p) = (r..n).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..n {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..=k {
                    let t = &f * &a[r][j];
                    a[i][j] -= t;
                }
            }
        }
        piv_rows.push(c);
        r += 1;
        if r == n {
            break;
        }
    }
    // consistency: rows beyond r must have zero rhs
    for i in r..n {
        if !a[i][k].is_zero() {
            return None;
        }
    }
    let mut sol = vec![Q::zero(); k];
    for (row, &col) in piv_rows.iter().enumerate() {
        sol[col] = a[row][k].clone();
    }
    Some(sol)
}

/// Extended gcd in Q[x]: returns `(g, s, t)` with `s a + t b = g`.
pub fn poly_xgcd(a: &[Q], b: &[Q]) -> (Vec<Q>, Vec<Q>, Vec<Q>) {
    let mut r0 = trim(a.to_vec());
    let mut r1 = trim(b.to_vec());
    let mut s0 = vec![Q::one()];
    let mut s1 = vec![Q::zero()];
    let mut t0 = vec![Q::zero()];
    let mut t1 = vec![Q::one()];
    while !is_zero_poly(&r1) {
        let (qq, rem) = poly_divmod(&r0, &r1);
        r0 = r1;
        r1 = rem;
        let ns = poly_sub(&s0, &poly_mul(&qq, &s1));
        s0 = s1;
        s1 = ns;
        let nt = poly_sub(&t0, &poly_mul(&qq, &t1));
        t0 = t1;
        t1 = nt;
    }
    (r0, s0, t0)
}

pub fn trim(mut v: Vec<Q>) -> Vec<Q> {
    while v.len() > 1 && v.last().map_or(false, Zero::is_zero) {
        v.pop();
    }
    if v.is_empty() {
        v.push(Q::zero());
    }
    v
}

pub fn is_zero_poly(v: &[Q]) -> bool {
    v.iter().all(Zero::is_zero)
}

pub fn poly_mul(a: &[Q], b: &[Q]) -> Vec<Q> {
    if is_zero_poly(a) || is_zero_poly(b) {
        return vec![Q::zero()];
    }
    let mut out = vec![Q::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    trim(out)
}

pub fn poly_sub(a: &[Q], b: &[Q]) -> Vec<Q> {
    let n = a.len().max(b.len());
    let mut out = vec![Q::zero(); n];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] -= y;
    }
    trim(out)
}

pub fn poly_add(a: &[Q], b: &[Q]) -> Vec<Q> {
    let n = a.len().max(b.len());
    let mut out = vec![Q::zero(); n];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] += y;
    }
    trim(out)
}

/// Euclidean division in Q[x]: `a = q b + r`.
pub fn poly_divmod(a: &[Q], b: &[Q]) -> (Vec<Q>, Vec<Q>) {
    let b = trim(b.to_vec());
    assert!(!is_zero_poly(&b), "polynomial division by zero");
    let mut rem = trim(a.to_vec());
    let db = b.len() - 1;
    if rem.len() - 1 < db || is_zero_poly(&rem) {
        return (vec![Q::zero()], rem);
    }
    let mut quo = vec![Q::zero(); rem.len() - db];
    let lead = b[db].recip();
    while rem.len() - 1 >= db && !is_zero_poly(&rem) {
        let dr = rem.len() - 1;
        let c = &rem[dr] * &lead;
        if !c.is_zero() {
            quo[dr - db] = c.clone();
            for i in 0..=db {
                let t = &c * &b[i];
                rem[dr - db + i] -= t;
            }
        }
        rem = trim(rem);
        if rem.len() - 1 < db {
            break;
        }
        if dr == rem.len() - 1 {
            // leading term did not drop; numerically impossible over Q
            break;
        }
    }
    (trim(quo), trim(rem))
}

/// Structural total order: rationals first, then field elements by
/// lexicographic coordinates. Used only for deterministic map ordering.
impl Ord for Scalar {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => a.cmp(b),
            (Scalar::Rat(_), Scalar::Ext(..)) => Ordering::Less,
            (Scalar::Ext(..), Scalar::Rat(_)) => Ordering::Greater,
            (Scalar::Ext(f, a), Scalar::Ext(g, b)) => f
                .min_poly
                .cmp(&g.min_poly)
                .then_with(|| a.cmp(b)),
        }
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rat(x) => write!(f, "{x}"),
            Scalar::Ext(_, c) => {
                let mut first = true;
                for (i, x) in c.iter().enumerate() {
                    if x.is_zero() {
                        continue;
                    }
                    if !first {
                        write!(f, " + ")?;
                    }
                    first = false;
                    if i == 0 {
                        write!(f, "{x}")?;
                    } else if i == 1 {
                        write!(f, "{x}*t")?;
                    } else {
                        write!(f, "{x}*t^{i}")?;
                    }
                }
                if first {
                    write!(f, "0")?;
                }
                Ok(())
            }
        }
    }
}

/// Natural log of a positive big integer, stable for any size.
pub fn ln_biguint(n: &BigUint) -> f64 {
    assert!(!n.is_zero());
    let bits = n.bits();
    if bits <= 52 {
        let v: u64 = n.try_into().map(|x: u64| x).unwrap_or(u64::MAX);
        return libm::log(v as f64);
    }
    // top 52 bits as mantissa, remainder as exponent
    let shift = bits - 52;
    let top: BigUint = n >> shift;
    let mant: u64 = (&top).try_into().unwrap_or(u64::MAX);
    libm::log(mant as f64) + (shift as f64) * core::f64::consts::LN_2
}

/// Natural log of |x| for a nonzero rational.
pub fn ln_abs_q(x: &Q) -> f64 {
    let (_, nu) = x.numer().clone().into_parts();
    let (_, de) = x.denom().clone().into_parts();
    ln_biguint(&nu) - ln_biguint(&de)
}

/// Sign helper kept here so callers need not link num-bigint directly.
pub fn big_sign(x: &BigInt) -> i32 {
    match x.sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}
