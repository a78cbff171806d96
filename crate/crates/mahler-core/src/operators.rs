//! Mahler operators and systems.
//!
//! An operator is a noncommutative polynomial `sum a_i M^i` where `M` is the
//! substitution `z -> z^p`, acting by `M f = f(z^p) M` on coefficients.
//! Systems are square matrices over exact ramified rational functions with
//! the gauge action `R[A] = sigma(R) A R^{-1}`. The Newton polygon of an
//! operator is the lower convex hull of the points `(p^i, val a_i)`; its edge
//! data (slopes, multiplicities, exponents) drives the slope factorization.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{CoreError, Result};
use crate::matrix::Matrix;
use crate::poly::{degree, factor_rational_poly};
use crate::ratfun::RatFun;
use crate::scalar::{qi, NumberField, Q, Scalar};
use crate::series::TruncatedPuiseux;

/// A p-Mahler operator `a_0 + a_1 M + ... + a_d M^d`.
///
/// Coefficients of equation inputs are exact; intermediate quotients inside
/// the factorization pipeline may carry truncated coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MahlerOperator {
    pub p: u32,
    /// Coefficient of `M^i` at index `i`; the last entry is nonzero.
    coeffs: Vec<TruncatedPuiseux>,
}

impl MahlerOperator {
    pub fn new(p: u32, mut coeffs: Vec<TruncatedPuiseux>) -> Self {
        assert!(p >= 2, "p must be at least 2");
        while coeffs.len() > 1 && coeffs.last().map_or(false, TruncatedPuiseux::is_exactly_zero) {
            coeffs.pop();
        }
        assert!(!coeffs.is_empty());
        MahlerOperator { p, coeffs }
    }

    /// Checks the equation contract: exact coefficients with `a_0 a_d != 0`.
    pub fn validate_equation(&self) -> Result<()> {
        if self.coeffs.iter().any(|c| !c.is_exact()) {
            return Err(CoreError::InvalidArgument(String::from(
                "equation coefficients must be exact",
            )));
        }
        if self.coeffs[0].is_exactly_zero() || self.coeffs.last().unwrap().is_exactly_zero() {
            return Err(CoreError::InvalidArgument(String::from(
                "a_0 and a_d must be nonzero",
            )));
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, i: usize) -> TruncatedPuiseux {
        self.coeffs.get(i).cloned().unwrap_or_else(TruncatedPuiseux::zero)
    }

    pub fn coeffs(&self) -> &[TruncatedPuiseux] {
        &self.coeffs
    }

    pub fn identity(p: u32) -> Self {
        MahlerOperator::new(p, vec![TruncatedPuiseux::one()])
    }

    pub fn zero(p: u32) -> Self {
        MahlerOperator::new(p, vec![TruncatedPuiseux::zero()])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(TruncatedPuiseux::is_exactly_zero)
    }

    /// First-order factor `z^nu M - c`.
    pub fn linear_factor(p: u32, nu: &Q, c: &Scalar) -> Self {
        MahlerOperator::new(
            p,
            vec![
                TruncatedPuiseux::constant(c.neg()),
                TruncatedPuiseux::monomial(nu.clone(), Scalar::one()),
            ],
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p);
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i).add(&other.coeff(i)));
        }
        MahlerOperator::new(self.p, out)
    }

    pub fn neg(&self) -> Self {
        MahlerOperator { p: self.p, coeffs: self.coeffs.iter().map(TruncatedPuiseux::neg).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Left multiplication by a series coefficient.
    pub fn scale(&self, s: &TruncatedPuiseux) -> Self {
        MahlerOperator { p: self.p, coeffs: self.coeffs.iter().map(|c| c.mul(s)).collect() }
    }

    /// Operator composition: `(sum a_i M^i)(sum b_j M^j) = sum a_i sigma^i(b_j) M^{i+j}`.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p);
        let mut out = vec![TruncatedPuiseux::zero(); self.order() + other.order() + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_exactly_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_exactly_zero() {
                    continue;
                }
                let mut bb = b.clone();
                for _ in 0..i {
                    bb = bb.sigma(self.p);
                }
                out[i + j] = out[i + j].add(&a.mul(&bb));
            }
        }
        MahlerOperator::new(self.p, out)
    }

    /// Applies the operator to a truncated series: `sum a_i f(z^{p^i})`.
    pub fn apply_series(&self, f: &TruncatedPuiseux) -> TruncatedPuiseux {
        let mut acc = TruncatedPuiseux::zero();
        let mut fi = f.clone();
        for (i, a) in self.coeffs.iter().enumerate() {
            if i > 0 {
                fi = fi.sigma(self.p);
            }
            acc = acc.add(&a.mul(&fi));
        }
        acc
    }

    /// Right division: `self = quotient * divisor + remainder` with
    /// `order(remainder) < order(divisor)`; series divisions are truncated at
    /// `precision`.
    pub fn right_divide(&self, divisor: &Self, precision: &Q) -> Result<(Self, Self)> {
        assert_eq!(self.p, divisor.p);
        if divisor.is_zero() {
            return Err(CoreError::InvalidArgument(String::from("division by the zero operator")));
        }
        let dm = divisor.order();
        let lead = divisor.coeff(dm);
        if lead.is_zero_up_to_prec() {
            return Err(CoreError::PrecisionLoss(String::from(
                "divisor leading coefficient unknown at this precision",
            )));
        }
        let mut cur = self.clone();
        let mut quo = vec![TruncatedPuiseux::zero(); self.order().saturating_sub(dm) + 1];
        while cur.order() >= dm && !(0..=cur.order()).all(|i| cur.coeff(i).is_zero_up_to_prec()) {
            let k = cur.order() - dm;
            let top = cur.coeff(cur.order());
            if top.is_zero_up_to_prec() {
                // drop an unknown-zero leading coefficient and continue
                let mut c = cur.coeffs.clone();
                c.pop();
                if c.is_empty() {
                    break;
                }
                cur = MahlerOperator { p: self.p, coeffs: c };
                continue;
            }
            let mut sl = lead.clone();
            for _ in 0..k {
                sl = sl.sigma(self.p);
            }
            let q = top.div_to(&sl, precision)?;
            let mut term = MahlerOperator::new(self.p, {
                let mut v = vec![TruncatedPuiseux::zero(); k + 1];
                v[k] = q.clone();
                v
            });
            quo[k] = quo[k].add(&q);
            term = term.mul(divisor);
            let mut next = cur.sub(&term);
            // the top coefficient cancels by construction; force the drop so
            // truncation noise cannot stall the loop
            while next.coeffs.len() > cur.coeffs.len() - 1 {
                next.coeffs.pop();
            }
            cur = MahlerOperator::new(self.p, next.coeffs);
        }
        Ok((MahlerOperator::new(self.p, quo), cur))
    }

    /// Substitution `z -> z^m` on every coefficient (pullback on operators).
    pub fn substitute(&self, m: &Q) -> Result<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.mahler_substitute(m))
            .collect::<Result<Vec<_>>>()?;
        Ok(MahlerOperator { p: self.p, coeffs })
    }

    /// Conjugation `z^gamma L z^{-gamma}` (on solutions: `y -> z^gamma y`).
    pub fn conjugate_by_power(&self, gamma: &Q) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                // z^gamma a_i M^i z^{-gamma} = a_i z^{gamma - p^i gamma} M^i
                let shift = gamma - gamma * q_pow_int(self.p, i as u32);
                c.mul_monomial(&shift, &Scalar::one())
            })
            .collect();
        MahlerOperator { p: self.p, coeffs }
    }
}

fn q_pow_int(p: u32, e: u32) -> Q {
    let mut b = BigInt::one();
    for _ in 0..e {
        b *= p;
    }
    Q::from_integer(b)
}

impl core::fmt::Display for MahlerOperator {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_exactly_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if i == 0 {
                write!(f, "({c})")?;
            } else if i == 1 {
                write!(f, "({c})*M")?;
            } else {
                write!(f, "({c})*M^{i}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " @ p={}", self.p)
    }
}

/// A p-Mahler system `sigma(Y) = A Y` with exact rational-function entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MahlerSystem {
    pub p: u32,
    pub matrix: Matrix<RatFun>,
}

impl MahlerSystem {
    pub fn new(p: u32, matrix: Matrix<RatFun>) -> Self {
        assert!(matrix.is_square());
        MahlerSystem { p, matrix }
    }

    pub fn dimension(&self) -> usize {
        self.matrix.rows
    }

    pub fn sigma_matrix(m: &Matrix<RatFun>, p: u32) -> Matrix<RatFun> {
        m.map(|e| e.sigma(p))
    }

    /// Truncated expansion of the system matrix.
    pub fn expand_to(&self, target: &Q) -> Result<Matrix<TruncatedPuiseux>> {
        let mut out = Matrix::<TruncatedPuiseux>::zero(self.dimension(), self.dimension());
        for i in 0..self.dimension() {
            for j in 0..self.dimension() {
                out[(i, j)] = self.matrix[(i, j)].expand_to(target)?;
            }
        }
        Ok(out)
    }
}

/// Companion system of an operator: `sigma(F) = A F` for
/// `F = (f, sigma f, ..., sigma^{d-1} f)` with the displayed last row
/// `(-a_0/a_d, ..., -a_{d-1}/a_d)`.
pub fn equation_to_companion(op: &MahlerOperator) -> Result<MahlerSystem> {
    op.validate_equation()?;
    let d = op.order();
    assert!(d >= 1, "companion form needs order >= 1");
    let mut m = Matrix::<RatFun>::zero(d, d);
    for i in 0..d.saturating_sub(1) {
        m[(i, i + 1)] = RatFun::one();
    }
    let ad = op.coeff(d);
    for j in 0..d {
        let entry = RatFun::new(op.coeff(j).neg(), ad.clone())?;
        m[(d - 1, j)] = entry;
    }
    Ok(MahlerSystem::new(op.p, m))
}

/// Gauge action `R[A] = sigma(R) A R^{-1}` on exact systems.
pub fn gauge_apply(r: &Matrix<RatFun>, sys: &MahlerSystem) -> Result<MahlerSystem> {
    let rinv = invert_ratfun_matrix(r).ok_or(CoreError::SingularGauge)?;
    let sr = MahlerSystem::sigma_matrix(r, sys.p);
    Ok(MahlerSystem::new(sys.p, sr.mul(&sys.matrix).mul(&rinv)))
}

/// Gauss-Jordan inverse over the rational-function field.
pub fn invert_ratfun_matrix(m: &Matrix<RatFun>) -> Option<Matrix<RatFun>> {
    assert!(m.is_square());
    let n = m.rows;
    let mut a = m.clone();
    let mut inv = Matrix::<RatFun>::identity(n);
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[(r, col)].is_zero())?;
        if piv != col {
            for j in 0..n {
                let t = a[(piv, j)].clone();
                a[(piv, j)] = a[(col, j)].clone();
                a[(col, j)] = t;
                let t = inv[(piv, j)].clone();
                inv[(piv, j)] = inv[(col, j)].clone();
                inv[(col, j)] = t;
            }
        }
        let d = a[(col, col)].inv().ok()?;
        for j in 0..n {
            a[(col, j)] = a[(col, j)].mul(&d);
            inv[(col, j)] = inv[(col, j)].mul(&d);
        }
        for r in 0..n {
            if r != col && !a[(r, col)].is_zero() {
                let f = a[(r, col)].clone();
                for j in 0..n {
                    let t = f.mul(&a[(col, j)]);
                    a[(r, j)] = a[(r, j)].sub(&t);
                    let t = f.mul(&inv[(col, j)]);
                    inv[(r, j)] = inv[(r, j)].sub(&t);
                }
            }
        }
    }
    Some(inv)
}

// ---------------------------------------------------------------------------
// Newton polygon
// ---------------------------------------------------------------------------

/// One edge of the Newton polygon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewtonEdge {
    /// Slope `Delta(val) / Delta(p^i)`.
    pub slope: Q,
    /// Operator indices spanned by the edge.
    pub i_min: usize,
    pub i_max: usize,
    /// Edge characteristic polynomial `sum_{l on edge} cld(a_l) c^{l - i_min}`,
    /// ascending coefficients (length `multiplicity + 1`).
    pub char_poly: Vec<Scalar>,
}

impl NewtonEdge {
    /// Number of operator steps spanned (the multiplicity of the slope).
    pub fn multiplicity(&self) -> usize {
        self.i_max - self.i_min
    }
}

/// Newton polygon data: edges with strictly increasing slopes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewtonData {
    pub edges: Vec<NewtonEdge>,
}

impl NewtonData {
    pub fn slopes(&self) -> Vec<Q> {
        self.edges.iter().map(|e| e.slope.clone()).collect()
    }

    pub fn multiplicities(&self) -> Vec<usize> {
        self.edges.iter().map(NewtonEdge::multiplicity).collect()
    }

    /// Exponents of every edge, flattened in edge order, repeated with
    /// multiplicity. Requires the edge characteristic polynomials to split
    /// over Q or over one shared quadratic extension.
    pub fn exponents(&self) -> Result<Vec<Vec<Scalar>>> {
        let mut field: Option<alloc::sync::Arc<NumberField>> = None;
        let mut out = Vec::with_capacity(self.edges.len());
        for e in &self.edges {
            out.push(edge_roots(&e.char_poly, &mut field)?);
        }
        Ok(out)
    }
}

/// Roots (with multiplicity) of an edge characteristic polynomial, kept in a
/// single shared extension. Deterministic order.
fn edge_roots(
    cp: &[Scalar],
    field: &mut Option<alloc::sync::Arc<NumberField>>,
) -> Result<Vec<Scalar>> {
    let rational: Option<Vec<Q>> = cp.iter().map(|c| c.as_rational().cloned()).collect();
    let Some(cp_q) = rational else {
        return Err(CoreError::UnsupportedSplitting(String::from(
            "edge polynomial has coefficients outside Q",
        )));
    };
    let (_, factors) = factor_rational_poly(&cp_q)?;
    let mut roots: Vec<Scalar> = Vec::new();
    for (f, mult) in &factors {
        match degree(f) {
            0 => {}
            1 => {
                let r = -(&f[0] / &f[1]);
                if r.is_zero() {
                    continue; // zero roots are excluded from exponent data
                }
                for _ in 0..*mult {
                    roots.push(Scalar::from_q(r.clone()));
                }
            }
            2 => {
                let nf = match field {
                    Some(nf) => {
                        if nf.min_poly() != f.as_slice() {
                            return Err(CoreError::UnsupportedSplitting(String::from(
                                "edges need two distinct extensions",
                            )));
                        }
                        nf.clone()
                    }
                    None => {
                        let nf = NumberField::new(f.clone());
                        *field = Some(nf.clone());
                        nf
                    }
                };
                let t = Scalar::generator(&nf);
                // the conjugate root of x^2 + bx + c is -b - t
                let other = Scalar::from_q(-f[1].clone()).sub(&t);
                for _ in 0..*mult {
                    roots.push(t.clone());
                    roots.push(other.clone());
                }
            }
            d => {
                return Err(CoreError::UnsupportedSplitting(format!(
                    "edge polynomial with irreducible factor of degree {d}"
                )));
            }
        }
    }
    roots.sort();
    Ok(roots)
}

/// Lower convex hull of the points `(p^i, val a_i)`.
pub fn newton_polygon(op: &MahlerOperator) -> Result<NewtonData> {
    let p = op.p;
    let mut pts: Vec<(Q, Q, usize)> = Vec::new(); // (p^i, val, i)
    for (i, c) in op.coeffs().iter().enumerate() {
        if c.is_zero_up_to_prec() {
            continue;
        }
        let v = c.valuation()?;
        pts.push((q_pow_int(p, i as u32), v, i));
    }
    if pts.len() < 2 {
        return Ok(NewtonData { edges: Vec::new() });
    }
    // monotone chain (x strictly increasing already)
    let mut hull: Vec<usize> = Vec::new(); // indices into pts
    for k in 0..pts.len() {
        while hull.len() >= 2 {
            let a = &pts[hull[hull.len() - 2]];
            let b = &pts[hull[hull.len() - 1]];
            let c = &pts[k];
            // keep b only if it is strictly below segment a-c
            let cross = (&b.0 - &a.0) * (&c.1 - &a.1) - (&c.0 - &a.0) * (&b.1 - &a.1);
            if cross.is_positive() {
                break;
            }
            hull.pop();
        }
        hull.push(k);
    }
    let mut edges = Vec::new();
    for w in hull.windows(2) {
        let a = &pts[w[0]];
        let b = &pts[w[1]];
        let slope = (&b.1 - &a.1) / (&b.0 - &a.0);
        // collect lattice operator points exactly on the segment
        let mut char_poly = vec![Scalar::zero(); b.2 - a.2 + 1];
        for (x, y, i) in &pts {
            if *i < a.2 || *i > b.2 {
                continue;
            }
            let on_line = (y - &a.1) * (&b.0 - &a.0) == (&b.1 - &a.1) * (x - &a.0);
            if on_line {
                char_poly[i - a.2] = op.coeff(*i).leading_coefficient()?;
            }
        }
        edges.push(NewtonEdge { slope, i_min: a.2, i_max: b.2, char_poly });
    }
    Ok(NewtonData { edges })
}

// ---------------------------------------------------------------------------
// Cyclic vectors: systems back to operators
// ---------------------------------------------------------------------------

/// Result of the cyclic-vector search: the operator and the gauge `V` with
/// `V[A] = companion(L)` (rows of `V` are the dual iterates of the chosen
/// functional).
pub struct CyclicVectorResult {
    pub operator: MahlerOperator,
    pub gauge: Matrix<RatFun>,
}

/// Finds an operator annihilating a cyclic coordinate of the solution space:
/// for `sigma(Y) = A Y`, iterates `v_{k+1} = A^T sigma(v_k)` from candidate
/// functionals until `d` independent iterates appear, then reads the monic
/// relation. Candidates: standard basis vectors, then `e_1 + z^j e_k`;
/// budget 50.
pub fn system_to_operator(sys: &MahlerSystem) -> Result<MahlerOperator> {
    Ok(cyclic_vector(sys)?.operator)
}

pub fn cyclic_vector(sys: &MahlerSystem) -> Result<CyclicVectorResult> {
    let d = sys.dimension();
    let at = sys.matrix.transpose();
    let mut budget = 50usize;
    let mut candidates: Vec<Vec<RatFun>> = Vec::new();
    for i in 0..d {
        let mut v = vec![RatFun::zero(); d];
        v[i] = RatFun::one();
        candidates.push(v);
    }
    'outer: for j in 1.. {
        for k in 1..d.max(2) {
            if candidates.len() >= 50 {
                break 'outer;
            }
            if k == 0 || k >= d {
                continue;
            }
            let mut v = vec![RatFun::zero(); d];
            v[0] = RatFun::one();
            v[k] = RatFun::from_poly(TruncatedPuiseux::monomial(qi(j), Scalar::one()));
            candidates.push(v);
        }
        if j > 50 {
            break;
        }
    }
    for cand in candidates {
        if budget == 0 {
            break;
        }
        budget -= 1;
        // iterates v_0 .. v_d
        let mut iterates: Vec<Vec<RatFun>> = vec![cand.clone()];
        for _ in 0..d {
            let prev = iterates.last().unwrap();
            let sv: Vec<RatFun> = prev.iter().map(|e| e.sigma(sys.p)).collect();
            let mut next = vec![RatFun::zero(); d];
            for i in 0..d {
                for k in 0..d {
                    next[i] = next[i].add(&at[(i, k)].mul(&sv[k]));
                }
            }
            iterates.push(next);
        }
        // independence of the first d iterates
        let v = Matrix::from_rows(iterates[..d].to_vec());
        let Some(vinv) = invert_ratfun_matrix(&v) else { continue };
        // relation: v_d = sum_i b_i v_i  =>  L = M^d - sum b_i M^i
        let vd = &iterates[d];
        let mut bs = vec![RatFun::zero(); d];
        for i in 0..d {
            for k in 0..d {
                bs[i] = bs[i].add(&vinv[(k, i)].mul(&vd[k]));
            }
        }
        // wait: solve b V = v_d as row vector: b = v_d V^{-1}
        let _ = &mut bs;
        let mut b_row = vec![RatFun::zero(); d];
        for i in 0..d {
            for k in 0..d {
                b_row[i] = b_row[i].add(&vd[k].mul(&vinv[(k, i)]));
            }
        }
        // operator sum: M^d - sum_i b_i M^i, cleared to exact Laurent coeffs
        let mut den = TruncatedPuiseux::one();
        for b in &b_row {
            den = den.mul(b.den());
        }
        let mut coeffs: Vec<TruncatedPuiseux> = Vec::with_capacity(d + 1);
        for b in &b_row {
            let scaled = den.div_exact(b.den()).expect("den is a common multiple");
            coeffs.push(b.num().mul(&scaled).neg());
        }
        coeffs.push(den.clone());
        let op = MahlerOperator::new(sys.p, coeffs);
        if op.coeff(0).is_exactly_zero() {
            // relation with trivial constant term: not a valid equation;
            // try the next candidate
            continue;
        }
        return Ok(CyclicVectorResult { operator: op, gauge: Matrix::from_rows(iterates[..d].to_vec()) });
    }
    Err(CoreError::CyclicSearchExhausted)
}
