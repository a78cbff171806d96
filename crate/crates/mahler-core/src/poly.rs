//! Univariate polynomials over Q: real root isolation, cyclotomic polynomials,
//! rational roots, small-degree factorization, and exact root counting in
//! disks. These are the primitives behind root-of-unity detection, certified
//! Weil heights and eigenvalue splitting.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{CoreError, Result};
use crate::scalar::{is_zero_poly, poly_divmod, poly_mul, q, qi, trim, Q};

pub fn degree(p: &[Q]) -> usize {
    let p = trimmed_len(p);
    p.saturating_sub(1)
}

fn trimmed_len(p: &[Q]) -> usize {
    let mut n = p.len();
    while n > 1 && p[n - 1].is_zero() {
        n -= 1;
    }
    if p.iter().take(n).all(Zero::is_zero) {
        0
    } else {
        n
    }
}

pub fn eval(p: &[Q], x: &Q) -> Q {
    let mut acc = Q::zero();
    for c in p.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

pub fn derivative(p: &[Q]) -> Vec<Q> {
    if p.len() <= 1 {
        return vec![Q::zero()];
    }
    let mut out = Vec::with_capacity(p.len() - 1);
    for (i, c) in p.iter().enumerate().skip(1) {
        out.push(c * qi(i as i64));
    }
    trim(out)
}

pub fn monic(p: &[Q]) -> Vec<Q> {
    let p = trim(p.to_vec());
    let lead = p.last().unwrap();
    if lead.is_zero() || lead.is_one() {
        return p;
    }
    let inv = lead.recip();
    p.iter().map(|c| c * &inv).collect()
}

pub fn gcd(a: &[Q], b: &[Q]) -> Vec<Q> {
    let mut r0 = trim(a.to_vec());
    let mut r1 = trim(b.to_vec());
    while !is_zero_poly(&r1) {
        let (_, rem) = poly_divmod(&r0, &r1);
        r0 = r1;
        r1 = rem;
    }
    if is_zero_poly(&r0) {
        r0
    } else {
        monic(&r0)
    }
}

/// Squarefree part `p / gcd(p, p')`, monic.
pub fn squarefree_part(p: &[Q]) -> Vec<Q> {
    let g = gcd(p, &derivative(p));
    if degree(&g) == 0 {
        return monic(p);
    }
    let (quo, _) = poly_divmod(p, &g);
    monic(&quo)
}

/// Primitive integer form: clears denominators and content, keeps the sign of
/// the leading coefficient.
pub fn primitive_integer(p: &[Q]) -> Vec<BigInt> {
    let p = trim(p.to_vec());
    let mut l = BigInt::one();
    for c in &p {
        l = l.lcm(c.denom());
    }
    let ints: Vec<BigInt> = p.iter().map(|c| (c * Q::from_integer(l.clone())).to_integer()).collect();
    let mut content = BigInt::zero();
    for c in &ints {
        content = content.gcd(c);
    }
    if content.is_zero() {
        return ints;
    }
    ints.iter().map(|c| c / &content).collect()
}

// ---------------------------------------------------------------------------
// Sturm sequences and real root isolation
// ---------------------------------------------------------------------------

fn sturm_chain(p: &[Q]) -> Vec<Vec<Q>> {
    let mut chain = vec![trim(p.to_vec()), derivative(p)];
    loop {
        let n = chain.len();
        let (_, rem) = poly_divmod(&chain[n - 2], &chain[n - 1]);
        if is_zero_poly(&rem) {
            break;
        }
        chain.push(rem.iter().map(|c| -c).collect());
    }
    chain
}

fn sign_changes_at(chain: &[Vec<Q>], x: &Q) -> usize {
    let mut count = 0usize;
    let mut last = 0i32;
    for p in chain {
        let v = eval(p, x);
        let s = if v.is_zero() {
            0
        } else if v.is_positive() {
            1
        } else {
            -1
        };
        if s != 0 {
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
    }
    count
}

/// Cauchy bound: all real roots lie in `(-B, B)`.
pub fn root_bound(p: &[Q]) -> Q {
    let p = trim(p.to_vec());
    let lead = p.last().unwrap().clone();
    let mut m = Q::zero();
    for c in &p[..p.len() - 1] {
        let r = (c / &lead).abs();
        if r > m {
            m = r;
        }
    }
    m + Q::one()
}

/// Isolating intervals `(lo, hi]` for the distinct real roots of a squarefree
/// polynomial, sorted increasingly, each refined to width `<= width`.
pub fn isolate_real_roots(p: &[Q], width: &Q) -> Vec<(Q, Q)> {
    let p = squarefree_part(p);
    if degree(&p) == 0 {
        return Vec::new();
    }
    let chain = sturm_chain(&p);
    let b = root_bound(&p);
    let mut stack = vec![(-b.clone(), b.clone())];
    let mut found: Vec<(Q, Q)> = Vec::new();
    while let Some((lo, hi)) = stack.pop() {
        let n = sign_changes_at(&chain, &lo) - sign_changes_at(&chain, &hi);
        if n == 0 {
            continue;
        }
        if n == 1 {
            let (mut lo, mut hi) = (lo, hi);
            while &hi - &lo > *width {
                let mid = (&lo + &hi) / qi(2);
                let nl = sign_changes_at(&chain, &lo) - sign_changes_at(&chain, &mid);
                if nl == 1 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            found.push((lo, hi));
            continue;
        }
        let mid = (&lo + &hi) / qi(2);
        stack.push((lo, mid.clone()));
        stack.push((mid, hi));
    }
    found.sort_by(|a, b| a.0.cmp(&b.0));
    found
}

/// Number of real roots of `p` (squarefree taken internally) in `(lo, hi]`.
pub fn count_real_roots_in(p: &[Q], lo: &Q, hi: &Q) -> usize {
    let p = squarefree_part(p);
    if degree(&p) == 0 {
        return 0;
    }
    let chain = sturm_chain(&p);
    sign_changes_at(&chain, lo) - sign_changes_at(&chain, hi)
}

// ---------------------------------------------------------------------------
// Cyclotomic polynomials and roots of unity
// ---------------------------------------------------------------------------

pub fn euler_phi(n: u64) -> u64 {
    let mut m = n;
    let mut phi = n;
    let mut d = 2u64;
    while d * d <= m {
        if m % d == 0 {
            phi = phi / d * (d - 1);
            while m % d == 0 {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        phi = phi / m * (m - 1);
    }
    phi
}

/// The n-th cyclotomic polynomial, by repeated division of `x^n - 1` by the
/// cyclotomic polynomials of the proper divisors.
pub fn cyclotomic(n: u64) -> Vec<Q> {
    assert!(n >= 1);
    let mut xn1 = vec![Q::zero(); n as usize + 1];
    xn1[0] = -Q::one();
    xn1[n as usize] = Q::one();
    let mut acc = xn1;
    for d in 1..n {
        if n % d == 0 {
            let cd = cyclotomic(d);
            let (quo, rem) = poly_divmod(&acc, &cd);
            debug_assert!(is_zero_poly(&rem));
            acc = quo;
        }
    }
    acc
}

/// If the monic irreducible `p` is the minimal polynomial of a root of unity,
/// returns its order. Scans exactly the `n` with `phi(n) = deg p`.
pub fn cyclotomic_order(p: &[Q]) -> Option<u64> {
    let p = monic(p);
    let d = degree(&p) as u64;
    if d == 0 {
        return None;
    }
    // phi(n) >= sqrt(n/2), so n <= 2 d^2 + 1 covers all candidates
    let bound = 2 * d * d + 1;
    for n in 1..=bound {
        if euler_phi(n) == d && cyclotomic(n) == p {
            return Some(n);
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Rational roots and small-degree factorization over Q
// ---------------------------------------------------------------------------

fn divisors(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs();
    let mut out = Vec::new();
    let mut d = BigInt::one();
    // trial division is fine: candidates come from small guessed operators
    while &d * &d <= n {
        if (&n % &d).is_zero() {
            out.push(d.clone());
            out.push(&n / &d);
        }
        d += 1;
    }
    out.sort();
    out.dedup();
    out
}

/// All rational roots with multiplicity, sorted.
pub fn rational_roots(p: &[Q]) -> Vec<Q> {
    let mut p = trim(p.to_vec());
    let mut out = Vec::new();
    // strip zero roots
    while p.len() > 1 && p[0].is_zero() {
        p.remove(0);
        out.push(Q::zero());
    }
    if degree(&p) == 0 {
        return out;
    }
    let ints = primitive_integer(&p);
    let a0 = ints[0].clone();
    let an = ints.last().unwrap().clone();
    if a0.is_zero() {
        return out;
    }
    let mut candidates = Vec::new();
    for num in divisors(&a0) {
        for den in divisors(&an) {
            let r = Q::new(num.clone(), den.clone());
            candidates.push(r.clone());
            candidates.push(-r);
        }
    }
    candidates.sort();
    candidates.dedup();
    let mut cur = p;
    for r in candidates {
        loop {
            if eval(&cur, &r).is_zero() {
                out.push(r.clone());
                let lin = vec![-r.clone(), Q::one()];
                let (quo, rem) = poly_divmod(&cur, &lin);
                debug_assert!(is_zero_poly(&rem));
                cur = quo;
            } else {
                break;
            }
        }
        if degree(&cur) == 0 {
            break;
        }
    }
    out.sort();
    out
}

/// Factorization into monic irreducible factors with multiplicity, together
/// with the leading rational constant. Complete for degree at most 4 after
/// rational-root stripping; refuses higher-degree composites it cannot
/// certify.
pub fn factor_rational_poly(p: &[Q]) -> Result<(Q, Vec<(Vec<Q>, usize)>)> {
    let p = trim(p.to_vec());
    let lead = p.last().unwrap().clone();
    if degree(&p) == 0 {
        return Ok((lead, Vec::new()));
    }
    let mut factors: Vec<(Vec<Q>, usize)> = Vec::new();
    let mut cur = monic(&p);
    // zero roots
    let mut zero_mult = 0usize;
    while cur.len() > 1 && cur[0].is_zero() {
        cur.remove(0);
        zero_mult += 1;
    }
    if zero_mult > 0 {
        factors.push((vec![Q::zero(), Q::one()], zero_mult));
    }
    // rational roots
    for r in rational_roots(&cur) {
        let lin = vec![-r.clone(), Q::one()];
        let mut mult = 0usize;
        loop {
            let (quo, rem) = poly_divmod(&cur, &lin);
            if is_zero_poly(&rem) {
                cur = quo;
                mult += 1;
            } else {
                break;
            }
        }
        if mult > 0 {
            factors.push((lin, mult));
        }
    }
    // whatever remains has no rational roots
    loop {
        let d = degree(&cur);
        if d == 0 {
            break;
        }
        let found = match d {
            1 => unreachable!("linear factors have rational roots"),
            2 | 3 => {
                // no rational root => irreducible over Q
                Some(cur.clone())
            }
            4 => quartic_quadratic_factor(&cur)?,
            _ => {
                return Err(CoreError::UnsupportedSplitting(format!(
                    "cannot certify irreducibility at degree {d}"
                )))
            }
        };
        match found {
            Some(f) if f == cur => {
                factors.push((cur.clone(), 1));
                cur = vec![Q::one()];
            }
            Some(f) => {
                let mut mult = 0usize;
                loop {
                    let (quo, rem) = poly_divmod(&cur, &f);
                    if is_zero_poly(&rem) {
                        cur = quo;
                        mult += 1;
                    } else {
                        break;
                    }
                }
                factors.push((f, mult));
            }
            None => {
                factors.push((cur.clone(), 1));
                cur = vec![Q::one()];
            }
        }
    }
    factors.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then(a.0.cmp(&b.0)));
    Ok((lead, factors))
}

/// For a monic quartic with no rational roots: a monic quadratic factor over Q
/// if one exists (via the resolvent cubic), `None` if irreducible.
fn quartic_quadratic_factor(p: &[Q]) -> Result<Option<Vec<Q>>> {
    debug_assert_eq!(degree(p), 4);
    let a = p[3].clone();
    let b = p[2].clone();
    let c = p[1].clone();
    let dd = p[0].clone();
    // depressed form x^4 + q x^2 + r x + s via x -> x - a/4
    let a4 = &a / qi(4);
    let qq = &b - q(3, 8) * &a * &a;
    let rr = &c - (&a * &b) / qi(2) + (&a * &a * &a) / qi(8);
    let ss = &dd - (&a * &c) / qi(4) + (&a * &a * &b) / qi(16) - q(3, 256) * &a * &a * &a * &a;
    // x^4 + q x^2 + r x + s = (x^2 + u x + v)(x^2 - u x + w): u^2 =: y solves
    // y^3 + 2 q y^2 + (q^2 - 4 s) y - r^2 = 0
    let cubic = vec![
        -(&rr * &rr),
        &qq * &qq - qi(4) * &ss,
        qi(2) * &qq,
        Q::one(),
    ];
    for y in rational_roots(&cubic) {
        if y.is_negative() {
            continue;
        }
        // u = sqrt(y) must be rational
        let Some(u) = rational_sqrt(&y) else { continue };
        if u.is_zero() {
            // x^4 + q x^2 + s with y=0: factors (x^2+v)(x^2+w), v+w=q, vw=s
            let disc = &qq * &qq - qi(4) * &ss;
            if let Some(sd) = rational_sqrt(&disc) {
                let v = (&qq + &sd) / qi(2);
                let f = vec![v, Q::zero(), Q::one()];
                return Ok(Some(undepress(&f, &a4)));
            }
            continue;
        }
        // v + w = q + u^2, w - v = r/u
        let w = (&qq + &y + (&rr / &u)) / qi(2);
        let v = (&qq + &y - (&rr / &u)) / qi(2);
        debug_assert_eq!(&v * &w, ss);
        let f = vec![v, u, Q::one()];
        return Ok(Some(undepress(&f, &a4)));
    }
    Ok(None)
}

fn undepress(f: &[Q], a4: &Q) -> Vec<Q> {
    // substitute x -> x + a4 into the quadratic (x^2 + ux + v)
    let u = f[1].clone();
    let v = f[0].clone();
    let c1 = u.clone() + qi(2) * a4;
    let c0 = v + &u * a4 + a4 * a4;
    vec![c0, c1, Q::one()]
}

pub fn rational_sqrt(x: &Q) -> Option<Q> {
    if x.is_negative() {
        return None;
    }
    if x.is_zero() {
        return Some(Q::zero());
    }
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    let r = Q::new(n, d);
    if &(&r * &r) == x {
        Some(r)
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// Exact root counting in disks (for certified moduli of complex roots)
// ---------------------------------------------------------------------------

/// Number of complex roots of `p` (with multiplicity) of modulus `< s`,
/// provided no root has modulus exactly `s`; returns `None` in the degenerate
/// cases the underlying half-plane count cannot certify, so callers can
/// perturb `s` and retry.
pub fn count_roots_in_disk(p: &[Q], s: &Q) -> Option<usize> {
    let p = trim(p.to_vec());
    let n = degree(&p);
    if n == 0 {
        return Some(0);
    }
    // scale: roots of q(z) = p(s z) inside unit disk
    let mut scaled = Vec::with_capacity(p.len());
    let mut pw = Q::one();
    for c in &p {
        scaled.push(c * &pw);
        pw *= s;
    }
    let scaled = trim(scaled);
    // strip zero roots (inside the disk for s > 0)
    let mut zeros = 0usize;
    let mut qp = scaled;
    while qp.len() > 1 && qp[0].is_zero() {
        qp.remove(0);
        zeros += 1;
    }
    // Moebius map: z = (1+w)/(1-w) sends Re w < 0 to |z| < 1.
    // r(w) = (1-w)^m q((1+w)/(1-w)) is a polynomial of degree <= m.
    let m = degree(&qp);
    if m == 0 {
        return Some(zeros);
    }
    let mut r = vec![Q::zero()];
    let one_plus = vec![Q::one(), Q::one()];
    let one_minus = vec![Q::one(), -Q::one()];
    for (k, c) in qp.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        // c * (1+w)^k (1-w)^{m-k}
        let mut t = vec![c.clone()];
        for _ in 0..k {
            t = poly_mul(&t, &one_plus);
        }
        for _ in 0..(m - k) {
            t = poly_mul(&t, &one_minus);
        }
        r = crate::scalar::poly_add(&r, &t);
    }
    let r = trim(r);
    // degree drop means q(-1) = 0: a root exactly on the circle, degenerate
    if degree(&r) < m {
        return None;
    }
    let lhp = routh_left_half_plane(&r)?;
    Some(zeros + lhp)
}

/// Number of roots with negative real part, by the Routh array. Returns
/// `None` on singular pivots (roots on the imaginary axis or unlucky rows).
fn routh_left_half_plane(p: &[Q]) -> Option<usize> {
    let p = trim(p.to_vec());
    let n = degree(&p);
    if n == 0 {
        return Some(0);
    }
    // rows of the Routh scheme, highest-degree coefficients first
    let coeffs: Vec<Q> = p.iter().rev().cloned().collect();
    let mut row0: Vec<Q> = coeffs.iter().step_by(2).cloned().collect();
    let mut row1: Vec<Q> = coeffs.iter().skip(1).step_by(2).cloned().collect();
    let mut signs: Vec<i32> = Vec::with_capacity(n + 1);
    let s0 = sign_of(&row0[0])?;
    signs.push(s0);
    for _ in 0..n {
        if row1.is_empty() || row1[0].is_zero() {
            return None;
        }
        signs.push(sign_of(&row1[0])?);
        let mut next = Vec::with_capacity(row1.len());
        for j in 0..row1.len() {
            let a = row0.get(j + 1).cloned().unwrap_or_else(Q::zero);
            let b = row1.get(j + 1).cloned().unwrap_or_else(Q::zero);
            next.push(&a - (&row0[0] / &row1[0]) * b);
        }
        while next.len() > 1 && next.last().map_or(false, Zero::is_zero) {
            next.pop();
        }
        row0 = row1;
        row1 = next;
        if row0.len() == 1 && row1.iter().all(Zero::is_zero) {
            break;
        }
    }
    if signs.len() != n + 1 {
        return None;
    }
    // sign changes in the first column count the roots with positive real part
    let mut changes = 0usize;
    for w in signs.windows(2) {
        if w[0] != w[1] {
            changes += 1;
        }
    }
    Some(n - changes)
}

fn sign_of(x: &Q) -> Option<i32> {
    if x.is_zero() {
        None
    } else if x.is_positive() {
        Some(1)
    } else {
        Some(-1)
    }
}

/// Certified moduli of all complex roots of a squarefree integer-primitive
/// polynomial: pairwise-disjoint rational brackets `(lo, hi)` with
/// multiplicities, each of relative width below `tol`.
pub fn certified_root_moduli(p: &[Q], tol: &Q) -> Result<Vec<(Q, Q, usize)>> {
    let p = squarefree_part(p);
    let n = degree(&p);
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut zeros = 0usize;
    let mut pp = p.clone();
    while pp.len() > 1 && pp[0].is_zero() {
        pp.remove(0);
        zeros += 1;
    }
    let m = degree(&pp);
    let mut out: Vec<(Q, Q, usize)> = Vec::new();
    if zeros > 0 {
        out.push((Q::zero(), Q::zero(), zeros));
    }
    if m == 0 {
        return Ok(out);
    }
    let bound = root_bound(&pp);
    // count function with retry on degenerate s
    let count = |s: &Q| -> Result<usize> {
        let mut shift = q(1, 1_000_003);
        for _ in 0..64 {
            if let Some(c) = count_roots_in_disk(&pp, s) {
                return Ok(c);
            }
            // nudge the radius; roots have fixed moduli so small moves succeed
            let s2 = s + &shift;
            if let Some(c) = count_roots_in_disk(&pp, &s2) {
                return Ok(c);
            }
            shift = &shift / qi(7) + q(1, 99_990_001);
        }
        Err(CoreError::PrecisionLoss(String::from(
            "disk root counting kept hitting degenerate radii",
        )))
    };
    // isolate moduli by dyadic refinement of [0, bound]
    let mut stack = vec![(Q::zero(), bound.clone())];
    let total = m;
    let mut brackets: Vec<(Q, Q, usize)> = Vec::new();
    while let Some((lo, hi)) = stack.pop() {
        let c_lo = if lo.is_zero() { 0 } else { count(&lo)? };
        let c_hi = count(&hi)?;
        let k = c_hi - c_lo;
        if k == 0 {
            continue;
        }
        let width_ok = {
            let mid = (&lo + &hi) / qi(2);
            if mid.is_zero() {
                true
            } else {
                (&hi - &lo) / &mid < *tol
            }
        };
        if width_ok {
            brackets.push((lo, hi, k));
            continue;
        }
        let mid = (&lo + &hi) / qi(2);
        stack.push((lo, mid.clone()));
        stack.push((mid, hi));
    }
    let found: usize = brackets.iter().map(|b| b.2).sum();
    if found != total {
        return Err(CoreError::PrecisionLoss(String::from(
            "lost roots while isolating moduli",
        )));
    }
    brackets.sort_by(|a, b| a.0.cmp(&b.0));
    out.extend(brackets);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomic_small() {
        assert_eq!(cyclotomic(1), vec![-Q::one(), Q::one()]);
        assert_eq!(cyclotomic(2), vec![Q::one(), Q::one()]);
        assert_eq!(cyclotomic(4), vec![qi(1), qi(0), qi(1)]);
        assert_eq!(cyclotomic(6), vec![qi(1), qi(-1), qi(1)]);
    }

    #[test]
    fn sturm_isolates_sqrt2() {
        let p = vec![qi(-2), qi(0), qi(1)];
        let roots = isolate_real_roots(&p, &q(1, 1024));
        assert_eq!(roots.len(), 2);
        // brackets around -sqrt(2) and sqrt(2)
        assert!(roots[0].1 < Q::zero() && roots[1].0 > Q::zero());
    }

    #[test]
    fn disk_count_sqrt2() {
        let p = vec![qi(-2), qi(0), qi(1)];
        assert_eq!(count_roots_in_disk(&p, &qi(1)), Some(0));
        assert_eq!(count_roots_in_disk(&p, &qi(2)), Some(2));
    }

    #[test]
    fn disk_count_complex_pair() {
        // x^2 + x + 1: roots on the unit circle
        let p = vec![qi(1), qi(1), qi(1)];
        assert_eq!(count_roots_in_disk(&p, &q(1, 2)), Some(0));
        assert_eq!(count_roots_in_disk(&p, &qi(2)), Some(2));
        // x^2 - 2x + 2: roots 1 +- i, modulus sqrt(2)
        let p = vec![qi(2), qi(-2), qi(1)];
        assert_eq!(count_roots_in_disk(&p, &qi(1)), Some(0));
        assert_eq!(count_roots_in_disk(&p, &qi(2)), Some(2));
    }

    #[test]
    fn quartic_split() {
        // (x^2-2)(x^2-3)
        let p = poly_mul(&[qi(-2), qi(0), qi(1)], &[qi(-3), qi(0), qi(1)]);
        let (_, f) = factor_rational_poly(&p).unwrap();
        assert_eq!(f.len(), 2);
        assert!(f.iter().all(|(g, m)| degree(g) == 2 && *m == 1));
        // x^4 + 1 is irreducible over Q
        let p = vec![qi(1), qi(0), qi(0), qi(0), qi(1)];
        let (_, f) = factor_rational_poly(&p).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(degree(&f[0].0), 4);
    }

    #[test]
    fn rational_roots_with_multiplicity() {
        // (2x-1)^2 (x+3)
        let p = poly_mul(&poly_mul(&[q(-1, 2), qi(1)], &[q(-1, 2), qi(1)]), &[qi(3), qi(1)]);
        let r = rational_roots(&p);
        assert_eq!(r, vec![qi(-3), q(1, 2), q(1, 2)]);
    }

    #[test]
    fn moduli_of_mixed_poly() {
        // (x^2+x+1)(x-3): moduli {1, 1, 3}
        let p = poly_mul(&[qi(1), qi(1), qi(1)], &[qi(-3), qi(1)]);
        let m = certified_root_moduli(&p, &q(1, 1_000_000)).unwrap();
        let total: usize = m.iter().map(|b| b.2).sum();
        assert_eq!(total, 3);
        assert!(m[0].0 <= Q::one() && Q::one() <= m[0].1);
        assert!(m[1].0 <= qi(3) && qi(3) <= m[1].1);
    }
}
