//! Exact expansion oracle for xi expressions.
//!
//! The support of a xi series with index length `t >= 2` accumulates from
//! below at every partial exponent, so a window `[lo, -eps]` can hold
//! infinitely many terms. The oracle therefore works with a finite probe set:
//! exponents reached by tuples whose per-level steps stay within a depth
//! budget. Each probed coefficient is computed exactly, enumerating all
//! tuples that hit the exponent (always finitely many), so a comparison at
//! the probe set never reports a spurious difference.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::error::{CoreError, Result};
use crate::scalar::{q_pow, qi, Q, Scalar};
use crate::series::Prec;

use super::{XiExpr, XiIndex};

/// Probe window: exponents in `[lo, -eps]`, tuples with per-level step at
/// most `depth`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    pub lo: Q,
    pub eps: Q,
    pub depth: u32,
}

impl Window {
    pub fn new(lo: Q, eps: Q) -> Self {
        assert!(eps.is_positive(), "window cutoff must be positive");
        Window { lo, eps, depth: 10 }
    }

    /// Default verification window for a set of indices: covers every
    /// first-layer exponent, with cutoff `p^{-8}` and eight shift levels.
    pub fn default_for(indices: &[XiIndex], p: u32) -> Self {
        let mut lo = -Q::one();
        for i in indices {
            let s = -(i.a_sum() + Q::one());
            if s < lo {
                lo = s;
            }
        }
        Window { lo, eps: q_pow(&qi(p as i64), -8), depth: 10 }
    }

    pub fn contains(&self, e: &Q) -> bool {
        e >= &self.lo && *e <= -self.eps.clone()
    }
}

/// A finite window of an expansion: sorted exact terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedHahn {
    pub terms: Vec<(Q, Scalar)>,
    pub window: Window,
}

impl core::fmt::Display for TruncatedHahn {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0 on the window");
        }
        for (n, (e, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            if c.is_one() {
                write!(f, "z^({e})")?;
            } else {
                write!(f, "({c})*z^({e})")?;
            }
        }
        Ok(())
    }
}

fn pow_q(p: u32, e: i64) -> Q {
    q_pow(&qi(p as i64), e)
}

/// Exact coefficient of `z^{-target}` in `xi_idx` (so `target > 0` for
/// nonempty indices): sums over all tuples `s_1 < ... < s_t` with
/// `sum a_j / p^{s_j} = target`. The search is finite because each level is
/// bracketed by `a_j / rem < p^{s_j} <= (sum of remaining a) / rem`.
pub fn xi_coefficient_neg(idx: &XiIndex, p: u32, target: &Q) -> Scalar {
    if idx.is_empty() {
        return if target.is_zero() { Scalar::one() } else { Scalar::zero() };
    }
    if !target.is_positive() {
        return Scalar::zero();
    }
    // tail sums of a
    let t = idx.len();
    let mut tail = alloc::vec![Q::zero(); t + 1];
    for j in (0..t).rev() {
        tail[j] = &tail[j + 1] + &idx.a[j];
    }
    fn go(
        idx: &XiIndex,
        p: u32,
        tail: &[Q],
        level: usize,
        s_prev: i64,
        rem: &Q,
        acc: &Scalar,
        out: &mut Scalar,
    ) {
        let t = idx.len();
        if level == t {
            if rem.is_zero() {
                *out = out.add(acc);
            }
            return;
        }
        if !rem.is_positive() {
            return;
        }
        // a_level / p^{s} < rem  (strict unless last level) and
        // tail / p^{s} >= rem
        let a = &idx.a[level];
        let mut s = s_prev + 1;
        // raise s until a/p^s <= rem (or = for the last level)
        loop {
            let val = a / pow_q(p, s);
            if level + 1 == t {
                if &val <= rem {
                    break;
                }
            } else if &val < rem {
                break;
            }
            s += 1;
        }
        loop {
            let upper = &tail[level] / pow_q(p, s);
            if &upper < rem {
                break; // even taking everything at this depth undershoots
            }
            let here = a / pow_q(p, s);
            let k = s - s_prev;
            let mut kpow = Q::one();
            for _ in 0..idx.alpha[level] {
                kpow *= qi(k);
            }
            let lam = idx.lambda[level].pow(s).expect("lambda nonzero");
            let step = acc.mul(&lam).mul(&Scalar::from_q(kpow));
            let new_rem = rem - &here;
            go(idx, p, tail, level + 1, s, &new_rem, &step, out);
            s += 1;
        }
    }
    let mut out = Scalar::zero();
    go(idx, p, &tail, 0, 0, target, &Scalar::one(), &mut out);
    out
}

/// Exponents of `xi_idx` reachable with per-level steps `<= depth`,
/// restricted to the window.
fn probe_exponents(idx: &XiIndex, p: u32, w: &Window) -> BTreeSet<Q> {
    let mut out = BTreeSet::new();
    if idx.is_empty() {
        return out;
    }
    fn go(
        idx: &XiIndex,
        p: u32,
        w: &Window,
        level: usize,
        s_prev: i64,
        sum: Q,
        out: &mut BTreeSet<Q>,
    ) {
        if level == idx.len() {
            let e = -sum;
            if w.contains(&e) {
                out.insert(e);
            }
            return;
        }
        for k in 1..=w.depth as i64 {
            let s = s_prev + k;
            let term = &idx.a[level] / pow_q(p, s);
            let new_sum = &sum + &term;
            if -new_sum.clone() < w.lo {
                // below the window; a larger step shrinks the term and may
                // bring the exponent back inside, so keep scanning
                continue;
            }
            go(idx, p, w, level + 1, s, new_sum, out);
        }
    }
    go(idx, p, w, 0, 0, Q::zero(), &mut out);
    out
}

impl XiExpr {
    /// Exact coefficient of `z^gamma`: total over all terms, or
    /// `PrecisionLoss` when a truncated Puiseux coefficient could still
    /// contribute at `gamma`.
    pub fn coefficient_at(&self, p: u32, gamma: &Q) -> Result<Scalar> {
        let mut acc = Scalar::zero();
        for (idx, f) in self.terms() {
            // xi exponents live in [-sum a, 0]; a Puiseux exponent e
            // contributes when gamma - e is in that range
            let needed = gamma + idx.a_sum();
            if let Prec::At(n) = f.prec() {
                if n <= &needed {
                    return Err(CoreError::PrecisionLoss(alloc::format!(
                        "coefficient at {gamma} needs Puiseux terms up to {needed}"
                    )));
                }
            }
            for (e, c) in f.terms() {
                if e > &needed {
                    break;
                }
                let sub = gamma - e;
                if sub.is_positive() {
                    continue;
                }
                let x = xi_coefficient_neg(idx, p, &-sub);
                if !x.is_zero() {
                    acc = acc.add(&c.mul(&x));
                }
            }
        }
        Ok(acc)
    }

    /// Probe exponents of all xi parts plus the window-visible Puiseux
    /// exponents.
    pub fn probe_set(&self, p: u32, w: &Window) -> BTreeSet<Q> {
        let mut set = BTreeSet::new();
        for (idx, f) in self.terms() {
            let base = probe_exponents(idx, p, w);
            if idx.is_empty() {
                for (e, _) in f.terms() {
                    if w.contains(e) {
                        set.insert(e.clone());
                    }
                }
            } else {
                for (e, _) in f.terms() {
                    for b in &base {
                        let shifted = b + e;
                        if w.contains(&shifted) {
                            set.insert(shifted);
                        }
                    }
                    if w.contains(e) {
                        set.insert(e.clone());
                    }
                }
            }
        }
        set
    }

    /// Expansion on the window: exact coefficients at every probe exponent.
    pub fn expand_window(&self, p: u32, w: &Window) -> Result<TruncatedHahn> {
        let probes = self.probe_set(p, w);
        let mut terms = Vec::new();
        for e in probes {
            let c = self.coefficient_at(p, &e)?;
            if !c.is_zero() {
                terms.push((e, c));
            }
        }
        Ok(TruncatedHahn { terms, window: w.clone() })
    }

    /// Equality oracle: expands both sides at the union of the probe sets and
    /// compares exactly.
    pub fn windows_agree(&self, other: &XiExpr, p: u32, w: &Window) -> Result<bool> {
        let mut probes = self.probe_set(p, w);
        probes.extend(other.probe_set(p, w));
        for e in probes {
            if self.coefficient_at(p, &e)? != other.coefficient_at(p, &e)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Expansion of a single index on a window.
pub fn xi_expand(idx: &XiIndex, p: u32, w: &Window) -> TruncatedHahn {
    XiExpr::from_index(idx.clone())
        .expand_window(p, w)
        .expect("bare xi expansion is exact")
}
