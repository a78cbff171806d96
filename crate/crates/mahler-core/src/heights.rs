//! Logarithmic Weil heights and root-of-unity detection.
//!
//! For a rational `a/b` in lowest terms the height is `log max(|a|, |b|)`,
//! exact up to f64 rounding of the logarithm. For an algebraic number with
//! primitive integer minimal polynomial `P = a_d x^d + ...` the height is
//! computed from the Mahler measure,
//!
//! ```text
//!   h(x) = (1/d) * log( |a_d| * prod_i max(1, |x_i|) )
//! ```
//!
//! with every conjugate modulus `|x_i|` bracketed by exact disk-counting, so
//! the result is certified to within 1e-9.

use alloc::string::String;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::error::{CoreError, Result};
use crate::poly::{certified_root_moduli, cyclotomic_order, degree, primitive_integer};
use crate::scalar::{ln_abs_q, ln_biguint, q, Q, Scalar};

/// Logarithmic Weil height of a rational number. `h(0) = 0` by convention.
pub fn weil_height_q(x: &Q) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let (_, n) = x.numer().clone().into_parts();
    let (_, d) = x.denom().clone().into_parts();
    let m = if n >= d { n } else { d };
    if m.is_one() {
        0.0
    } else {
        ln_biguint(&m)
    }
}

/// Logarithmic Weil height of any supported scalar. Exact for rationals,
/// certified to within 1e-9 otherwise.
pub fn weil_height(x: &Scalar) -> Result<f64> {
    match x {
        Scalar::Rat(r) => Ok(weil_height_q(r)),
        Scalar::Ext(..) => {
            let m = x.minimal_polynomial();
            weil_height_minpoly(&m)
        }
    }
}

/// Height from a monic rational minimal polynomial of the element.
pub fn weil_height_minpoly(min_poly: &[Q]) -> Result<f64> {
    let d = degree(min_poly);
    if d == 0 {
        return Err(CoreError::InvalidArgument(String::from("constant minimal polynomial")));
    }
    if d == 1 {
        // root is rational: -c0/c1
        let r = -(&min_poly[0] / &min_poly[1]);
        return Ok(weil_height_q(&r));
    }
    let ints = primitive_integer(min_poly);
    let lead = ints.last().unwrap().magnitude().clone();
    let qpoly: Vec<Q> = ints.iter().map(|c| Q::from_integer(c.clone())).collect();
    // relative bracket width 1e-12 keeps the final log error well under 1e-9
    let tol = q(1, 1_000_000_000_000);
    let brackets = certified_root_moduli(&qpoly, &tol)?;
    let mut acc = if lead.is_one() { 0.0 } else { ln_biguint(&lead) };
    for (lo, hi, mult) in &brackets {
        if hi <= &Q::one() {
            continue;
        }
        if lo >= &Q::one() {
            // log of the midpoint; bracket is relatively tight
            let mid = (lo + hi) / crate::scalar::qi(2);
            acc += (*mult as f64) * ln_abs_q(&mid);
        }
        // bracket straddling 1: contributes at most log(hi) < tol, ignore
    }
    Ok(acc / d as f64)
}

/// If `x` is a primitive n-th root of unity, returns `n`.
///
/// Decides by matching the minimal polynomial against cyclotomic polynomials
/// of every order with the right Euler-phi value. Rejects `x = 0`.
pub fn is_root_of_unity(x: &Scalar) -> Result<Option<u64>> {
    if x.is_zero() {
        return Err(CoreError::InvalidArgument(String::from("x must be nonzero")));
    }
    if let Some(r) = x.as_rational() {
        if r.is_one() {
            return Ok(Some(1));
        }
        if (-r).is_one() {
            return Ok(Some(2));
        }
        return Ok(None);
    }
    let m = x.minimal_polynomial();
    Ok(cyclotomic_order(&m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{qi, NumberField};
    use alloc::vec;

    #[test]
    fn rational_heights() {
        assert!((weil_height_q(&q(5, 3)) - libm::log(5.0)).abs() < 1e-12);
        assert_eq!(weil_height_q(&Q::one()), 0.0);
        assert_eq!(weil_height_q(&Q::zero()), 0.0);
        assert!((weil_height_q(&q(-7, 2)) - libm::log(7.0)).abs() < 1e-12);
    }

    #[test]
    fn sqrt2_height() {
        // independent oracle: bisect x^2 - 2 numerically, apply the measure
        // formula h = (1/2) log(max(1, r1) * max(1, r2)) with r = sqrt(2)
        let mut lo = 1.0f64;
        let mut hi = 2.0f64;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if mid * mid < 2.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = 0.5 * libm::log(lo.max(1.0) * lo.max(1.0));
        let f = NumberField::new(vec![qi(-2), qi(0), qi(1)]);
        let s = Scalar::generator(&f);
        let h = weil_height(&s).unwrap();
        assert!((h - oracle).abs() < 1e-9, "h = {h}, oracle = {oracle}");
        assert!((h - 0.5 * libm::log(2.0)).abs() < 1e-9);
    }

    #[test]
    fn golden_ratio_height() {
        // x^2 - x - 1: conjugates phi and -1/phi, measure = phi
        let f = NumberField::new(vec![qi(-1), qi(-1), qi(1)]);
        let s = Scalar::generator(&f);
        let h = weil_height(&s).unwrap();
        let phi = 0.5 * (1.0 + libm::sqrt(5.0));
        assert!((h - 0.5 * libm::log(phi)).abs() < 1e-9);
    }

    #[test]
    fn roots_of_unity() {
        assert_eq!(is_root_of_unity(&Scalar::from_i64(-1)).unwrap(), Some(2));
        assert_eq!(is_root_of_unity(&Scalar::from_i64(1)).unwrap(), Some(1));
        assert_eq!(is_root_of_unity(&Scalar::from_q(q(1, 2))).unwrap(), None);
        assert!(is_root_of_unity(&Scalar::zero()).is_err());
        // x^2 - x + 1 = Phi_6: first-principles oracle is in poly::tests
        let f = NumberField::new(vec![qi(1), qi(-1), qi(1)]);
        let s = Scalar::generator(&f);
        assert_eq!(is_root_of_unity(&s).unwrap(), Some(6));
        // x^2 + 1 = Phi_4
        let f = NumberField::new(vec![qi(1), qi(0), qi(1)]);
        let s = Scalar::generator(&f);
        assert_eq!(is_root_of_unity(&s).unwrap(), Some(4));
        // sqrt(2) is not a root of unity
        let f = NumberField::new(vec![qi(-2), qi(0), qi(1)]);
        let s = Scalar::generator(&f);
        assert_eq!(is_root_of_unity(&s).unwrap(), None);
    }

    #[test]
    fn height_subadditivity_smoke() {
        let xs = [q(5, 3), q(-7, 11), q(2, 9), qi(4), q(22, 7)];
        for a in &xs {
            for b in &xs {
                let hab = weil_height_q(&(a * b));
                let hs = weil_height_q(&(a + b));
                let ha = weil_height_q(a);
                let hb = weil_height_q(b);
                assert!(hab <= ha + hb + 1e-9);
                assert!(hs <= ha + hb + libm::log(2.0) + 1e-9);
            }
        }
    }
}
