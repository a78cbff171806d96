//! The two built-in regression equations over p = 2.
//!
//! Both come with known exact data: slopes, exponents, and solution
//! coefficients used throughout the test suites and by the `verify-paper`
//! command.

use alloc::vec;

use crate::operators::MahlerOperator;
use crate::series::series;

/// `y(z) + (z-1) y(z^2) - 2z y(z^4) = 0` (p = 2).
///
/// Annihilates the Rudin-Shapiro generating series; exponents 1 and -1/2.
pub fn rs_operator() -> MahlerOperator {
    MahlerOperator::new(
        2,
        vec![
            series(&[(1, 1, 0, 1)]),
            series(&[(1, 1, 1, 1), (-1, 1, 0, 1)]),
            series(&[(-2, 1, 1, 1)]),
        ],
    )
}

/// `(1-2z) y(z) + (-1+2z-z^2+3z^3-3z^4) y(z^2) + (z^2-3z^3+3z^4) y(z^4) = 0`
/// (p = 2).
///
/// Annihilates both the constant 1 and a Laurent series starting
/// `-z^{-1} + 3z + 6z^2 + ...`; it is not minimal for the constant solution.
pub fn non_minimal_operator() -> MahlerOperator {
    MahlerOperator::new(
        2,
        vec![
            series(&[(1, 1, 0, 1), (-2, 1, 1, 1)]),
            series(&[(-1, 1, 0, 1), (2, 1, 1, 1), (-1, 1, 2, 1), (3, 1, 3, 1), (-3, 1, 4, 1)]),
            series(&[(1, 1, 2, 1), (-3, 1, 3, 1), (3, 1, 4, 1)]),
        ],
    )
}

/// First terms of the Rudin-Shapiro sequence: `a_n = (-1)^{count of "11" in binary n}`.
pub fn rudin_shapiro_coefficients(n: usize) -> alloc::vec::Vec<i64> {
    (0..n)
        .map(|i| {
            let mut x = i;
            let mut pairs = 0u32;
            while x > 0 {
                if x & 3 == 3 {
                    pairs += 1;
                }
                x >>= 1;
            }
            if pairs % 2 == 0 {
                1
            } else {
                -1
            }
        })
        .collect()
}

/// Rudin-Shapiro generating series truncated after `n` coefficients.
pub fn rudin_shapiro_series(n: usize) -> crate::series::TruncatedPuiseux {
    let coeffs = rudin_shapiro_coefficients(n);
    crate::series::TruncatedPuiseux::from_coeffs(&coeffs)
        .truncate(&crate::scalar::qi(n as i64))
}
