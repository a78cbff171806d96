//! Dense matrices over the exact rings used in the pipeline.
//!
//! A minimal ring trait keeps the matrix code shared between scalars,
//! truncated series and xi expressions; inverses are provided where the
//! entries form a field (scalars) or where unipotent structure makes the
//! Neumann series finite.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::scalar::{Q, Scalar};

/// Ring operations needed by the shared matrix code.
pub trait RingOps: Clone {
    fn ring_zero() -> Self;
    fn ring_one() -> Self;
    fn ring_add(&self, other: &Self) -> Self;
    fn ring_neg(&self) -> Self;
    fn ring_mul(&self, other: &Self) -> Self;
    fn ring_is_zero(&self) -> bool;
}

impl RingOps for Scalar {
    fn ring_zero() -> Self {
        Scalar::zero()
    }
    fn ring_one() -> Self {
        Scalar::one()
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

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix<T> {
    pub rows: usize,
    pub cols: usize,
    data: Vec<T>,
}

impl<T: RingOps> Matrix<T> {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::ring_zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m[(i, i)] = T::ring_one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c));
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].clone();
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.ring_add(b)).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(RingOps::ring_neg).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix dimension mismatch");
        let mut out = Self::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self[(i, k)].ring_is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    if other[(k, j)].ring_is_zero() {
                        continue;
                    }
                    let t = self[(i, k)].ring_mul(&other[(k, j)]);
                    out[(i, j)] = out[(i, j)].ring_add(&t);
                }
            }
        }
        out
    }

    pub fn scale(&self, s: &T) -> Self {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x.ring_mul(s)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(RingOps::ring_is_zero)
    }

    pub fn map<U: RingOps>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn entries(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        let mut out = Self::zero(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                out[(i, j)] = self[(r0 + i, c0 + j)].clone();
            }
        }
        out
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Self) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b[(i, j)].clone();
            }
        }
    }

    pub fn pow(&self, e: usize) -> Self {
        assert!(self.is_square());
        let mut acc = Self::identity(self.rows);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }
}

impl<T> core::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> core::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl Matrix<Scalar> {
    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        Matrix::from_rows(
            rows.iter().map(|r| r.iter().map(|&x| Scalar::from_i64(x)).collect()).collect(),
        )
    }

    /// Gauss-Jordan inverse over the scalar field.
    pub fn inverse(&self) -> Result<Matrix<Scalar>> {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Matrix::<Scalar>::identity(n);
        for col in 0..n {
            let piv = (col..n)
                .find(|&r| !a[(r, col)].is_zero())
                .ok_or(CoreError::InvalidArgument(String::from("singular matrix")))?;
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
            let d = a[(col, col)].inv()?;
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
        Ok(inv)
    }

    pub fn det(&self) -> Scalar {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Scalar::one();
        for col in 0..n {
            let Some(piv) = (col..n).find(|&r| !a[(r, col)].is_zero()) else {
                return Scalar::zero();
            };
            if piv != col {
                for j in 0..n {
                    let t = a[(piv, j)].clone();
                    a[(piv, j)] = a[(col, j)].clone();
                    a[(col, j)] = t;
                }
                det = det.neg();
            }
            det = det.mul(&a[(col, col)]);
            let d = a[(col, col)].inv().expect("pivot nonzero");
            for r in (col + 1)..n {
                if !a[(r, col)].is_zero() {
                    let f = a[(r, col)].mul(&d);
                    for j in col..n {
                        let t = f.mul(&a[(col, j)]);
                        a[(r, j)] = a[(r, j)].sub(&t);
                    }
                }
            }
        }
        det
    }

    /// Characteristic polynomial `det(xI - M)`, monic ascending, by the
    /// Faddeev-LeVerrier recurrence (valid in characteristic zero).
    pub fn charpoly(&self) -> Vec<Scalar> {
        assert!(self.is_square());
        let n = self.rows;
        let mut coeffs = vec![Scalar::zero(); n + 1];
        coeffs[n] = Scalar::one();
        let mut m = Matrix::<Scalar>::zero(n, n);
        let mut c = Scalar::one();
        for k in 1..=n {
            // M_k = A (M_{k-1} + c_{k-1} I)
            let mut shifted = m.clone();
            for i in 0..n {
                shifted[(i, i)] = shifted[(i, i)].add(&c);
            }
            m = self.mul(&shifted);
            let mut tr = Scalar::zero();
            for i in 0..n {
                tr = tr.add(&m[(i, i)]);
            }
            c = tr.mul(&Scalar::from_q(-Q::new(1.into(), (k as i64).into())));
            coeffs[n - k] = c.clone();
        }
        coeffs
    }

    /// Apply a polynomial to the matrix.
    pub fn apply_poly(&self, p: &[Scalar]) -> Matrix<Scalar> {
        let n = self.rows;
        let mut acc = Matrix::<Scalar>::zero(n, n);
        for c in p.iter().rev() {
            acc = acc.mul(self);
            for i in 0..n {
                acc[(i, i)] = acc[(i, i)].add(c);
            }
        }
        acc
    }

    /// Basis of the right kernel, via reduced row echelon form.
    pub fn kernel_basis(&self) -> Vec<Vec<Scalar>> {
        let n = self.rows;
        let c = self.cols;
        let mut a = self.clone();
        let mut pivots: Vec<(usize, usize)> = Vec::new();
        let mut row = 0usize;
        for col in 0..c {
            let Some(p) = (row..n).find(|&r| !a[(r, col)].is_zero()) else { continue };
            for j in 0..c {
                let t = a[(p, j)].clone();
                a[(p, j)] = a[(row, j)].clone();
                a[(row, j)] = t;
            }
            let d = a[(row, col)].inv().expect("pivot nonzero");
            for j in 0..c {
                a[(row, j)] = a[(row, j)].mul(&d);
            }
            for r in 0..n {
                if r != row && !a[(r, col)].is_zero() {
                    let f = a[(r, col)].clone();
                    for j in 0..c {
                        let t = f.mul(&a[(row, j)]);
                        a[(r, j)] = a[(r, j)].sub(&t);
                    }
                }
            }
            pivots.push((row, col));
            row += 1;
            if row == n {
                break;
            }
        }
        let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, pc)| pc).collect();
        let mut basis = Vec::new();
        for free in (0..c).filter(|j| !pivot_cols.contains(j)) {
            let mut v = vec![Scalar::zero(); c];
            v[free] = Scalar::one();
            for &(r, pc) in &pivots {
                v[pc] = a[(r, free)].neg();
            }
            basis.push(v);
        }
        basis
    }

    /// Solves `self * x = b` for a vector `b`; `None` when inconsistent.
    pub fn solve(&self, b: &[Scalar]) -> Option<Vec<Scalar>> {
        let n = self.rows;
        let m = self.cols;
        assert_eq!(b.len(), n);
        let mut a = Matrix::<Scalar>::zero(n, m + 1);
        for i in 0..n {
            for j in 0..m {
                a[(i, j)] = self[(i, j)].clone();
            }
            a[(i, m)] = b[i].clone();
        }
        let mut pivots: Vec<(usize, usize)> = Vec::new();
        let mut row = 0usize;
        for col in 0..m {
            let Some(p) = (row..n).find(|&r| !a[(r, col)].is_zero()) else { continue };
            for j in 0..=m {
                let t = a[(p, j)].clone();
                a[(p, j)] = a[(row, j)].clone();
                a[(row, j)] = t;
            }
            let d = a[(row, col)].inv().ok()?;
            for j in 0..=m {
                a[(row, j)] = a[(row, j)].mul(&d);
            }
            for r in 0..n {
                if r != row && !a[(r, col)].is_zero() {
                    let f = a[(r, col)].clone();
                    for j in 0..=m {
                        let t = f.mul(&a[(row, j)]);
                        a[(r, j)] = a[(r, j)].sub(&t);
                    }
                }
            }
            pivots.push((row, col));
            row += 1;
            if row == n {
                break;
            }
        }
        for r in row..n {
            if !a[(r, m)].is_zero() {
                return None;
            }
        }
        let mut x = vec![Scalar::zero(); m];
        for (r, c) in pivots {
            x[c] = a[(r, m)].clone();
        }
        Some(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::qi;

    #[test]
    fn inverse_and_det() {
        let m = Matrix::from_i64_rows(&[&[2, 1], &[0, 3]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), Matrix::identity(2));
        assert_eq!(m.det(), Scalar::from_i64(6));
    }

    #[test]
    fn charpoly_companion() {
        // companion of x^2 - x - 1
        let m = Matrix::from_i64_rows(&[&[0, 1], &[1, 1]]);
        let cp = m.charpoly();
        assert_eq!(cp, vec![Scalar::from_q(qi(-1)), Scalar::from_q(qi(-1)), Scalar::from_q(qi(1))]);
    }
}
