//! Dunford (Jordan-Chevalley) decompositions and exact eigenstructure.
//!
//! The additive decomposition `M = D + N` is found by Newton iteration on the
//! squarefree part of the characteristic polynomial, entirely over the base
//! field (no root extraction). The multiplicative form `M = U D` follows with
//! `U = I + N D^{-1}`. Eigenstructure is exact: the characteristic polynomial
//! is factored over Q and the eigenvalues either stay rational or live in a
//! single simple extension; anything requiring two distinct extensions is
//! rejected with `UnsupportedSplitting`.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{Signed, Zero};

use crate::error::{CoreError, Result};
use crate::matrix::Matrix;
use crate::poly::{degree, factor_rational_poly, squarefree_part};
use crate::scalar::{trim, NumberField, Q, Scalar};

/// Additive decomposition `M = D + N`: `D` semisimple, `N` nilpotent,
/// `D N = N D`, all exact. Both parts are polynomials in `M`.
pub fn dunford_additive(m: &Matrix<Scalar>) -> Result<(Matrix<Scalar>, Matrix<Scalar>)> {
    assert!(m.is_square());
    let n = m.rows;
    let cp = m.charpoly();
    // squarefree part over Q when possible, otherwise over the extension
    let rational: Option<Vec<Q>> = cp
        .iter()
        .map(|c| c.as_rational().cloned())
        .collect();
    let (g, gd) = match rational {
        Some(qs) => {
            let g = squarefree_part(&qs);
            let gd = crate::poly::derivative(&g);
            (
                g.into_iter().map(Scalar::from_q).collect::<Vec<_>>(),
                gd.into_iter().map(Scalar::from_q).collect::<Vec<_>>(),
            )
        }
        None => {
            let g = scalar_squarefree_part(&cp)?;
            let gd = scalar_derivative(&g);
            (g, gd)
        }
    };
    let mut d = m.clone();
    for _ in 0..=n {
        let gd_val = d.apply_poly(&g);
        if gd_val.is_zero() {
            break;
        }
        let gp_val = d.apply_poly(&gd);
        let corr = gp_val.inverse().map_err(|_| {
            CoreError::InvalidArgument(String::from("Jordan-Chevalley correction not invertible"))
        })?;
        d = d.sub(&corr.mul(&gd_val));
    }
    if !d.apply_poly(&g).is_zero() {
        return Err(CoreError::InvalidArgument(String::from(
            "Jordan-Chevalley iteration did not converge",
        )));
    }
    let nmat = m.sub(&d);
    Ok((d, nmat))
}

/// Multiplicative decomposition `M = U D` with `U` unipotent, `D` semisimple,
/// `U D = D U`. Rejects singular `M`.
pub fn dunford_multiplicative(m: &Matrix<Scalar>) -> Result<(Matrix<Scalar>, Matrix<Scalar>)> {
    if m.det().is_zero() {
        return Err(CoreError::InvalidArgument(String::from(
            "multiplicative Dunford needs an invertible matrix",
        )));
    }
    let (d, n) = dunford_additive(m)?;
    let dinv = d.inverse().map_err(|_| {
        CoreError::InvalidArgument(String::from(
            "semisimple part singular although the matrix is invertible",
        ))
    })?;
    let u = Matrix::<Scalar>::identity(m.rows).add(&n.mul(&dinv));
    Ok((u, d))
}

fn scalar_derivative(p: &[Scalar]) -> Vec<Scalar> {
    if p.len() <= 1 {
        return vec![Scalar::zero()];
    }
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c.mul(&Scalar::from_i64(i as i64)))
        .collect()
}

fn scalar_poly_divmod(a: &[Scalar], b: &[Scalar]) -> Result<(Vec<Scalar>, Vec<Scalar>)> {
    let mut rem: Vec<Scalar> = a.to_vec();
    let db = b.len() - 1;
    let lead_inv = b[db].inv()?;
    let mut quo = vec![Scalar::zero(); a.len().saturating_sub(db)];
    loop {
        while rem.len() > 1 && rem.last().unwrap().is_zero() {
            rem.pop();
        }
        if rem.len() - 1 < db || rem.iter().all(Scalar::is_zero) {
            break;
        }
        let dr = rem.len() - 1;
        let c = rem[dr].mul(&lead_inv);
        quo[dr - db] = c.clone();
        for i in 0..=db {
            let t = c.mul(&b[i]);
            rem[dr - db + i] = rem[dr - db + i].sub(&t);
        }
        rem.pop();
    }
    Ok((quo, rem))
}

fn scalar_gcd(a: &[Scalar], b: &[Scalar]) -> Result<Vec<Scalar>> {
    let mut r0: Vec<Scalar> = a.to_vec();
    let mut r1: Vec<Scalar> = b.to_vec();
    let nonzero = |p: &[Scalar]| p.iter().any(|c| !c.is_zero());
    while nonzero(&r1) {
        let (_, rem) = scalar_poly_divmod(&r0, &r1)?;
        r0 = r1;
        r1 = rem;
        while r1.len() > 1 && r1.last().unwrap().is_zero() {
            r1.pop();
        }
    }
    // monic
    let lead = r0.iter().rposition(|c| !c.is_zero()).unwrap_or(0);
    r0.truncate(lead + 1);
    let inv = r0[lead].inv()?;
    Ok(r0.iter().map(|c| c.mul(&inv)).collect())
}

fn scalar_squarefree_part(p: &[Scalar]) -> Result<Vec<Scalar>> {
    let g = scalar_gcd(p, &scalar_derivative(p))?;
    if g.len() == 1 {
        return Ok(p.to_vec());
    }
    let (quo, _) = scalar_poly_divmod(p, &g)?;
    Ok(quo)
}

/// Exact eigenstructure of an invertible matrix over Q.
pub struct EigenStructure {
    /// Eigenvalues with algebraic multiplicity, deterministic order.
    pub spectrum: Vec<(Scalar, usize)>,
    /// Change of basis `P` with `M = P T P^{-1}`, `T` upper triangular with
    /// the eigenvalues on the diagonal in `diag` order.
    pub basis: Matrix<Scalar>,
    pub basis_inv: Matrix<Scalar>,
    /// Diagonal of the triangular form (spectrum with repetition).
    pub diag: Vec<Scalar>,
    /// The extension field used, if any.
    pub field: Option<Arc<NumberField>>,
}

/// Splits the characteristic polynomial and returns the exact eigenstructure.
///
/// Supported spectra: all eigenvalues rational, or rationals plus the roots of
/// one irreducible factor that splits completely in its own field (always true
/// for quadratics). Everything else raises `UnsupportedSplitting`.
pub fn eigen_structure(m: &Matrix<Scalar>) -> Result<EigenStructure> {
    assert!(m.is_square());
    let cp = m.charpoly();
    let rational: Option<Vec<Q>> = cp.iter().map(|c| c.as_rational().cloned()).collect();
    let Some(cp_q) = rational else {
        return Err(CoreError::UnsupportedSplitting(String::from(
            "matrix entries already in an extension; nested extensions unsupported",
        )));
    };
    let (_, factors) = factor_rational_poly(&cp_q)?;
    let mut field: Option<Arc<NumberField>> = None;
    let mut eig: Vec<(Scalar, usize)> = Vec::new();
    for (f, mult) in &factors {
        match degree(f) {
            1 => {
                let r = -(&f[0] / &f[1]);
                eig.push((Scalar::from_q(r), *mult));
            }
            d => {
                if field.is_some() {
                    return Err(CoreError::UnsupportedSplitting(format!(
                        "two irrational factors; a single extension cannot hold both (degree {d})"
                    )));
                }
                let nf = NumberField::new(f.clone());
                // all roots of f inside Q[x]/(f)
                let roots = roots_in_own_field(f, &nf)?;
                for r in roots {
                    eig.push((r, *mult));
                }
                field = Some(nf);
            }
        }
    }
    eig.sort_by(|a, b| a.0.cmp(&b.0));
    let n = m.rows;
    let mut diag: Vec<Scalar> = Vec::with_capacity(n);
    for (v, k) in &eig {
        for _ in 0..*k {
            diag.push(v.clone());
        }
    }
    let basis = triangularizing_basis(m, &diag)?;
    let basis_inv = basis.inverse()?;
    Ok(EigenStructure { spectrum: eig, basis, basis_inv, diag, field })
}

/// All roots of the irreducible `f` inside `Q[x]/(f)`, or an error if it does
/// not split there (then a bigger field would be needed).
fn roots_in_own_field(f: &[Q], nf: &Arc<NumberField>) -> Result<Vec<Scalar>> {
    let d = degree(f);
    let gen = Scalar::generator(nf);
    let mut roots = vec![gen.clone()];
    // deflate f by (x - gen) repeatedly, collecting rational-or-field roots
    let coeffs: Vec<Scalar> = f.iter().map(|c| Scalar::from_q(c.clone())).collect();
    let mut cur = coeffs;
    let mut root = gen;
    loop {
        // synthetic division by (x - root)
        let mut quo: Vec<Scalar> = vec![Scalar::zero(); cur.len() - 1];
        let mut carry = Scalar::zero();
        for i in (0..cur.len()).rev() {
            let v = cur[i].add(&carry);
            if i == 0 {
                debug_assert!(v.is_zero(), "claimed root fails synthetic division");
                break;
            }
            quo[i - 1] = v.clone();
            carry = v.mul(&root);
        }
        cur = quo;
        if cur.len() <= 1 {
            break;
        }
        if cur.len() == 2 {
            // linear: root = -c0/c1
            let r = cur[0].div(&cur[1])?.neg();
            roots.push(r);
            break;
        }
        // look for a root of cur among field elements: try the quadratic case
        if cur.len() == 3 {
            // x^2 + bx + c over the field: discriminant must be a square in it
            let b = cur[1].div(&cur[2])?;
            let c = cur[0].div(&cur[2])?;
            let disc = b.mul(&b).sub(&c.mul(&Scalar::from_i64(4)));
            if let Some(s) = field_sqrt(&disc, nf)? {
                let half = Scalar::from_q(Q::new(1.into(), 2.into()));
                let r1 = b.neg().add(&s).mul(&half);
                let r2 = b.neg().sub(&s).mul(&half);
                roots.push(r1.clone());
                root = r1;
                // one more deflation to pick up r2 via the linear branch
                let _ = r2;
                continue;
            }
            return Err(CoreError::UnsupportedSplitting(format!(
                "irreducible factor of degree {d} does not split in its own field"
            )));
        }
        // higher degree: find a linear factor by brute scan over basis
        // elements is hopeless; refuse honestly.
        return Err(CoreError::UnsupportedSplitting(format!(
            "irreducible factor of degree {d} does not visibly split in its own field"
        )));
    }
    Ok(roots)
}

/// Square root inside a quadratic field, if one exists. Solves `y^2 = x` by
/// undetermined coefficients over Q; returns `None` for higher-degree fields.
fn field_sqrt(x: &Scalar, nf: &Arc<NumberField>) -> Result<Option<Scalar>> {
    if nf.degree() != 2 {
        return Ok(None);
    }
    // y = a + b t, with t^2 = alpha t + beta from the minimal polynomial
    let mp = nf.min_poly();
    let alpha = -mp[1].clone();
    let beta = -mp[0].clone();
    let xc = x.coords(nf);
    let four = Q::from_integer(4.into());
    let two = Q::from_integer(2.into());
    if xc[1].is_zero() {
        if let Some(a) = crate::poly::rational_sqrt(&xc[0]) {
            return Ok(Some(Scalar::from_q(a)));
        }
    }
    // (a + bt)^2 = (a^2 + b^2 beta) + (2ab + b^2 alpha) t; with u = b^2 != 0,
    // eliminating a gives u^2 (alpha^2 + 4 beta) - u (2 x1 alpha + 4 x0) + x1^2 = 0.
    let a2 = &alpha * &alpha + &four * &beta;
    let a1 = -(&two * &xc[1] * &alpha + &four * &xc[0]);
    let a0 = &xc[1] * &xc[1];
    for u in crate::poly::rational_roots(&trim(vec![a0, a1, a2])) {
        if u.is_zero() || u.is_negative() {
            continue;
        }
        let Some(b) = crate::poly::rational_sqrt(&u) else { continue };
        for bb in [b.clone(), -b] {
            if bb.is_zero() {
                continue;
            }
            let a = (&xc[1] - &u * &alpha) / (&two * &bb);
            let cand = Scalar::in_field(nf, vec![a, bb.clone()]);
            if cand.mul(&cand) == *x {
                return Ok(Some(cand));
            }
        }
    }
    Ok(None)
}

/// Builds `P` with `P^{-1} M P` upper triangular and the prescribed diagonal
/// order. For semisimple `M` the eigenspaces fill the space and `P`
/// diagonalizes (the constant-solution construction relies on this);
/// defective matrices fall back to deflation.
fn triangularizing_basis(m: &Matrix<Scalar>, diag: &[Scalar]) -> Result<Matrix<Scalar>> {
    let n = m.rows;
    // eigenspace-first: kernel bases of (M - lambda) in diagonal order
    let mut cols: Vec<Vec<Scalar>> = Vec::with_capacity(n);
    let mut seen: Vec<Scalar> = Vec::new();
    let mut complete = true;
    for lam in diag {
        if seen.contains(lam) {
            continue;
        }
        seen.push(lam.clone());
        let mult = diag.iter().filter(|x| *x == lam).count();
        let mut shifted = m.clone();
        for i in 0..n {
            shifted[(i, i)] = shifted[(i, i)].sub(lam);
        }
        let basis = shifted.kernel_basis();
        if basis.len() < mult {
            complete = false;
            break;
        }
        cols.extend(basis.into_iter().take(mult));
    }
    if complete && cols.len() == n {
        let mut p = Matrix::<Scalar>::zero(n, n);
        for (j, v) in cols.iter().enumerate() {
            for i in 0..n {
                p[(i, j)] = v[i].clone();
            }
        }
        if p.inverse().is_ok() {
            return Ok(p);
        }
    }
    deflation_basis(m, diag)
}

fn deflation_basis(m: &Matrix<Scalar>, diag: &[Scalar]) -> Result<Matrix<Scalar>> {
    let n = m.rows;
    let mut p = Matrix::<Scalar>::identity(n);
    let mut cur = m.clone();
    for k in 0..n {
        let lam = &diag[k];
        let size = n - k;
        let block = cur.block(k, k, size, size);
        let mut shifted = block.clone();
        for i in 0..size {
            shifted[(i, i)] = shifted[(i, i)].sub(lam);
        }
        let v = kernel_vector(&shifted).ok_or_else(|| {
            CoreError::UnsupportedSplitting(String::from(
                "diagonal value is not an eigenvalue of the deflated block",
            ))
        })?;
        // T acts on coordinates k..n: e_k -> v, e_{k+piv} -> e_k, rest fixed.
        let piv = v.iter().position(|x| !x.is_zero()).unwrap();
        let mut t = Matrix::<Scalar>::identity(n);
        if piv != 0 {
            t[(k + piv, k + piv)] = Scalar::zero();
            t[(k, k + piv)] = Scalar::one();
        }
        for i in 0..size {
            t[(k + i, k)] = v[i].clone();
        }
        let tinv = t.inverse()?;
        cur = tinv.mul(&cur).mul(&t);
        p = p.mul(&t);
    }
    Ok(p)
}

/// A nonzero kernel vector, if the matrix is singular.
fn kernel_vector(m: &Matrix<Scalar>) -> Option<Vec<Scalar>> {
    let n = m.rows;
    let c = m.cols;
    let mut a = m.clone();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut row = 0usize;
    for col in 0..c {
        let Some(p) = (row..n).find(|&r| !a[(r, col)].is_zero()) else { continue };
        for j in 0..c {
            let t = a[(p, j)].clone();
            a[(p, j)] = a[(row, j)].clone();
            a[(row, j)] = t;
        }
        let d = a[(row, col)].inv().ok()?;
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
    }
    let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
    let free = (0..c).find(|j| !pivot_cols.contains(j))?;
    let mut v = vec![Scalar::zero(); c];
    v[free] = Scalar::one();
    for &(r, pc) in &pivots {
        v[pc] = a[(r, free)].neg();
    }
    Some(v)
}
