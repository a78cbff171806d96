//! Reduction of Mahler systems to constant coefficients, fundamental
//! solution matrices, and solution bases.
//!
//! The pipeline has three gauge steps:
//!
//! 1. block-triangularize with constant diagonal blocks: cyclic vector,
//!    slope factorization, passage to solution coordinates, per-block
//!    monomial normalization and regular-singular reduction;
//! 2. clear the strictly positive part of every off-diagonal block with the
//!    geometric solver `M = sum_k C1^{-k-1} sigma^k(B) C2^k`, sweeping the
//!    blocks in the order (1,2) < (2,3) < (1,3) < (3,4) < ...;
//! 3. remove the strictly negative parts with xi-algebra Sylvester solves
//!    `F = sum_k sigma^{-k}(h) C1^{k-1} R C2^{-k}`, by increasing band.
//!
//! The result is `A = F1[Theta]`, `Theta = F2[C]` with `F1` an invertible
//! Puiseux matrix (truncated), `F2` unipotent block upper triangular with
//! exact xi entries, and `C` the constant term of `Theta`. Solution bases
//! come from the first row of `F1 F2 e_C`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::dunford::{dunford_additive, dunford_multiplicative, eigen_structure};
use crate::error::{CoreError, Result};
use crate::factorization::factor_by_slopes;
use crate::matrix::Matrix;
use crate::operators::{cyclic_vector, equation_to_companion, MahlerOperator, MahlerSystem};
use crate::scalar::{qi, Q, Scalar};
use crate::series::{Prec, TruncatedPuiseux};
use crate::xi::{
    apply_operator, standardize_series, xi_multiply, xi_sigma_inverse_sum, GeneralizedSeries,
    XiExpr, XiIndex,
};

// ---------------------------------------------------------------------------
// Truncated-series matrix helpers
// ---------------------------------------------------------------------------

pub type SeriesMatrix = Matrix<TruncatedPuiseux>;

pub fn series_matrix_sigma(m: &SeriesMatrix, p: u32) -> SeriesMatrix {
    m.map(|e| e.sigma(p))
}

pub fn series_matrix_truncate(m: &SeriesMatrix, n: &Q) -> SeriesMatrix {
    m.map(|e| e.truncate(n))
}

/// Gauss-Jordan inverse with divisions truncated at `target`.
pub fn invert_series_matrix(m: &SeriesMatrix, target: &Q) -> Result<SeriesMatrix> {
    assert!(m.is_square());
    let n = m.rows;
    let mut a = m.clone();
    let mut inv = SeriesMatrix::identity(n);
    for col in 0..n {
        // pivot: entry of minimal valuation in the column
        let mut piv: Option<(usize, Q)> = None;
        for r in col..n {
            if let Ok(v) = a[(r, col)].valuation() {
                if piv.as_ref().map_or(true, |(_, pv)| &v < pv) {
                    piv = Some((r, v));
                }
            }
        }
        let Some((piv, _)) = piv else { return Err(CoreError::SingularGauge) };
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
        let d = a[(col, col)].invert_to(target)?;
        for j in 0..n {
            a[(col, j)] = a[(col, j)].mul(&d).truncate(target);
            inv[(col, j)] = inv[(col, j)].mul(&d).truncate(target);
        }
        for r in 0..n {
            if r != col && !a[(r, col)].is_zero_up_to_prec() {
                let f = a[(r, col)].clone();
                for j in 0..n {
                    let t = f.mul(&a[(col, j)]);
                    a[(r, j)] = a[(r, j)].sub(&t).truncate(target);
                    let t = f.mul(&inv[(col, j)]);
                    inv[(r, j)] = inv[(r, j)].sub(&t).truncate(target);
                }
            }
        }
    }
    Ok(inv)
}

/// `R[A] = sigma(R) A R^{-1}` on truncated matrices.
pub fn gauge_apply_series(r: &SeriesMatrix, a: &SeriesMatrix, p: u32, target: &Q) -> Result<SeriesMatrix> {
    let rinv = invert_series_matrix(r, target)?;
    Ok(series_matrix_truncate(&series_matrix_sigma(r, p).mul(a).mul(&rinv), target))
}

fn scalar_matrix_to_series(m: &Matrix<Scalar>) -> SeriesMatrix {
    m.map(|s| TruncatedPuiseux::constant(s.clone()))
}

// ---------------------------------------------------------------------------
// Regular singular reduction
// ---------------------------------------------------------------------------

/// For `A` with nonnegative valuations and invertible constant term, builds
/// `G = I + O(z)` with `G[A] = A(0)` up to `O(z^N)` by the triangular
/// recurrence `A(0) G_g = G_{g/p} A(0) + sum_{p g' + g'' = g, g'' > 0} G_{g'} A_{g''}`.
pub fn reduce_regular_singular(a: &SeriesMatrix, p: u32, n: &Q) -> Result<SeriesMatrix> {
    let d = a.rows;
    // shape checks
    let mut a0 = Matrix::<Scalar>::zero(d, d);
    for i in 0..d {
        for j in 0..d {
            if let Some(v) = a[(i, j)].valuation_lower_bound() {
                if v.is_negative() && !a[(i, j)].is_zero_up_to_prec() {
                    if a[(i, j)].valuation()?.is_negative() {
                        return Err(CoreError::NotRegularSingularShape);
                    }
                }
            }
            a0[(i, j)] = a[(i, j)].constant_term();
        }
    }
    let a0_inv = a0.inverse().map_err(|_| CoreError::NotRegularSingularShape)?;
    // exponent lattice of A
    let mut k = BigInt::one();
    for e in a.entries() {
        for (exp, _) in e.terms() {
            k = k.lcm(exp.denom());
        }
    }
    let step = Q::new(BigInt::one(), k);
    let pq = qi(p as i64);
    // G coefficients by exponent
    let mut g: BTreeMap<Q, Matrix<Scalar>> = BTreeMap::new();
    g.insert(Q::zero(), Matrix::<Scalar>::identity(d));
    let mut gamma = step.clone();
    while &gamma < n {
        // rhs = G_{gamma/p} A(0) + sum_{p g' + g'' = gamma, g'' > 0} G_{g'} A_{g''}
        let mut rhs = Matrix::<Scalar>::zero(d, d);
        let up = &gamma / &pq;
        if let Some(gu) = g.get(&up) {
            rhs = rhs.add(&gu.mul(&a0));
        }
        for (gp, gm) in g.iter() {
            let rem = &gamma - &(gp * &pq);
            if !rem.is_positive() {
                continue;
            }
            // A_{rem}
            let mut arem = Matrix::<Scalar>::zero(d, d);
            let mut nonzero = false;
            for i in 0..d {
                for j in 0..d {
                    let c = a[(i, j)].coefficient(&rem);
                    if !c.is_zero() {
                        nonzero = true;
                    }
                    arem[(i, j)] = c;
                }
            }
            if nonzero {
                rhs = rhs.add(&gm.mul(&arem));
            }
        }
        let val = a0_inv.mul(&rhs);
        if !val.is_zero() {
            g.insert(gamma.clone(), val);
        }
        gamma += &step;
    }
    // assemble
    let mut out = SeriesMatrix::zero(d, d);
    for i in 0..d {
        for j in 0..d {
            let terms: Vec<(Q, Scalar)> = g
                .iter()
                .filter_map(|(e, m)| {
                    let c = m[(i, j)].clone();
                    if c.is_zero() {
                        None
                    } else {
                        Some((e.clone(), c))
                    }
                })
                .collect();
            out[(i, j)] = TruncatedPuiseux::from_terms(terms, Prec::At(n.clone()));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Step 1: block triangularization
// ---------------------------------------------------------------------------

pub struct BlockTriangularization {
    /// Gauge with `gauge[A] = a_prime` up to the working precision.
    pub gauge: SeriesMatrix,
    pub a_prime: SeriesMatrix,
    /// Sizes `r_1, ..., r_sigma`.
    pub blocks: Vec<usize>,
    /// The constant diagonal blocks.
    pub diag: Vec<Matrix<Scalar>>,
    pub precision: Q,
}

/// Step 1 for a system: constant diagonal blocks along the slope filtration.
pub fn block_triangularize(sys: &MahlerSystem, n: &Q) -> Result<BlockTriangularization> {
    let p = sys.p;
    let d = sys.dimension();
    let cv = cyclic_vector(sys)?;
    let op = cv.operator;
    let fac = factor_by_slopes(&op, &(n + qi(4)))?;
    let blocks: Vec<usize> = fac.blocks.iter().map(|b| b.factors.len()).collect();
    // working precision: survive companion denominators and monomial shifts
    let mut shift_slack = Q::zero();
    for b in &fac.blocks {
        let s = b.nu.clone() * qi((d as i64) + 1);
        let abs = if s.is_negative() { -s } else { s };
        if abs > shift_slack {
            shift_slack = abs;
        }
    }
    let work = n + &shift_slack + qi(4);

    // companion coordinates: V[A] = companion(op)
    let comp = equation_to_companion(&op)?;
    let comp_t = comp.expand_to(&work)?;

    // operators P_0 = 1, P_k = factor_k ... factor_1 in extraction order
    let mut prefix_ops: Vec<MahlerOperator> = vec![MahlerOperator::identity(p)];
    for b in &fac.blocks {
        for f in &b.factors {
            let fo = f.to_operator(p, &work)?;
            let prev = prefix_ops.last().unwrap();
            prefix_ops.push(fo.mul(prev));
        }
    }
    // T rows: for block i (size r_i), rows sigma^j(P_{start_i}) for j < r_i
    let mut t = SeriesMatrix::zero(d, d);
    let mut row = 0usize;
    let mut start = 0usize;
    for (bi, r) in blocks.iter().enumerate() {
        let base = &prefix_ops[start];
        for j in 0..*r {
            // coefficients of M^k in M^j * base
            let mj = {
                let mut cs = vec![TruncatedPuiseux::zero(); j + 1];
                cs[j] = TruncatedPuiseux::one();
                MahlerOperator::new(p, cs)
            };
            let shifted = mj.mul(base);
            if shifted.order() >= d {
                return Err(CoreError::InvalidArgument(format!(
                    "solution coordinates escape the companion frame (block {bi})"
                )));
            }
            for k in 0..=shifted.order() {
                t[(row, k)] = shifted.coeff(k).truncate(&work);
            }
            row += 1;
        }
        start += r;
    }
    let a_t = gauge_apply_series(&t, &comp_t, p, &work)?;

    // per-block monomial normalization diag(z^{p^j mu_i})
    let mut dmat = SeriesMatrix::zero(d, d);
    let mut row = 0usize;
    for (bi, r) in blocks.iter().enumerate() {
        let mu = &fac.blocks[bi].nu / (qi(p as i64) - Q::one());
        let mut e = mu.clone();
        for _ in 0..*r {
            dmat[(row, row)] = TruncatedPuiseux::monomial(e.clone(), Scalar::one());
            e *= qi(p as i64);
            row += 1;
        }
    }
    let a_d = gauge_apply_series(&dmat, &a_t, p, &work)?;

    // per-block regular singular reduction
    let mut gblock = SeriesMatrix::identity(d);
    let mut diag: Vec<Matrix<Scalar>> = Vec::new();
    let mut start = 0usize;
    for r in &blocks {
        let blk = a_d.block(start, start, *r, *r);
        let g = reduce_regular_singular(&blk, p, &work)?;
        gblock.set_block(start, start, &g);
        let mut c = Matrix::<Scalar>::zero(*r, *r);
        for i in 0..*r {
            for j in 0..*r {
                c[(i, j)] = blk[(i, j)].constant_term();
            }
        }
        diag.push(c);
        start += r;
    }
    let a_prime = gauge_apply_series(&gblock, &a_d, p, &work)?;

    // total gauge: Gblock * D * T * V
    let vmat = {
        let mut m = SeriesMatrix::zero(d, d);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = cv.gauge[(i, j)].expand_to(&work)?;
            }
        }
        m
    };
    let gauge = series_matrix_truncate(&gblock.mul(&dmat).mul(&t).mul(&vmat), &work);
    // shape check: strictly lower blocks vanish up to precision
    let mut start_i = 0usize;
    for (bi, ri) in blocks.iter().enumerate() {
        let mut start_j = 0usize;
        for (bj, rj) in blocks.iter().enumerate() {
            if bj < bi {
                for i in 0..*ri {
                    for j in 0..*rj {
                        if !a_prime[(start_i + i, start_j + j)].truncate(n).is_zero_up_to_prec() {
                            return Err(CoreError::InvalidArgument(String::from(
                                "block triangularization left a lower block",
                            )));
                        }
                    }
                }
            }
            start_j += rj;
        }
        start_i += ri;
    }
    Ok(BlockTriangularization { gauge, a_prime, blocks, diag, precision: work })
}

// ---------------------------------------------------------------------------
// Step 2: clear strictly positive off-diagonal parts
// ---------------------------------------------------------------------------

pub struct OffdiagClearing {
    pub gauge: SeriesMatrix,
    pub a_second: SeriesMatrix,
}

/// One solve of `C1 M - sigma(M) C2 = B` for `B` with positive valuations:
/// `M = sum_{k>=0} C1^{-k-1} sigma^k(B) C2^k`, truncated at `n`.
pub fn sylvester_positive(
    c1: &Matrix<Scalar>,
    c2: &Matrix<Scalar>,
    b: &SeriesMatrix,
    p: u32,
    n: &Q,
) -> Result<SeriesMatrix> {
    let c1_inv = c1.inverse().map_err(|_| CoreError::SingularGauge)?;
    let mut acc = SeriesMatrix::zero(b.rows, b.cols);
    let mut left = scalar_matrix_to_series(&c1_inv);
    let mut right = Matrix::<Scalar>::identity(c2.rows);
    let mut bk = b.clone();
    loop {
        // smallest exponent still proceeding
        let minval = bk
            .entries()
            .filter_map(TruncatedPuiseux::valuation_lower_bound)
            .min();
        let Some(minval) = minval else { break };
        if &minval >= n {
            break;
        }
        let term = left.mul(&bk).mul(&scalar_matrix_to_series(&right));
        acc = acc.add(&series_matrix_truncate(&term, n));
        left = left.mul(&scalar_matrix_to_series(&c1_inv));
        right = right.mul(c2);
        bk = series_matrix_sigma(&bk, p);
        if bk.entries().all(TruncatedPuiseux::is_zero_up_to_prec) {
            break;
        }
    }
    Ok(series_matrix_truncate(&acc, n))
}

/// Step 2: sweep the strictly-upper blocks in the order
/// `(1,2) < (2,3) < (1,3) < (3,4) < ...`, leaving every block with
/// exponents `<= 0` only.
pub fn clear_positive_offdiag(
    step1: &BlockTriangularization,
    p: u32,
    n: &Q,
) -> Result<OffdiagClearing> {
    let blocks = &step1.blocks;
    let sigma_n = blocks.len();
    let starts: Vec<usize> = blocks
        .iter()
        .scan(0usize, |s, r| {
            let out = *s;
            *s += r;
            Some(out)
        })
        .collect();
    let d: usize = blocks.iter().sum();
    let mut a = step1.a_prime.clone();
    let mut gauge = SeriesMatrix::identity(d);
    // sweep order: by l, then k descending
    let mut order: Vec<(usize, usize)> = Vec::new();
    for l in 1..sigma_n {
        for k in (0..l).rev() {
            order.push((k, l));
        }
    }
    for (bi, bj) in order {
        let (ri, rj) = (blocks[bi], blocks[bj]);
        let (si, sj) = (starts[bi], starts[bj]);
        let bmat = a.block(si, sj, ri, rj);
        let bpos = bmat.map(|e| e.strict_positive_part());
        if bpos.entries().all(TruncatedPuiseux::is_zero_up_to_prec) {
            continue;
        }
        // solve A_i M - sigma(M) A_j = B^{>0}
        let m = sylvester_positive(&step1.diag[bi], &step1.diag[bj], &bpos, p, n)?;
        // T_{i,j}(M)[a]: update blocks per the displayed rules
        let sm = series_matrix_sigma(&m, p);
        // (bi, bj): -A_i M + B + sigma(M) A_j
        let new_ij = a
            .block(si, sj, ri, rj)
            .add(&sm.mul(&scalar_matrix_to_series(&step1.diag[bj])))
            .sub(&scalar_matrix_to_series(&step1.diag[bi]).mul(&m));
        a.set_block(si, sj, &new_ij);
        // (bi, l) for l > bj: B_{bi,l} + sigma(M) B_{bj,l}
        for l in (bj + 1)..sigma_n {
            let upd = a
                .block(si, starts[l], ri, blocks[l])
                .add(&sm.mul(&a.block(sj, starts[l], rj, blocks[l])));
            a.set_block(si, starts[l], &upd);
        }
        // (k, bj) for k < bi: -B_{k,bi} M + B_{k,bj}
        for k in 0..bi {
            let upd = a
                .block(starts[k], sj, blocks[k], rj)
                .sub(&a.block(starts[k], si, blocks[k], ri).mul(&m));
            a.set_block(starts[k], sj, &upd);
        }
        // accumulate the gauge: T = I with M at block (bi, bj)
        let mut t = SeriesMatrix::identity(d);
        t.set_block(si, sj, &m);
        gauge = t.mul(&gauge);
    }
    a = series_matrix_truncate(&a, n);
    Ok(OffdiagClearing { gauge, a_second: a })
}

// ---------------------------------------------------------------------------
// Step 3: constantify through the xi algebra
// ---------------------------------------------------------------------------

pub struct Constantification {
    /// Unipotent block-upper-triangular gauge with exact xi entries;
    /// block (i, j) has filtration degree at most `j - i`.
    pub k: Matrix<XiExpr>,
    pub c: Matrix<Scalar>,
}

/// One exact Sylvester solve `sigma(F) C2 - C1 F = B` with `B` a matrix of
/// xi expressions supported in negative exponents.
pub fn sylvester_negative(
    c1: &Matrix<Scalar>,
    c2: &Matrix<Scalar>,
    b: &Matrix<XiExpr>,
    p: u32,
) -> Result<Matrix<XiExpr>> {
    let d1 = c1.rows;
    let d2 = c2.rows;
    // decompose C1 = D1 + N1, C2^{-1} = D2 + N2
    let (dd1, n1) = dunford_additive(c1)?;
    let c2_inv = c2.inverse().map_err(|_| CoreError::SingularGauge)?;
    let (dd2, n2) = dunford_additive(&c2_inv)?;
    let e1 = eigen_structure(&dd1)?;
    let e2 = eigen_structure(&dd2)?;
    if let (Some(f1), Some(f2)) = (&e1.field, &e2.field) {
        if f1.min_poly() != f2.min_poly() {
            return Err(CoreError::UnsupportedSplitting(String::from(
                "the two sides of the Sylvester solve need distinct extensions",
            )));
        }
    }
    // collect B = sum_h h R_h over monomials h = z^{-g} xi_w
    let mut parts: BTreeMap<(XiIndex, Q), Matrix<Scalar>> = BTreeMap::new();
    for i in 0..d1 {
        for j in 0..d2 {
            for (idx, f) in b[(i, j)].terms() {
                for (e, c) in f.terms() {
                    if e.is_positive() || (e.is_zero() && idx.is_empty()) {
                        return Err(CoreError::InvalidArgument(String::from(
                            "step-3 right-hand side must have strictly negative support",
                        )));
                    }
                    let key = (idx.clone(), -e.clone());
                    let m = parts
                        .entry(key)
                        .or_insert_with(|| Matrix::<Scalar>::zero(d1, d2));
                    m[(i, j)] = m[(i, j)].add(c);
                }
            }
        }
    }
    let mut out = Matrix::<XiExpr>::zero(d1, d2);
    for ((omega, gamma), r) in parts {
        // F_h = sum_{l,m} sum_b q_b P1 [c1^{-1-l} c2^{-m} (c1 c2)^k k^b scalar sums] P2^{-1}
        for l in 0..d1 {
            let n1l = n1.pow(l);
            if n1l.is_zero() {
                break;
            }
            for m in 0..d2 {
                let n2m = n2.pow(m);
                if n2m.is_zero() {
                    break;
                }
                let s = e1.basis_inv.mul(&n1l).mul(&r).mul(&n2m).mul(&e2.basis);
                // binom(k-1, l) binom(k, m) as a polynomial in k
                let poly = binom_product_poly(l, m);
                for rr in 0..d1 {
                    for ss in 0..d2 {
                        if s[(rr, ss)].is_zero() {
                            continue;
                        }
                        let c1v = &e1.diag[rr];
                        let c2v = &e2.diag[ss];
                        let cprod = c1v.mul(c2v);
                        let scale = c1v.pow(-1 - l as i64)?.mul(&c2v.pow(-(m as i64))?).mul(&s[(rr, ss)]);
                        let mut cell = XiExpr::zero();
                        for (beta, q) in poly.iter().enumerate() {
                            if q.is_zero() {
                                continue;
                            }
                            let sum = xi_sigma_inverse_sum(beta as u32, &cprod, &gamma, &omega, p)?;
                            cell = cell.add(&sum.scalar_mul(&Scalar::from_q(q.clone())));
                        }
                        cell = cell.scalar_mul(&scale);
                        // out += P1 E_{rr,ss} P2^{-1} cell
                        for i in 0..d1 {
                            for j in 0..d2 {
                                let w = e1.basis[(i, rr)].mul(&e2.basis_inv[(ss, j)]);
                                if w.is_zero() {
                                    continue;
                                }
                                out[(i, j)] = out[(i, j)].add(&cell.scalar_mul(&w));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `binom(k-1, l) * binom(k, m)` expanded in powers of `k` (ascending Q
/// coefficients).
fn binom_product_poly(l: usize, m: usize) -> Vec<Q> {
    // binom(k-1, l) = (k-1)(k-2)...(k-l) / l!
    let mut a = vec![Q::one()];
    for i in 1..=l {
        a = poly_mul_linear(&a, &-qi(i as i64));
    }
    let mut fact = Q::one();
    for i in 1..=l {
        fact *= qi(i as i64);
    }
    for c in a.iter_mut() {
        *c /= &fact;
    }
    // binom(k, m) = k(k-1)...(k-m+1)/m!
    let mut b = vec![Q::one()];
    for i in 0..m {
        b = poly_mul_linear(&b, &-qi(i as i64));
    }
    let mut fact = Q::one();
    for i in 1..=m {
        fact *= qi(i as i64);
    }
    for c in b.iter_mut() {
        *c /= &fact;
    }
    crate::scalar::poly_mul(&a, &b)
}

/// Multiplies an ascending polynomial by `(k + shift)`.
fn poly_mul_linear(p: &[Q], shift: &Q) -> Vec<Q> {
    let mut out = vec![Q::zero(); p.len() + 1];
    for (i, c) in p.iter().enumerate() {
        out[i + 1] += c;
        out[i] += c * shift;
    }
    out
}

/// Step 3: removes the strictly negative off-diagonal parts, producing the
/// exact unipotent gauge `K` with `K[A''] = C`.
pub fn constantify(
    a_second: &SeriesMatrix,
    blocks: &[usize],
    diag: &[Matrix<Scalar>],
    p: u32,
) -> Result<Constantification> {
    let d: usize = blocks.iter().sum();
    let sigma_n = blocks.len();
    let starts: Vec<usize> = blocks
        .iter()
        .scan(0usize, |s, r| {
            let out = *s;
            *s += r;
            Some(out)
        })
        .collect();
    // the <= 0 part of A'' as exact data: constants and negative monomials
    let mut theta_const = Matrix::<Scalar>::zero(d, d);
    let mut theta_neg = Matrix::<XiExpr>::zero(d, d);
    for i in 0..d {
        for j in 0..d {
            theta_const[(i, j)] = a_second[(i, j)].constant_term();
            let neg = a_second[(i, j)].strict_negative_part()?;
            theta_neg[(i, j)] = XiExpr::from_puiseux(neg);
        }
    }
    let mut k = Matrix::<XiExpr>::zero(d, d);
    for i in 0..d {
        k[(i, i)] = XiExpr::one();
    }
    // K blocks by increasing band delta = j - i
    for delta in 1..sigma_n {
        for bi in 0..(sigma_n - delta) {
            let bj = bi + delta;
            let (ri, rj) = (blocks[bi], blocks[bj]);
            let (si, sj) = (starts[bi], starts[bj]);
            // rhs = sum_{k=bi+1..bj} (A''_{bi,k})^0 K_{k,bj}
            //     - sum_{k=bi..bj-1} sigma(K_{bi,k}) A''_{k,bj}
            let mut rhs = Matrix::<XiExpr>::zero(ri, rj);
            for mid in (bi + 1)..=bj {
                let a0 = block_of(&theta_const, &starts, blocks, bi, mid);
                let kb = block_of_xi(&k, &starts, blocks, mid, bj);
                rhs = rhs.add(&mul_scalar_xi(&a0, &kb, p));
            }
            for mid in bi..bj {
                let kb = block_of_xi(&k, &starts, blocks, bi, mid);
                let skb = kb.map(|e| e.sigma_scale(p, 1).expect("exact sigma"));
                let ab_const = block_of(&theta_const, &starts, blocks, mid, bj);
                let ab_neg = block_of_xi(&theta_neg, &starts, blocks, mid, bj);
                let prod = mul_xi_scalar(&skb, &ab_const, p).add(&mul_xi_xi(&skb, &ab_neg, p));
                rhs = rhs.sub(&prod);
            }
            if rhs.entries().all(XiExpr::is_exactly_zero) {
                continue;
            }
            let kij = sylvester_negative(&diag[bi], &diag[bj], &rhs, p)?;
            // filtration bound: block (i, j) stays in V_{j-i}
            for e in kij.entries() {
                if e.filtration_degree() > delta {
                    return Err(CoreError::InvalidArgument(String::from(
                        "step-3 block escaped its filtration degree",
                    )));
                }
            }
            for i in 0..ri {
                for j in 0..rj {
                    k[(si + i, sj + j)] = kij[(i, j)].clone();
                }
            }
        }
    }
    Ok(Constantification { k, c: theta_const })
}

fn block_of(
    m: &Matrix<Scalar>,
    starts: &[usize],
    blocks: &[usize],
    bi: usize,
    bj: usize,
) -> Matrix<Scalar> {
    m.block(starts[bi], starts[bj], blocks[bi], blocks[bj])
}

fn block_of_xi(
    m: &Matrix<XiExpr>,
    starts: &[usize],
    blocks: &[usize],
    bi: usize,
    bj: usize,
) -> Matrix<XiExpr> {
    m.block(starts[bi], starts[bj], blocks[bi], blocks[bj])
}

pub fn mul_xi_xi(a: &Matrix<XiExpr>, b: &Matrix<XiExpr>, p: u32) -> Matrix<XiExpr> {
    let mut out = Matrix::<XiExpr>::zero(a.rows, b.cols);
    for i in 0..a.rows {
        for kk in 0..a.cols {
            if a[(i, kk)].is_exactly_zero() {
                continue;
            }
            for j in 0..b.cols {
                if b[(kk, j)].is_exactly_zero() {
                    continue;
                }
                let t = xi_multiply(&a[(i, kk)], &b[(kk, j)], p);
                out[(i, j)] = out[(i, j)].add(&t);
            }
        }
    }
    out
}

fn mul_scalar_xi(a: &Matrix<Scalar>, b: &Matrix<XiExpr>, p: u32) -> Matrix<XiExpr> {
    mul_xi_xi(&a.map(|s| XiExpr::from_puiseux(TruncatedPuiseux::constant(s.clone()))), b, p)
}

fn mul_xi_scalar(a: &Matrix<XiExpr>, b: &Matrix<Scalar>, p: u32) -> Matrix<XiExpr> {
    mul_xi_xi(a, &b.map(|s| XiExpr::from_puiseux(TruncatedPuiseux::constant(s.clone()))), p)
}

// ---------------------------------------------------------------------------
// Full reduction and solution bases
// ---------------------------------------------------------------------------

/// Outcome of the three-step reduction: `A = F1[Theta]`, `Theta = F2[C]`.
pub struct ReductionResult {
    pub p: u32,
    pub f1: SeriesMatrix,
    /// Exact unipotent block-upper-triangular matrix over the xi algebra.
    pub f2: Matrix<XiExpr>,
    /// Block-triangular matrix with constant diagonal blocks and
    /// nonpositive-exponent off-diagonal entries.
    pub theta: SeriesMatrix,
    pub c: Matrix<Scalar>,
    pub blocks: Vec<usize>,
    pub precision: Q,
}

pub fn reduce_to_constant(sys: &MahlerSystem, n: &Q) -> Result<ReductionResult> {
    let p = sys.p;
    let step1 = block_triangularize(sys, n)?;
    let work = step1.precision.clone();
    let step2 = clear_positive_offdiag(&step1, p, &work)?;
    let step3 = constantify(&step2.a_second, &step1.blocks, &step1.diag, p)?;
    // theta: the <= 0 part of A'' (the > 0 tail is zero up to precision)
    let d = sys.dimension();
    let mut theta = SeriesMatrix::zero(d, d);
    for i in 0..d {
        for j in 0..d {
            theta[(i, j)] = step2.a_second[(i, j)].nonpositive_part()?;
        }
    }
    // F1 = (H G)^{-1}, F2 = K^{-1}
    let hg = step2.gauge.mul(&step1.gauge);
    let f1 = invert_series_matrix(&hg, &work)?;
    let f2 = invert_unipotent_xi(&step3.k, p);
    Ok(ReductionResult {
        p,
        f1,
        f2,
        theta,
        c: step3.c,
        blocks: step1.blocks,
        precision: work,
    })
}

/// Inverse of a unipotent matrix over the xi algebra by the finite Neumann
/// series; stays in the same filtration shape.
pub fn invert_unipotent_xi(k: &Matrix<XiExpr>, p: u32) -> Matrix<XiExpr> {
    let d = k.rows;
    let mut nil = k.clone();
    for i in 0..d {
        nil[(i, i)] = nil[(i, i)].sub(&XiExpr::one());
    }
    let mut acc = Matrix::<XiExpr>::zero(d, d);
    for i in 0..d {
        acc[(i, i)] = XiExpr::one();
    }
    // (I + N)^{-1} = I - N + N^2 - ... (N nilpotent of index <= d)
    let mut power = acc.clone();
    let mut negate = true;
    for _ in 1..=d {
        power = mul_xi_xi(&power, &nil, p);
        if power.entries().all(XiExpr::is_exactly_zero) {
            break;
        }
        acc = if negate { acc.sub(&power) } else { acc.add(&power) };
        negate = !negate;
    }
    acc
}

/// The symbolic fundamental matrix `e_C` with `sigma(e_C) = C e_C`; entries
/// are combinations of `e_c l^j` with `c` in the spectrum and `j < d`.
pub fn constant_solution_matrix(c: &Matrix<Scalar>) -> Result<Matrix<GeneralizedSeries>> {
    let d = c.rows;
    let (u, dd) = dunford_multiplicative(c)?;
    // e_U = sum_k binom(l, k) (U - I)^k
    let nil = u.sub(&Matrix::<Scalar>::identity(d));
    let mut e_u = Matrix::<GeneralizedSeries>::zero(d, d);
    for i in 0..d {
        e_u[(i, i)] = GeneralizedSeries::from_puiseux(TruncatedPuiseux::one());
    }
    let mut npow = Matrix::<Scalar>::identity(d);
    let mut ff: Vec<Q> = vec![Q::one()]; // falling factorial / k!
    for k in 1..=d {
        npow = npow.mul(&nil);
        if npow.is_zero() {
            break;
        }
        // binom(l, k) = l (l-1) ... (l-k+1) / k!
        ff = poly_mul_linear(&ff, &-qi(k as i64 - 1));
        for c in ff.iter_mut() {
            *c /= qi(k as i64);
        }
        let mut update = Matrix::<GeneralizedSeries>::zero(d, d);
        for i in 0..d {
            for j in 0..d {
                if npow[(i, j)].is_zero() {
                    continue;
                }
                let mut g = GeneralizedSeries::zero();
                for (deg, qc) in ff.iter().enumerate() {
                    if qc.is_zero() {
                        continue;
                    }
                    let s = Scalar::from_q(qc.clone()).mul(&npow[(i, j)]);
                    g = g.add(&GeneralizedSeries::term(
                        Scalar::one(),
                        deg,
                        XiExpr::from_puiseux(TruncatedPuiseux::constant(s)),
                    ));
                }
                update[(i, j)] = g;
            }
        }
        e_u = e_u.add(&update);
        // restore ff scaling for next step: multiply back by k!
        for c in ff.iter_mut() {
            *c *= qi(k as i64);
        }
    }
    // e_D via the eigenstructure of the semisimple part
    let e = eigen_structure(&dd)?;
    let mut e_d = Matrix::<GeneralizedSeries>::zero(d, d);
    for i in 0..d {
        for j in 0..d {
            let mut g = GeneralizedSeries::zero();
            for r in 0..d {
                let w = e.basis[(i, r)].mul(&e.basis_inv[(r, j)]);
                if w.is_zero() {
                    continue;
                }
                g = g.add(&GeneralizedSeries::term(
                    e.diag[r].clone(),
                    0,
                    XiExpr::from_puiseux(TruncatedPuiseux::constant(w)),
                ));
            }
            e_d[(i, j)] = g;
        }
    }
    // e_C = e_U e_D through the ring product of generalized series
    let mut out = Matrix::<GeneralizedSeries>::zero(d, d);
    for i in 0..d {
        for kk in 0..d {
            for j in 0..d {
                let prod = genseries_mul(&e_u[(i, kk)], &e_d[(kk, j)], c.rows as u32);
                out[(i, j)] = out[(i, j)].add(&prod);
            }
        }
    }
    Ok(out)
}

/// Ring product of generalized series: labels multiply as
/// `e_c l^i * e_{c'} l^j = e_{c c'} l^{i+j}`, xi parts multiply in the
/// algebra.
pub fn genseries_mul(a: &GeneralizedSeries, b: &GeneralizedSeries, _p: u32) -> GeneralizedSeries {
    use crate::matrix::RingOps;
    a.ring_mul(b)
}

/// Verifies `sigma(e_C) = C e_C` symbolically.
pub fn check_constant_solution(c: &Matrix<Scalar>, e_c: &Matrix<GeneralizedSeries>, p: u32) -> Result<bool> {
    let d = c.rows;
    for i in 0..d {
        for j in 0..d {
            let lhs = e_c[(i, j)].sigma(p)?;
            let mut rhs = GeneralizedSeries::zero();
            for k in 0..d {
                rhs = rhs.add(&e_c[(k, j)].scalar_mul(&c[(i, k)]));
            }
            if !lhs.sub(&rhs).is_zero_up_to_prec() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Residual report of `sigma(F) C - A F` with `F = F1 F2`.
pub struct ResidualReport {
    /// Number of coefficients that are determinable and nonzero (must be 0).
    pub nonzero: usize,
    /// Number of known-zero coefficients checked.
    pub checked: usize,
}

pub fn verify_gauge(sys: &MahlerSystem, red: &ReductionResult, n: &Q) -> Result<ResidualReport> {
    let p = sys.p;
    let d = sys.dimension();
    // F = F1 F2 over the xi algebra
    let f1x = red.f1.map(|e| XiExpr::from_puiseux(e.clone()));
    let f = mul_xi_xi(&f1x, &red.f2, p);
    // sigma(F) C
    let sf = f.map(|e| e.sigma_scale(p, 1).expect("sigma on xi"));
    let cx = red.c.map(|s| XiExpr::from_puiseux(TruncatedPuiseux::constant(s.clone())));
    let lhs = mul_xi_xi(&sf, &cx, p);
    // A F with A expanded
    let a = sys.expand_to(&red.precision)?;
    let ax = a.map(|e| XiExpr::from_puiseux(e.clone()));
    let rhs = mul_xi_xi(&ax, &f, p);
    let mut nonzero = 0usize;
    let mut checked = 0usize;
    for i in 0..d {
        for j in 0..d {
            let diff = lhs[(i, j)].sub(&rhs[(i, j)]);
            // standardize and look at every known coefficient below n
            let std = crate::xi::standardize(&diff, p)?;
            for (_, coeff) in std.terms() {
                for (e, c) in coeff.terms() {
                    if e < n {
                        checked += 1;
                        if !c.is_zero() {
                            nonzero += 1;
                        }
                    }
                }
            }
            if std.is_zero_up_to_prec() {
                checked += 1;
            }
        }
    }
    Ok(ResidualReport { nonzero, checked })
}

/// Columns of a fundamental solution matrix for the constant system, after a
/// constant change of basis that gives every column a single `e_c` label:
/// `e_C P = e_U P diag(e_{c_r})` for the eigenbasis `P` of the semisimple
/// part.
pub fn canonical_solution_columns(c: &Matrix<Scalar>) -> Result<Matrix<GeneralizedSeries>> {
    let d = c.rows;
    let (u, dd) = dunford_multiplicative(c)?;
    let e = eigen_structure(&dd)?;
    // e_U P as plain polynomial-in-l data
    let nil = u.sub(&Matrix::<Scalar>::identity(d));
    let mut acc: Vec<Matrix<Scalar>> = vec![e.basis.clone()]; // l^0 part of e_U P
    let mut npow = Matrix::<Scalar>::identity(d);
    let mut ff: Vec<Q> = vec![Q::one()];
    for k in 1..=d {
        npow = npow.mul(&nil);
        if npow.is_zero() {
            break;
        }
        ff = poly_mul_linear(&ff, &-qi(k as i64 - 1));
        let kinv = Q::new(BigInt::one(), BigInt::from(k as i64));
        for cfs in ff.iter_mut() {
            *cfs *= &kinv;
        }
        let prod = npow.mul(&e.basis);
        for (deg, qc) in ff.iter().enumerate() {
            if qc.is_zero() {
                continue;
            }
            while acc.len() <= deg {
                acc.push(Matrix::<Scalar>::zero(d, d));
            }
            acc[deg] = acc[deg].add(&prod.scale(&Scalar::from_q(qc.clone())));
        }
        for cfs in ff.iter_mut() {
            *cfs *= qi(k as i64);
        }
    }
    let mut out = Matrix::<GeneralizedSeries>::zero(d, d);
    for i in 0..d {
        for j in 0..d {
            let mut g = GeneralizedSeries::zero();
            for (deg, mat) in acc.iter().enumerate() {
                let s = mat[(i, j)].clone();
                if s.is_zero() {
                    continue;
                }
                g = g.add(&GeneralizedSeries::term(
                    e.diag[j].clone(),
                    deg,
                    XiExpr::from_puiseux(TruncatedPuiseux::constant(s)),
                ));
            }
            out[(i, j)] = g;
        }
    }
    // the columns must satisfy sigma(X) = C X symbolically; entries are
    // constants with labels, so the check does not involve p
    for j in 0..d {
        for i in 0..d {
            let lhs = out[(i, j)].sigma(2)?;
            let mut rhs = GeneralizedSeries::zero();
            for k in 0..d {
                rhs = rhs.add(&out[(k, j)].scalar_mul(&c[(i, k)]));
            }
            if !lhs.sub(&rhs).is_zero_up_to_prec() {
                return Err(CoreError::UnsupportedSplitting(String::from(
                    "solution columns fail the constant system symbolically",
                )));
            }
        }
    }
    Ok(out)
}

/// Solution basis of an operator: the first row of `F1 F2 e_C P` for the
/// companion system, standardized; every entry is annihilated by the
/// operator up to the stated precision and carries a single `e_c` label.
pub fn solution_basis(op: &MahlerOperator, n: &Q) -> Result<Vec<GeneralizedSeries>> {
    let p = op.p;
    let d = op.order();
    let sys = equation_to_companion(op)?;
    let red = reduce_to_constant(&sys, n)?;
    let cols = canonical_solution_columns(&red.c)?;
    // F = F1 F2, then first row of F (e_C P)
    let f1x = red.f1.map(|e| XiExpr::from_puiseux(e.clone()));
    let f = mul_xi_xi(&f1x, &red.f2, p);
    let mut basis = Vec::with_capacity(d);
    for j in 0..d {
        let mut y = GeneralizedSeries::zero();
        for k in 0..d {
            if f[(0, k)].is_exactly_zero() {
                continue;
            }
            let g = cols[(k, j)].xi_mul_via(&f[(0, k)], p);
            y = y.add(&g);
        }
        basis.push(standardize_series(&y, p)?);
    }
    Ok(basis)
}

impl GeneralizedSeries {
    /// Multiplies every label coefficient by a xi expression (ring product on
    /// the xi parts).
    pub fn xi_mul_via(&self, e: &XiExpr, p: u32) -> GeneralizedSeries {
        let mut out = GeneralizedSeries::zero();
        for ((c, j), x) in self.terms() {
            out = out.add(&GeneralizedSeries::term(c.clone(), *j, xi_multiply(x, e, p)));
        }
        out
    }
}

/// Checks that an operator annihilates a generalized series up to precision:
/// applies it symbolically, standardizes, and requires every known
/// coefficient below `n` to vanish.
pub fn annihilation_residual(op: &MahlerOperator, g: &GeneralizedSeries, n: &Q) -> Result<usize> {
    let res = apply_operator(op, g)?;
    let std = standardize_series(&res, op.p)?;
    let mut bad = 0usize;
    for (_, e) in std.terms() {
        for (_, coeff) in e.terms() {
            for (exp, c) in coeff.terms() {
                if exp < n && !c.is_zero() {
                    bad += 1;
                }
            }
        }
    }
    Ok(bad)
}
