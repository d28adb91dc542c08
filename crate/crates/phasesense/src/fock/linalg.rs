//! Dense/sparse helpers for the truncated Fock-space engine.
//!
//! Ladder operators, generators and Kraus operators are banded, so products
//! against them are done with explicit nonzero loops; everything genuinely
//! dense goes through BLAS.

use ndarray::Array2;
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Below this fill fraction (nonzeros per row) a product is done with
/// explicit loops instead of BLAS.
const SPARSE_ROW_LIMIT: usize = 12;

pub(crate) fn nonzeros(m: &Array2<C64>) -> usize {
    m.iter().filter(|v| v.norm_sqr() != 0.0).count()
}

fn is_sparse(m: &Array2<C64>) -> bool {
    nonzeros(m) <= SPARSE_ROW_LIMIT * m.nrows()
}

/// `op * m` with a sparsity-aware dispatch on `op`.
pub(crate) fn left_mul(op: &Array2<C64>, m: &Array2<C64>) -> Array2<C64> {
    if !is_sparse(op) {
        return op.dot(m);
    }
    let (n, cols) = (op.nrows(), m.ncols());
    let mut out = Array2::<C64>::zeros((n, cols));
    for i in 0..n {
        for k in 0..op.ncols() {
            let v = op[(i, k)];
            if v.norm_sqr() == 0.0 {
                continue;
            }
            let src = m.row(k);
            let mut dst = out.row_mut(i);
            for c in 0..cols {
                dst[c] += v * src[c];
            }
        }
    }
    out
}

/// `m * op` with a sparsity-aware dispatch on `op`.
pub(crate) fn right_mul(m: &Array2<C64>, op: &Array2<C64>) -> Array2<C64> {
    if !is_sparse(op) {
        return m.dot(op);
    }
    let (rows, n) = (m.nrows(), op.ncols());
    let mut out = Array2::<C64>::zeros((rows, n));
    for k in 0..op.nrows() {
        for j in 0..n {
            let v = op[(k, j)];
            if v.norm_sqr() == 0.0 {
                continue;
            }
            let src = m.column(k);
            let mut dst = out.column_mut(j);
            for r in 0..rows {
                dst[r] += src[r] * v;
            }
        }
    }
    out
}

pub(crate) fn dagger(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|v| v.conj())
}

pub(crate) fn trace(m: &Array2<C64>) -> C64 {
    m.diag().sum()
}

/// `Tr{a b}` without forming the product.
pub(crate) fn trace_product(a: &Array2<C64>, b: &Array2<C64>) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        let row = a.row(i);
        let col = b.column(i);
        for k in 0..n {
            acc += row[k] * col[k];
        }
    }
    acc
}

pub(crate) fn max_abs(m: &Array2<C64>) -> f64 {
    m.iter().fold(0.0f64, |acc, v| acc.max(v.norm()))
}

pub(crate) fn hermitian_deviation(m: &Array2<C64>) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub(crate) fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::<C64>::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let v = a[(i, j)];
            if v.norm_sqr() == 0.0 {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = v * b[(k, l)];
                }
            }
        }
    }
    out
}

/// `-i (h rho - rho h)`, the derivative of `rho` under `exp(-i phi h)`.
pub(crate) fn commutator_derivative(h: &Array2<C64>, rho: &Array2<C64>) -> Array2<C64> {
    let mut out = left_mul(h, rho);
    out -= &right_mul(rho, h);
    out.mapv_inplace(|v| C64::new(0.0, -1.0) * v);
    out
}

/// Hermitian eigendecomposition, eigenvalues ascending; eigenvectors are
/// the columns of the returned matrix, `m = v diag(w) v^H`.
///
/// The backend hands row-major arrays to LAPACK as if they were
/// column-major, so it actually decomposes `m^T = conj(m)`; conjugating its
/// eigenvectors recovers those of `m`.
pub(crate) fn eigh(m: &Array2<C64>) -> Result<(Vec<f64>, Array2<C64>)> {
    let (w, v) = m
        .eigh(UPLO::Lower)
        .map_err(|e| Error::Linalg(e.to_string()))?;
    Ok((w.to_vec(), v.mapv(|x| x.conj())))
}

/// `exp(-i t h)` for Hermitian `h`.
///
/// The sparsity graph of `h` is split into connected components and each
/// component is exponentiated separately. Number-conserving generators
/// (the beam-splitter generator in particular) decompose into blocks of
/// fixed total photon number, which turns an `O(n^3)` eigendecomposition
/// into many small ones.
pub(crate) fn expm_hermitian(h: &Array2<C64>, t: f64) -> Result<Array2<C64>> {
    let n = h.nrows();
    let comps = connected_components(h);
    let mut out = Array2::<C64>::zeros((n, n));
    let mut groups: std::collections::HashMap<usize, Vec<usize>> = std::collections::HashMap::new();
    for (idx, root) in comps.iter().enumerate() {
        groups.entry(*root).or_default().push(idx);
    }
    let mut roots: Vec<usize> = groups.keys().copied().collect();
    roots.sort_unstable();
    for root in roots {
        let idx = &groups[&root];
        if idx.len() == 1 {
            let i = idx[0];
            let phase = C64::new(0.0, -t * h[(i, i)].re).exp();
            out[(i, i)] = phase;
            continue;
        }
        let m = idx.len();
        let mut sub = Array2::<C64>::zeros((m, m));
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                sub[(a, b)] = h[(i, j)];
            }
        }
        let (w, v) = eigh(&sub)?;
        // v * diag(exp(-i t w)) * v^H
        let mut scaled = v.clone();
        for (col, &lam) in w.iter().enumerate() {
            let phase = C64::new(0.0, -t * lam).exp();
            scaled.column_mut(col).mapv_inplace(|x| x * phase);
        }
        let u_sub = scaled.dot(&dagger(&v));
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                out[(i, j)] = u_sub[(a, b)];
            }
        }
    }
    Ok(out)
}

fn connected_components(h: &Array2<C64>) -> Vec<usize> {
    let n = h.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if h[(i, j)].norm_sqr() != 0.0 {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    (0..n).map(|i| find(&mut parent, i)).collect()
}

/// `(u1 (x) u2)^H  m  (u1 (x) u2)` for a two-mode matrix `m` of dimension
/// `d^2` in mode-1-major ordering, without forming the Kronecker factors.
pub(crate) fn two_mode_basis_change(
    m: &Array2<C64>,
    u1: &Array2<C64>,
    u2: &Array2<C64>,
) -> Array2<C64> {
    let m = mode1_left(&dagger(u1), m);
    let m = mode1_right(&m, u1);
    let m = mode2_left(&dagger(u2), &m);
    mode2_right(&m, u2)
}

/// Inverse transform of [`two_mode_basis_change`]:
/// `(u1 (x) u2)  m  (u1 (x) u2)^H`.
pub(crate) fn two_mode_basis_restore(
    m: &Array2<C64>,
    u1: &Array2<C64>,
    u2: &Array2<C64>,
) -> Array2<C64> {
    let m = mode1_left(u1, m);
    let m = mode1_right(&m, &dagger(u1));
    let m = mode2_left(u2, &m);
    mode2_right(&m, &dagger(u2))
}

/// `(a (x) I) m` for a single-mode `a` of dimension `d` and a two-mode `m`.
pub(crate) fn mode1_left(a: &Array2<C64>, m: &Array2<C64>) -> Array2<C64> {
    let d = a.nrows();
    let n = m.nrows();
    debug_assert_eq!(d * d, n);
    let flat = m
        .to_shape((d, d * n))
        .expect("two-mode matrix must be contiguous")
        .to_owned();
    let prod = a.dot(&flat);
    prod.into_shape_with_order((n, n)).expect("shape")
}

/// `m (a (x) I)`.
pub(crate) fn mode1_right(m: &Array2<C64>, a: &Array2<C64>) -> Array2<C64> {
    // (m (a (x) I))^T = (a^T (x) I) m^T
    let mt = m.t().to_owned();
    let at = a.t().to_owned();
    mode1_left(&at, &mt).t().to_owned()
}

/// `(I (x) a) m`.
pub(crate) fn mode2_left(a: &Array2<C64>, m: &Array2<C64>) -> Array2<C64> {
    let d = a.nrows();
    let n = m.nrows();
    debug_assert_eq!(d * d, n);
    let mut out = Array2::<C64>::zeros((n, n));
    for block in 0..d {
        let rows = m.slice(ndarray::s![block * d..(block + 1) * d, ..]);
        let prod = a.dot(&rows);
        out.slice_mut(ndarray::s![block * d..(block + 1) * d, ..])
            .assign(&prod);
    }
    out
}

/// `m (I (x) a)`.
pub(crate) fn mode2_right(m: &Array2<C64>, a: &Array2<C64>) -> Array2<C64> {
    let mt = m.t().to_owned();
    let at = a.t().to_owned();
    mode2_left(&at, &mt).t().to_owned()
}
