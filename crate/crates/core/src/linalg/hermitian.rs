use num_complex::Complex;
use num_traits::Zero;

use super::matrix::Matrix;
use crate::error::{Error, Result};
use crate::scalar::{abs, Real};

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
/// Returns real eigenvalues (ascending) and a unitary eigenvector matrix; for
/// real symmetric input the eigenvectors are real orthogonal.
pub fn hermitian_eig<T: Real>(a: &Matrix<T>) -> Result<(Vec<T>, Matrix<T>)> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch("hermitian_eig needs a square matrix".into()));
    }
    let n = a.rows();
    let mut h = a.clone();
    // symmetrize away roundoff-level asymmetry
    for i in 0..n {
        h[(i, i)] = Complex::new(h[(i, i)].re, T::zero());
        for j in (i + 1)..n {
            let avg = (h[(i, j)] + h[(j, i)].conj()) * T::of(0.5);
            h[(i, j)] = avg;
            h[(j, i)] = avg.conj();
        }
    }
    let mut v = Matrix::identity(n);
    let scale = h.frobenius_norm();
    for _sweep in 0..100 {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| h[(i, j)].norm_sqr())
            .sum();
        if off.sqrt() <= T::epsilon() * scale * T::of(0.1) || scale == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = h[(p, q)];
                let g = abs(apq);
                if g == T::zero() {
                    continue;
                }
                let phase = (apq / g).conj();
                // D = diag(.., phase at q, ..): make h[p,q] real
                for i in 0..n {
                    h[(i, q)] = h[(i, q)] * phase;
                }
                for j in 0..n {
                    h[(q, j)] = h[(q, j)] * phase.conj();
                }
                for i in 0..n {
                    v[(i, q)] = v[(i, q)] * phase;
                }
                let alpha = h[(p, p)].re;
                let beta = h[(q, q)].re;
                let zeta = (beta - alpha) / (T::of(2.0) * g);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                for i in 0..n {
                    let x = h[(i, p)];
                    let y = h[(i, q)];
                    h[(i, p)] = x * c - y * s;
                    h[(i, q)] = x * s + y * c;
                }
                for j in 0..n {
                    let x = h[(p, j)];
                    let y = h[(q, j)];
                    h[(p, j)] = x * c - y * s;
                    h[(q, j)] = x * s + y * c;
                }
                for i in 0..n {
                    let x = v[(i, p)];
                    let y = v[(i, q)];
                    v[(i, p)] = x * c - y * s;
                    v[(i, q)] = x * s + y * c;
                }
                h[(p, q)] = Complex::zero();
                h[(q, p)] = Complex::zero();
            }
        }
    }
    let mut order: Vec<(usize, T)> = (0..n).map(|i| (i, h[(i, i)].re)).collect();
    order.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&(_, x)| x).collect();
    let idx: Vec<usize> = order.iter().map(|&(i, _)| i).collect();
    Ok((values, v.select_columns(&idx)))
}

/// Cholesky factor `L` (lower triangular) with `A = L L^*`.
pub fn cholesky<T: Real>(a: &Matrix<T>) -> Result<Matrix<T>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch("cholesky needs a square matrix".into()));
    }
    let n = a.rows();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > T::zero()) {
            return Err(Error::NotDefinite(j));
        }
        let djj = d.sqrt();
        l[(j, j)] = Complex::new(djj, T::zero());
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

/// Solves `L X = B` for lower triangular `L`.
pub fn solve_lower<T: Real>(l: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    let n = l.rows();
    let mut x = b.clone();
    for c in 0..b.cols() {
        for i in 0..n {
            let mut s = x[(i, c)];
            for k in 0..i {
                s -= l[(i, k)] * x[(k, c)];
            }
            x[(i, c)] = s / l[(i, i)];
        }
    }
    x
}

/// `L^{-1} M L^{-*}` for lower triangular `L`.
pub fn congruence_inverse<T: Real>(l: &Matrix<T>, m: &Matrix<T>) -> Matrix<T> {
    let left = solve_lower(l, m);
    // (L^{-1} (L^{-1} M)^*)^* = L^{-1} M L^{-*}
    solve_lower(l, &left.adjoint()).adjoint()
}
