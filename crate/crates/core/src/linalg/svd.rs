use num_complex::Complex;
use num_traits::Zero;

use super::matrix::{dot, vec_norm, Matrix};
use crate::error::{Error, Result};
use crate::scalar::{abs, Real};

/// Singular value decomposition `A V = U diag(sigma)`, singular values sorted
/// in decreasing order. `U` is m×n (columns for zero singular values are
/// zero), `V` is n×n unitary.
#[derive(Clone, Debug)]
pub struct Svd<T: Real> {
    pub sigma: Vec<T>,
    pub u: Matrix<T>,
    pub v: Matrix<T>,
}

/// One-sided (Hestenes) Jacobi SVD.
pub fn svd<T: Real>(a: &Matrix<T>) -> Svd<T> {
    let (m, n) = (a.rows(), a.cols());
    let mut g: Vec<Vec<Complex<T>>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<Complex<T>>> = (0..n)
        .map(|j| {
            let mut e = vec![Complex::zero(); n];
            e[j] = Complex::new(T::one(), T::zero());
            e
        })
        .collect();
    let tol = T::epsilon() * T::of(m.max(1) as f64).sqrt();
    // columns already at roundoff level of the whole matrix are left alone
    let floor = {
        let f = a.frobenius_norm() * T::epsilon();
        f * f
    };
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha: T = g[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: T = g[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma = dot(&g[p], &g[q]);
                let gabs = abs(gamma);
                if gabs == T::zero() || gabs <= tol * (alpha * beta).sqrt() || alpha.min(beta) <= floor {
                    continue;
                }
                rotated = true;
                let phase = gamma / gabs;
                let zeta = (beta - alpha) / (T::of(2.0) * gabs);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                let ph = phase.conj();
                for cols in [&mut g, &mut v] {
                    let (left, right) = cols.split_at_mut(q);
                    let (cp, cq) = (&mut left[p], &mut right[0]);
                    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
                        let yq = *y * ph;
                        let xp = *x;
                        *x = xp * c - yq * s;
                        *y = xp * s + yq * c;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<(usize, T)> = g.iter().map(|col| vec_norm(col)).enumerate().collect();
    order.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
    let sigma: Vec<T> = order.iter().map(|&(_, s)| s).collect();
    let mut u = Matrix::zeros(m, n);
    let mut vm = Matrix::zeros(n, n);
    for (k, &(j, s)) in order.iter().enumerate() {
        if s > T::zero() {
            let col: Vec<_> = g[j].iter().map(|&z| z / s).collect();
            u.set_column(k, &col);
        }
        vm.set_column(k, &v[j]);
    }
    Svd { sigma, u, v: vm }
}

pub fn singular_values<T: Real>(a: &Matrix<T>) -> Vec<T> {
    svd(a).sigma
}

/// Smallest singular value and its right singular vector.
pub fn svd_min<T: Real>(a: &Matrix<T>) -> (T, Vec<Complex<T>>) {
    let s = svd(a);
    let n = a.cols();
    if n == 0 {
        return (T::zero(), Vec::new());
    }
    // a wide matrix has n - m exact zeros that one-sided Jacobi reports as tiny columns
    (s.sigma[n - 1], s.v.column(n - 1))
}

/// Spectral norm.
pub fn norm2<T: Real>(a: &Matrix<T>) -> T {
    svd(a).sigma.first().copied().unwrap_or(T::zero())
}

/// 2-norm condition number; `+inf` when the smallest singular value is zero.
pub fn cond2<T: Real>(a: &Matrix<T>) -> T {
    let s = svd(a).sigma;
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) => {
            if lo == T::zero() {
                T::infinity()
            } else {
                hi / lo
            }
        }
        _ => T::one(),
    }
}

/// Scales each column to unit 2-norm by a positive real factor.
pub fn normalize_columns<T: Real>(a: &Matrix<T>) -> Result<Matrix<T>> {
    let mut out = a.clone();
    for j in 0..a.cols() {
        let col = a.column(j);
        let nrm = vec_norm(&col);
        if nrm == T::zero() {
            return Err(Error::ZeroColumn(j));
        }
        let col: Vec<_> = col.into_iter().map(|z| z / nrm).collect();
        out.set_column(j, &col);
    }
    Ok(out)
}

/// Sine of the largest principal angle between the column spans of `a` and
/// `b` (both assumed full column rank, same column count).
pub fn subspace_distance<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> T {
    let qa = super::qr::orthonormal_basis(a);
    let qb = super::qr::orthonormal_basis(b);
    // ‖(I - Qa Qa^*) Qb‖₂ stays accurate for tiny angles where the cosine does not
    let proj = qa.matmul(&qa.adjoint_mul(&qb));
    norm2(&(&qb - &proj))
}
