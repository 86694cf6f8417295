use num_complex::Complex;
use num_traits::Zero;

use super::matrix::{vec_norm, Matrix};
use crate::scalar::{abs, Real};

/// Householder reflector `H = I - tau v v^*` with `v[0] = 1`, mapping `x` to
/// `beta e_1`. Returns `(v, tau, beta)`.
pub(crate) fn householder<T: Real>(x: &[Complex<T>]) -> (Vec<Complex<T>>, Complex<T>, Complex<T>) {
    let alpha = x[0];
    let xnorm = vec_norm(&x[1..]);
    let mut v = x.to_vec();
    if xnorm == T::zero() && alpha.im == T::zero() {
        v.iter_mut().for_each(|z| *z = Complex::zero());
        v[0] = Complex::new(T::one(), T::zero());
        return (v, Complex::zero(), alpha);
    }
    let anorm = abs(alpha);
    let full = anorm.hypot(xnorm);
    let beta_re = if alpha.re >= T::zero() { -full } else { full };
    let beta = Complex::new(beta_re, T::zero());
    let tau = Complex::new((beta_re - alpha.re) / beta_re, -alpha.im / beta_re);
    let scale = Complex::new(T::one(), T::zero()) / (alpha - beta);
    v[0] = Complex::new(T::one(), T::zero());
    for z in v.iter_mut().skip(1) {
        *z = *z * scale;
    }
    (v, tau, beta)
}

/// Thin Householder QR: `A = Q R` with `Q` (m×k) orthonormal and `R` (k×n)
/// upper triangular, `k = min(m, n)`.
pub fn householder_qr<T: Real>(a: &Matrix<T>) -> (Matrix<T>, Matrix<T>) {
    let (m, n) = (a.rows(), a.cols());
    let k = m.min(n);
    let mut r = a.clone();
    let mut reflectors = Vec::with_capacity(k);
    for j in 0..k {
        let x: Vec<Complex<T>> = (j..m).map(|i| r[(i, j)]).collect();
        let (v, tau, beta) = householder(&x);
        // apply H^* = I - conj(tau) v v^* from the left to columns j..n
        for c in j..n {
            let mut s = Complex::zero();
            for (t, vi) in v.iter().enumerate() {
                s += vi.conj() * r[(j + t, c)];
            }
            s = s * tau.conj();
            for (t, vi) in v.iter().enumerate() {
                r[(j + t, c)] -= *vi * s;
            }
        }
        r[(j, j)] = beta;
        for i in (j + 1)..m {
            r[(i, j)] = Complex::zero();
        }
        reflectors.push((v, tau));
    }
    let mut q = Matrix::zeros(m, k);
    for i in 0..k {
        q[(i, i)] = Complex::new(T::one(), T::zero());
    }
    for (j, (v, tau)) in reflectors.iter().enumerate().rev() {
        for c in 0..k {
            let mut s = Complex::zero();
            for (t, vi) in v.iter().enumerate() {
                s += vi.conj() * q[(j + t, c)];
            }
            s = s * *tau;
            for (t, vi) in v.iter().enumerate() {
                q[(j + t, c)] -= *vi * s;
            }
        }
    }
    (q, r.submatrix(0, k, 0, n))
}

/// Orthonormal basis of the column span of `a` (assumed full column rank).
pub fn orthonormal_basis<T: Real>(a: &Matrix<T>) -> Matrix<T> {
    householder_qr(a).0
}
