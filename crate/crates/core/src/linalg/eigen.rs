//! Nonsymmetric complex eigensolver: Householder reduction to Hessenberg
//! form, single-shift implicit QR to Schur form, back substitution for the
//! eigenvectors and an inverse for the left eigenvectors.

use num_complex::Complex;
use num_traits::{One, Zero};

use super::lu::{solve, Lu};
use super::matrix::{dot, vec_norm, Matrix};
use super::qr::householder;
use crate::error::{Error, Result};
use crate::scalar::{abs, abs1, Real};

/// Complex Schur form `A = Z T Z^*`.
#[derive(Clone, Debug)]
pub struct Schur<T: Real> {
    pub t: Matrix<T>,
    pub z: Matrix<T>,
}

/// Eigendecomposition `A X = X diag(values)` with unit-norm columns of `X`.
///
/// `left_vectors` is `Y = X^{-*}` rescaled so that `diag(Y^* X) = 1`. It is
/// `None` when `X` is numerically singular (condition estimate above
/// `1/(n·u)`); callers then fall back to one-sided quotients.
#[derive(Clone, Debug)]
pub struct EigenDecomposition<T: Real> {
    pub values: Vec<Complex<T>>,
    pub right_vectors: Matrix<T>,
    pub left_vectors: Option<Matrix<T>>,
    pub condition_estimate: T,
}

impl<T: Real> EigenDecomposition<T> {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn is_defective(&self) -> bool {
        self.left_vectors.is_none()
    }

    /// Turns a defective decomposition into [`Error::Defective`].
    pub fn require_nondefective(self) -> Result<Self> {
        if self.is_defective() {
            Err(Error::Defective {
                condition: self.condition_estimate.to_f64_lossy(),
            })
        } else {
            Ok(self)
        }
    }

    /// Condition threshold `1/(n·u)` beyond which `X` counts as singular.
    pub fn defective_threshold(n: usize) -> T {
        T::one() / (T::of(n.max(1) as f64) * T::unit_roundoff())
    }
}

/// Reduces `a` to upper Hessenberg form, returning `(H, Q)` with `A = Q H Q^*`.
pub fn hessenberg<T: Real>(a: &Matrix<T>) -> (Matrix<T>, Matrix<T>) {
    let n = a.rows();
    let mut h = a.clone();
    let mut q = Matrix::identity(n);
    if n < 3 {
        return (h, q);
    }
    for j in 0..n - 2 {
        let x: Vec<Complex<T>> = ((j + 1)..n).map(|i| h[(i, j)]).collect();
        let (v, tau, beta) = householder(&x);
        if tau.is_zero() {
            continue;
        }
        let off = j + 1;
        // H^* from the left on rows off.., columns j..
        for c in j..n {
            let mut s = Complex::zero();
            for (t, vi) in v.iter().enumerate() {
                s += vi.conj() * h[(off + t, c)];
            }
            s = s * tau.conj();
            for (t, vi) in v.iter().enumerate() {
                h[(off + t, c)] -= *vi * s;
            }
        }
        h[(off, j)] = beta;
        for i in (off + 1)..n {
            h[(i, j)] = Complex::zero();
        }
        // H from the right on all rows, and accumulate Q <- Q H
        for m in [&mut h, &mut q] {
            for i in 0..n {
                let row = m.row_mut(i);
                let mut s: Complex<T> = Complex::zero();
                for (t, vi) in v.iter().enumerate() {
                    s += row[off + t] * *vi;
                }
                s = s * tau;
                for (t, vi) in v.iter().enumerate() {
                    row[off + t] -= s * vi.conj();
                }
            }
        }
    }
    (h, q)
}

/// Complex Givens rotation `G = [c s; -conj(s) c]` with `G [f; g] = [r; 0]`.
fn givens<T: Real>(f: Complex<T>, g: Complex<T>) -> (T, Complex<T>) {
    let gn = abs(g);
    if gn == T::zero() {
        return (T::one(), Complex::zero());
    }
    let fn_ = abs(f);
    if fn_ == T::zero() {
        return (T::zero(), g.conj() / gn);
    }
    let norm = fn_.hypot(gn);
    let c = fn_ / norm;
    let s = (f / fn_) * g.conj() / norm;
    (c, s)
}

#[inline]
fn rot_rows<T: Real>(m: &mut Matrix<T>, p: usize, q: usize, c: T, s: Complex<T>, cols: std::ops::Range<usize>) {
    for j in cols {
        let a = m[(p, j)];
        let b = m[(q, j)];
        m[(p, j)] = a * c + s * b;
        m[(q, j)] = b * c - s.conj() * a;
    }
}

#[inline]
fn rot_cols<T: Real>(m: &mut Matrix<T>, p: usize, q: usize, c: T, s: Complex<T>, rows: std::ops::Range<usize>) {
    for i in rows {
        let a = m[(i, p)];
        let b = m[(i, q)];
        m[(i, p)] = a * c + b * s.conj();
        m[(i, q)] = b * c - a * s;
    }
}

/// Complex Schur decomposition of a square matrix.
pub fn schur<T: Real>(a: &Matrix<T>) -> Result<Schur<T>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "schur of a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = a.rows();
    let (mut t, mut z) = hessenberg(a);
    if n < 2 {
        return Ok(Schur { t, z });
    }
    let ulp = T::epsilon();
    let smlnum = T::min_positive_value() * (T::of(n as f64) / ulp);
    let max_iter = 30 * n.max(10);
    let mut ihi = n - 1;
    let mut its = 0usize;
    let mut total = 0usize;
    while ihi > 0 {
        // locate the active unreduced block [l, ihi]
        let mut l = ihi;
        while l > 0 {
            let sub = abs1(t[(l, l - 1)]);
            if sub <= smlnum {
                break;
            }
            let mut tst = abs1(t[(l - 1, l - 1)]) + abs1(t[(l, l)]);
            if tst == T::zero() {
                if l >= 2 {
                    tst += t[(l - 1, l - 2)].re.abs();
                }
                if l + 1 <= ihi {
                    tst += t[(l + 1, l)].re.abs();
                }
            }
            if sub <= ulp * tst {
                // Ahues & Tisseur refinement of the deflation test
                let ab = sub.max(abs1(t[(l - 1, l)]));
                let ba = sub.min(abs1(t[(l - 1, l)]));
                let diff = t[(l - 1, l - 1)] - t[(l, l)];
                let aa = abs1(t[(l, l)]).max(abs1(diff));
                let bb = abs1(t[(l, l)]).min(abs1(diff));
                let s = aa + ab;
                if ba * (ab / s) <= smlnum.max(ulp * (bb * (aa / s))) {
                    break;
                }
            }
            l -= 1;
        }
        if l > 0 {
            t[(l, l - 1)] = Complex::zero();
        }
        if l >= ihi {
            ihi = if l == 0 { 0 } else { l - 1 };
            its = 0;
            continue;
        }
        total += 1;
        if total > max_iter {
            return Err(Error::NoConvergence(format!("QR iteration exceeded {max_iter} sweeps")));
        }
        its += 1;
        let shift = if its % 10 == 0 {
            // exceptional shift
            let s = T::of(0.75) * t[(ihi, ihi - 1)].re.abs();
            t[(ihi, ihi)] + Complex::new(s, T::zero())
        } else if its % 10 == 5 {
            let s = T::of(0.75) * t[(l + 1, l)].re.abs();
            t[(l, l)] + Complex::new(s, T::zero())
        } else {
            wilkinson_shift(
                t[(ihi - 1, ihi - 1)],
                t[(ihi - 1, ihi)],
                t[(ihi, ihi - 1)],
                t[(ihi, ihi)],
            )
        };
        // implicit single-shift sweep over [l, ihi]
        let mut f = t[(l, l)] - shift;
        let mut g = t[(l + 1, l)];
        for k in l..ihi {
            let (c, s) = givens(f, g);
            let col0 = if k == l { l } else { k - 1 };
            rot_rows(&mut t, k, k + 1, c, s, col0..n);
            if k > l {
                t[(k + 1, k - 1)] = Complex::zero();
            }
            let rmax = (k + 2).min(ihi) + 1;
            rot_cols(&mut t, k, k + 1, c, s, 0..rmax);
            rot_cols(&mut z, k, k + 1, c, s, 0..n);
            if k + 1 < ihi {
                f = t[(k + 1, k)];
                g = t[(k + 2, k)];
            }
        }
    }
    // clean the strictly lower part
    for i in 1..n {
        for j in 0..i {
            t[(i, j)] = Complex::zero();
        }
    }
    Ok(Schur { t, z })
}

fn wilkinson_shift<T: Real>(a: Complex<T>, b: Complex<T>, c: Complex<T>, d: Complex<T>) -> Complex<T> {
    let half = T::of(0.5);
    let m = (a - d) * half;
    let disc = (m * m + b * c).sqrt();
    // eigenvalues of [[a,b],[c,d]] are (a+d)/2 ± disc = d + m ± disc
    let e1 = d + m + disc;
    let e2 = d + m - disc;
    if abs(e1 - d) <= abs(e2 - d) {
        e1
    } else {
        e2
    }
}

/// Right eigenvectors of an upper triangular matrix, unnormalized.
fn triangular_eigenvectors<T: Real>(t: &Matrix<T>) -> Matrix<T> {
    let n = t.rows();
    let ulp = T::epsilon();
    let smlnum = T::min_positive_value() * (T::of(n as f64) / ulp);
    let tnorm = t.max_abs();
    let big = T::one() / (smlnum * T::of(1e10)).max(T::of(1e-280));
    let mut v = Matrix::zeros(n, n);
    for k in 0..n {
        let lam = t[(k, k)];
        let smin = (ulp * abs1(lam)).max(ulp * tnorm * T::of(1e-3)).max(smlnum);
        let mut x = vec![Complex::zero(); k + 1];
        x[k] = Complex::one();
        for i in (0..k).rev() {
            let mut s = t[(i, k)];
            for j in (i + 1)..k {
                s += t[(i, j)] * x[j];
            }
            let mut d = t[(i, i)] - lam;
            if abs1(d) < smin {
                d = Complex::new(smin, T::zero());
            }
            x[i] = -s / d;
            if abs(x[i]) > big {
                let sc = T::one() / abs(x[i]);
                x.iter_mut().for_each(|z| *z = *z * sc);
            }
        }
        for (i, &xi) in x.iter().enumerate() {
            v[(i, k)] = xi;
        }
    }
    v
}

/// Estimates `‖A‖₂` by power iteration on `A^* A`.
pub fn norm2_estimate<T: Real>(a: &Matrix<T>) -> T {
    let n = a.cols();
    if n == 0 || a.rows() == 0 {
        return T::zero();
    }
    let mut x: Vec<Complex<T>> = (0..n)
        .map(|i| Complex::new(T::one(), T::of(0.1 * ((i % 7) as f64))))
        .collect();
    let nx = vec_norm(&x);
    x.iter_mut().for_each(|z| *z = *z / nx);
    let mut est = T::zero();
    for _ in 0..100 {
        let y = a.matvec(&x);
        let ny = vec_norm(&y);
        if ny == T::zero() {
            return est;
        }
        let w = a.adjoint_matvec(&y);
        let nw = vec_norm(&w);
        let prev = est;
        est = ny;
        if nw == T::zero() {
            return est;
        }
        x = w.into_iter().map(|z| z / nw).collect();
        if (est - prev).abs() <= T::of(1e-10) * est {
            break;
        }
    }
    est
}

fn normalize_in_place<T: Real>(m: &mut Matrix<T>) {
    for j in 0..m.cols() {
        let col = m.column(j);
        let nrm = vec_norm(&col);
        if nrm > T::zero() {
            let col: Vec<_> = col.into_iter().map(|z| z / nrm).collect();
            m.set_column(j, &col);
        }
    }
}

/// Left eigenvectors `Y = X^{-*}` with `diag(Y^* X)` rescaled to one.
/// Returns `None` when `X` is numerically singular.
pub(crate) fn left_from_right<T: Real>(x: &Matrix<T>) -> Option<Matrix<T>> {
    let lu = Lu::new(x).ok()?;
    let xinv = lu.inverse();
    let mut y = xinv.adjoint();
    for j in 0..y.cols() {
        let yj = y.column(j);
        let c = dot(&yj, &x.column(j));
        if c.is_zero() || !crate::scalar::is_finite(c) {
            return None;
        }
        let cc = c.conj();
        let yj: Vec<_> = yj.into_iter().map(|z| z / cc).collect();
        y.set_column(j, &yj);
    }
    Some(y)
}

/// Right eigenvectors only, unit 2-norm columns (no left vectors, no
/// condition estimate). Used by one-sided hot loops.
pub fn eig_right<T: Real>(a: &Matrix<T>) -> Result<(Vec<Complex<T>>, Matrix<T>)> {
    let s = schur(a)?;
    let values = s.t.diagonal();
    let v = triangular_eigenvectors(&s.t);
    let mut x = s.z.matmul(&v);
    normalize_in_place(&mut x);
    Ok((values, x))
}

/// Full eigendecomposition with biorthogonal left vectors.
pub fn eig<T: Real>(a: &Matrix<T>) -> Result<EigenDecomposition<T>> {
    let (values, x) = eig_right(a)?;
    let n = values.len();
    if n == 0 {
        return Ok(EigenDecomposition {
            values,
            right_vectors: x,
            left_vectors: Some(Matrix::zeros(0, 0)),
            condition_estimate: T::one(),
        });
    }
    let left = left_from_right(&x);
    let threshold = EigenDecomposition::<T>::defective_threshold(n);
    let (left, cond) = match left {
        Some(y) => {
            let cond = (norm2_estimate(&x) * norm2_estimate(&y)).max(T::one());
            if cond > threshold || !cond.is_finite() {
                (None, cond)
            } else {
                (Some(y), cond)
            }
        }
        None => (None, T::infinity()),
    };
    Ok(EigenDecomposition {
        values,
        right_vectors: x,
        left_vectors: left,
        condition_estimate: cond,
    })
}

/// Eigendecomposition of the pencil `(A, B)` realized as `eig(B^{-1} A)`.
pub fn generalized_eig<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Result<EigenDecomposition<T>> {
    if !a.is_square() || !b.is_square() || a.rows() != b.rows() {
        return Err(Error::DimensionMismatch(format!(
            "pencil of {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    eig(&solve(b, a)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cond2;
    use crate::random::{complex_gaussian_matrix, rng_from_seed};
    use crate::scalar::cplx;

    fn residual(a: &Matrix<f64>, d: &EigenDecomposition<f64>) -> f64 {
        let x = &d.right_vectors;
        let ax = a.matmul(x);
        let xl = x.matmul(&Matrix::from_diagonal(&d.values));
        (&ax - &xl).frobenius_norm() / a.frobenius_norm().max(1e-300)
    }

    fn sorted_re(v: &[Complex<f64>]) -> Vec<f64> {
        let mut r: Vec<f64> = v.iter().map(|z| z.re).collect();
        r.sort_by(|a, b| a.partial_cmp(b).unwrap());
        r
    }

    #[test]
    fn identity_values() {
        let d = eig(&Matrix::<f64>::identity(3)).unwrap();
        for v in &d.values {
            assert!((v - cplx(1.0, 0.0)).norm() < 1e-15);
        }
        let x = &d.right_vectors;
        assert!((&x.adjoint_mul(x) - &Matrix::identity(3)).frobenius_norm() < 1e-14);
    }

    #[test]
    fn diagonal_values_and_vectors() {
        let a = Matrix::<f64>::from_real_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 2.0, 0.0],
            vec![0.0, 0.0, 3.0],
        ]);
        let d = eig(&a).unwrap();
        assert_eq!(sorted_re(&d.values), vec![1.0, 2.0, 3.0]);
        for j in 0..3 {
            let col = d.right_vectors.column(j);
            let big = col.iter().filter(|z| (z.norm() - 1.0).abs() < 1e-14).count();
            assert_eq!(big, 1);
        }
    }

    #[test]
    fn similarity_with_known_condition() {
        // X = U diag(1, 10) with U a rotation: κ₂(X) = 10.
        let (c, s) = (0.6f64, 0.8f64);
        let x = Matrix::<f64>::from_real_rows(&[vec![c, -10.0 * s], vec![s, 10.0 * c]]);
        assert!((cond2(&x) - 10.0).abs() < 1e-12);
        let a = x
            .matmul(&Matrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, 2.0]]))
            .matmul(&crate::linalg::inverse(&x).unwrap());
        let d = eig(&a).unwrap();
        let v = sorted_re(&d.values);
        assert!((v[0] - 1.0).abs() < 1e-12 && (v[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn random_matrices_backward_stable() {
        let mut rng = rng_from_seed(2024);
        for &n in &[1usize, 2, 3, 5, 8, 20, 40] {
            let a = complex_gaussian_matrix::<f64>(n, n, &mut rng);
            let d = eig(&a).unwrap();
            assert!(!d.is_defective());
            let res = residual(&a, &d);
            assert!(res <= 1e-13 * n as f64 * d.condition_estimate, "n={n} res={res}");
            let y = d.left_vectors.as_ref().unwrap();
            let g = y.adjoint_mul(&d.right_vectors);
            assert!(
                (&g - &Matrix::identity(n)).frobenius_norm() <= n as f64 * 1e-10 * d.condition_estimate
            );
            for i in 0..n {
                assert!((g[(i, i)] - cplx(1.0, 0.0)).norm() < 1e-12);
                assert!((vec_norm(&d.right_vectors.column(i)) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn condition_estimate_close_to_cond2() {
        let mut rng = rng_from_seed(77);
        let a = complex_gaussian_matrix::<f64>(10, 10, &mut rng);
        let d = eig(&a).unwrap();
        let exact = cond2(&d.right_vectors);
        let est = d.condition_estimate;
        assert!((est / exact - 1.0).abs() < 1e-3, "{est} vs {exact}");
    }

    #[test]
    fn schur_reconstructs() {
        let mut rng = rng_from_seed(8);
        let a = complex_gaussian_matrix::<f64>(12, 12, &mut rng);
        let s = schur(&a).unwrap();
        let rec = s.z.matmul(&s.t).matmul(&s.z.adjoint());
        assert!((&rec - &a).frobenius_norm() < 1e-13 * a.frobenius_norm() * 12.0);
        assert!((&s.z.adjoint_mul(&s.z) - &Matrix::identity(12)).frobenius_norm() < 1e-13);
    }

    #[test]
    fn jordan_block_is_defective() {
        let a = Matrix::<f64>::from_real_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]);
        let d = eig(&a).unwrap();
        assert!(d.is_defective());
        assert!(matches!(d.require_nondefective(), Err(Error::Defective { .. })));
    }

    #[test]
    fn nonfinite_rejected() {
        let mut a = Matrix::<f64>::identity(2);
        a[(0, 1)] = cplx(f64::INFINITY, 0.0);
        assert_eq!(eig(&a).unwrap_err(), Error::NonFinite);
    }

    #[test]
    fn single_precision_path() {
        let mut rng = rng_from_seed(4);
        let a = complex_gaussian_matrix::<f32>(6, 6, &mut rng);
        let d = eig(&a).unwrap();
        let ax = a.matmul(&d.right_vectors);
        let xl = d.right_vectors.matmul(&Matrix::from_diagonal(&d.values));
        assert!((&ax - &xl).frobenius_norm() / a.frobenius_norm() < 1e-4);
    }

    #[test]
    fn generalized_matches_standard() {
        let mut rng = rng_from_seed(15);
        let a = complex_gaussian_matrix::<f64>(5, 5, &mut rng);
        let d1 = eig(&a).unwrap();
        let d2 = generalized_eig(&a.scale_real(2.0), &Matrix::identity(5).scale_real(2.0)).unwrap();
        for v in &d1.values {
            let best = d2.values.iter().map(|w| (v - w).norm()).fold(f64::MAX, f64::min);
            assert!(best < 1e-12);
        }
    }
}
