use num_complex::Complex;
use num_traits::Zero;

use super::matrix::Matrix;
use crate::error::{Error, Result};
use crate::scalar::{abs, Real};

/// LU factorization with partial pivoting, `P A = L U`, stored compactly.
#[derive(Clone, Debug)]
pub struct Lu<T: Real> {
    lu: Matrix<T>,
    perm: Vec<usize>,
}

impl<T: Real> Lu<T> {
    /// Factors a square matrix. A pivot below `n·u·‖A‖_F` is reported as
    /// [`Error::Singular`].
    pub fn new(a: &Matrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "LU of a {}x{} matrix",
                a.rows(),
                a.cols()
            )));
        }
        if !a.is_finite() {
            return Err(Error::NonFinite);
        }
        let n = a.rows();
        let norm = a.frobenius_norm();
        let threshold = T::of(n as f64) * T::unit_roundoff() * norm;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, abs(lu[(i, k)])))
                .fold((k, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax <= threshold || pmax == T::zero() {
                return Err(Error::Singular {
                    pivot: pmax.to_f64_lossy(),
                    threshold: threshold.to_f64_lossy(),
                    condition: if pmax == T::zero() {
                        f64::INFINITY
                    } else {
                        (norm / pmax).to_f64_lossy()
                    },
                });
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    let tmp = lu[(p, j)];
                    lu[(p, j)] = lu[(k, j)];
                    lu[(k, j)] = tmp;
                }
            }
            let pivot = lu[(k, k)];
            for i in (k + 1)..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f.is_zero() {
                    continue;
                }
                for j in (k + 1)..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= f * u;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows()
    }

    /// Solves `A x = b` for one right-hand side.
    pub fn solve_vec(&self, b: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut x: Vec<Complex<T>> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let mut s = x[i];
            for j in 0..i {
                s -= row[j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= row[j] * x[j];
            }
            x[i] = s / row[i];
        }
        x
    }

    /// Solves `A^* x = b`.
    pub fn solve_adjoint_vec(&self, b: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        // A = P^T L U  =>  A^* = U^* L^* P
        let mut z = b.to_vec();
        for i in 0..n {
            let mut s = z[i];
            for j in 0..i {
                s -= self.lu[(j, i)].conj() * z[j];
            }
            z[i] = s / self.lu[(i, i)].conj();
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for j in (i + 1)..n {
                s -= self.lu[(j, i)].conj() * z[j];
            }
            z[i] = s;
        }
        let mut x = vec![Complex::zero(); n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = z[i];
        }
        x
    }

    pub fn solve(&self, b: &Matrix<T>) -> Matrix<T> {
        assert_eq!(b.rows(), self.dim());
        let mut out = Matrix::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            out.set_column(j, &self.solve_vec(&b.column(j)));
        }
        out
    }

    pub fn inverse(&self) -> Matrix<T> {
        self.solve(&Matrix::identity(self.dim()))
    }

    pub fn determinant(&self) -> Complex<T> {
        let mut det = Complex::new(T::one(), T::zero());
        for i in 0..self.dim() {
            det = det * self.lu[(i, i)];
        }
        // parity of the row permutation
        let mut seen = vec![false; self.perm.len()];
        let mut swaps = 0usize;
        for start in 0..self.perm.len() {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut j = start;
            while !seen[j] {
                seen[j] = true;
                j = self.perm[j];
                len += 1;
            }
            swaps += len - 1;
        }
        if swaps % 2 == 1 {
            -det
        } else {
            det
        }
    }
}

/// Solves `A X = B`.
pub fn solve<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch(format!(
            "solve: A is {}x{}, B has {} rows",
            a.rows(),
            a.cols(),
            b.rows()
        )));
    }
    Ok(Lu::new(a)?.solve(b))
}

pub fn inverse<T: Real>(a: &Matrix<T>) -> Result<Matrix<T>> {
    Ok(Lu::new(a)?.inverse())
}
