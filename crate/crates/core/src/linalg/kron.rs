use super::matrix::Matrix;
use crate::scalar::Real;

/// Kronecker product; entry `(i·p + k, j·q + l)` is `A(i,j)·B(k,l)` for `B` of size p×q.
pub fn kron<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    let (p, q) = (b.rows(), b.cols());
    Matrix::from_fn(a.rows() * p, a.cols() * q, |r, c| a[(r / p, c / q)] * b[(r % p, c % q)])
}

/// Kronecker product of a sequence, left to right. Empty input gives the 1×1 identity.
pub fn kron_all<'a, T: Real>(factors: impl IntoIterator<Item = &'a Matrix<T>>) -> Matrix<T> {
    factors
        .into_iter()
        .fold(Matrix::identity(1), |acc, m| kron(&acc, m))
}

/// Kronecker product of vectors, first factor's index slowest.
pub fn kron_vec<T: Real>(x: &[num_complex::Complex<T>], y: &[num_complex::Complex<T>]) -> Vec<num_complex::Complex<T>> {
    x.iter().flat_map(|&a| y.iter().map(move |&b| a * b)).collect()
}
