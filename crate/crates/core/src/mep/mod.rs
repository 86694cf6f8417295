//! Multiparameter eigenvalue problems
//! `A_{i0} x_i = λ_1 A_{i1} x_i + ⋯ + λ_d A_{id} x_i`, `i = 1..d`,
//! solved through the commuting operator determinants `Γ_k = Δ_0^{-1} Δ_k`.
//!
//! Tensor vectors are flattened in Kronecker order: `x_1 ⊗ ⋯ ⊗ x_d`, the
//! index of `x_d` varying fastest.

mod operator;
mod solve;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{norm2, Matrix};
use crate::random::{random_orthogonal, rng_from_seed, uniform};
use crate::scalar::Real;

pub use operator::{
    delta_matvec, delta_mu_matvec, gamma_matrices, operator_determinant, permutations, Permutation, DENSE_CAP,
};
pub use solve::{mep_residual, right_definite_solve, solve_mep, MepResidual, MepSolution, Strategy};

/// Largest supported parameter count (6! = 720 permutation terms).
pub const MAX_PARAMETERS: usize = 6;

#[derive(Clone, Debug, PartialEq)]
pub struct MepProblem<T: Real> {
    sizes: Vec<usize>,
    /// `matrices[i][j]` is `A_{i+1, j}`; column 0 holds the right-hand operators.
    matrices: Vec<Vec<Matrix<T>>>,
    scales: Vec<T>,
}

impl<T: Real> MepProblem<T> {
    /// `matrices` must have `d` rows of `d + 1` square blocks each, row `i`
    /// of a common size `n_i`.
    pub fn new(matrices: Vec<Vec<Matrix<T>>>) -> Result<Self> {
        let d = matrices.len();
        if d == 0 {
            return Err(Error::DimensionMismatch("a MEP needs at least one parameter".into()));
        }
        if d > MAX_PARAMETERS {
            return Err(Error::InvalidArgument(format!(
                "{d} parameters exceed the supported maximum {MAX_PARAMETERS}"
            )));
        }
        let mut sizes = Vec::with_capacity(d);
        for (i, row) in matrices.iter().enumerate() {
            if row.len() != d + 1 {
                return Err(Error::DimensionMismatch(format!(
                    "equation {} has {} blocks, expected {}",
                    i + 1,
                    row.len(),
                    d + 1
                )));
            }
            let n = row[0].rows();
            for (j, a) in row.iter().enumerate() {
                if a.rows() != n || a.cols() != n {
                    return Err(Error::DimensionMismatch(format!(
                        "block A_{{{},{}}} is {}x{}, expected {n}x{n}",
                        i + 1,
                        j,
                        a.rows(),
                        a.cols()
                    )));
                }
                if !a.is_finite() {
                    return Err(Error::NonFinite);
                }
            }
            if n == 0 {
                return Err(Error::DimensionMismatch(format!("equation {} has empty blocks", i + 1)));
            }
            sizes.push(n);
        }
        if sizes.iter().try_fold(1usize, |acc, &n| acc.checked_mul(n)).is_none() {
            return Err(Error::Overflow {
                size: usize::MAX,
                cap: DENSE_CAP,
            });
        }
        let scales = matrices
            .iter()
            .map(|row| row.iter().map(norm2).fold(T::zero(), |a, b| a + b).max(T::one()))
            .collect();
        Ok(Self { sizes, matrices, scales })
    }

    pub fn d(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// `N = n_1 ⋯ n_d`.
    pub fn total_size(&self) -> usize {
        self.sizes.iter().product()
    }

    /// `A_{i+1, j}` with zero-based equation index `i`.
    pub fn block(&self, i: usize, j: usize) -> &Matrix<T> {
        &self.matrices[i][j]
    }

    pub fn matrices(&self) -> &[Vec<Matrix<T>>] {
        &self.matrices
    }

    /// `max(1, Σ_j ‖A_{ij}‖_2)` for zero-based equation `i`.
    pub fn scale(&self, i: usize) -> T {
        self.scales[i]
    }

    pub fn is_real(&self) -> bool {
        self.matrices.iter().flatten().all(Matrix::is_real)
    }
}

/// Flattened tensor of shape `(n_1, …, n_d)` in Kronecker order.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorVector<T: Real> {
    shape: Vec<usize>,
    entries: Vec<Complex<T>>,
}

impl<T: Real> TensorVector<T> {
    pub fn new(shape: Vec<usize>, entries: Vec<Complex<T>>) -> Result<Self> {
        let count: usize = shape.iter().product();
        if count != entries.len() {
            return Err(Error::ShapeMismatch(format!(
                "shape {:?} holds {count} entries, got {}",
                shape,
                entries.len()
            )));
        }
        Ok(Self { shape, entries })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<Complex<T>> {
        self.entries
    }
}

/// Three-parameter test problem with `A_{ij} = Q_{ij} D_{ij} Q_{ij}^T + δ_{ij} I_n`,
/// `Q_{ij}` random orthogonal and `D_{ij}` diagonal, uniform in `[-1/(2n), 1/(2n)]`.
pub fn three_param_random_problem<T: Real>(n: usize, seed: u64) -> Result<MepProblem<T>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("block size {n} must be at least 2")));
    }
    let mut rng = rng_from_seed(seed);
    let half = 0.5 / n as f64;
    let mut rows = Vec::with_capacity(3);
    for i in 1..=3 {
        let mut row = Vec::with_capacity(4);
        for j in 0..=3 {
            let q = random_orthogonal::<T>(n, &mut rng);
            let diag: Vec<Complex<T>> = (0..n)
                .map(|_| Complex::new(uniform::<T>(-half, half, &mut rng), T::zero()))
                .collect();
            let mut a = q.matmul(&Matrix::from_diagonal(&diag)).matmul(&q.transpose());
            // exact symmetry, so the right-definite path sees a symmetric block
            a = Matrix::from_fn(n, n, |r, c| (a[(r, c)] + a[(c, r)]) * T::of(0.5));
            if i == j {
                for k in 0..n {
                    a[(k, k)] += Complex::new(T::one(), T::zero());
                }
            }
            row.push(a);
        }
        rows.push(row);
    }
    MepProblem::new(rows)
}
