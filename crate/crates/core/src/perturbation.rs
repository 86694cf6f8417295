//! Block diagonalization around a semisimple joint eigenvalue, condition
//! numbers, the separation `d(μ)`, first-order error bounds and perturbation
//! predictors.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{eig, inverse, norm2, orthonormal_basis, singular_values, solve, vec_norm, Matrix};
use crate::rjea::{linear_combination, sample_unit_sphere, CommutingFamily, RandomCombination};
use crate::scalar::{abs, Real};

/// `Y^* A_k X = blockdiag(λ_k I_p, A22^{(k)})` with `X = [X1 X2]`,
/// `X1^* X1 = I_p` and `Y^* X = I`.
#[derive(Clone, Debug)]
pub struct BlockDiagonalization<T: Real> {
    pub x1: Matrix<T>,
    pub x2: Matrix<T>,
    pub y1: Matrix<T>,
    pub y2: Matrix<T>,
    pub lambda: Vec<Complex<T>>,
    pub p: usize,
    pub a22_blocks: Vec<Matrix<T>>,
    /// The combination used to separate the eigenvector groups.
    pub combination: RandomCombination<T>,
}

impl<T: Real> BlockDiagonalization<T> {
    pub fn n(&self) -> usize {
        self.x1.rows()
    }

    pub fn x(&self) -> Matrix<T> {
        self.x1.hcat(&self.x2)
    }

    pub fn y(&self) -> Matrix<T> {
        self.y1.hcat(&self.y2)
    }

    /// `A22(μ) = Σ μ_k A22^{(k)}`.
    pub fn a22_combination(&self, mu: &[Complex<T>]) -> Matrix<T> {
        let m = self.n() - self.p;
        let mut out = Matrix::zeros(m, m);
        for (c, b) in mu.iter().zip(&self.a22_blocks) {
            out.axpy(*c, b);
        }
        out
    }
}

/// First-order bounds for one joint eigenvalue.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundReport<T: Real> {
    pub rq2_bound: T,
    pub rq1_bound: T,
    pub d_mu: T,
    pub kappa_lambda: T,
    pub epsilon: T,
}

/// Builds the block diagonalization of `family` around the joint eigenvalue
/// `lambda`. Eigenvalues of `A(μ)` within `tol·‖A(μ)‖_F` of `μ·λ` form the
/// group spanning `X1`.
pub fn block_diagonalize<T: Real>(
    family: &CommutingFamily<T>,
    lambda: &[Complex<T>],
    tol: T,
    seed: u64,
) -> Result<BlockDiagonalization<T>> {
    if lambda.len() != family.d() {
        return Err(Error::DimensionMismatch(format!(
            "tuple has {} entries, family has {} matrices",
            lambda.len(),
            family.d()
        )));
    }
    let mu = sample_unit_sphere::<T>(family.d(), seed);
    let a = linear_combination(family, &mu)?;
    let target = mu.apply(lambda);
    let decomp = eig(&a)?;
    let radius = tol * a.frobenius_norm().max(T::one());
    let (group, rest): (Vec<usize>, Vec<usize>) =
        (0..decomp.dim()).partition(|&i| abs(decomp.values[i] - target) <= radius);
    if group.is_empty() {
        let gap = decomp
            .values
            .iter()
            .map(|&v| abs(v - target))
            .fold(T::infinity(), T::min);
        return Err(Error::NotAnEigenvalue(gap.to_f64_lossy()));
    }
    let p = group.len();
    let xg = decomp.right_vectors.select_columns(&group);
    let sv = singular_values(&xg);
    let floor = T::unit_roundoff().sqrt();
    if sv[p - 1] <= floor * sv[0] {
        return Err(Error::NotSemisimple(format!(
            "eigenvectors of the {p}-fold group span a space of smaller dimension"
        )));
    }
    let x1 = orthonormal_basis(&xg);
    let x2 = decomp.right_vectors.select_columns(&rest);
    let x = x1.hcat(&x2);
    let y = inverse(&x).map_err(|_| Error::NotSemisimple("basis [X1 X2] is singular".into()))?.adjoint();
    let n = x.rows();
    let y1 = y.submatrix(0, n, 0, p);
    let y2 = y.submatrix(0, n, p, n);
    let mut a22_blocks = Vec::with_capacity(family.d());
    for (k, ak) in family.matrices().iter().enumerate() {
        let mut b = y.adjoint_mul(&ak.matmul(&x));
        let a22 = b.submatrix(p, n, p, n);
        for i in p..n {
            for j in p..n {
                b.as_mut_slice()[i * n + j] = Complex::new(T::zero(), T::zero());
            }
        }
        for i in 0..p {
            b.as_mut_slice()[i * n + i] -= lambda[k];
        }
        let scale = ak.frobenius_norm().max(T::min_positive_value());
        if b.frobenius_norm() > T::of(1e-8) * scale {
            return Err(Error::NotSemisimple(format!(
                "matrix {k} is not block diagonalized (defect {:e})",
                (b.frobenius_norm() / scale).to_f64_lossy()
            )));
        }
        a22_blocks.push(a22);
    }
    Ok(BlockDiagonalization {
        x1,
        x2,
        y1,
        y2,
        lambda: lambda.to_vec(),
        p,
        a22_blocks,
        combination: mu,
    })
}

/// `P = X1 Y1^*` and `κ(λ) = ‖P‖₂ = ‖Y1‖₂`.
pub fn spectral_projector<T: Real>(bd: &BlockDiagonalization<T>) -> (Matrix<T>, T) {
    let p = bd.x1.matmul(&bd.y1.adjoint());
    let kappa = norm2(&bd.y1);
    (p, kappa)
}

/// `d(μ)` for the tuple at `target_index`.
pub fn separation_d_mu<T: Real>(joint_eigs: &[Vec<Complex<T>>], target_index: usize, mu: &RandomCombination<T>) -> T {
    separation_d_mu_at(joint_eigs, &joint_eigs[target_index], mu)
}

/// `min |μ·(λ_j − λ)| / ‖λ_j − λ‖₂` over tuples distinct from `target`;
/// `+inf` when there are none.
pub fn separation_d_mu_at<T: Real>(joint_eigs: &[Vec<Complex<T>>], target: &[Complex<T>], mu: &RandomCombination<T>) -> T {
    let scale = joint_eigs
        .iter()
        .map(|t| vec_norm(t))
        .fold(vec_norm(target), T::max);
    let same = T::of(1e-14) * scale;
    let mut best = T::infinity();
    for t in joint_eigs {
        let diff: Vec<Complex<T>> = t.iter().zip(target).map(|(a, b)| *a - *b).collect();
        let nrm = vec_norm(&diff);
        if nrm <= same {
            continue;
        }
        best = best.min(abs(mu.apply(&diff)) / nrm);
    }
    best
}

/// First-order bounds for RQ1 and RQ2 at noise level `epsilon`.
pub fn evaluate_bounds<T: Real>(
    bd: &BlockDiagonalization<T>,
    joint_eigs: &[Vec<Complex<T>>],
    mu: &RandomCombination<T>,
    epsilon: T,
    left_norm: T,
) -> BoundReport<T> {
    let d_mu = separation_d_mu_at(joint_eigs, &bd.lambda, mu);
    let (_, kappa) = spectral_projector(bd);
    let d = T::of(bd.lambda.len() as f64);
    let coupling = if bd.x2.cols() == 0 {
        T::zero()
    } else {
        d.sqrt() * norm2(&bd.x2) * norm2(&bd.y2) / d_mu
    };
    BoundReport {
        rq2_bound: left_norm * epsilon,
        rq1_bound: (T::one() + coupling) * epsilon,
        d_mu,
        kappa_lambda: kappa,
        epsilon,
    }
}

/// Roundoff-level stand-in for `ε = 0`: `sqrt(Σ ‖A_k‖₂²)·u`.
pub fn roundoff_epsilon<T: Real>(family: &CommutingFamily<T>) -> T {
    let s: T = family.matrices().iter().map(|a| norm2(a).powi(2)).sum();
    s.sqrt() * T::unit_roundoff()
}

/// Upper bound on the probability that RQ1 misses the `1/R` separation:
/// `min(1, (n−p)(d−1)d / R²)`.
pub fn failure_probability_rq1(n: usize, p: usize, d: usize, r: f64) -> f64 {
    let num = (n.saturating_sub(p) * d.saturating_sub(1) * d) as f64;
    (num / (r * r)).min(1.0)
}

/// First-order predictions of the perturbed invariant-subspace bases of
/// `A + εE` from the block diagonalization of `A`:
/// `X1 − ε X2 (A22 − λI)⁻¹ Y2^* E X1` and `Y1 − ε Y2 (A22 − λI)^{-*} X2^* E^* Y1`.
pub fn predict_perturbed_eigvectors<T: Real>(
    a: &Matrix<T>,
    e: &Matrix<T>,
    epsilon: T,
    bd: &BlockDiagonalization<T>,
    lambda_mu: Complex<T>,
) -> Result<(Matrix<T>, Matrix<T>)> {
    let m = bd.n() - bd.p;
    if m == 0 {
        return Ok((bd.x1.clone(), bd.y1.clone()));
    }
    let mut shifted = bd.y2.adjoint_mul(&a.matmul(&bd.x2));
    for i in 0..m {
        shifted.as_mut_slice()[i * m + i] -= lambda_mu;
    }
    let ex1 = bd.y2.adjoint_mul(&e.matmul(&bd.x1));
    let dx = bd.x2.matmul(&solve(&shifted, &ex1)?);
    let ey1 = bd.x2.adjoint_mul(&e.adjoint().matmul(&bd.y1));
    let dy = bd.y2.matmul(&solve(&shifted.adjoint(), &ey1)?);
    let eps = Complex::new(epsilon, T::zero());
    let mut x = bd.x1.clone();
    x.axpy(-eps, &dx);
    let mut y = bd.y1.clone();
    y.axpy(-eps, &dy);
    Ok((x, y))
}

/// Eigenvalues `η` of `Y1^* E X1`, the first-order shifts of a semisimple
/// eigenvalue under `A + εE`.
pub fn semisimple_expansion_eta<T: Real>(e: &Matrix<T>, x1: &Matrix<T>, y1: &Matrix<T>) -> Result<Vec<Complex<T>>> {
    let m = y1.adjoint_mul(&e.matmul(x1));
    Ok(eig(&m)?.values)
}
