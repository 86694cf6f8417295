//! Joint eigenvalues of a (nearly) commuting family from one random linear
//! combination and Rayleigh quotients.

use num_complex::Complex;
use num_traits::Zero;
use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::linalg::{dot, eig, eig_right, left_from_right, orthonormal_basis, vec_norm, EigenDecomposition, Matrix};
use crate::random::{complex_gaussian_vector, rng_from_seed};
use crate::scalar::{abs, Real};

/// Which Rayleigh quotient extracts the tuples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// One-sided `x^* A_k x`.
    Rq1,
    /// Two-sided `y^* A_k x` with `y^* x = 1`.
    Rq2,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Rq1 => "rq1",
            Mode::Rq2 => "rq2",
        })
    }
}

/// `d` square matrices of a common size `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct CommutingFamily<T: Real> {
    matrices: Vec<Matrix<T>>,
    commutator_residual: T,
}

impl<T: Real> CommutingFamily<T> {
    pub fn new(matrices: Vec<Matrix<T>>) -> Result<Self> {
        let first = matrices
            .first()
            .ok_or_else(|| Error::DimensionMismatch("family has no matrices".into()))?;
        let n = first.rows();
        for (k, m) in matrices.iter().enumerate() {
            if m.rows() != n || m.cols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "matrix {k} is {}x{}, expected {n}x{n}",
                    m.rows(),
                    m.cols()
                )));
            }
            if !m.is_finite() {
                return Err(Error::NonFinite);
            }
        }
        let commutator_residual = commutator_residual(&matrices);
        Ok(Self {
            matrices,
            commutator_residual,
        })
    }

    pub fn d(&self) -> usize {
        self.matrices.len()
    }

    pub fn n(&self) -> usize {
        self.matrices[0].rows()
    }

    pub fn matrices(&self) -> &[Matrix<T>] {
        &self.matrices
    }

    pub fn into_matrices(self) -> Vec<Matrix<T>> {
        self.matrices
    }

    /// `max_{j<k} ‖A_j A_k − A_k A_j‖_F / (‖A_j‖_F ‖A_k‖_F)`.
    pub fn commutator_residual(&self) -> T {
        self.commutator_residual
    }

    pub fn is_real(&self) -> bool {
        self.matrices.iter().all(Matrix::is_real)
    }
}

fn commutator_residual<T: Real>(matrices: &[Matrix<T>]) -> T {
    let mut worst = T::zero();
    for j in 0..matrices.len() {
        for k in (j + 1)..matrices.len() {
            let (a, b) = (&matrices[j], &matrices[k]);
            let scale = a.frobenius_norm() * b.frobenius_norm();
            if scale == T::zero() {
                continue;
            }
            let c = &a.matmul(b) - &b.matmul(a);
            worst = worst.max(c.frobenius_norm() / scale);
        }
    }
    worst
}

/// A unit vector `μ ∈ C^d` and the seed it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomCombination<T: Real> {
    pub mu: Vec<Complex<T>>,
    pub seed: u64,
}

impl<T: Real> RandomCombination<T> {
    /// Wraps a caller-chosen coefficient vector as is (no normalization).
    pub fn fixed(mu: Vec<Complex<T>>) -> Self {
        Self { mu, seed: 0 }
    }

    pub fn d(&self) -> usize {
        self.mu.len()
    }

    /// `μ · v = Σ μ_k v_k` (no conjugation).
    pub fn apply(&self, v: &[Complex<T>]) -> Complex<T> {
        self.mu.iter().zip(v).fold(Complex::zero(), |acc, (&m, &x)| acc + m * x)
    }
}

/// Uniform sample from the unit sphere of `C^d`: a normalized complex Gaussian.
pub fn sample_unit_sphere<T: Real>(d: usize, seed: u64) -> RandomCombination<T> {
    let mut rng = rng_from_seed(seed);
    loop {
        let g = complex_gaussian_vector::<T>(d, &mut rng);
        let nrm = vec_norm(&g);
        if nrm > T::zero() {
            return RandomCombination {
                mu: g.into_iter().map(|z| z / nrm).collect(),
                seed,
            };
        }
    }
}

/// `Σ μ_k A_k`.
pub fn linear_combination<T: Real>(family: &CommutingFamily<T>, mu: &RandomCombination<T>) -> Result<Matrix<T>> {
    if mu.d() != family.d() {
        return Err(Error::DimensionMismatch(format!(
            "combination has {} coefficients, family has {} matrices",
            mu.d(),
            family.d()
        )));
    }
    let n = family.n();
    let mut a = Matrix::zeros(n, n);
    for (m, ak) in mu.mu.iter().zip(family.matrices()) {
        a.axpy(*m, ak);
    }
    Ok(a)
}

/// `(x^* A_1 x, …, x^* A_d x)` for unit `x`.
pub fn rayleigh_one_sided<T: Real>(family: &CommutingFamily<T>, x: &[Complex<T>]) -> Vec<Complex<T>> {
    family.matrices().iter().map(|a| a.bilinear(x, x)).collect()
}

/// `(y^* A_k x / y^* x)_k`.
pub fn rayleigh_two_sided<T: Real>(
    family: &CommutingFamily<T>,
    x: &[Complex<T>],
    y: &[Complex<T>],
) -> Result<Vec<Complex<T>>> {
    let yx = dot(y, x);
    let floor = T::of(1e-14) * vec_norm(x) * vec_norm(y);
    if abs(yx) < floor || yx.is_zero() {
        return Err(Error::Biorthogonality(abs(yx).to_f64_lossy()));
    }
    Ok(family.matrices().iter().map(|a| a.bilinear(y, x) / yx).collect())
}

/// Output of [`rjea`]. Index `i` of every vector refers to the same
/// eigenpair of `Ã(μ)`; entries are sorted by `(Re λ_i(μ), Im λ_i(μ))`.
#[derive(Clone, Debug)]
pub struct JointEigenResult<T: Real> {
    pub tuples: Vec<Vec<Complex<T>>>,
    pub mode: Mode,
    pub combination: RandomCombination<T>,
    /// `‖ỹ_i‖₂`; infinite when the left vectors are unavailable.
    pub left_norms: Vec<T>,
    pub combination_values: Vec<Complex<T>>,
    pub defective_flag: bool,
    pub condition_estimate: T,
}

impl<T: Real> JointEigenResult<T> {
    pub fn n(&self) -> usize {
        self.tuples.len()
    }
}

/// Both quotients from a single eigendecomposition of `Ã(μ)`, unsorted.
#[derive(Clone, Debug)]
pub struct QuotientPair<T: Real> {
    pub rq1: Vec<Vec<Complex<T>>>,
    /// `None` when the eigenvector matrix is numerically singular.
    pub rq2: Option<Vec<Vec<Complex<T>>>>,
    pub values: Vec<Complex<T>>,
    pub left_norms: Vec<T>,
    pub condition_estimate: T,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RjeaOptions {
    pub mode: Mode,
    /// Relative clustering tolerance; `None` disables clustering.
    pub cluster_tol: Option<f64>,
}

impl Default for RjeaOptions {
    fn default() -> Self {
        Self {
            mode: Mode::Rq2,
            cluster_tol: None,
        }
    }
}

/// Randomized joint eigenvalue approximation with `μ` drawn from `seed`.
pub fn rjea<T: Real>(family: &CommutingFamily<T>, mode: Mode, seed: u64) -> Result<JointEigenResult<T>> {
    let mu = sample_unit_sphere(family.d(), seed);
    rjea_with(
        family,
        &mu,
        RjeaOptions {
            mode,
            cluster_tol: None,
        },
    )
}

/// [`rjea`] with a given combination and options.
pub fn rjea_with<T: Real>(
    family: &CommutingFamily<T>,
    mu: &RandomCombination<T>,
    options: RjeaOptions,
) -> Result<JointEigenResult<T>> {
    let pair = quotient_pair(family, mu, options.cluster_tol)?;
    let defective = pair.rq2.is_none();
    let (mode, tuples) = match (options.mode, pair.rq2) {
        (Mode::Rq2, Some(t)) => (Mode::Rq2, t),
        _ => (Mode::Rq1, pair.rq1),
    };
    let order = sort_order(&pair.values);
    Ok(JointEigenResult {
        tuples: order.iter().map(|&i| tuples[i].clone()).collect(),
        mode,
        combination: mu.clone(),
        left_norms: order.iter().map(|&i| pair.left_norms[i]).collect(),
        combination_values: order.iter().map(|&i| pair.values[i]).collect(),
        defective_flag: defective,
        condition_estimate: pair.condition_estimate,
    })
}

/// Eigendecomposes `Ã(μ)` once and evaluates both quotients.
pub fn quotient_pair<T: Real>(
    family: &CommutingFamily<T>,
    mu: &RandomCombination<T>,
    cluster_tol: Option<f64>,
) -> Result<QuotientPair<T>> {
    let a = linear_combination(family, mu)?;
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let mut decomp = eig(&a)?;
    if let Some(tol) = cluster_tol {
        decomp = cluster_and_orthonormalize(&decomp, T::of(tol), a.frobenius_norm());
    }
    let n = decomp.dim();
    let x = &decomp.right_vectors;
    let mut rq1 = vec![Vec::with_capacity(family.d()); n];
    let mut rq2 = decomp.left_vectors.as_ref().map(|_| vec![Vec::with_capacity(family.d()); n]);
    let xs: Vec<Vec<Complex<T>>> = (0..n).map(|i| x.column(i)).collect();
    let ys: Option<Vec<Vec<Complex<T>>>> = decomp.left_vectors.as_ref().map(|y| (0..n).map(|i| y.column(i)).collect());
    for ak in family.matrices() {
        let akx = ak.matmul(x);
        for i in 0..n {
            let col = akx.column(i);
            rq1[i].push(dot(&xs[i], &col));
            if let (Some(r), Some(ys)) = (rq2.as_mut(), ys.as_ref()) {
                r[i].push(dot(&ys[i], &col));
            }
        }
    }
    let left_norms = match ys.as_ref() {
        Some(ys) => ys.iter().map(|y| vec_norm(y)).collect(),
        None => vec![T::infinity(); n],
    };
    Ok(QuotientPair {
        rq1,
        rq2,
        values: decomp.values,
        left_norms,
        condition_estimate: decomp.condition_estimate,
    })
}

/// One-sided tuples only, skipping the left eigenvectors. Unsorted.
pub fn rq1_tuples<T: Real>(family: &CommutingFamily<T>, mu: &RandomCombination<T>) -> Result<Vec<Vec<Complex<T>>>> {
    let a = linear_combination(family, mu)?;
    let (_, x) = eig_right(&a)?;
    let n = x.cols();
    let xs: Vec<_> = (0..n).map(|i| x.column(i)).collect();
    let mut out = vec![Vec::with_capacity(family.d()); n];
    for ak in family.matrices() {
        let akx = ak.matmul(&x);
        for i in 0..n {
            out[i].push(dot(&xs[i], &akx.column(i)));
        }
    }
    Ok(out)
}

/// Indices sorting `values` by real part, then imaginary part.
pub fn sort_order<T: Real>(values: &[Complex<T>]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| {
        let (a, b) = (values[i], values[j]);
        a.re.partial_cmp(&b.re)
            .unwrap_or(Ordering::Equal)
            .then(a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal))
    });
    idx
}

/// Groups eigenvalues closer than `tol · reference_norm` (single linkage) and
/// replaces each group's right vectors by an orthonormal basis of their span.
/// Left vectors are recomputed from the new right vectors.
pub fn cluster_and_orthonormalize<T: Real>(
    decomp: &EigenDecomposition<T>,
    tol: T,
    reference_norm: T,
) -> EigenDecomposition<T> {
    let n = decomp.dim();
    let groups = cluster_groups(&decomp.values, tol * reference_norm);
    if groups.iter().all(|g| g.len() == 1) {
        return decomp.clone();
    }
    let mut x = decomp.right_vectors.clone();
    for g in groups.iter().filter(|g| g.len() > 1) {
        let q = orthonormal_basis(&decomp.right_vectors.select_columns(g));
        for (t, &j) in g.iter().enumerate() {
            x.set_column(j, &q.column(t));
        }
    }
    let left = left_from_right(&x);
    let threshold = EigenDecomposition::<T>::defective_threshold(n);
    let (left, cond) = match left {
        Some(y) => {
            let cond = (crate::linalg::norm2_estimate(&x) * crate::linalg::norm2_estimate(&y)).max(T::one());
            if cond > threshold {
                (None, cond)
            } else {
                (Some(y), cond)
            }
        }
        None => (None, T::infinity()),
    };
    EigenDecomposition {
        values: decomp.values.clone(),
        right_vectors: x,
        left_vectors: left,
        condition_estimate: cond,
    }
}

/// Connected components of the graph `|λ_i − λ_j| ≤ radius`, each sorted by index.
pub fn cluster_groups<T: Real>(values: &[Complex<T>], radius: T) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if abs(values[i] - values[j]) <= radius {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

/// `max_k |Σ μ_k t_k − λ_i(μ)|` over the result's tuples.
pub fn projection_defect<T: Real>(result: &JointEigenResult<T>) -> T {
    result
        .tuples
        .iter()
        .zip(&result.combination_values)
        .map(|(t, &l)| abs(result.combination.apply(t) - l))
        .fold(T::zero(), T::max)
}
