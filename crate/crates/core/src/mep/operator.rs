use num_complex::Complex;
use num_traits::Zero;

use super::{MepProblem, TensorVector};
use crate::error::{Error, Result};
use crate::linalg::{kron_all, Lu, Matrix};
use crate::rjea::RandomCombination;
use crate::scalar::Real;

/// Largest `N` for which operator determinants are formed densely.
pub const DENSE_CAP: usize = 4096;

/// A permutation of `0..d` with its sign.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    pub images: Vec<usize>,
    pub sign: i8,
}

/// All permutations of `0..d` in lexicographic order. The parity is updated
/// from the swap and suffix reversal of each step.
pub fn permutations(d: usize) -> Vec<Permutation> {
    let mut p: Vec<usize> = (0..d).collect();
    let mut sign = 1i8;
    let mut out = vec![Permutation {
        images: p.clone(),
        sign,
    }];
    loop {
        let Some(i) = (0..d.saturating_sub(1)).rev().find(|&i| p[i] < p[i + 1]) else {
            return out;
        };
        let j = (i + 1..d).rev().find(|&j| p[j] > p[i]).unwrap();
        p.swap(i, j);
        let len = d - i - 1;
        p[i + 1..].reverse();
        if (1 + len / 2) % 2 == 1 {
            sign = -sign;
        }
        out.push(Permutation {
            images: p.clone(),
            sign,
        });
    }
}

/// Block of equation `i` that permutation image `col` (zero-based among the
/// parameter columns) selects, with `A_{i0}` substituted into `column`.
fn factor<T: Real>(problem: &MepProblem<T>, i: usize, col: usize, column: usize) -> &Matrix<T> {
    if column != 0 && col + 1 == column {
        problem.block(i, 0)
    } else {
        problem.block(i, col + 1)
    }
}

fn check_column<T: Real>(problem: &MepProblem<T>, column: usize) -> Result<()> {
    if column > problem.d() {
        return Err(Error::InvalidArgument(format!(
            "column {column} out of range 0..={}",
            problem.d()
        )));
    }
    Ok(())
}

fn check_dense<T: Real>(problem: &MepProblem<T>) -> Result<usize> {
    let n = problem.total_size();
    if n > DENSE_CAP {
        return Err(Error::Overflow {
            size: n,
            cap: DENSE_CAP,
        });
    }
    Ok(n)
}

/// Dense `Δ_j`: the Kronecker-product determinant of the block matrix
/// `[A_{ik}]`, with column `j` replaced by `A_{·0}` when `j > 0`.
pub fn operator_determinant<T: Real>(problem: &MepProblem<T>, column: usize) -> Result<Matrix<T>> {
    check_column(problem, column)?;
    let n = check_dense(problem)?;
    let mut delta = Matrix::zeros(n, n);
    for perm in permutations(problem.d()) {
        let term = kron_all(
            perm.images
                .iter()
                .enumerate()
                .map(|(i, &c)| factor(problem, i, c, column)),
        );
        delta.axpy(Complex::new(T::of(perm.sign as f64), T::zero()), &term);
    }
    Ok(delta)
}

/// `W = Z ×_k M`: applies `M` along axis `k` of the flattened tensor.
fn mode_product<T: Real>(z: &[Complex<T>], shape: &[usize], k: usize, m: &Matrix<T>, out: &mut [Complex<T>]) {
    let nk = shape[k];
    let inner: usize = shape[k + 1..].iter().product();
    let outer: usize = shape[..k].iter().product();
    for o in 0..outer {
        let base = o * nk * inner;
        for a in 0..nk {
            let row = m.row(a);
            let dst = &mut out[base + a * inner..base + (a + 1) * inner];
            dst.iter_mut().for_each(|v| *v = Complex::zero());
            for (b, &mab) in row.iter().enumerate() {
                if mab.is_zero() {
                    continue;
                }
                let src = &z[base + b * inner..base + (b + 1) * inner];
                for (d, &s) in dst.iter_mut().zip(src) {
                    *d += mab * s;
                }
            }
        }
    }
}

pub(crate) fn delta_matvec_slice<T: Real>(problem: &MepProblem<T>, column: usize, z: &[Complex<T>]) -> Vec<Complex<T>> {
    let shape = problem.sizes();
    let n = z.len();
    let mut w = vec![Complex::zero(); n];
    let mut cur = vec![Complex::zero(); n];
    let mut next = vec![Complex::zero(); n];
    for perm in permutations(problem.d()) {
        cur.copy_from_slice(z);
        for (i, &c) in perm.images.iter().enumerate() {
            mode_product(&cur, shape, i, factor(problem, i, c, column), &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        let s = T::of(perm.sign as f64);
        for (wi, ci) in w.iter_mut().zip(&cur) {
            *wi += *ci * s;
        }
    }
    w
}

fn check_shape<T: Real>(problem: &MepProblem<T>, z: &TensorVector<T>) -> Result<()> {
    if z.shape() != problem.sizes() {
        return Err(Error::ShapeMismatch(format!(
            "tensor shape {:?} does not match problem sizes {:?}",
            z.shape(),
            problem.sizes()
        )));
    }
    Ok(())
}

/// `Δ_j z` without forming `Δ_j`, through `d!` chains of mode products.
pub fn delta_matvec<T: Real>(problem: &MepProblem<T>, column: usize, z: &TensorVector<T>) -> Result<TensorVector<T>> {
    check_column(problem, column)?;
    check_shape(problem, z)?;
    TensorVector::new(problem.sizes().to_vec(), delta_matvec_slice(problem, column, z.entries()))
}

/// `Δ(μ) z = Σ_k μ_k Δ_k z`.
pub fn delta_mu_matvec<T: Real>(
    problem: &MepProblem<T>,
    mu: &RandomCombination<T>,
    z: &TensorVector<T>,
) -> Result<TensorVector<T>> {
    check_shape(problem, z)?;
    if mu.d() != problem.d() {
        return Err(Error::DimensionMismatch(format!(
            "combination has {} coefficients, problem has {} parameters",
            mu.d(),
            problem.d()
        )));
    }
    let mut w = vec![Complex::zero(); z.entries().len()];
    for (k, &m) in mu.mu.iter().enumerate() {
        for (wi, v) in w.iter_mut().zip(delta_matvec_slice(problem, k + 1, z.entries())) {
            *wi += m * v;
        }
    }
    TensorVector::new(problem.sizes().to_vec(), w)
}

/// `Γ_k = Δ_0^{-1} Δ_k` for `k = 1..d`.
pub fn gamma_matrices<T: Real>(problem: &MepProblem<T>) -> Result<Vec<Matrix<T>>> {
    let lu = Lu::new(&operator_determinant(problem, 0)?)?;
    (1..=problem.d())
        .map(|k| Ok(lu.solve(&operator_determinant(problem, k)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vec_norm;
    use crate::random::{complex_gaussian_matrix, complex_gaussian_vector, rng_from_seed};
    use crate::rjea::sample_unit_sphere;

    fn scalar(x: f64) -> Matrix<f64> {
        Matrix::from_real_rows(&[vec![x]])
    }

    pub(crate) fn random_problem(sizes: &[usize], seed: u64) -> MepProblem<f64> {
        let mut rng = rng_from_seed(seed);
        let d = sizes.len();
        MepProblem::new(
            sizes
                .iter()
                .map(|&n| (0..=d).map(|_| complex_gaussian_matrix(n, n, &mut rng)).collect())
                .collect(),
        )
        .unwrap()
    }

    fn rel_err(a: &[Complex<f64>], b: &[Complex<f64>]) -> f64 {
        let diff: Vec<_> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        vec_norm(&diff) / vec_norm(b).max(f64::MIN_POSITIVE)
    }

    #[test]
    fn permutation_signs() {
        let p3 = permutations(3);
        let listed: Vec<(Vec<usize>, i8)> = p3.into_iter().map(|p| (p.images, p.sign)).collect();
        assert_eq!(
            listed,
            vec![
                (vec![0, 1, 2], 1),
                (vec![0, 2, 1], -1),
                (vec![1, 0, 2], -1),
                (vec![1, 2, 0], 1),
                (vec![2, 0, 1], 1),
                (vec![2, 1, 0], -1),
            ]
        );
        for d in 1..=6 {
            let ps = permutations(d);
            assert_eq!(ps.len(), (1..=d).product::<usize>());
            for p in &ps {
                // sign from the inversion count
                let inv = (0..d)
                    .flat_map(|i| (i + 1..d).map(move |j| (i, j)))
                    .filter(|&(i, j)| p.images[i] > p.images[j])
                    .count();
                assert_eq!(p.sign, if inv % 2 == 0 { 1 } else { -1 });
            }
        }
    }

    #[test]
    fn scalar_determinants() {
        let (a10, a11, a12, a20, a21, a22) = (5.0, 1.0, 2.0, 4.0, 1.0, -1.0);
        let p = MepProblem::new(vec![
            vec![scalar(a10), scalar(a11), scalar(a12)],
            vec![scalar(a20), scalar(a21), scalar(a22)],
        ])
        .unwrap();
        let d0 = operator_determinant(&p, 0).unwrap()[(0, 0)].re;
        let d1 = operator_determinant(&p, 1).unwrap()[(0, 0)].re;
        let d2 = operator_determinant(&p, 2).unwrap()[(0, 0)].re;
        assert_eq!(d0, a11 * a22 - a12 * a21);
        assert_eq!(d1, a10 * a22 - a12 * a20);
        assert_eq!(d2, a11 * a20 - a10 * a21);
        let z = TensorVector::new(vec![1, 1], vec![Complex::new(2.0, 1.0)]).unwrap();
        let w = delta_matvec(&p, 0, &z).unwrap();
        assert_eq!(w.entries()[0], Complex::new(2.0, 1.0) * d0);
        let mu = RandomCombination::fixed(vec![Complex::new(0.5, 0.0), Complex::new(0.0, 2.0)]);
        let w = delta_mu_matvec(&p, &mu, &z).unwrap();
        let expect = Complex::new(2.0, 1.0) * (mu.mu[0] * d1 + mu.mu[1] * d2);
        assert!((w.entries()[0] - expect).norm() < 1e-14);
    }

    #[test]
    fn identity_problem() {
        let i2 = Matrix::<f64>::identity(2);
        let i3 = Matrix::<f64>::identity(3);
        let z2 = Matrix::zeros(2, 2);
        let z3 = Matrix::zeros(3, 3);
        let p = MepProblem::new(vec![
            vec![i2.clone(), i2.clone(), z2.clone()],
            vec![i3.clone(), z3, i3.clone()],
        ])
        .unwrap();
        assert_eq!(operator_determinant(&p, 0).unwrap(), Matrix::identity(6));
        let mut rng = rng_from_seed(3);
        let z = TensorVector::new(vec![2, 3], complex_gaussian_vector(6, &mut rng)).unwrap();
        assert_eq!(delta_matvec(&p, 0, &z).unwrap(), z);
    }

    #[test]
    fn matvec_matches_dense() {
        let p = random_problem(&[2, 2, 2], 11);
        let mut rng = rng_from_seed(12);
        for j in 0..=3 {
            let dense = operator_determinant(&p, j).unwrap();
            for _ in 0..20 {
                let z = complex_gaussian_vector(8, &mut rng);
                let tz = TensorVector::new(vec![2, 2, 2], z.clone()).unwrap();
                let w = delta_matvec(&p, j, &tz).unwrap();
                assert!(rel_err(w.entries(), &dense.matvec(&z)) < 1e-12);
            }
        }
        let mu = sample_unit_sphere::<f64>(3, 5);
        let mut dmu = Matrix::zeros(8, 8);
        for k in 0..3 {
            dmu.axpy(mu.mu[k], &operator_determinant(&p, k + 1).unwrap());
        }
        let z = complex_gaussian_vector(8, &mut rng);
        let tz = TensorVector::new(vec![2, 2, 2], z.clone()).unwrap();
        let w = delta_mu_matvec(&p, &mu, &tz).unwrap();
        assert!(rel_err(w.entries(), &dmu.matvec(&z)) < 1e-12);
    }

    #[test]
    fn unequal_sizes_and_four_parameters() {
        let p = random_problem(&[2, 3, 1, 2], 4);
        let mut rng = rng_from_seed(5);
        let dense = operator_determinant(&p, 2).unwrap();
        let z = complex_gaussian_vector(12, &mut rng);
        let tz = TensorVector::new(vec![2, 3, 1, 2], z.clone()).unwrap();
        assert!(rel_err(delta_matvec(&p, 2, &tz).unwrap().entries(), &dense.matvec(&z)) < 1e-12);
    }

    #[test]
    fn shape_and_cap_errors() {
        let p = random_problem(&[2, 2], 1);
        let z = TensorVector::new(vec![4], vec![Complex::new(1.0, 0.0); 4]).unwrap();
        assert!(matches!(delta_matvec(&p, 0, &z), Err(Error::ShapeMismatch(_))));
        assert!(delta_matvec(&p, 3, &TensorVector::new(vec![2, 2], z.into_entries()).unwrap()).is_err());
        let big = MepProblem::new(vec![
            vec![Matrix::<f64>::identity(65); 3],
            vec![Matrix::<f64>::identity(65); 3],
        ])
        .unwrap();
        assert_eq!(
            operator_determinant(&big, 0),
            Err(Error::Overflow {
                size: 65 * 65,
                cap: DENSE_CAP
            })
        );
    }

    #[test]
    fn gammas_commute() {
        let p = random_problem(&[2, 2], 21);
        let g = gamma_matrices(&p).unwrap();
        let c = g[0].matmul(&g[1]);
        let mut diff = c.clone();
        diff.axpy(Complex::new(-1.0, 0.0), &g[1].matmul(&g[0]));
        assert!(diff.frobenius_norm() / (g[0].frobenius_norm() * g[1].frobenius_norm()) <= 1e-10);
    }
}
