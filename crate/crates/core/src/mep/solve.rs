use std::fmt;

use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;

use super::operator::{delta_matvec_slice, operator_determinant};
use super::MepProblem;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, congruence_inverse, dot, eig, hermitian_eig, svd_min, Lu, Matrix};
use crate::random::{gaussian, rng_from_seed};
use crate::rjea::{sample_unit_sphere, sort_order, Mode, RandomCombination};
use crate::scalar::{abs, Real};

/// How `Γ(μ)` and the quotients are formed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Forms every `Γ_k = Δ_0^{-1} Δ_k` and takes quotients with them.
    ExplicitInverse,
    /// Eigendecomposes the pencil `(Δ(μ), Δ_0)` and takes generalized
    /// quotients `w^* Δ_k z / w^* Δ_0 z` with matrix-free numerators.
    Pencil,
}

impl Strategy {
    pub fn default_for(total_size: usize) -> Self {
        if total_size <= 1024 {
            Strategy::Pencil
        } else {
            Strategy::ExplicitInverse
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::ExplicitInverse => "explicit-inverse",
            Strategy::Pencil => "pencil",
        })
    }
}

/// Certificate for one candidate eigenvalue.
#[derive(Clone, Debug, PartialEq)]
pub struct MepResidual<T: Real> {
    /// `σ_min(W_i) / max(1, Σ_j ‖A_{ij}‖_2)` per equation.
    pub residuals: Vec<T>,
    /// Right singular vectors of `σ_min(W_i)`.
    pub factors: Vec<Vec<Complex<T>>>,
}

#[derive(Clone, Debug)]
pub struct MepSolution<T: Real> {
    /// `N` tuples sorted by the eigenvalue of `Γ(μ)`.
    pub eigenvalues: Vec<Vec<Complex<T>>>,
    pub residuals: Vec<Vec<T>>,
    pub factors: Option<Vec<Vec<Vec<Complex<T>>>>>,
    pub mode: Mode,
    pub combination: RandomCombination<T>,
    /// `None` for the right-definite path.
    pub strategy: Option<Strategy>,
    pub defective_flag: bool,
    pub condition_estimate: T,
}

impl<T: Real> MepSolution<T> {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn max_residual(&self) -> T {
        self.residuals
            .iter()
            .flatten()
            .fold(T::zero(), |a, &b| if b > a || b.is_nan() { b } else { a })
    }
}

/// `W_i = A_{i0} − Σ_k λ_k A_{ik}` certified by its smallest singular value.
pub fn mep_residual<T: Real>(problem: &MepProblem<T>, lambda: &[Complex<T>]) -> Result<MepResidual<T>> {
    if lambda.len() != problem.d() {
        return Err(Error::DimensionMismatch(format!(
            "tuple of length {} for {} parameters",
            lambda.len(),
            problem.d()
        )));
    }
    let mut residuals = Vec::with_capacity(problem.d());
    let mut factors = Vec::with_capacity(problem.d());
    for i in 0..problem.d() {
        let mut w = problem.block(i, 0).clone();
        for (k, &l) in lambda.iter().enumerate() {
            w.axpy(-l, problem.block(i, k + 1));
        }
        let (s, x) = svd_min(&w);
        residuals.push(s / problem.scale(i));
        factors.push(x);
    }
    Ok(MepResidual { residuals, factors })
}

fn certify<T: Real>(problem: &MepProblem<T>, tuples: &[Vec<Complex<T>>]) -> Result<(Vec<Vec<T>>, Vec<Vec<Vec<Complex<T>>>>)> {
    let certs: Vec<MepResidual<T>> = tuples
        .par_iter()
        .map(|t| mep_residual(problem, t))
        .collect::<Result<_>>()?;
    Ok(certs.into_iter().map(|c| (c.residuals, c.factors)).unzip())
}

fn ratio<T: Real>(num: Complex<T>, den: Complex<T>) -> Result<Complex<T>> {
    if den.is_zero() || !(abs(den) > T::zero()) {
        return Err(Error::Biorthogonality(abs(den).to_f64_lossy()));
    }
    Ok(num / den)
}

/// Solves a regular MEP through the commuting family `Γ_k = Δ_0^{-1} Δ_k`.
///
/// A numerically singular `Δ_0` is reported as [`Error::Singular`]; singular
/// problems are out of scope. When `Γ(μ)` is defective the one-sided
/// quotients `x^* Δ_k x / x^* Δ_0 x` are returned and `defective_flag` is set.
pub fn solve_mep<T: Real>(
    problem: &MepProblem<T>,
    mode: Mode,
    seed: u64,
    strategy: Strategy,
) -> Result<MepSolution<T>> {
    let d = problem.d();
    let delta0 = operator_determinant(problem, 0)?;
    let lu = Lu::new(&delta0)?;
    let mu = sample_unit_sphere::<T>(d, seed);
    let deltas: Vec<Matrix<T>> = (1..=d)
        .map(|k| operator_determinant(problem, k))
        .collect::<Result<_>>()?;
    let n = delta0.rows();
    let mut delta_mu = Matrix::zeros(n, n);
    for (m, dk) in mu.mu.iter().zip(&deltas) {
        delta_mu.axpy(*m, dk);
    }

    let (values, tuples, defective, cond) = match strategy {
        Strategy::ExplicitInverse => {
            let gammas: Vec<Matrix<T>> = deltas.iter().map(|dk| lu.solve(dk)).collect();
            let mut gamma_mu = Matrix::zeros(n, n);
            for (m, g) in mu.mu.iter().zip(&gammas) {
                gamma_mu.axpy(*m, g);
            }
            let decomp = eig(&gamma_mu)?;
            let x = &decomp.right_vectors;
            let products: Vec<Matrix<T>> = gammas.iter().map(|g| g.matmul(x)).collect();
            let use_left = mode == Mode::Rq2 && decomp.left_vectors.is_some();
            let tuples = (0..n)
                .map(|i| {
                    let xi = x.column(i);
                    let yi = match (&decomp.left_vectors, use_left) {
                        (Some(y), true) => y.column(i),
                        _ => xi.clone(),
                    };
                    let den = dot(&yi, &xi);
                    products.iter().map(|p| ratio(dot(&yi, &p.column(i)), den)).collect()
                })
                .collect::<Result<Vec<Vec<_>>>>()?;
            (decomp.values, tuples, decomp.left_vectors.is_none(), decomp.condition_estimate)
        }
        Strategy::Pencil => {
            let decomp = eig(&lu.solve(&delta_mu))?;
            let x = &decomp.right_vectors;
            let use_left = mode == Mode::Rq2 && decomp.left_vectors.is_some();
            let tuples = (0..n)
                .into_par_iter()
                .map(|i| {
                    let z = x.column(i);
                    let w = match (&decomp.left_vectors, use_left) {
                        (Some(y), true) => lu.solve_adjoint_vec(&y.column(i)),
                        _ => z.clone(),
                    };
                    let den = dot(&w, &delta_matvec_slice(problem, 0, &z));
                    (1..=d)
                        .map(|k| ratio(dot(&w, &delta_matvec_slice(problem, k, &z)), den))
                        .collect()
                })
                .collect::<Result<Vec<Vec<_>>>>()?;
            (decomp.values, tuples, decomp.left_vectors.is_none(), decomp.condition_estimate)
        }
    };

    let order = sort_order(&values);
    let eigenvalues: Vec<Vec<Complex<T>>> = order.iter().map(|&i| tuples[i].clone()).collect();
    let (residuals, factors) = certify(problem, &eigenvalues)?;
    Ok(MepSolution {
        eigenvalues,
        residuals,
        factors: Some(factors),
        mode: if defective { Mode::Rq1 } else { mode },
        combination: mu,
        strategy: Some(strategy),
        defective_flag: defective,
        condition_estimate: cond,
    })
}

fn check_symmetric<T: Real>(problem: &MepProblem<T>) -> Result<()> {
    for i in 0..problem.d() {
        for j in 0..=problem.d() {
            let a = problem.block(i, j);
            let tol = T::of(100.0) * T::epsilon() * a.frobenius_norm();
            let n = a.rows();
            for r in 0..n {
                for c in 0..n {
                    if a[(r, c)].im != T::zero() || (a[(r, c)].re - a[(c, r)].re).abs() > tol {
                        return Err(Error::NotSymmetric(format!("block A_{{{},{}}}", i + 1, j)));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Right-definite path: `Δ_0 = V V^T` by Cholesky, `D_k = V^{-1} Δ_k V^{-T}`,
/// and the symmetric `D(μ)` for a random real unit `μ`. Tuples are
/// `q_i^T D_k q_i` for the orthonormal eigenvectors `q_i` of `D(μ)`.
pub fn right_definite_solve<T: Real>(problem: &MepProblem<T>, seed: u64) -> Result<MepSolution<T>> {
    check_symmetric(problem)?;
    let d = problem.d();
    let v = cholesky(&operator_determinant(problem, 0)?)?;
    let ds: Vec<Matrix<T>> = (1..=d)
        .map(|k| Ok(congruence_inverse(&v, &operator_determinant(problem, k)?)))
        .collect::<Result<_>>()?;
    let mut rng = rng_from_seed(seed);
    let mu: Vec<T> = loop {
        let g: Vec<T> = (0..d).map(|_| gaussian::<T>(&mut rng)).collect();
        let nrm = g.iter().fold(T::zero(), |a, &x| a + x * x).sqrt();
        if nrm > T::zero() {
            break g.into_iter().map(|x| x / nrm).collect();
        }
    };
    let n = v.rows();
    let mut dmu = Matrix::zeros(n, n);
    for (m, dk) in mu.iter().zip(&ds) {
        dmu.axpy(Complex::new(*m, T::zero()), dk);
    }
    let (values, q) = hermitian_eig(&dmu)?;
    let products: Vec<Matrix<T>> = ds.iter().map(|dk| dk.matmul(&q)).collect();
    // values come back ascending, which is already the output order
    let eigenvalues: Vec<Vec<Complex<T>>> = (0..n)
        .map(|i| {
            let qi = q.column(i);
            products.iter().map(|p| Complex::new(dot(&qi, &p.column(i)).re, T::zero())).collect()
        })
        .collect();
    debug_assert!(values.windows(2).all(|w| w[0] <= w[1]));
    let (residuals, factors) = certify(problem, &eigenvalues)?;
    Ok(MepSolution {
        eigenvalues,
        residuals,
        factors: Some(factors),
        // symmetric path: left and right vectors coincide
        mode: Mode::Rq2,
        combination: RandomCombination {
            mu: mu.into_iter().map(|m| Complex::new(m, T::zero())).collect(),
            seed,
        },
        strategy: None,
        defective_flag: false,
        condition_estimate: T::one(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mep::three_param_random_problem;
    use crate::random::{complex_gaussian_matrix, real_gaussian_matrix};
    use crate::synth::match_eigenvalues;

    fn scalar(x: f64) -> Matrix<f64> {
        Matrix::from_real_rows(&[vec![x]])
    }

    fn random_problem(sizes: &[usize], seed: u64) -> MepProblem<f64> {
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

    fn max_tuple_gap(a: &[Vec<Complex<f64>>], b: &[Vec<Complex<f64>>]) -> f64 {
        let m = match_eigenvalues(a, b).unwrap();
        b.iter()
            .enumerate()
            .map(|(j, t)| t.iter().zip(&a[m[j]]).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }

    #[test]
    fn scalar_mep() {
        let p = MepProblem::new(vec![
            vec![scalar(5.0), scalar(1.0), scalar(2.0)],
            vec![scalar(4.0), scalar(1.0), scalar(-1.0)],
        ])
        .unwrap();
        for strategy in [Strategy::Pencil, Strategy::ExplicitInverse] {
            for mode in [Mode::Rq1, Mode::Rq2] {
                let s = solve_mep(&p, mode, 3, strategy).unwrap();
                assert_eq!(s.len(), 1);
                assert!((s.eigenvalues[0][0] - Complex::new(13.0 / 3.0, 0.0)).norm() < 1e-12);
                assert!((s.eigenvalues[0][1] - Complex::new(1.0 / 3.0, 0.0)).norm() < 1e-12);
                assert!(s.max_residual() < 1e-14);
            }
        }
    }

    #[test]
    fn diagonal_problem_decouples() {
        // equation i: diag(a) = λ1 diag(b) + λ2 diag(c); the eigenvalues
        // are the scalar solutions for every index pair
        let e1 = [[3.0, 1.0, 1.0], [-1.0, 2.0, 1.0]];
        let e2 = [[1.0, 1.0, -1.0], [2.0, 0.5, 2.0]];
        let diag = |v: [f64; 2]| Matrix::from_real_rows(&[vec![v[0], 0.0], vec![0.0, v[1]]]);
        let row = |e: [[f64; 3]; 2]| (0..3).map(|j| diag([e[0][j], e[1][j]])).collect::<Vec<_>>();
        let p = MepProblem::new(vec![row(e1), row(e2)]).unwrap();
        let s = solve_mep(&p, Mode::Rq2, 1, Strategy::Pencil).unwrap();
        let mut expected = Vec::new();
        for a in e1 {
            for b in e2 {
                let q = MepProblem::new(vec![
                    vec![scalar(a[0]), scalar(a[1]), scalar(a[2])],
                    vec![scalar(b[0]), scalar(b[1]), scalar(b[2])],
                ])
                .unwrap();
                expected.push(solve_mep(&q, Mode::Rq2, 0, Strategy::Pencil).unwrap().eigenvalues[0].clone());
            }
        }
        assert!(max_tuple_gap(&s.eigenvalues, &expected) < 1e-12);
        assert!(s.max_residual() < 1e-14);
    }

    #[test]
    fn random_problem_residuals() {
        for seed in 0..5 {
            let p = random_problem(&[2, 2], 100 + seed);
            let s = solve_mep(&p, Mode::Rq2, seed, Strategy::Pencil).unwrap();
            assert_eq!(s.len(), 4);
            assert!(s.max_residual() <= 1e-8, "seed {seed}: {}", s.max_residual());
            let e = solve_mep(&p, Mode::Rq2, seed, Strategy::ExplicitInverse).unwrap();
            assert!(max_tuple_gap(&s.eigenvalues, &e.eigenvalues) < 1e-8);
        }
    }

    #[test]
    fn residual_certificate_contract() {
        let p = random_problem(&[3, 3], 7);
        let far = vec![Complex::new(1e3, 0.0), Complex::new(-1e3, 0.0)];
        let r = mep_residual(&p, &far).unwrap();
        assert!(r.residuals.iter().all(|&x| x >= 1e-2));
        for i in 0..2 {
            let mut w = p.block(i, 0).clone();
            for k in 0..2 {
                w.axpy(-far[k], p.block(i, k + 1));
            }
            let wx = w.matvec(&r.factors[i]);
            let sigma = r.residuals[i] * p.scale(i);
            assert!((crate::linalg::vec_norm(&wx) - sigma).abs() <= 1e-12 * crate::linalg::norm2(&w));
        }
        assert!(mep_residual(&p, &far[..1]).is_err());
    }

    #[test]
    fn singular_delta0_is_reported() {
        let i = Matrix::<f64>::identity(2);
        let p = MepProblem::new(vec![vec![i.clone(), i.clone(), i.clone()], vec![i.clone(), i.clone(), i]]).unwrap();
        assert!(matches!(solve_mep(&p, Mode::Rq2, 0, Strategy::Pencil), Err(Error::Singular { .. })));
    }

    fn symmetric(n: usize, shift: f64, scale: f64, rng: &mut crate::random::SeededRng) -> Matrix<f64> {
        let g = real_gaussian_matrix::<f64>(n, n, rng);
        Matrix::from_fn(n, n, |r, c| {
            let v = (g[(r, c)] + g[(c, r)]) * 0.5 * scale;
            if r == c {
                v + shift
            } else {
                v
            }
        })
    }

    fn right_definite_problem(seed: u64) -> MepProblem<f64> {
        let mut rng = rng_from_seed(seed);
        let n = 3;
        MepProblem::new(vec![
            vec![
                symmetric(n, 0.0, 1.0, &mut rng),
                symmetric(n, 4.0, 0.5, &mut rng),
                symmetric(n, 0.0, 0.3, &mut rng),
            ],
            vec![
                symmetric(n, 0.0, 1.0, &mut rng),
                symmetric(n, 0.0, 0.3, &mut rng),
                symmetric(n, 4.0, 0.5, &mut rng),
            ],
        ])
        .unwrap()
    }

    #[test]
    fn right_definite_matches_two_sided() {
        let p = right_definite_problem(31);
        let a = right_definite_solve(&p, 2).unwrap();
        let b = solve_mep(&p, Mode::Rq2, 2, Strategy::Pencil).unwrap();
        assert_eq!(a.len(), 9);
        assert!(max_tuple_gap(&a.eigenvalues, &b.eigenvalues) < 1e-9);
        assert!(a.max_residual() < 1e-10);
        assert!(a.combination.mu.iter().all(|m| m.im == 0.0));
    }

    #[test]
    fn right_definite_decoupled_and_errors() {
        let a10 = Matrix::from_real_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let a20 = Matrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let i = Matrix::<f64>::identity(2);
        let z = Matrix::<f64>::zeros(2, 2);
        let p = MepProblem::new(vec![
            vec![a10, i.clone(), z.clone()],
            vec![a20, z.clone(), i.clone()],
        ])
        .unwrap();
        let s = right_definite_solve(&p, 0).unwrap();
        let mut got: Vec<(f64, f64)> = s.eigenvalues.iter().map(|t| (t[0].re, t[1].re)).collect();
        let key = |t: &(f64, f64)| ((t.0 * 1e6).round() as i64, (t.1 * 1e6).round() as i64);
        got.sort_by_key(key);
        let expect = [(1.0, -1.0), (1.0, 1.0), (3.0, -1.0), (3.0, 1.0)];
        for (g, e) in got.iter().zip(expect) {
            assert!((g.0 - e.0).abs() < 1e-12 && (g.1 - e.1).abs() < 1e-12, "{got:?}");
        }

        let neg = MepProblem::new(vec![
            vec![i.clone(), i.clone(), z.clone()],
            vec![i.clone(), z.clone(), i.scale_real(-1.0)],
        ])
        .unwrap();
        assert!(matches!(right_definite_solve(&neg, 0), Err(Error::NotDefinite(_))));

        let mut rng = rng_from_seed(1);
        let nonsym = MepProblem::new(vec![
            vec![real_gaussian_matrix(2, 2, &mut rng), i.clone(), z.clone()],
            vec![i.clone(), z, i],
        ])
        .unwrap();
        assert!(matches!(right_definite_solve(&nonsym, 0), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn three_param_small() {
        let p = three_param_random_problem::<f64>(3, 4).unwrap();
        let s = solve_mep(&p, Mode::Rq2, 4, Strategy::Pencil).unwrap();
        assert_eq!(s.len(), 27);
        assert!(s.max_residual() <= 1e-8, "{}", s.max_residual());
        let r = right_definite_solve(&p, 4);
        // Δ_0 ≈ I here, so the right-definite path applies too
        let r = r.unwrap();
        assert!(max_tuple_gap(&r.eigenvalues, &s.eigenvalues) < 1e-9);
    }

    #[test]
    fn single_precision_runs() {
        let p = MepProblem::<f32>::new(vec![
            vec![Matrix::from_real_rows(&[vec![5.0]]), Matrix::from_real_rows(&[vec![1.0]]), Matrix::from_real_rows(&[vec![2.0]])],
            vec![Matrix::from_real_rows(&[vec![4.0]]), Matrix::from_real_rows(&[vec![1.0]]), Matrix::from_real_rows(&[vec![-1.0]])],
        ])
        .unwrap();
        let s = solve_mep(&p, Mode::Rq2, 0, Strategy::Pencil).unwrap();
        assert!((s.eigenvalues[0][0].re - 13.0 / 3.0).abs() < 1e-5);
    }
}
