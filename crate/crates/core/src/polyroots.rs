//! Common roots of zero-dimensional polynomial systems as joint eigenvalues
//! of commuting multiplication matrices, plus Schur-diagonal baselines.

use std::collections::HashSet;

use num_complex::Complex;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{kron_all, schur, vec_norm, Matrix};
use crate::mep::{solve_mep, MepProblem, Strategy};
use crate::random::{derive_seed, gaussian, random_orthogonal, rng_from_seed};
use crate::rjea::{linear_combination, rjea, sample_unit_sphere, CommutingFamily, JointEigenResult, Mode};
use crate::scalar::{abs, Real};
use crate::synth::stats::median;

/// Multiplication matrices `M_{x_1}, …, M_{x_s}` of a quotient ring.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiplicationFamily<T: Real> {
    pub family: CommutingFamily<T>,
    pub basis_note: Option<String>,
}

impl<T: Real> MultiplicationFamily<T> {
    pub fn new(matrices: Vec<Matrix<T>>, basis_note: Option<String>) -> Result<Self> {
        Ok(Self {
            family: CommutingFamily::new(matrices)?,
            basis_note,
        })
    }

    pub fn s(&self) -> usize {
        self.family.d()
    }

    pub fn m(&self) -> usize {
        self.family.n()
    }
}

/// One polynomial as a list of `(coefficient, exponents)` terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub terms: Vec<(Complex<f64>, Vec<u32>)>,
}

impl Polynomial {
    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|(_, e)| e.iter().sum()).max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolynomialSystem {
    pub s: usize,
    pub polynomials: Vec<Polynomial>,
}

impl PolynomialSystem {
    pub fn new(s: usize, polynomials: Vec<Polynomial>) -> Result<Self> {
        for (i, p) in polynomials.iter().enumerate() {
            let mut seen = HashSet::new();
            for (c, e) in &p.terms {
                if e.len() != s {
                    return Err(Error::DimensionMismatch(format!(
                        "polynomial {i} has an exponent vector of length {}, expected {s}",
                        e.len()
                    )));
                }
                if !c.re.is_finite() || !c.im.is_finite() {
                    return Err(Error::NonFinite);
                }
                if !seen.insert(e.clone()) {
                    return Err(Error::InvalidArgument(format!("polynomial {i} repeats monomial {e:?}")));
                }
            }
        }
        Ok(Self { s, polynomials })
    }
}

/// Roots as the joint eigenvalues of the family.
pub fn roots_from_multiplication_matrices<T: Real>(
    fam: &MultiplicationFamily<T>,
    mode: Mode,
    seed: u64,
) -> Result<JointEigenResult<T>> {
    rjea(&fam.family, mode, seed)
}

/// Companion matrix of the monic `p(x) = c_0 + c_1 x + ⋯ + c_{n-1} x^{n-1} + x^n`,
/// coefficients given in ascending order. It represents multiplication by
/// `x` on the basis `1, x, …, x^{n-1}`.
pub fn companion<T: Real>(coefficients: &[Complex<T>]) -> Result<Matrix<T>> {
    let Some((&lead, rest)) = coefficients.split_last() else {
        return Err(Error::NotMonic("empty coefficient list".into()));
    };
    if rest.is_empty() {
        return Err(Error::NotMonic("constant polynomial".into()));
    }
    if lead != Complex::one() {
        return Err(Error::NotMonic(format!("{lead}")));
    }
    let n = rest.len();
    let mut c = Matrix::zeros(n, n);
    for j in 1..n {
        c[(j, j - 1)] = Complex::one();
    }
    for (i, &ci) in rest.iter().enumerate() {
        c[(i, n - 1)] = -ci;
    }
    Ok(c)
}

/// Multiplication matrices of `{p_k(x_k) = 0}`: `M_{x_k} = I ⊗ ⋯ ⊗ C_{p_k} ⊗ ⋯ ⊗ I`.
pub fn grid_multiplication_matrices<T: Real>(polys: &[Vec<Complex<T>>]) -> Result<MultiplicationFamily<T>> {
    let companions: Vec<Matrix<T>> = polys.iter().map(|p| companion(p)).collect::<Result<_>>()?;
    let identities: Vec<Matrix<T>> = companions.iter().map(|c| Matrix::identity(c.rows())).collect();
    let matrices = (0..companions.len())
        .map(|k| kron_all((0..companions.len()).map(|j| if j == k { &companions[j] } else { &identities[j] })))
        .collect();
    MultiplicationFamily::new(matrices, Some("tensor monomial basis below the degree box".into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchurVariant {
    /// Schur basis of `M_{x_1}`.
    FirstMatrix,
    /// Schur basis of a random combination `M(μ)`.
    RandomCombination,
}

/// Baseline roots: diagonals of `U^* M_{x_k} U` for a Schur basis `U`, in Schur order.
pub fn roots_via_schur_baseline<T: Real>(
    fam: &MultiplicationFamily<T>,
    variant: SchurVariant,
    seed: u64,
) -> Result<Vec<Vec<Complex<T>>>> {
    let basis = match variant {
        SchurVariant::FirstMatrix => fam.family.matrices()[0].clone(),
        SchurVariant::RandomCombination => {
            linear_combination(&fam.family, &sample_unit_sphere(fam.s(), seed))?
        }
    };
    let u = schur(&basis)?.z;
    let diagonals: Vec<Vec<Complex<T>>> = fam
        .family
        .matrices()
        .iter()
        .map(|m| u.adjoint().matmul(&m.matmul(&u)).diagonal())
        .collect();
    Ok((0..fam.m()).map(|i| diagonals.iter().map(|d| d[i]).collect()).collect())
}

/// `max_i |p_i(z)| / (1 + Σ|c| · max(1, ‖z‖_∞)^{deg p_i})`.
pub fn evaluate_system_residual(system: &PolynomialSystem, root: &[Complex<f64>]) -> Result<f64> {
    if root.len() != system.s {
        return Err(Error::DimensionMismatch(format!(
            "point of length {} for {} variables",
            root.len(),
            system.s
        )));
    }
    let radius = root.iter().map(|z| abs(*z)).fold(1.0, f64::max);
    let mut worst: f64 = 0.0;
    for p in &system.polynomials {
        let mut value: Complex<f64> = Complex::zero();
        for (c, e) in &p.terms {
            let monomial = root
                .iter()
                .zip(e)
                .fold(Complex::<f64>::one(), |acc, (z, &k)| acc * z.powu(k));
            value += c * monomial;
        }
        let coef: f64 = p.terms.iter().map(|(c, _)| c.norm()).sum();
        let scale = 1.0 + coef * radius.powi(p.degree() as i32);
        worst = worst.max(value.norm() / scale);
    }
    Ok(worst)
}

/// The point every σ-system shares.
pub const SIGMA_ROOT: [f64; 2] = [1.0 / 3.0, 1.0 / 3.0];

/// `p_i(x) = (x_i − 1/3)² + σ Σ_j q_ij (x_j − 1/3)`.
pub fn sigma_system(sigma: f64, q: [[f64; 2]; 2]) -> PolynomialSystem {
    let t = 1.0 / 3.0;
    let polys = (0..2)
        .map(|i| {
            // expand about the origin
            let mut sq = [0u32; 2];
            sq[i] = 2;
            let mut lin = [0.0; 2];
            lin[i] += -2.0 * t;
            for j in 0..2 {
                lin[j] += sigma * q[i][j];
            }
            let constant = t * t - sigma * t * (q[i][0] + q[i][1]);
            Polynomial {
                terms: vec![
                    (Complex::new(1.0, 0.0), sq.to_vec()),
                    (Complex::new(lin[0], 0.0), vec![1, 0]),
                    (Complex::new(lin[1], 0.0), vec![0, 1]),
                    (Complex::new(constant, 0.0), vec![0, 0]),
                ],
            }
        })
        .collect();
    PolynomialSystem {
        s: 2,
        polynomials: polys,
    }
}

/// Two-parameter MEP whose characteristic polynomials are the σ-system:
/// `det [[u_i, L_i], [−1, u_i]] = u_i² + L_i` with `u_i = x_i − 1/3` and
/// `L_i = σ Σ_j q_ij u_j`.
pub fn sigma_determinantal_problem<T: Real>(sigma: f64, q: [[f64; 2]; 2]) -> Result<MepProblem<T>> {
    let t = 1.0 / 3.0;
    let m = |rows: [[f64; 2]; 2]| Matrix::<T>::from_real_rows(&[rows[0].to_vec(), rows[1].to_vec()]);
    let rows = (0..2)
        .map(|i| {
            let l0 = -sigma * t * (q[i][0] + q[i][1]);
            // W_i(x) = A_i0 − x_1 A_i1 − x_2 A_i2
            let a0 = m([[-t, l0], [-1.0, -t]]);
            let ak = |k: usize| {
                let diag = if k == i { -1.0 } else { 0.0 };
                m([[diag, -sigma * q[i][k]], [0.0, diag]])
            };
            vec![a0, ak(0), ak(1)]
        })
        .collect();
    MepProblem::new(rows)
}

/// Random σ-system instance for one trial: Gaussian `q_ij`, and each
/// `W_i` replaced by `P_i W_i Q_i` with random orthogonal `P_i`, `Q_i`. The
/// equivalence keeps `det W_i` up to sign but hides the zero pattern, so
/// roundoff in any entry reaches the constant term of `p_i`.
pub fn sigma_trial_problem<T: Real>(sigma: f64, seed: u64) -> Result<MepProblem<T>> {
    let mut rng = rng_from_seed(seed);
    let mut q = [[0.0; 2]; 2];
    for row in &mut q {
        for v in row.iter_mut() {
            *v = gaussian::<f64>(&mut rng);
        }
    }
    let plain = sigma_determinantal_problem::<T>(sigma, q)?;
    let rows = plain
        .matrices()
        .iter()
        .map(|row| {
            let p = random_orthogonal::<T>(2, &mut rng);
            let r = random_orthogonal::<T>(2, &mut rng);
            row.iter().map(|a| p.matmul(a).matmul(&r)).collect()
        })
        .collect();
    MepProblem::new(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaRow {
    pub sigma: f64,
    pub median_error: f64,
    pub trials: usize,
}

/// Median distance from `(1/3, 1/3)` to the nearest computed eigenvalue
/// tuple, per σ. `builder(σ, trial_seed)` supplies the two-parameter problem.
pub fn sigma_study<F>(builder: F, sigmas: &[f64], trials: usize, seed: u64) -> Result<Vec<SigmaRow>>
where
    F: Fn(f64, u64) -> Result<MepProblem<f64>> + Sync,
{
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    sigmas
        .iter()
        .enumerate()
        .map(|(si, &sigma)| {
            let errors: Vec<f64> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let trial_seed = derive_seed(derive_seed(seed, si as u64), t as u64);
                    let problem = builder(sigma, trial_seed)?;
                    let sol = solve_mep(&problem, Mode::Rq2, trial_seed, Strategy::Pencil)?;
                    Ok(sol
                        .eigenvalues
                        .iter()
                        .map(|z| {
                            let diff: Vec<Complex<f64>> =
                                z.iter().zip(SIGMA_ROOT).map(|(a, b)| a - Complex::new(b, 0.0)).collect();
                            vec_norm(&diff)
                        })
                        .fold(f64::INFINITY, f64::min))
                })
                .collect::<Result<_>>()?;
            Ok(SigmaRow {
                sigma,
                median_error: median(&errors),
                trials,
            })
        })
        .collect()
}
