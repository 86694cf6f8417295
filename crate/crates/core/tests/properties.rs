use jointeig::io::{family_from_json, family_to_json, format_real, mep_from_json, mep_to_json};
use jointeig::linalg::{cond2, eig, kron, normalize_columns, Matrix};
use jointeig::mep::{delta_matvec, operator_determinant, solve_mep, MepProblem, Strategy as MepStrategy, TensorVector};
use jointeig::perturbation::{block_diagonalize, separation_d_mu, spectral_projector};
use jointeig::polyroots::{grid_multiplication_matrices, roots_from_multiplication_matrices};
use jointeig::random::{complex_gaussian_matrix, complex_gaussian_vector, random_orthogonal, rng_from_seed};
use jointeig::rjea::{linear_combination, projection_defect, rjea, sample_unit_sphere, CommutingFamily, Mode};
use jointeig::synth::{make_family, match_eigenvalues, FamilySpec};
use num_complex::Complex;
use proptest::prelude::*;

fn c(x: f64) -> Complex<f64> {
    Complex::new(x, 0.0)
}

fn max_gap(computed: &[Vec<Complex<f64>>], reference: &[Vec<Complex<f64>>]) -> f64 {
    let m = match_eigenvalues(computed, reference).unwrap();
    reference
        .iter()
        .enumerate()
        .map(|(j, r)| r.iter().zip(&computed[m[j]]).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
        .fold(0.0, f64::max)
}

fn random_matrix(n: usize, seed: u64) -> Matrix<f64> {
    complex_gaussian_matrix(n, n, &mut rng_from_seed(seed))
}

/// Exactly commuting family `X diag(Λ_k) X⁻¹` with integer eigenvalues.
fn similar_family(n: usize, d: usize, seed: u64) -> (CommutingFamily<f64>, Vec<Vec<Complex<f64>>>) {
    let mut rng = rng_from_seed(seed);
    let x = random_orthogonal::<f64>(n, &mut rng);
    let truth: Vec<Vec<Complex<f64>>> = (0..n).map(|i| (0..d).map(|k| c((i * (k + 2) + k) as f64)).collect()).collect();
    let mats = (0..d)
        .map(|k| {
            let diag = Matrix::from_diagonal(&truth.iter().map(|t| t[k]).collect::<Vec<_>>());
            x.matmul(&diag).matmul(&x.transpose())
        })
        .collect();
    (CommutingFamily::new(mats).unwrap(), truth)
}

fn random_mep(sizes: &[usize], seed: u64) -> MepProblem<f64> {
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

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eig_residual_and_biorthogonality(n in 1usize..9, seed in any::<u64>()) {
        let a = random_matrix(n, seed);
        let dec = eig(&a).unwrap();
        if dec.condition_estimate < 1e8 {
            let x = &dec.right_vectors;
            let mut r = a.matmul(x);
            r.axpy(c(-1.0), &x.matmul(&Matrix::from_diagonal(&dec.values)));
            prop_assert!(r.frobenius_norm() <= 1e-8 * a.frobenius_norm());
        }
        if let Some(y) = &dec.left_vectors {
            for (i, v) in y.adjoint_mul(&dec.right_vectors).diagonal().iter().enumerate() {
                prop_assert!((v - 1.0).norm() <= 1e-12, "entry {i}: {v}");
            }
        }
    }

    #[test]
    fn kron_mixed_product(na in 2usize..4, nb in 2usize..4, seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let a = complex_gaussian_matrix::<f64>(na, na, &mut rng);
        let b = complex_gaussian_matrix::<f64>(nb, nb, &mut rng);
        let cm = complex_gaussian_matrix::<f64>(na, na, &mut rng);
        let dm = complex_gaussian_matrix::<f64>(nb, nb, &mut rng);
        let lhs = kron(&a, &b).matmul(&kron(&cm, &dm));
        let mut diff = kron(&a.matmul(&cm), &b.matmul(&dm));
        diff.axpy(c(-1.0), &lhs);
        prop_assert!(diff.frobenius_norm() <= 1e-13 * lhs.frobenius_norm());
    }

    #[test]
    fn column_scaling_is_quasi_optimal(n in 2usize..7, seed in any::<u64>()) {
        let mut x = random_matrix(n, seed);
        // spread column norms over several decades
        for j in 0..n {
            let col: Vec<_> = x.column(j).iter().map(|v| v * 10f64.powi(j as i32 - 2)).collect();
            x.set_column(j, &col);
        }
        let bound = (n as f64).sqrt() * cond2(&x);
        prop_assert!(cond2(&normalize_columns(&x).unwrap()) <= bound * (1.0 + 1e-10));
    }

    #[test]
    fn rjea_is_deterministic(seed in any::<u64>(), family_seed in 0u64..1000) {
        let fam = make_family::<f64>(&FamilySpec::example1_with_seed(family_seed)).unwrap().family;
        for mode in [Mode::Rq1, Mode::Rq2] {
            let a = rjea(&fam, mode, seed).unwrap();
            let b = rjea(&fam, mode, seed).unwrap();
            prop_assert_eq!(&a.tuples, &b.tuples);
            prop_assert_eq!(&a.combination.mu, &b.combination.mu);
        }
    }

    #[test]
    fn hermitian_modes_agree(n in 2usize..7, d in 1usize..4, seed in any::<u64>()) {
        let (fam, truth) = similar_family(n, d, seed);
        let one = rjea(&fam, Mode::Rq1, seed).unwrap();
        let two = rjea(&fam, Mode::Rq2, seed).unwrap();
        prop_assert!(max_gap(&one.tuples, &two.tuples) <= 1e-10);
        prop_assert!(max_gap(&two.tuples, &truth) <= 1e-10);
    }

    #[test]
    fn projection_consistency(family_seed in 0u64..1000, seed in any::<u64>()) {
        let fam = make_family::<f64>(&FamilySpec::example2_with_seed(family_seed)).unwrap().family;
        let r = rjea(&fam, Mode::Rq2, seed).unwrap();
        prop_assume!(fam.commutator_residual() <= 1e-12);
        if !r.defective_flag {
            let a_mu = linear_combination(&fam, &r.combination).unwrap();
            prop_assert!(projection_defect(&r) <= 1e-8 * a_mu.frobenius_norm());
        }
    }

    #[test]
    fn permutation_equivariance(n in 2usize..7, seed in any::<u64>(), shift in 0usize..7) {
        let (fam, _) = similar_family(n, 2, seed);
        let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        let permuted: Vec<Matrix<f64>> = fam
            .matrices()
            .iter()
            .map(|a| Matrix::from_fn(n, n, |i, j| a[(perm[i], perm[j])]))
            .collect();
        let pf = CommutingFamily::new(permuted).unwrap();
        let a = rjea(&fam, Mode::Rq2, 3).unwrap();
        let b = rjea(&pf, Mode::Rq2, 3).unwrap();
        prop_assert!(max_gap(&b.tuples, &a.tuples) <= 1e-10);
    }

    #[test]
    fn kappa_and_separation_bounds(family_seed in 0u64..500, mu_seed in any::<u64>(), target in 0usize..7) {
        let s = make_family::<f64>(&FamilySpec::example1_with_seed(family_seed)).unwrap();
        let bd = block_diagonalize(&s.family, &s.ground_truth[target], 1e-8, 0).unwrap();
        let (_, kappa) = spectral_projector(&bd);
        prop_assert!(kappa >= 1.0 - 1e-12);
        let mu = sample_unit_sphere::<f64>(s.family.d(), mu_seed);
        let dm = separation_d_mu(&s.ground_truth, target, &mu);
        prop_assert!(dm <= 1.0 + 1e-12);
    }

    #[test]
    fn matching_is_a_bijection(n in 1usize..10, seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let a: Vec<Vec<Complex<f64>>> = (0..n).map(|_| complex_gaussian_vector(2, &mut rng)).collect();
        let b: Vec<Vec<Complex<f64>>> = (0..n).map(|_| complex_gaussian_vector(2, &mut rng)).collect();
        let mut m = match_eigenvalues(&a, &b).unwrap();
        m.sort_unstable();
        prop_assert_eq!(m, (0..n).collect::<Vec<_>>());
    }
}


fn mep_sizes() -> impl Strategy<Value = Vec<usize>> {
    (1usize..5).prop_flat_map(|d| proptest::collection::vec(1usize..4, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn matvec_matches_operator_determinant(sizes in mep_sizes(), seed in any::<u64>()) {
        let p = random_mep(&sizes, seed);
        let n: usize = sizes.iter().product();
        let z = complex_gaussian_vector::<f64>(n, &mut rng_from_seed(seed ^ 1));
        for j in 0..=sizes.len() {
            let w = delta_matvec(&p, j, &TensorVector::new(sizes.clone(), z.clone()).unwrap()).unwrap();
            let expect = operator_determinant(&p, j).unwrap().matvec(&z);
            let diff: f64 = w.entries().iter().zip(&expect).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            let norm: f64 = expect.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            prop_assert!(diff <= 1e-12 * norm.max(1e-300));
        }
    }

    #[test]
    fn mep_count_certificates_and_strategies(sizes in (1usize..4).prop_flat_map(|d| proptest::collection::vec(1usize..4, d)), seed in any::<u64>()) {
        let n: usize = sizes.iter().product();
        prop_assume!(n <= 64);
        let p = random_mep(&sizes, seed);
        let delta0 = operator_determinant(&p, 0).unwrap();
        prop_assume!(cond2(&delta0) <= 1e4);
        let pencil = solve_mep(&p, Mode::Rq2, seed, MepStrategy::Pencil).unwrap();
        let explicit = solve_mep(&p, Mode::Rq2, seed, MepStrategy::ExplicitInverse).unwrap();
        prop_assert_eq!(pencil.len(), n);
        prop_assert_eq!(explicit.len(), n);
        prop_assert!(pencil.max_residual() <= 1e-7);
        let scale = pencil.eigenvalues.iter().flatten().map(|v| v.norm()).fold(1.0, f64::max);
        prop_assert!(max_gap(&pencil.eigenvalues, &explicit.eigenvalues) <= 1e-8 * scale);
    }

    #[test]
    fn grid_roots_are_cartesian_product(xs in proptest::collection::vec(-4i32..5, 1..4), ys in proptest::collection::vec(-4i32..5, 1..4)) {
        let mut xs = xs; xs.sort(); xs.dedup();
        let mut ys = ys; ys.sort(); ys.dedup();
        let poly = |roots: &[i32]| {
            let mut coeffs = vec![c(1.0)];
            for &r in roots {
                let mut next = vec![c(0.0); coeffs.len() + 1];
                for (i, &a) in coeffs.iter().enumerate() {
                    next[i + 1] += a;
                    next[i] -= a * r as f64;
                }
                coeffs = next;
            }
            coeffs
        };
        let fam = grid_multiplication_matrices::<f64>(&[poly(&xs), poly(&ys)]).unwrap();
        let reference: Vec<Vec<Complex<f64>>> = xs
            .iter()
            .flat_map(|&a| ys.iter().map(move |&b| vec![c(a as f64), c(b as f64)]))
            .collect();
        let roots = roots_from_multiplication_matrices(&fam, Mode::Rq2, 0).unwrap();
        prop_assert!(max_gap(&roots.tuples, &reference) <= 1e-10);
    }

    #[test]
    fn family_json_round_trip(n in 1usize..5, d in 1usize..4, seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let fam = CommutingFamily::new((0..d).map(|_| complex_gaussian_matrix::<f64>(n, n, &mut rng)).collect()).unwrap();
        let back: CommutingFamily<f64> = family_from_json(&family_to_json(&fam)).unwrap();
        prop_assert_eq!(back.matrices(), fam.matrices());
    }

    #[test]
    fn mep_json_round_trip(sizes in mep_sizes(), seed in any::<u64>()) {
        let p = random_mep(&sizes, seed);
        let back: MepProblem<f64> = mep_from_json(&mep_to_json(&p)).unwrap();
        prop_assert_eq!(back.sizes(), p.sizes());
        prop_assert_eq!(back.matrices(), p.matrices());
    }

    #[test]
    fn reals_round_trip(x in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        let back: f64 = format_real(x).parse().unwrap();
        prop_assert_eq!(back.to_bits(), x.to_bits());
    }
}
