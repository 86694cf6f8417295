//! Monte-Carlo harness: repeated RJEA runs against known joint eigenvalues.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::matching::{match_eigenvalues, tuple_distance};
use super::stats::{binomial_sigma, fraction, loglog_slope, median, sorted};
use super::{add_noise, make_family, FamilySpec};
use crate::error::{Error, Result};
use crate::linalg::{cond2, eig_right, norm2};
use crate::perturbation::{block_diagonalize, failure_probability_rq1, roundoff_epsilon, separation_d_mu_at};
use crate::random::{complex_gaussian_matrix, derive_seed, rng_from_seed};
use crate::rjea::{quotient_pair, rq1_tuples, sample_unit_sphere, CommutingFamily};
use crate::scalar::Real;

/// Salt mixed into the base seed for noise draws, keeping them independent
/// of the per-trial `μ` seeds.
pub const NOISE_SALT: u64 = 0x6e6f_6973_6500_0000;

/// Seed of the noise realization for the `eps_index`-th noise level.
pub fn noise_seed(base_seed: u64, eps_index: usize) -> u64 {
    derive_seed(base_seed ^ NOISE_SALT, eps_index as u64)
}

/// Seed of the `μ` draw for trial `t`.
pub fn trial_seed(base_seed: u64, t: usize) -> u64 {
    derive_seed(base_seed, t as u64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub epsilons: Vec<f64>,
    /// Indices into the ground-truth tuples.
    pub tracked: Vec<usize>,
    pub trials: usize,
    pub base_seed: u64,
    /// Draw new noise for every trial instead of once per noise level.
    pub fresh_noise: bool,
    pub cluster_tol: Option<f64>,
}

impl TrialConfig {
    pub fn new(epsilons: Vec<f64>, tracked: Vec<usize>, trials: usize, base_seed: u64) -> Self {
        Self {
            epsilons,
            tracked,
            trials,
            base_seed,
            fresh_noise: false,
            cluster_tol: None,
        }
    }
}

/// Errors and bounds for one tracked joint eigenvalue at one noise level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackedStats {
    pub index: usize,
    /// `[re, im]` per component.
    pub lambda: Vec<[f64; 2]>,
    /// One-sided errors per trial.
    pub a: Vec<f64>,
    /// Two-sided errors per trial.
    pub b: Vec<f64>,
    pub median_a: f64,
    pub median_b: f64,
    pub bound_rq1: Vec<f64>,
    pub bound_rq2: Vec<f64>,
    pub median_bound_rq1: f64,
    pub median_bound_rq2: f64,
    pub p_b_lt_a: f64,
    pub p_b_lt_5a: f64,
    /// `κ(λ)` of the noise-free family, `NaN` when not semisimple.
    pub kappa_lambda: f64,
    pub cdf_a: Vec<f64>,
    pub cdf_b: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub epsilon: f64,
    /// `ε`, or the roundoff level `ε₀` when `ε = 0`; used in the bounds.
    pub effective_epsilon: f64,
    pub trials: usize,
    pub base_seed: u64,
    pub noise_seed: u64,
    pub fresh_noise: bool,
    /// Trials where the two-sided quotient was unavailable (RQ1 used for `b`).
    pub defective_trials: usize,
    pub tracked: Vec<TrackedStats>,
}

struct TrialOutcome {
    a: Vec<f64>,
    b: Vec<f64>,
    rq1_bound: Vec<f64>,
    rq2_bound: Vec<f64>,
    defective: bool,
}

fn pair_f64<T: Real>(z: Complex<T>) -> [f64; 2] {
    [z.re.to_f64_lossy(), z.im.to_f64_lossy()]
}

/// Runs `config.trials` RJEA trials per noise level on the family built from
/// `spec` and collects matched one- and two-sided errors.
pub fn run_trials<T: Real>(spec: &FamilySpec, config: &TrialConfig) -> Result<Vec<ExperimentReport>> {
    if config.trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    let synth = make_family::<T>(spec)?;
    let gt = &synth.ground_truth;
    for &j in &config.tracked {
        if j >= gt.len() {
            return Err(Error::InvalidArgument(format!("tracked index {j} out of range")));
        }
    }
    let d = synth.family.d();
    // bound ingredients from the exact family: √d‖X2‖‖Y2‖ and κ(λ)
    let shape: Vec<(f64, f64)> = config
        .tracked
        .iter()
        .map(|&j| match block_diagonalize(&synth.family, &gt[j], T::of(1e-8), config.base_seed) {
            Ok(bd) => {
                let c = if bd.x2.cols() == 0 {
                    0.0
                } else {
                    (d as f64).sqrt() * (norm2(&bd.x2) * norm2(&bd.y2)).to_f64_lossy()
                };
                (c, norm2(&bd.y1).to_f64_lossy())
            }
            Err(_) => (f64::NAN, f64::NAN),
        })
        .collect();
    let eps0 = roundoff_epsilon(&synth.family).to_f64_lossy();
    let mut reports = Vec::with_capacity(config.epsilons.len());
    for (ei, &eps) in config.epsilons.iter().enumerate() {
        let nseed = noise_seed(config.base_seed, ei);
        let fixed = add_noise(&synth.family, eps, nseed)?;
        let eff = if eps == 0.0 { eps0 } else { eps };
        let outcomes: Vec<TrialOutcome> = (0..config.trials)
            .into_par_iter()
            .map(|t| {
                let fresh;
                let fam = if config.fresh_noise {
                    fresh = add_noise(&synth.family, eps, derive_seed(nseed, t as u64))?;
                    &fresh
                } else {
                    &fixed
                };
                one_trial(fam, gt, config, &shape, t, eff)
            })
            .collect::<Result<_>>()?;
        let defective_trials = outcomes.iter().filter(|o| o.defective).count();
        let tracked = config
            .tracked
            .iter()
            .enumerate()
            .map(|(k, &j)| {
                let a: Vec<f64> = outcomes.iter().map(|o| o.a[k]).collect();
                let b: Vec<f64> = outcomes.iter().map(|o| o.b[k]).collect();
                let bound_rq1: Vec<f64> = outcomes.iter().map(|o| o.rq1_bound[k]).collect();
                let bound_rq2: Vec<f64> = outcomes.iter().map(|o| o.rq2_bound[k]).collect();
                TrackedStats {
                    index: j,
                    lambda: gt[j].iter().map(|&z| pair_f64(z)).collect(),
                    median_a: median(&a),
                    median_b: median(&b),
                    median_bound_rq1: median(&bound_rq1),
                    median_bound_rq2: median(&bound_rq2),
                    p_b_lt_a: fraction(a.len(), |i| b[i] < a[i]),
                    p_b_lt_5a: fraction(a.len(), |i| b[i] < 5.0 * a[i]),
                    kappa_lambda: shape[k].1,
                    cdf_a: sorted(&a),
                    cdf_b: sorted(&b),
                    a,
                    b,
                    bound_rq1,
                    bound_rq2,
                }
            })
            .collect();
        reports.push(ExperimentReport {
            epsilon: eps,
            effective_epsilon: eff,
            trials: config.trials,
            base_seed: config.base_seed,
            noise_seed: nseed,
            fresh_noise: config.fresh_noise,
            defective_trials,
            tracked,
        });
    }
    Ok(reports)
}

fn one_trial<T: Real>(
    fam: &CommutingFamily<T>,
    gt: &[Vec<Complex<T>>],
    config: &TrialConfig,
    shape: &[(f64, f64)],
    t: usize,
    eff: f64,
) -> Result<TrialOutcome> {
    let mu = sample_unit_sphere::<T>(fam.d(), trial_seed(config.base_seed, t));
    let pair = quotient_pair(fam, &mu, config.cluster_tol)?;
    // one assignment (on the one-sided tuples) pairs both quotients of the
    // same eigenvector; inside a cluster, separate matchings would compare
    // different eigenvectors
    let m = match_eigenvalues(&pair.rq1, gt)?;
    let k = config.tracked.len();
    let mut out = TrialOutcome {
        a: Vec::with_capacity(k),
        b: Vec::with_capacity(k),
        rq1_bound: Vec::with_capacity(k),
        rq2_bound: Vec::with_capacity(k),
        defective: pair.rq2.is_none(),
    };
    for (s, &j) in config.tracked.iter().enumerate() {
        let a = tuple_distance(&pair.rq1[m[j]], &gt[j]);
        let (b, left) = match &pair.rq2 {
            Some(r) => (tuple_distance(&r[m[j]], &gt[j]), pair.left_norms[m[j]].to_f64_lossy()),
            None => (a, f64::INFINITY),
        };
        let d_mu = separation_d_mu_at(gt, &gt[j], &mu).to_f64_lossy();
        let coupling = if shape[s].0 == 0.0 { 0.0 } else { shape[s].0 / d_mu };
        out.a.push(a);
        out.b.push(b);
        out.rq1_bound.push((1.0 + coupling) * eff);
        out.rq2_bound.push(left * eff);
    }
    Ok(out)
}

/// Noise levels of the `table1` preset.
pub const TABLE1_EPSILONS: [f64; 4] = [0.0, 1e-14, 1e-12, 1e-10];
/// Noise levels of the `table2` preset.
pub const TABLE2_EPSILONS: [f64; 4] = [0.0, 1e-12, 1e-10, 1e-8];
/// `δ` columns of the `table3` grid.
pub const TABLE3_DELTAS: [f64; 6] = [1e-4, 1e-6, 1e-8, 1e-10, 1e-12, 1e-14];
/// `ε` rows of the `table3` grid.
pub const TABLE3_EPSILONS: [f64; 5] = [1e-14, 1e-12, 1e-10, 1e-8, 1e-6];

/// `ex1` statistics for `λ^(1) = (1,1)`.
pub fn table1(trials: usize, base_seed: u64) -> Result<Vec<ExperimentReport>> {
    run_trials::<f64>(
        &FamilySpec::example1(),
        &TrialConfig::new(TABLE1_EPSILONS.to_vec(), vec![0], trials, base_seed),
    )
}

/// `ex2` statistics for `λ^(1) = (1,1)` and `λ^(4) = (2,1)`.
pub fn table2(trials: usize, base_seed: u64) -> Result<Vec<ExperimentReport>> {
    run_trials::<f64>(
        &FamilySpec::example2(),
        &TrialConfig::new(TABLE2_EPSILONS.to_vec(), vec![0, 3], trials, base_seed),
    )
}

/// One `(δ, ε)` cell of the `ex3` grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table3Cell {
    pub delta: f64,
    pub epsilon: f64,
    pub median_a: f64,
    pub median_b: f64,
    pub p_b_lt_a: f64,
    pub p_b_lt_5a: f64,
}

/// `ex3` grid for `λ^(1) = (1,1)`.
pub fn table3(deltas: &[f64], epsilons: &[f64], trials: usize, base_seed: u64) -> Result<Vec<Table3Cell>> {
    let mut cells = Vec::new();
    for &delta in deltas {
        let reports = run_trials::<f64>(
            &FamilySpec::example3(delta),
            &TrialConfig::new(epsilons.to_vec(), vec![0], trials, base_seed),
        )?;
        for r in reports {
            let s = &r.tracked[0];
            cells.push(Table3Cell {
                delta,
                epsilon: r.epsilon,
                median_a: s.median_a,
                median_b: s.median_b,
                p_b_lt_a: s.p_b_lt_a,
                p_b_lt_5a: s.p_b_lt_5a,
            });
        }
    }
    Ok(cells)
}

/// Median errors versus `ε` for a nondiagonalizable joint eigenvalue and a
/// simple one, with log-log slopes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectiveScaling {
    pub epsilons: Vec<f64>,
    pub defective_median_rq1: Vec<f64>,
    pub defective_median_rq2: Vec<f64>,
    pub simple_median_rq1: Vec<f64>,
    pub simple_median_rq2: Vec<f64>,
    pub defective_slope_rq1: f64,
    pub defective_slope_rq2: f64,
    pub simple_slope_rq1: f64,
    pub simple_slope_rq2: f64,
}

/// Errors of all copies of the repeated tuple at `defective` are pooled;
/// `ε = 0` rows are kept in the medians but excluded from the slopes.
pub fn defective_scaling_experiment(
    spec: &FamilySpec,
    epsilons: &[f64],
    defective: usize,
    simple: usize,
    trials: usize,
    base_seed: u64,
) -> Result<DefectiveScaling> {
    let gt = make_family::<f64>(spec)?.ground_truth;
    let copies: Vec<usize> = (0..gt.len())
        .filter(|&j| tuple_distance(&gt[j], &gt[defective]) == 0.0)
        .collect();
    let mut tracked = copies.clone();
    tracked.push(simple);
    let reports = run_trials::<f64>(spec, &TrialConfig::new(epsilons.to_vec(), tracked, trials, base_seed))?;
    let mut out = DefectiveScaling {
        epsilons: epsilons.to_vec(),
        defective_median_rq1: Vec::new(),
        defective_median_rq2: Vec::new(),
        simple_median_rq1: Vec::new(),
        simple_median_rq2: Vec::new(),
        defective_slope_rq1: f64::NAN,
        defective_slope_rq2: f64::NAN,
        simple_slope_rq1: f64::NAN,
        simple_slope_rq2: f64::NAN,
    };
    let nc = copies.len();
    for r in &reports {
        let pool_a: Vec<f64> = r.tracked[..nc].iter().flat_map(|s| s.a.iter().copied()).collect();
        let pool_b: Vec<f64> = r.tracked[..nc].iter().flat_map(|s| s.b.iter().copied()).collect();
        out.defective_median_rq1.push(median(&pool_a));
        out.defective_median_rq2.push(median(&pool_b));
        out.simple_median_rq1.push(r.tracked[nc].median_a);
        out.simple_median_rq2.push(r.tracked[nc].median_b);
    }
    out.defective_slope_rq1 = loglog_slope(epsilons, &out.defective_median_rq1);
    out.defective_slope_rq2 = loglog_slope(epsilons, &out.defective_median_rq2);
    out.simple_slope_rq1 = loglog_slope(epsilons, &out.simple_median_rq1);
    out.simple_slope_rq2 = loglog_slope(epsilons, &out.simple_median_rq2);
    Ok(out)
}

/// One row of a tail-probability table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub r: f64,
    pub probability: f64,
    /// Binomial standard error of `probability`.
    pub sigma: f64,
    pub bound: f64,
    pub samples: usize,
}

/// Empirical `Prob(d(μ) < 1/R)` over sampled `μ`, next to
/// `(n−p)(d−1)/R²`.
pub fn empirical_dmu_probability<T: Real>(
    tuples: &[Vec<Complex<T>>],
    target: usize,
    r_values: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Vec<TailRow>> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be >= 1".into()));
    }
    let d = tuples[target].len();
    let p = tuples
        .iter()
        .filter(|t| tuple_distance(t, &tuples[target]) == 0.0)
        .count();
    let dmus: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mu = sample_unit_sphere::<T>(d, trial_seed(seed, s));
            separation_d_mu_at(tuples, &tuples[target], &mu).to_f64_lossy()
        })
        .collect();
    let n = tuples.len();
    Ok(r_values
        .iter()
        .map(|&r| {
            let prob = fraction(samples, |i| dmus[i] < 1.0 / r);
            TailRow {
                r,
                probability: prob,
                sigma: binomial_sigma(prob, samples),
                bound: ((n - p) * (d - 1)) as f64 / (r * r),
                samples,
            }
        })
        .collect())
}

/// Empirical `Prob(‖λ̃_RQ1 − λ‖ > (1+R)ε)` for the tuple `target`, next to
/// `(n−p)(d−1)d·κ₂(X)/R²`. Uses the right-eigenvector-only path.
pub fn rq1_failure_probability_experiment<T: Real>(
    spec: &FamilySpec,
    epsilon: f64,
    target: usize,
    r_values: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<TailRow>> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument("noise level must be > 0".into()));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    let synth = make_family::<T>(spec)?;
    let gt = &synth.ground_truth;
    let fam = add_noise(&synth.family, epsilon, noise_seed(seed, 0))?;
    let kappa = cond2(&synth.x).to_f64_lossy();
    let (n, d) = (gt.len(), gt[0].len());
    let p = gt.iter().filter(|t| tuple_distance(t, &gt[target]) == 0.0).count();
    let errors: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mu = sample_unit_sphere::<T>(d, trial_seed(seed, t));
            let tuples = rq1_tuples(&fam, &mu)?;
            let m = match_eigenvalues(&tuples, gt)?;
            Ok(tuple_distance(&tuples[m[target]], &gt[target]))
        })
        .collect::<Result<_>>()?;
    Ok(r_values
        .iter()
        .map(|&r| {
            let prob = fraction(trials, |i| errors[i] > (1.0 + r) * epsilon);
            TailRow {
                r,
                probability: prob,
                sigma: binomial_sigma(prob, trials),
                bound: failure_probability_rq1(n, p, d, r) * kappa,
                samples: trials,
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussConditionReport {
    pub p: usize,
    pub samples: usize,
    pub t: f64,
    pub r: f64,
    pub exceedances: usize,
    pub frequency: f64,
    pub sigma: f64,
    /// `2 exp(−p t²) + p³(2√2+t)²/R²`.
    pub bound: f64,
    pub median_norm: f64,
}

/// Tail of `κ₂` of the unit-column eigenvector matrix of `p×p` complex
/// Gaussians with real and imaginary entry variance `1/(2p)`.
pub fn gaussian_eigvec_condition_experiment(p: usize, samples: usize, t: f64, r: f64, seed: u64) -> Result<GaussConditionReport> {
    if p == 0 || samples == 0 {
        return Err(Error::InvalidArgument("need p >= 1 and samples >= 1".into()));
    }
    let scale = 1.0 / (p as f64).sqrt();
    let draws: Vec<(f64, f64)> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = rng_from_seed(trial_seed(seed, s));
            let g = complex_gaussian_matrix::<f64>(p, p, &mut rng).scale_real(scale);
            let kappa = match eig_right(&g) {
                Ok((_, x)) => cond2(&x),
                Err(_) => f64::INFINITY,
            };
            (kappa, norm2(&g))
        })
        .collect();
    let exceedances = draws.iter().filter(|(k, _)| *k >= r).count();
    let frequency = exceedances as f64 / samples as f64;
    let pf = p as f64;
    let norms: Vec<f64> = draws.iter().map(|d| d.1).collect();
    Ok(GaussConditionReport {
        p,
        samples,
        t,
        r,
        exceedances,
        frequency,
        sigma: binomial_sigma(frequency, samples),
        bound: 2.0 * (-pf * t * t).exp() + pf.powi(3) * (2.0 * 2f64.sqrt() + t).powi(2) / (r * r),
        median_norm: median(&norms),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::Structure;

    fn small_spec() -> FamilySpec {
        FamilySpec {
            n: 4,
            d: 2,
            diagonals: vec![vec![1.0, 2.0, 3.0, 4.0], vec![1.0, -1.0, 2.0, 0.0]],
            kappa: 10.0,
            structure: Structure::Plain,
            seed: 1,
        }
    }

    #[test]
    fn single_trial_report_shape() {
        let r = run_trials::<f64>(&small_spec(), &TrialConfig::new(vec![1e-10], vec![0, 2], 1, 3)).unwrap();
        assert_eq!(r.len(), 1);
        for s in &r[0].tracked {
            assert_eq!(s.a.len(), 1);
            assert!(s.p_b_lt_a == 0.0 || s.p_b_lt_a == 1.0);
            assert!(s.p_b_lt_5a == 0.0 || s.p_b_lt_5a == 1.0);
        }
    }

    #[test]
    fn reports_are_reproducible() {
        let mut cfg = TrialConfig::new(vec![0.0, 1e-9], vec![1], 20, 8);
        let a = run_trials::<f64>(&small_spec(), &cfg).unwrap();
        let b = run_trials::<f64>(&small_spec(), &cfg).unwrap();
        assert_eq!(a, b);
        cfg.fresh_noise = true;
        let c = run_trials::<f64>(&small_spec(), &cfg).unwrap();
        assert_eq!(c, run_trials::<f64>(&small_spec(), &cfg).unwrap());
        assert_ne!(a[1].tracked[0].a, c[1].tracked[0].a);
    }

    #[test]
    fn zero_trials_rejected() {
        let cfg = TrialConfig::new(vec![0.0], vec![0], 0, 0);
        assert!(matches!(run_trials::<f64>(&small_spec(), &cfg), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn dmu_probability_monotone_and_degenerate() {
        let gt = make_family::<f64>(&FamilySpec::example1()).unwrap().ground_truth;
        let rows = empirical_dmu_probability(&gt, 0, &[1.0, 3.0, 10.0, 100.0], 2000, 1).unwrap();
        assert!(rows.windows(2).all(|w| w[0].probability >= w[1].probability));
        assert!((rows[1].bound - 6.0 / 9.0).abs() < 1e-15);
        let single = vec![gt[0].clone()];
        let rows = empirical_dmu_probability(&single, 0, &[3.0], 100, 1).unwrap();
        assert_eq!(rows[0].probability, 0.0);
    }

    #[test]
    fn gauss_degenerate_p1() {
        let r = gaussian_eigvec_condition_experiment(1, 50, 1.0, 2.0, 0).unwrap();
        assert_eq!(r.exceedances, 0);
    }

    #[test]
    fn tail_bound_column_formula() {
        let rows = rq1_failure_probability_experiment::<f64>(&FamilySpec::example1(), 1e-10, 0, &[10.0, 100.0], 50, 2).unwrap();
        let x = make_family::<f64>(&FamilySpec::example1()).unwrap().x;
        let k = cond2(&x);
        assert!((rows[1].bound - 12.0 * k / 1e4).abs() < 1e-15);
    }
}
