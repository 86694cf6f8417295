//! The `jointeig` command line.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::io::{
    cdf_table, family_with_truth_to_json, format_real, joint_result_value, mep_solution_value, mep_to_json,
    read_family, read_mep, read_mult, read_system, to_pretty, vector_value, write_text, CsvTable,
};
use crate::mep::{solve_mep, three_param_random_problem, Strategy};
use crate::polyroots::{
    evaluate_system_residual, roots_from_multiplication_matrices, roots_via_schur_baseline, sigma_study,
    sigma_trial_problem, SchurVariant,
};
use crate::rjea::{rjea_with, sample_unit_sphere, Mode, RjeaOptions};
use crate::synth::{
    defective_scaling_experiment, empirical_dmu_probability, gaussian_eigvec_condition_experiment, make_family,
    rq1_failure_probability_experiment, run_trials, table3, ExperimentReport, FamilySpec, TrialConfig,
    TABLE1_EPSILONS, TABLE2_EPSILONS, TABLE3_DELTAS, TABLE3_EPSILONS,
};

/// Exit status for each error class.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) => 1,
        Error::Io(_) | Error::Parse { .. } | Error::Schema(_) | Error::KindMismatch { .. } => 3,
        _ => 2,
    }
}

#[derive(Parser, Debug)]
#[command(name = "jointeig", version, about = "Joint eigenvalues of nearly commuting matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Base seed for all randomness.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Rq2)]
    mode: ModeArg,
    /// Output directory; solve commands print to stdout without it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Eigenvalue clustering tolerance (relative).
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Rq1,
    Rq2,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Rq1 => Mode::Rq1,
            ModeArg::Rq2 => Mode::Rq2,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    Explicit,
    Pencil,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SynthPreset {
    Ex1,
    Ex2,
    Ex3,
    Ex5,
    ThreeParam,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ExperimentPreset {
    Table1,
    Table2,
    Table3,
    Dmu,
    Rq1tail,
    GaussCond,
    Defective,
    SigmaStudy,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Joint eigenvalues of a family file.
    SolveJoint {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Eigenvalues of a multiparameter problem file.
    SolveMep {
        file: PathBuf,
        #[arg(long, value_enum)]
        strategy: Option<StrategyArg>,
        #[command(flatten)]
        common: Common,
    },
    /// Roots from multiplication matrices, with Schur baselines.
    SolveRoots {
        file: PathBuf,
        /// Polynomial system file for residuals.
        #[arg(long)]
        system: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Writes a synthetic family or problem file.
    Synth {
        #[arg(value_enum)]
        preset: SynthPreset,
        /// Cluster radius for ex3.
        #[arg(long, default_value_t = 1e-8)]
        delta: f64,
        /// Block size for three-param.
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Runs a seeded experiment and writes CSV tables plus a JSON report.
    Experiment {
        #[arg(value_enum)]
        preset: ExperimentPreset,
        #[arg(long)]
        trials: Option<usize>,
        /// Draw new noise for every trial instead of one fixed draw.
        #[arg(long)]
        fresh_noise: bool,
        #[command(flatten)]
        common: Common,
    },
}

/// Parses `args` (program name first), runs, and returns the exit status.
pub fn run<I, A>(args: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("JOINTEIG_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            // a pool built earlier in the process stays in place
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let probe = dir.join(".jointeig-write-check");
    fs::write(&probe, b"")?;
    fs::remove_file(&probe)?;
    Ok(())
}

fn emit(out: Option<&Path>, name: &str, value: &Value) -> Result<()> {
    let text = to_pretty(value);
    match out {
        Some(dir) => {
            prepare_dir(dir)?;
            write_text(&dir.join(name), &text)
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn check_tol(tol: Option<f64>) -> Result<Option<f64>> {
    match tol {
        Some(t) if !(t >= 0.0) || !t.is_finite() => Err(Error::InvalidArgument(format!("--tol must be >= 0, got {t}"))),
        other => Ok(other),
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::SolveJoint { file, common } => {
            let tol = check_tol(common.tol)?;
            let family = read_family::<f64>(&file)?;
            let mu = sample_unit_sphere(family.d(), common.seed);
            let result = rjea_with(
                &family,
                &mu,
                RjeaOptions {
                    mode: common.mode.into(),
                    cluster_tol: tol,
                },
            )?;
            emit(
                common.out.as_deref(),
                "joint.json",
                &joint_result_value(&result, family.commutator_residual()),
            )
        }
        Command::SolveMep { file, strategy, common } => {
            let problem = read_mep::<f64>(&file)?;
            let strategy = match strategy {
                Some(StrategyArg::Explicit) => Strategy::ExplicitInverse,
                Some(StrategyArg::Pencil) => Strategy::Pencil,
                None => Strategy::default_for(problem.total_size()),
            };
            let sol = solve_mep(&problem, common.mode.into(), common.seed, strategy)?;
            emit(common.out.as_deref(), "mep.json", &mep_solution_value(&sol))
        }
        Command::SolveRoots { file, system, common } => {
            let fam = read_mult::<f64>(&file)?;
            let system = system.map(|p| read_system(&p)).transpose()?;
            if let Some(sys) = &system {
                if sys.s != fam.s() {
                    return Err(Error::Schema(format!(
                        "system has {} variables, multiplication family has {}",
                        sys.s,
                        fam.s()
                    )));
                }
            }
            let result = roots_from_multiplication_matrices(&fam, common.mode.into(), common.seed)?;
            let first = roots_via_schur_baseline(&fam, SchurVariant::FirstMatrix, common.seed)?;
            let random = roots_via_schur_baseline(&fam, SchurVariant::RandomCombination, common.seed)?;
            let residuals = |roots: &[Vec<num_complex::Complex<f64>>]| -> Result<Option<Vec<f64>>> {
                system
                    .as_ref()
                    .map(|s| roots.iter().map(|r| evaluate_system_residual(s, r)).collect())
                    .transpose()
            };
            let tuples = |roots: &[Vec<num_complex::Complex<f64>>]| roots.iter().map(|r| vector_value(r)).collect::<Vec<_>>();
            let value = json!({
                "kind": "roots",
                "mode": result.mode.to_string(),
                "seed": common.seed,
                "commutator_residual": fam.family.commutator_residual(),
                "defective": result.defective_flag,
                "roots": tuples(&result.tuples),
                "residuals": residuals(&result.tuples)?,
                "schur_first": tuples(&first),
                "schur_first_residuals": residuals(&first)?,
                "schur_random": tuples(&random),
                "schur_random_residuals": residuals(&random)?,
            });
            emit(common.out.as_deref(), "roots.json", &value)
        }
        Command::Synth { preset, delta, n, common } => synth(preset, delta, n, &common),
        Command::Experiment {
            preset,
            trials,
            fresh_noise,
            common,
        } => experiment(preset, trials, fresh_noise, &common),
    }
}

fn synth(preset: SynthPreset, delta: f64, n: usize, common: &Common) -> Result<()> {
    let dir = common.out.clone().unwrap_or_else(|| PathBuf::from("."));
    prepare_dir(&dir)?;
    let seed = common.seed;
    let (name, text) = match preset {
        SynthPreset::ThreeParam => ("three-param.json", mep_to_json(&three_param_random_problem::<f64>(n, seed)?)),
        other => {
            let (name, spec) = match other {
                SynthPreset::Ex1 => ("ex1.json", FamilySpec::example1_with_seed(seed)),
                SynthPreset::Ex2 => ("ex2.json", FamilySpec::example2_with_seed(seed)),
                SynthPreset::Ex3 => {
                    if !(delta > 0.0) {
                        return Err(Error::InvalidArgument(format!("--delta must be > 0, got {delta}")));
                    }
                    ("ex3.json", FamilySpec::example3_with_seed(delta, seed))
                }
                _ => ("ex5.json", FamilySpec::example5_with_seed(seed)),
            };
            let s = make_family::<f64>(&spec)?;
            (name, family_with_truth_to_json(&s.family, &s.ground_truth))
        }
    };
    write_text(&dir.join(name), &text)
}

const RQ1TAIL_EPSILONS: [f64; 2] = [1e-12, 1e-9];
const RQ1TAIL_R: [f64; 4] = [10.0, 30.0, 100.0, 300.0];
const DMU_R: [f64; 3] = [3.0, 10.0, 30.0];
const DEFECTIVE_EPSILONS: [f64; 3] = [1e-12, 1e-9, 1e-6];
const SIGMAS: [f64; 5] = [1.0, 1e-1, 1e-2, 1e-3, 1e-4];

fn default_trials(preset: ExperimentPreset) -> usize {
    match preset {
        ExperimentPreset::Table1 | ExperimentPreset::Table2 | ExperimentPreset::Table3 => 1000,
        ExperimentPreset::Dmu => 100_000,
        ExperimentPreset::Rq1tail | ExperimentPreset::GaussCond => 10_000,
        ExperimentPreset::Defective => 200,
        ExperimentPreset::SigmaStudy => 50,
    }
}

const TABLE_HEADER: [&str; 7] = ["epsilon", "median_a", "bound13", "median_b", "bound12", "p_b_lt_a", "p_b_lt_5a"];

fn table_reports(
    dir: &Path,
    name: &str,
    reports: &[ExperimentReport],
    with_index: bool,
) -> Result<()> {
    let mut header: Vec<&str> = Vec::new();
    if with_index {
        header.push("lambda");
    }
    header.extend(TABLE_HEADER);
    let mut table = CsvTable::new(&header);
    let tracked: Vec<usize> = reports.first().map_or(Vec::new(), |r| r.tracked.iter().map(|t| t.index).collect());
    for (slot, &index) in tracked.iter().enumerate() {
        for (k, rep) in reports.iter().enumerate() {
            let t = &rep.tracked[slot];
            let mut row = Vec::new();
            if with_index {
                row.push((index + 1).to_string());
            }
            row.extend(
                [
                    rep.epsilon,
                    t.median_a,
                    t.median_bound_rq1,
                    t.median_b,
                    t.median_bound_rq2,
                    t.p_b_lt_a,
                    t.p_b_lt_5a,
                ]
                .map(format_real),
            );
            table.push(row);
            cdf_table(&t.a).write(&dir.join(format!("{name}_cdf_a_l{}_e{k}.csv", index + 1)))?;
            cdf_table(&t.b).write(&dir.join(format!("{name}_cdf_b_l{}_e{k}.csv", index + 1)))?;
        }
    }
    table.write(&dir.join(format!("{name}.csv")))?;
    write_text(&dir.join(format!("{name}.json")), &to_pretty(&serde_json::to_value(reports).map_err(json_err)?))
}

fn json_err(e: serde_json::Error) -> Error {
    Error::Io(e.to_string())
}

fn write_report<S: serde::Serialize>(dir: &Path, name: &str, report: &S) -> Result<()> {
    write_text(
        &dir.join(format!("{name}.json")),
        &to_pretty(&serde_json::to_value(report).map_err(json_err)?),
    )
}

fn experiment(preset: ExperimentPreset, trials: Option<usize>, fresh_noise: bool, common: &Common) -> Result<()> {
    let trials = trials.unwrap_or_else(|| default_trials(preset));
    if trials == 0 {
        return Err(Error::InvalidArgument("--trials must be >= 1".into()));
    }
    let tol = check_tol(common.tol)?;
    let dir = common.out.clone().unwrap_or_else(|| PathBuf::from("."));
    prepare_dir(&dir)?;
    let seed = common.seed;
    let config = |eps: &[f64], tracked: Vec<usize>| TrialConfig {
        fresh_noise,
        cluster_tol: tol,
        ..TrialConfig::new(eps.to_vec(), tracked, trials, seed)
    };
    match preset {
        ExperimentPreset::Table1 => {
            let reports = run_trials::<f64>(&FamilySpec::example1(), &config(&TABLE1_EPSILONS, vec![0]))?;
            table_reports(&dir, "table1", &reports, false)
        }
        ExperimentPreset::Table2 => {
            let reports = run_trials::<f64>(&FamilySpec::example2(), &config(&TABLE2_EPSILONS, vec![0, 3]))?;
            table_reports(&dir, "table2", &reports, true)
        }
        ExperimentPreset::Table3 => {
            let cells = table3(&TABLE3_DELTAS, &TABLE3_EPSILONS, trials, seed)?;
            let mut t = CsvTable::new(&["delta", "epsilon", "median_a", "median_b", "p_b_lt_a", "p_b_lt_5a"]);
            for c in &cells {
                t.push_reals(&[c.delta, c.epsilon, c.median_a, c.median_b, c.p_b_lt_a, c.p_b_lt_5a]);
            }
            t.write(&dir.join("table3.csv"))?;
            write_report(&dir, "table3", &cells)
        }
        ExperimentPreset::Dmu => {
            let gt = make_family::<f64>(&FamilySpec::example1())?.ground_truth;
            let rows = empirical_dmu_probability(&gt, 0, &DMU_R, trials, seed)?;
            let mut t = CsvTable::new(&["r", "probability", "sigma", "bound", "samples"]);
            for r in &rows {
                let mut row = [r.r, r.probability, r.sigma, r.bound].map(format_real).to_vec();
                row.push(r.samples.to_string());
                t.push(row);
            }
            t.write(&dir.join("dmu.csv"))?;
            write_report(&dir, "dmu", &rows)
        }
        ExperimentPreset::Rq1tail => {
            let mut t = CsvTable::new(&["epsilon", "r", "probability", "sigma", "bound", "samples"]);
            let mut all = Vec::new();
            for &eps in &RQ1TAIL_EPSILONS {
                let rows = rq1_failure_probability_experiment::<f64>(&FamilySpec::example1(), eps, 0, &RQ1TAIL_R, trials, seed)?;
                for r in &rows {
                    let mut row = [eps, r.r, r.probability, r.sigma, r.bound].map(format_real).to_vec();
                    row.push(r.samples.to_string());
                    t.push(row);
                }
                all.push(json!({"epsilon": eps, "rows": rows}));
            }
            t.write(&dir.join("rq1tail.csv"))?;
            write_report(&dir, "rq1tail", &all)
        }
        ExperimentPreset::GaussCond => {
            let p = 8usize;
            let r = 100.0 * (p as f64).powf(1.5);
            let rep = gaussian_eigvec_condition_experiment(p, trials, 1.0, r, seed)?;
            let mut t = CsvTable::new(&["p", "samples", "t", "r", "exceedances", "frequency", "sigma", "bound", "median_norm"]);
            t.push(vec![
                rep.p.to_string(),
                rep.samples.to_string(),
                format_real(rep.t),
                format_real(rep.r),
                rep.exceedances.to_string(),
                format_real(rep.frequency),
                format_real(rep.sigma),
                format_real(rep.bound),
                format_real(rep.median_norm),
            ]);
            t.write(&dir.join("gauss_cond.csv"))?;
            write_report(&dir, "gauss_cond", &rep)
        }
        ExperimentPreset::Defective => {
            let rep = defective_scaling_experiment(&FamilySpec::example5(), &DEFECTIVE_EPSILONS, 0, 3, trials, seed)?;
            let mut t = CsvTable::new(&[
                "epsilon",
                "defective_median_rq1",
                "defective_median_rq2",
                "simple_median_rq1",
                "simple_median_rq2",
            ]);
            for k in 0..rep.epsilons.len() {
                t.push_reals(&[
                    rep.epsilons[k],
                    rep.defective_median_rq1[k],
                    rep.defective_median_rq2[k],
                    rep.simple_median_rq1[k],
                    rep.simple_median_rq2[k],
                ]);
            }
            t.write(&dir.join("defective.csv"))?;
            write_report(&dir, "defective", &rep)
        }
        ExperimentPreset::SigmaStudy => {
            let rows = sigma_study(sigma_trial_problem::<f64>, &SIGMAS, trials, seed)?;
            let mut t = CsvTable::new(&["sigma", "median_error", "trials"]);
            for r in &rows {
                t.push(vec![format_real(r.sigma), format_real(r.median_error), r.trials.to_string()]);
            }
            t.write(&dir.join("sigma_study.csv"))?;
            write_report(&dir, "sigma_study", &rows)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["jointeig", "no-such-command"]), 1);
        assert_eq!(run(["jointeig", "solve-joint"]), 1);
        assert_eq!(run(["jointeig", "solve-joint", "--mode", "rq3", "x.json"]), 1);
        assert_eq!(run(["jointeig", "--help"]), 0);
    }

    #[test]
    fn error_classes() {
        assert_eq!(exit_code(&Error::Io("x".into())), 3);
        assert_eq!(exit_code(&Error::NotDefinite(0)), 2);
        assert_eq!(
            exit_code(&Error::Singular {
                pivot: 0.0,
                threshold: 1.0,
                condition: 1e20
            }),
            2
        );
        assert_eq!(exit_code(&Error::InvalidArgument("x".into())), 1);
    }

    #[test]
    fn missing_file_is_io() {
        assert_eq!(run(["jointeig", "solve-joint", "/nonexistent/f.json"]), 3);
    }

    #[test]
    fn synth_then_solve() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        assert_eq!(run(["jointeig", "synth", "ex1", "--seed", "1", "--out", out]), 0);
        let fam = read_family::<f64>(&dir.path().join("ex1.json")).unwrap();
        assert_eq!(fam.d(), 2);
        let file = dir.path().join("ex1.json");
        let res = dir.path().join("res");
        assert_eq!(
            run(["jointeig", "solve-joint", file.to_str().unwrap(), "--out", res.to_str().unwrap()]),
            0
        );
        assert!(res.join("joint.json").exists());
    }
}
