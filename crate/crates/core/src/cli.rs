//! The `gap` command-line tool.
//!
//! Exit statuses: 0 success, 1 usage or parse error, 2 infeasible instance,
//! failed verification or solver disagreement, 3 internal solver error (the
//! instance is written to the temp directory).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::capacitated::{solve_ga, solve_lca, SolveError, SolveReport};
use crate::hungarian::solve_max_weight_perfect;
use crate::model::{validate_instance, Assignment, Instance, Rule};
use crate::oracles::{
    brute_force_optimum, check_assignment, differential_test, instance_digest,
    random_feasible_instance, solve_flow_reference, BruteError, FlowError, GenParams,
};

#[derive(Parser, Debug)]
#[command(
    name = "gap",
    version,
    about = "Minimum-cost assignment with per-vertex demand and capacity bounds"
)]
struct Cli {
    /// Print a one-line human-readable summary on stderr.
    #[arg(long, global = true)]
    summary: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve an instance file and print the result as JSON.
    Solve {
        #[arg(long, value_enum, default_value_t = Algorithm::Ga)]
        algorithm: Algorithm,
        instance: PathBuf,
    },
    /// Check an assignment file against an instance.
    Verify {
        instance: PathBuf,
        #[arg(long)]
        assignment: PathBuf,
    },
    /// Print a random feasible instance.
    Gen {
        #[arg(long)]
        s: usize,
        #[arg(long)]
        t: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        cost_max: i64,
        #[arg(long, default_value_t = 3)]
        cap_max: usize,
        #[arg(long)]
        demands_one: bool,
    },
    /// Compare all solvers on random instances; one JSON line per trial.
    Diff {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        max_s: usize,
        #[arg(long, default_value_t = 4)]
        max_t: usize,
        #[arg(long, default_value_t = 20)]
        cost_max: i64,
        #[arg(long, default_value_t = 3)]
        cap_max: usize,
        #[arg(long)]
        demands_one: bool,
    },
    /// Time a solver over square instances of the given sizes.
    Bench {
        #[arg(long, value_enum, default_value_t = Algorithm::Ga)]
        algorithm: Algorithm,
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        cost_max: i64,
        #[arg(long, default_value_t = 4)]
        cap_max: usize,
        /// Use permutation instances (every bound 1).
        #[arg(long)]
        one_to_one: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Ga,
    Lca,
    Flow,
    Brute,
    /// Square one-to-one instances only, through the weight transform.
    Hungarian,
}

impl Algorithm {
    fn id(self) -> &'static str {
        match self {
            Algorithm::Ga => "ga",
            Algorithm::Lca => "lca",
            Algorithm::Flow => "flow",
            Algorithm::Brute => "brute",
            Algorithm::Hungarian => "hungarian",
        }
    }

    fn claimed_exponent(self) -> Option<u32> {
        match self {
            Algorithm::Ga => Some(4),
            Algorithm::Lca | Algorithm::Hungarian => Some(3),
            Algorithm::Flow | Algorithm::Brute => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub augmentations: [usize; 2],
    pub dual_updates: usize,
    pub dual_objective: i64,
}

impl From<&SolveReport<i64>> for Diagnostics {
    fn from(r: &SolveReport<i64>) -> Self {
        Self {
            augmentations: r.phase_augmentations,
            dual_updates: r.dual_updates,
            dual_objective: r.dual_objective,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub digest: String,
    pub algorithm: String,
    pub pairs: Vec<(usize, usize)>,
    pub total_cost: i64,
    pub feasible: bool,
    pub diagnostics: Option<Diagnostics>,
    pub wall_time_ms: f64,
}

/// Assignment file: `{"pairs": [[i, j], ...], "total_cost": c}` with 0-based
/// indices; `total_cost` is optional. A `solve` result is also accepted.
#[derive(Clone, Debug, Deserialize)]
struct AssignmentFile {
    pairs: Vec<(usize, usize)>,
    #[serde(default)]
    total_cost: Option<i64>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Infeasible(String),
    Failed(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Infeasible(_) | CliError::Failed(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m)
            | CliError::Infeasible(m)
            | CliError::Failed(m)
            | CliError::Internal(m) => m,
        }
    }
}

/// Reads an instance in the JSON format and validates it. Shape problems
/// and negative costs are parse errors; any other violation is reported as
/// infeasible, listing every violation found.
pub fn parse_instance(path: &Path) -> Result<Instance<i64>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let inst: Instance<i64> = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let report = validate_instance(&inst);
    if report.violations.is_empty() {
        return Ok(inst);
    }
    let listed = report
        .violations
        .iter()
        .map(|v| format!("  {:?}: {}", v.rule, v.detail))
        .collect::<Vec<_>>()
        .join("\n");
    let msg = format!("{}: instance violates:\n{listed}", path.display());
    if report.has(Rule::Shape) || report.has(Rule::NegativeCost) {
        Err(CliError::Usage(msg))
    } else {
        Err(CliError::Infeasible(msg))
    }
}

fn init_logging() {
    let level = match std::env::var("GAP_LOG").as_deref() {
        Ok("quiet") => log::LevelFilter::Off,
        Ok("info") => log::LevelFilter::Info,
        Ok("trace") => log::LevelFilter::Trace,
        _ => log::LevelFilter::Warn,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .target(env_logger::Target::Stderr)
        .try_init();
}

/// Parses `args` (program name first), runs the command and returns the exit status.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match dispatch(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            e.exit_code()
        }
    }
}

fn emit<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), CliError> {
    let line = serde_json::to_string(value).map_err(|e| CliError::Internal(e.to_string()))?;
    writeln!(out, "{line}").map_err(|e| CliError::Internal(e.to_string()))
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    match &cli.command {
        Command::Solve {
            algorithm,
            instance,
        } => {
            let inst = parse_instance(instance)?;
            let result = solve_one(*algorithm, &inst)?;
            if cli.summary {
                let _ = writeln!(
                    err,
                    "{} {}: {} pairs, cost {}, {:.3} ms",
                    result.algorithm,
                    result.digest,
                    result.pairs.len(),
                    result.total_cost,
                    result.wall_time_ms
                );
            }
            emit(out, &result)?;
            Ok(0)
        }
        Command::Verify {
            instance,
            assignment,
        } => {
            let inst = parse_instance(instance)?;
            let text = fs::read_to_string(assignment)
                .map_err(|e| CliError::Usage(format!("{}: {e}", assignment.display())))?;
            let file: AssignmentFile = serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("{}: {e}", assignment.display())))?;
            let report = check_assignment(
                &inst,
                &Assignment {
                    pairs: file.pairs,
                    total_cost: file.total_cost.unwrap_or(0),
                },
            );
            let cost_matches = file.total_cost.is_none_or(|c| c == report.recomputed_cost);
            let ok = report.feasible && cost_matches;
            emit(
                out,
                &json!({
                    "feasible": report.feasible,
                    "degree_violations": report.degree_violations,
                    "duplicate_pairs": report.duplicate_pairs,
                    "out_of_range": report.out_of_range,
                    "recomputed_cost": report.recomputed_cost,
                    "reported_cost": file.total_cost,
                    "cost_matches": cost_matches,
                }),
            )?;
            if cli.summary {
                let _ = writeln!(
                    err,
                    "{}",
                    if ok {
                        "assignment ok"
                    } else {
                        "assignment rejected"
                    }
                );
            }
            Ok(if ok { 0 } else { 2 })
        }
        Command::Gen {
            s,
            t,
            seed,
            cost_max,
            cap_max,
            demands_one,
        } => {
            if *s == 0 || *t == 0 || *cost_max < 0 {
                return Err(CliError::Usage(
                    "--s and --t must be positive, --cost-max non-negative".into(),
                ));
            }
            let mut p = GenParams::exact(*s, *t, *cost_max, *cap_max);
            p.demands_one = *demands_one;
            let inst = random_feasible_instance(&p, &mut ChaCha8Rng::seed_from_u64(*seed));
            emit(out, &inst)?;
            Ok(0)
        }
        Command::Diff {
            trials,
            seed,
            max_s,
            max_t,
            cost_max,
            cap_max,
            demands_one,
        } => {
            if *cost_max < 0 {
                return Err(CliError::Usage("--cost-max must be non-negative".into()));
            }
            let mut p = GenParams::up_to(*max_s, *max_t, *cost_max, *cap_max);
            p.demands_one = *demands_one;
            let report = differential_test(&p, *trials, *seed);
            write!(out, "{}", report.to_json_lines())
                .map_err(|e| CliError::Internal(e.to_string()))?;
            if cli.summary {
                let _ = writeln!(
                    err,
                    "{} trials, {} disagreements",
                    report.summary.trials, report.summary.disagreements
                );
            }
            Ok(if report.summary.disagreements == 0 {
                0
            } else {
                2
            })
        }
        Command::Bench {
            algorithm,
            sizes,
            seed,
            cost_max,
            cap_max,
            one_to_one,
        } => bench(
            *algorithm,
            sizes,
            *seed,
            *cost_max,
            *cap_max,
            *one_to_one,
            cli.summary,
            out,
            err,
        ),
    }
}

fn dump_fixture(inst: &Instance<i64>) -> String {
    let path = std::env::temp_dir().join(format!("gap-fixture-{}.json", instance_digest(inst)));
    match serde_json::to_string_pretty(inst).map(|j| fs::write(&path, j)) {
        Ok(Ok(())) => format!("instance written to {}", path.display()),
        _ => "instance could not be written".to_string(),
    }
}

/// Runs one solver and checks its output.
pub fn solve_one(algorithm: Algorithm, inst: &Instance<i64>) -> Result<RunResult, CliError> {
    let started = Instant::now();
    let (asg, diagnostics) = match algorithm {
        Algorithm::Ga | Algorithm::Lca => {
            let r = if algorithm == Algorithm::Ga {
                solve_ga(inst)
            } else {
                solve_lca(inst)
            };
            match r {
                Ok(sol) => {
                    let d = Diagnostics::from(&sol.report);
                    (sol.assignment, Some(d))
                }
                Err(SolveError::Infeasible(cert)) => {
                    return Err(CliError::Infeasible(format!(
                        "{}; certificate: {}",
                        cert.reason,
                        serde_json::to_string(&cert).unwrap_or_default()
                    )))
                }
                Err(e @ (SolveError::DemandsNotUnit | SolveError::Invalid(_))) => {
                    return Err(CliError::Usage(e.to_string()))
                }
                Err(e @ SolveError::Internal(_)) => {
                    return Err(CliError::Internal(format!("{e}; {}", dump_fixture(inst))))
                }
            }
        }
        Algorithm::Flow => match solve_flow_reference(inst) {
            Ok(a) => (a, None),
            Err(FlowError::Infeasible(cut)) => {
                return Err(CliError::Infeasible(format!(
                    "no feasible circulation; certificate: {}",
                    serde_json::to_string(&cut).unwrap_or_default()
                )))
            }
            Err(e) => return Err(CliError::Usage(e.to_string())),
        },
        Algorithm::Brute => match brute_force_optimum(inst) {
            Ok(a) => (a, None),
            Err(BruteError::Infeasible) => {
                return Err(CliError::Infeasible(BruteError::Infeasible.to_string()))
            }
            Err(e) => return Err(CliError::Usage(e.to_string())),
        },
        Algorithm::Hungarian => (solve_permutation(inst)?, None),
    };
    let wall_time_ms = started.elapsed().as_secs_f64() * 1e3;
    let report = check_assignment(inst, &asg);
    if !report.feasible || report.recomputed_cost != asg.total_cost {
        return Err(CliError::Internal(format!(
            "{} returned an invalid assignment: {report:?}; {}",
            algorithm.id(),
            dump_fixture(inst)
        )));
    }
    log::info!(
        "{} solved {}x{} at cost {}",
        algorithm.id(),
        inst.s,
        inst.t,
        asg.total_cost
    );
    Ok(RunResult {
        digest: instance_digest(inst),
        algorithm: algorithm.id().to_string(),
        pairs: asg.pairs,
        total_cost: asg.total_cost,
        feasible: report.feasible,
        diagnostics,
        wall_time_ms,
    })
}

/// Min-cost permutation via max-weight perfect matching on `offset - c`.
fn solve_permutation(inst: &Instance<i64>) -> Result<Assignment<i64>, CliError> {
    let unit = |v: &[usize]| v.iter().all(|&x| x == 1);
    if inst.s != inst.t
        || ![
            &inst.a_demand,
            &inst.a_capacity,
            &inst.b_demand,
            &inst.b_capacity,
        ]
        .iter()
        .all(|v| unit(v))
    {
        return Err(CliError::Usage(
            "hungarian needs a square instance with every bound equal to 1".into(),
        ));
    }
    let offset = inst.max_cost() + 1;
    let w: Vec<Vec<i64>> = inst
        .cost
        .iter()
        .map(|r| r.iter().map(|c| offset - c).collect())
        .collect();
    let (m, _) = solve_max_weight_perfect(&w).map_err(|e| CliError::Internal(e.to_string()))?;
    let pairs = m
        .match_of_a
        .iter()
        .enumerate()
        .map(|(i, &j)| (i, j))
        .collect();
    Assignment::new(inst, pairs).map_err(|e| CliError::Internal(e.to_string()))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[allow(clippy::too_many_arguments)]
fn bench(
    algorithm: Algorithm,
    sizes: &[usize],
    seed: u64,
    cost_max: i64,
    cap_max: usize,
    one_to_one: bool,
    summary: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, CliError> {
    if sizes.contains(&0) || cost_max < 0 {
        return Err(CliError::Usage(
            "sizes must be positive, --cost-max non-negative".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let permutation = one_to_one || algorithm == Algorithm::Hungarian;
    let mut points = Vec::new();
    for &n in sizes {
        let inst = if permutation {
            Instance::one_to_one(
                (0..n)
                    .map(|_| (0..n).map(|_| rng.gen_range(0..=cost_max)).collect())
                    .collect(),
            )
        } else {
            let mut p = GenParams::exact(n, n, cost_max, cap_max);
            p.demands_one = algorithm == Algorithm::Lca;
            random_feasible_instance(&p, &mut rng)
        };
        let r = solve_one(algorithm, &inst)?;
        points.push((n as f64, r.wall_time_ms));
        emit(
            out,
            &json!({
                "algorithm": r.algorithm,
                "n": n,
                "one_to_one": permutation,
                "total_cost": r.total_cost,
                "wall_time_ms": r.wall_time_ms,
            }),
        )?;
        if summary {
            let _ = writeln!(
                err,
                "{:>10} n={n:<6} {:>10.3} ms",
                r.algorithm, r.wall_time_ms
            );
        }
    }
    let slope = log_log_slope(&points);
    emit(
        out,
        &json!({
            "algorithm": algorithm.id(),
            "fitted_slope": slope,
            "claimed_exponent": algorithm.claimed_exponent(),
        }),
    )?;
    if summary {
        if let Some(s) = slope {
            let _ = writeln!(err, "fitted log-log slope {s:.2}");
        }
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<_> = [10.0, 20.0, 40.0]
            .iter()
            .map(|&x: &f64| (x, 3.0 * x.powi(3)))
            .collect();
        assert!((log_log_slope(&pts).unwrap() - 3.0).abs() < 1e-9);
        assert_eq!(log_log_slope(&[(1.0, 1.0)]), None);
    }

    #[test]
    fn permutation_through_weights() {
        let a = solve_permutation(&Instance::one_to_one(vec![vec![1, 2], vec![3, 1]])).unwrap();
        assert_eq!(a.total_cost, 2);
    }
}
