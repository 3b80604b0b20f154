//! Command-line front end.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 bad configuration or arguments,
//! 3 infeasible experiment, 4 degeneracy flags raised under `--strict`.
//! Failures print one JSON object on stderr.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::classical::{estimate_mean, CostModel, EstimateRecord};
use crate::config::{AngleRoute, Config};
use crate::dist::{Family, Rule};
use crate::error::{Error, Result};
use crate::experiments::{
    budget_allocator, decomposition_check, fit_loglog_slope, run_arm_on, Arm, DecompositionMode,
    FlagCounts, ScalingRow,
};
use crate::grover_rudolph::{
    angles_exact, angles_from_cdf, angles_from_pmf, build_state, mc_first_angle,
    perturb_first_iteration, FirstAngleError,
};
use crate::io;
use crate::quantum::Mlae;
use crate::rng::derive_seed;

pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_STRICT: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "grqmc", version, about = "Grover-Rudolph state preparation and quantum Monte-Carlo cost experiments")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// TOML configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed (default: the config value, else a fixed constant)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file, or directory for `sweep`; stdout when absent
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: available parallelism)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Fail when degeneracy flags are raised instead of warning
    #[arg(long, global = true)]
    strict: bool,
    /// Distribution family: normal, exponential, logistic or uniform
    #[arg(long, global = true)]
    family: Option<String>,
    /// Qubit count
    #[arg(long, global = true)]
    n: Option<u32>,
    /// Tail mass dropped on each side
    #[arg(long, global = true)]
    tail_tol: Option<f64>,
    /// Discretization rule: left or midpoint
    #[arg(long, global = true)]
    rule: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the discretized pmf as CSV (index,x,probability)
    Discretize,
    /// Write the prepared state as CSV (index,amplitude,probability)
    Prepare {
        /// Also write the angle schedule here (iteration,interval_index,theta)
        #[arg(long)]
        angles: Option<PathBuf>,
        /// Estimate the first split from this many samples
        #[arg(long)]
        prep_samples: Option<u64>,
        /// Fixed first-split error
        #[arg(long, allow_hyphen_values = true)]
        epsilon: Option<f64>,
        /// Angle route: pmf or cdf
        #[arg(long)]
        route: Option<String>,
    },
    /// Classical sample-mean estimates as CSV records
    EstimateClassical {
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        repetitions: Option<usize>,
    },
    /// MLAE mean estimates on the exact state as CSV records
    EstimateQuantum {
        /// Number of depths in the exponential schedule
        #[arg(long)]
        depths: Option<u32>,
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long)]
        repetitions: Option<usize>,
        /// Write the first repetition's shot counts here (depth,hits,shots)
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Mean-squared-error decomposition as JSON
    Decompose {
        #[arg(long)]
        prep_samples: Option<u64>,
        #[arg(long)]
        depths: Option<u32>,
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long)]
        repetitions: Option<usize>,
        /// sampled, no-prep-error or exact-qmc
        #[arg(long)]
        mode: Option<String>,
    },
    /// RMSE-versus-cost sweeps with fitted slopes
    Sweep {
        /// Arm to run (repeatable): pipeline, exact or classical
        #[arg(long = "arm")]
        arms: Vec<Arm>,
        /// Comma-separated accuracy targets, strictly decreasing
        #[arg(long, value_delimiter = ',')]
        targets: Option<Vec<f64>>,
        #[arg(long)]
        repetitions: Option<usize>,
        #[arg(long)]
        c_s: Option<f64>,
        #[arg(long)]
        c_q: Option<f64>,
        #[arg(long)]
        shots: Option<u64>,
    },
    /// Predicted-MSE optimal split of total cost between sampling and queries
    Allocate {
        /// Comma-separated total budgets
        #[arg(long, value_delimiter = ',')]
        budgets: Option<Vec<u64>>,
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long)]
        grid: Option<usize>,
    },
}

#[derive(Serialize)]
struct ErrorLine<'a> {
    error: &'a str,
    message: String,
}

fn error_kind(e: &Error) -> (&'static str, i32) {
    match e {
        Error::Config(_) => ("config", EXIT_CONFIG),
        Error::InvalidParameter(_) | Error::UnboundedParameter(_) | Error::InvalidPmf(_) => {
            ("invalid-parameter", EXIT_CONFIG)
        }
        Error::InfeasibleAllocation(_) | Error::InfeasibleBudget { .. } => {
            ("infeasible", EXIT_INFEASIBLE)
        }
        Error::DegenerateHalf(_) | Error::VanishingMass { .. } => ("degenerate", EXIT_RUNTIME),
        Error::InsufficientSpan { .. } => ("insufficient-span", EXIT_RUNTIME),
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => ("io", EXIT_RUNTIME),
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let strict = cli.global.strict;
    let outcome = match cli.global.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))
            .and_then(|pool| pool.install(|| execute(&cli))),
        None => execute(&cli),
    };
    match outcome {
        Ok(flags) if flags.any() => {
            let line = serde_json::json!({
                "warning": "degeneracy",
                "likelihood_ties": flags.likelihood_ties,
                "clamped": flags.clamped,
            });
            eprintln!("{line}");
            if strict {
                EXIT_STRICT
            } else {
                0
            }
        }
        Ok(_) => 0,
        Err(e) => {
            let (kind, code) = error_kind(&e);
            let line = ErrorLine {
                error: kind,
                message: e.to_string(),
            };
            eprintln!("{}", serde_json::to_string(&line).unwrap_or_else(|_| e.to_string()));
            code
        }
    }
}

fn load_config(g: &GlobalArgs) -> Result<Config> {
    let mut cfg = match &g.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(f) = &g.family {
        cfg.distribution.family = Family::standard(f)?;
    }
    if let Some(n) = g.n {
        cfg.distribution.n = n;
    }
    if let Some(t) = g.tail_tol {
        cfg.distribution.tail_tol = t;
    }
    if let Some(r) = &g.rule {
        cfg.distribution.rule = match r.as_str() {
            "left" | "left-riemann" => Rule::Left,
            "midpoint" => Rule::Midpoint,
            other => return Err(Error::InvalidParameter(format!("unknown rule {other:?}"))),
        };
    }
    Ok(cfg)
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn execute(cli: &Cli) -> Result<FlagCounts> {
    let mut cfg = load_config(&cli.global)?;
    let out = cli.global.out.as_deref();
    let mut flags = FlagCounts::default();
    match &cli.command {
        Command::Discretize => {
            let disc = cfg.distribution.build()?;
            io::write_pmf_csv(sink(out)?, &disc)?;
        }
        Command::Prepare {
            angles,
            prep_samples,
            epsilon,
            route,
        } => {
            if let Some(s) = prep_samples {
                cfg.prepare.prep_samples = *s;
            }
            if epsilon.is_some() {
                cfg.prepare.epsilon = *epsilon;
            }
            if let Some(r) = route {
                cfg.prepare.route = match r.as_str() {
                    "pmf" => AngleRoute::Pmf,
                    "cdf" => AngleRoute::Cdf,
                    other => {
                        return Err(Error::InvalidParameter(format!("unknown route {other:?}")))
                    }
                };
            }
            let spec = cfg.distribution;
            let disc = spec.build()?;
            let err = match (cfg.prepare.epsilon, cfg.prepare.prep_samples) {
                (Some(e), _) => Some(FirstAngleError::fixed(e)),
                (None, 0) => None,
                (None, s) => Some(mc_first_angle(&disc, s, derive_seed(cfg.seed, &[0]))),
            };
            let schedule = match cfg.prepare.route {
                AngleRoute::Pmf if spec.rule == Rule::Left => {
                    angles_exact(&spec.continuous()?, spec.n)?
                }
                AngleRoute::Pmf => angles_from_pmf(&disc),
                AngleRoute::Cdf => angles_from_cdf(&spec.continuous()?, spec.n)?,
            };
            let state = match &err {
                Some(e) => {
                    let p = perturb_first_iteration(&disc, e)?;
                    flags.clamped += p.clamped as u64;
                    p.state
                }
                None => build_state(&schedule),
            };
            if let Some(path) = angles {
                io::write_angles_csv(BufWriter::new(File::create(path)?), &schedule)?;
            }
            io::write_state_csv(sink(out)?, &state)?;
        }
        Command::EstimateClassical {
            samples,
            repetitions,
        } => {
            let n_s = samples.unwrap_or(cfg.classical.samples);
            let reps = repetitions.unwrap_or(cfg.classical.repetitions);
            if n_s == 0 || reps == 0 {
                return Err(Error::InvalidParameter(
                    "samples and repetitions must be positive".into(),
                ));
            }
            let disc = cfg.distribution.build()?;
            let records: Vec<EstimateRecord> = (0..reps as u64)
                .map(|r| estimate_mean(&disc, n_s, derive_seed(cfg.seed, &[r])))
                .collect();
            io::write_records_csv(sink(out)?, &records)?;
        }
        Command::EstimateQuantum {
            depths,
            shots,
            repetitions,
            trace,
        } => {
            if let Some(d) = depths {
                cfg.quantum.depths = *d;
            }
            if let Some(s) = shots {
                cfg.quantum.shots = *s;
            }
            let reps = repetitions.unwrap_or(cfg.quantum.repetitions);
            if reps == 0 {
                return Err(Error::InvalidParameter("repetitions must be positive".into()));
            }
            let disc = cfg.distribution.build()?;
            let state = build_state(&angles_from_pmf(&disc));
            let mlae = Mlae::new(cfg.quantum.schedule()?);
            let seeds: Vec<u64> = (0..reps as u64).map(|r| derive_seed(cfg.seed, &[r])).collect();
            let records = seeds
                .iter()
                .map(|&s| mlae.qmc_mean(&state, s))
                .collect::<Result<Vec<_>>>()?;
            for r in &records {
                flags.likelihood_ties += r.flags.likelihood_tie as u64;
            }
            if let Some(path) = trace {
                let t = crate::quantum::mean_to_amplitude(&state)?;
                let first = mlae.estimate(&t, seeds[0]);
                io::write_trace_csv(BufWriter::new(File::create(path)?), &first.trace)?;
            }
            io::write_records_csv(sink(out)?, &records)?;
        }
        Command::Decompose {
            prep_samples,
            depths,
            shots,
            repetitions,
            mode,
        } => {
            let d = &mut cfg.decompose;
            if let Some(v) = prep_samples {
                d.prep_samples = *v;
            }
            if let Some(v) = depths {
                d.depths = *v;
            }
            if let Some(v) = shots {
                d.shots = *v;
            }
            if let Some(v) = repetitions {
                d.repetitions = *v;
            }
            if let Some(m) = mode {
                d.mode = match m.as_str() {
                    "sampled" => DecompositionMode::Sampled,
                    "no-prep-error" => DecompositionMode::NoPrepError,
                    "exact-qmc" => DecompositionMode::ExactQmc,
                    other => {
                        return Err(Error::InvalidParameter(format!("unknown mode {other:?}")))
                    }
                };
            }
            let disc = cfg.distribution.build()?;
            let report = decomposition_check(
                &disc,
                cfg.decompose.prep_samples,
                &cfg.decompose.schedule()?,
                cfg.decompose.repetitions,
                cfg.decompose.mode,
                cfg.seed,
            )?;
            flags = report.flags;
            io::write_json(sink(out)?, &report)?;
        }
        Command::Sweep {
            arms,
            targets,
            repetitions,
            c_s,
            c_q,
            shots,
        } => {
            let s = &mut cfg.sweep;
            if !arms.is_empty() {
                s.arms = arms.clone();
            }
            if let Some(t) = targets {
                s.targets = t.clone();
            }
            if let Some(r) = repetitions {
                s.repetitions = *r;
            }
            if let Some(v) = c_s {
                s.allocation.c_s = *v;
            }
            if let Some(v) = c_q {
                s.allocation.c_q = *v;
            }
            if let Some(v) = shots {
                s.allocation.shots = *v;
            }
            let sweep = cfg.sweep_config();
            sweep.validate()?;
            let disc = sweep.distribution.build()?;
            let mut summaries = Vec::new();
            for &arm in &cfg.sweep.arms {
                let report = run_arm_on(arm, &disc, &sweep)?;
                flags = FlagCounts {
                    likelihood_ties: flags.likelihood_ties + report.flags.likelihood_ties,
                    clamped: flags.clamped + report.flags.clamped,
                };
                let summary = io::ScalingSummary::new(&report, &sweep)?;
                match out {
                    Some(dir) => {
                        fs::create_dir_all(dir)?;
                        let csv = File::create(dir.join(format!("{arm}.csv")))?;
                        io::write_scaling_csv(BufWriter::new(csv), &report)?;
                        let json = File::create(dir.join(format!("{arm}.json")))?;
                        io::write_json(BufWriter::new(json), &summary)?;
                    }
                    None => summaries.push(serde_json::json!({
                        "summary": summary,
                        "rows": report.rows,
                    })),
                }
            }
            if out.is_none() {
                io::write_json(std::io::stdout().lock(), &summaries)?;
            }
        }
        Command::Allocate {
            budgets,
            shots,
            grid,
        } => {
            let a = &mut cfg.allocate;
            if let Some(b) = budgets {
                a.budgets = b.clone();
            }
            if let Some(s) = shots {
                a.shots = *s;
            }
            if let Some(g) = grid {
                a.grid = *g;
            }
            let disc = cfg.distribution.build()?;
            let cost = CostModel::new(disc.n(), cfg.allocate.eps_target);
            let allocations = cfg
                .allocate
                .budgets
                .iter()
                .map(|&c| budget_allocator(c, &disc, cfg.allocate.shots, cost, cfg.allocate.grid))
                .collect::<Result<Vec<_>>>()?;
            io::write_allocations_csv(sink(out)?, &allocations)?;
            if allocations.len() >= 4 {
                let rows: Vec<ScalingRow> = allocations
                    .iter()
                    .map(|a| ScalingRow::synthetic(a.total_cost, a.predicted_rmse()))
                    .collect();
                if let Ok(fit) = fit_loglog_slope(&rows, cfg.seed) {
                    eprintln!("{}", serde_json::json!({ "predicted_rmse_slope": fit.slope }));
                }
            }
        }
    }
    Ok(flags)
}
