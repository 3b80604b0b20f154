//! Scaling experiments: the mean-squared-error decomposition, RMSE-versus-cost
//! sweeps for the Grover-Rudolph pipeline, exact preparation and classical
//! sampling, budget allocation, and log-log slope fits.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::{
    estimate_mean_with, rmse_with_stderr, CostModel, RunFlags, Sampler, BOOTSTRAP_RESAMPLES,
};
use crate::dist::{exact_mean, half_gap_k, left_mass, DiscretizedDistribution, DistributionSpec};
use crate::error::{Error, Result};
use crate::grover_rudolph::{
    angles_from_pmf, build_state, perturb_first_iteration, FirstAngleError, LeftMassEstimator,
};
use crate::quantum::{mean_to_amplitude, Mlae, MlaeSchedule};
use crate::rng::{derive_seed, stream_rng};
use crate::stats::{self, ols};

/// Fewest repetitions accepted for a point of a slope fit.
pub const MIN_SLOPE_REPETITIONS: usize = 100;
/// Fewest repetitions accepted by [`decomposition_check`].
pub const MIN_DECOMPOSITION_REPETITIONS: usize = 1000;
/// Fewest points and decades of cost accepted by a slope fit.
pub const MIN_FIT_POINTS: usize = 4;
pub const MIN_FIT_DECADES: f64 = 2.0;

/// Maps an accuracy target `ε̂` to `N′_s = ⌈c_s/ε̂²⌉` preparation samples and a
/// query budget `⌈c_q/ε̂⌉` spent on an exponential schedule with `shots` per depth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AllocationRule {
    pub c_s: f64,
    pub c_q: f64,
    pub shots: u64,
}

impl Default for AllocationRule {
    fn default() -> Self {
        // at 25 shots or fewer per depth, aliased likelihood modes inflate the
        // shallow schedules by an order of magnitude
        Self {
            c_s: 1.0,
            c_q: 128.0,
            shots: 100,
        }
    }
}

impl AllocationRule {
    pub fn validate(&self) -> Result<()> {
        if !(self.c_s > 0.0 && self.c_s.is_finite() && self.c_q > 0.0 && self.c_q.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "allocation constants must be positive, got c_s = {}, c_q = {}",
                self.c_s, self.c_q
            )));
        }
        if self.shots == 0 {
            return Err(Error::InvalidParameter("shots per depth must be positive".into()));
        }
        Ok(())
    }

    pub fn prep_samples(&self, target: f64) -> u64 {
        ((self.c_s / (target * target)).ceil() as u64).max(1)
    }

    pub fn query_budget(&self, target: f64) -> u64 {
        (self.c_q / target).ceil() as u64
    }

    /// Deepest exponential schedule inside the query budget for `target`.
    pub fn schedule(&self, target: f64) -> Result<MlaeSchedule> {
        MlaeSchedule::for_budget(self.query_budget(target), self.shots)
    }
}

/// One arm of a scaling sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arm {
    /// Sampled first angle followed by MLAE on the erroneous state.
    Pipeline,
    /// MLAE on the exactly prepared state.
    Exact,
    /// Classical sample mean.
    Classical,
}

impl Arm {
    pub const ALL: [Arm; 3] = [Arm::Pipeline, Arm::Exact, Arm::Classical];

    pub fn as_str(self) -> &'static str {
        match self {
            Arm::Pipeline => "pipeline",
            Arm::Exact => "exact",
            Arm::Classical => "classical",
        }
    }

    fn stream(self) -> u64 {
        self as u64
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Arm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Arm::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown arm {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub distribution: DistributionSpec,
    /// Accuracy targets `ε̂`, strictly decreasing.
    pub targets: Vec<f64>,
    pub repetitions: usize,
    #[serde(default)]
    pub allocation: AllocationRule,
    pub seed: u64,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        self.allocation.validate()?;
        if self.targets.is_empty() {
            return Err(Error::InvalidParameter("sweep needs at least one target".into()));
        }
        if self.targets.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return Err(Error::InvalidParameter("targets must be positive".into()));
        }
        if self.targets.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidParameter(
                "targets must be strictly decreasing".into(),
            ));
        }
        if self.repetitions < MIN_SLOPE_REPETITIONS {
            return Err(Error::InvalidParameter(format!(
                "slope points need at least {MIN_SLOPE_REPETITIONS} repetitions, got {}",
                self.repetitions
            )));
        }
        Ok(())
    }

    /// `count` targets spaced evenly in log between `hi` and `lo`.
    pub fn log_targets(hi: f64, lo: f64, count: usize) -> Vec<f64> {
        assert!(count >= 2 && hi > lo && lo > 0.0);
        let (a, b) = (hi.log10(), lo.log10());
        (0..count)
            .map(|i| 10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64))
            .collect()
    }
}

/// Counts of degenerate events over a set of repetitions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlagCounts {
    pub likelihood_ties: u64,
    pub clamped: u64,
}

impl FlagCounts {
    fn add(&mut self, f: RunFlags) {
        self.likelihood_ties += f.likelihood_tie as u64;
        self.clamped += f.clamped as u64;
    }

    fn merge(mut self, o: FlagCounts) -> Self {
        self.likelihood_ties += o.likelihood_ties;
        self.clamped += o.clamped;
        self
    }

    pub fn any(&self) -> bool {
        self.likelihood_ties + self.clamped > 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub target: f64,
    /// `N′_s` for the pipeline, `N_s` for the classical arm, 0 for exact preparation.
    pub prep_samples: u64,
    pub queries: u64,
    pub cost_units: u64,
    pub rmse: f64,
    pub stderr: f64,
    #[serde(skip)]
    pub sq_errors: Vec<f64>,
    #[serde(skip)]
    pub flags: FlagCounts,
}

impl ScalingRow {
    /// A noise-free row, for fitting synthetic data.
    pub fn synthetic(cost_units: u64, rmse: f64) -> Self {
        Self {
            target: rmse,
            prep_samples: 0,
            queries: 0,
            cost_units,
            rmse,
            stderr: 0.0,
            sq_errors: vec![rmse * rmse],
            flags: FlagCounts::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub ci95: (f64, f64),
}

impl SlopeFit {
    pub fn ci_contains(&self, x: f64) -> bool {
        self.ci95.0 <= x && x <= self.ci95.1
    }

    pub fn ci_disjoint(&self, o: &SlopeFit) -> bool {
        self.ci95.1 < o.ci95.0 || o.ci95.1 < self.ci95.0
    }

    /// `log₁₀ x` at which the fitted line reaches `log₁₀ rmse`.
    pub fn log_x_at(&self, log_rmse: f64) -> f64 {
        (log_rmse - self.intercept) / self.slope
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub arm: Arm,
    pub rows: Vec<ScalingRow>,
    pub fit: SlopeFit,
    pub flags: FlagCounts,
}

fn log10_checked(v: f64, what: &str) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v.log10())
    } else {
        Err(Error::InvalidParameter(format!("{what} must be positive for a log fit, got {v}")))
    }
}

/// OLS fit of `log₁₀ rmse` on `log₁₀ x(row)` with a percentile bootstrap CI
/// that resamples repetitions within every row.
pub fn fit_loglog_slope_on<F>(rows: &[ScalingRow], x: F, seed: u64) -> Result<SlopeFit>
where
    F: Fn(&ScalingRow) -> f64,
{
    let xs = rows
        .iter()
        .map(|r| log10_checked(x(r), "abscissa"))
        .collect::<Result<Vec<_>>>()?;
    let ys = rows
        .iter()
        .map(|r| log10_checked(r.rmse, "rmse"))
        .collect::<Result<Vec<_>>>()?;
    let span = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - xs.iter().cloned().fold(f64::INFINITY, f64::min);
    if rows.len() < MIN_FIT_POINTS || span < MIN_FIT_DECADES {
        return Err(Error::InsufficientSpan {
            points: rows.len(),
            decades: if rows.is_empty() { 0.0 } else { span },
        });
    }
    let line = ols(&xs, &ys);

    let mut rng = stream_rng(seed);
    let mut slopes: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| {
            let ys_b: Vec<f64> = rows
                .iter()
                .map(|r| {
                    let m = r.sq_errors.len();
                    if m == 0 {
                        return r.rmse.log10();
                    }
                    let s: f64 = (0..m).map(|_| r.sq_errors[rng.random_range(0..m)]).sum();
                    0.5 * (s / m as f64).log10()
                })
                .collect();
            ols(&xs, &ys_b).slope
        })
        .collect();
    slopes.sort_by(f64::total_cmp);
    Ok(SlopeFit {
        slope: line.slope,
        intercept: line.intercept,
        ci95: (stats::quantile(&slopes, 0.025), stats::quantile(&slopes, 0.975)),
    })
}

/// Slope of RMSE against total cost.
pub fn fit_loglog_slope(rows: &[ScalingRow], seed: u64) -> Result<SlopeFit> {
    fit_loglog_slope_on(rows, |r| r.cost_units as f64, seed)
}

/// Ratio `cost_a / cost_b` of the fitted lines at a common RMSE, taken at the
/// geometric centre of the RMSE range both reports cover.
pub fn cost_ratio_at_equal_rmse(a: &ScalingReport, b: &ScalingReport) -> Result<f64> {
    let range = |r: &ScalingReport| {
        r.rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), row| {
            (lo.min(row.rmse.log10()), hi.max(row.rmse.log10()))
        })
    };
    let (alo, ahi) = range(a);
    let (blo, bhi) = range(b);
    let (lo, hi) = (alo.max(blo), ahi.min(bhi));
    if !(lo <= hi) {
        return Err(Error::InvalidParameter(
            "the two reports cover disjoint RMSE ranges".into(),
        ));
    }
    let mid = 0.5 * (lo + hi);
    Ok(10f64.powf(a.fit.log_x_at(mid) - b.fit.log_x_at(mid)))
}

/// Shared per-distribution state for the sweep arms.
struct Workbench<'a> {
    disc: &'a DiscretizedDistribution,
    mu: f64,
    sampler: Sampler,
    left: LeftMassEstimator,
}

impl<'a> Workbench<'a> {
    fn new(disc: &'a DiscretizedDistribution) -> Self {
        Self {
            disc,
            mu: exact_mean(disc),
            sampler: Sampler::new(disc),
            left: LeftMassEstimator::new(disc),
        }
    }

    fn point(
        &self,
        arm: Arm,
        target: f64,
        rule: &AllocationRule,
        reps: usize,
        seed: u64,
    ) -> Result<ScalingRow> {
        let seeds: Vec<u64> = (0..reps as u64).map(|r| derive_seed(seed, &[r])).collect();
        let (prep, queries, cost, outcomes): (u64, u64, u64, Vec<(f64, RunFlags)>) = match arm {
            Arm::Classical => {
                let n_s = rule.prep_samples(target);
                let model = CostModel::new(self.disc.n(), 1.0 / (n_s as f64).sqrt());
                let out = seeds
                    .par_iter()
                    .map(|&s| {
                        let rec = estimate_mean_with(&self.sampler, self.mu, model, n_s, s);
                        (rec.sq_error(), rec.flags)
                    })
                    .collect();
                (n_s, 0, n_s * model.ops_per_sample, out)
            }
            Arm::Exact => {
                let mlae = Mlae::new(rule.schedule(target)?);
                let nq = mlae.schedule().queries();
                let state = build_state(&angles_from_pmf(self.disc));
                let out = seeds
                    .par_iter()
                    .map(|&s| {
                        let rec = mlae.qmc_mean(&state, s)?;
                        Ok(((rec.estimate - self.mu).powi(2), rec.flags))
                    })
                    .collect::<Result<_>>()?;
                (0, nq, nq, out)
            }
            Arm::Pipeline => {
                let n_s = rule.prep_samples(target);
                let model = CostModel::new(self.disc.n(), 1.0 / (n_s as f64).sqrt());
                let mlae = Mlae::new(rule.schedule(target)?);
                let nq = mlae.schedule().queries();
                let out = seeds
                    .par_iter()
                    .map(|&s| {
                        let err = self.left.draw(n_s, derive_seed(s, &[0]));
                        let pert = perturb_first_iteration(self.disc, &err)?;
                        let rec = mlae.qmc_mean(&pert.state, derive_seed(s, &[1]))?;
                        let flags = RunFlags {
                            clamped: pert.clamped,
                            ..rec.flags
                        };
                        Ok(((rec.estimate - self.mu).powi(2), flags))
                    })
                    .collect::<Result<_>>()?;
                (n_s, nq, n_s * model.ops_per_sample + nq, out)
            }
        };
        let mut flags = FlagCounts::default();
        for (_, f) in &outcomes {
            flags.add(*f);
        }
        let study = rmse_with_stderr(
            outcomes.into_iter().map(|(e, _)| e).collect(),
            derive_seed(seed, &[u64::MAX]),
        );
        Ok(ScalingRow {
            target,
            prep_samples: prep,
            queries,
            cost_units: cost,
            rmse: study.rmse,
            stderr: study.stderr,
            sq_errors: study.sq_errors,
            flags,
        })
    }
}

/// One pipeline point: sample the first split from `N′_s` draws, prepare the
/// erroneous state, estimate its mean with MLAE, and score against the exact mean.
pub fn pipeline_rmse(
    disc: &DiscretizedDistribution,
    target: f64,
    rule: &AllocationRule,
    repetitions: usize,
    seed: u64,
) -> Result<ScalingRow> {
    rule.validate()?;
    Workbench::new(disc).point(Arm::Pipeline, target, rule, repetitions, seed)
}

/// Runs `arm` over every target of `cfg` and fits the RMSE-versus-cost slope.
pub fn run_arm(arm: Arm, cfg: &SweepConfig) -> Result<ScalingReport> {
    cfg.validate()?;
    let disc = cfg.distribution.build()?;
    run_arm_on(arm, &disc, cfg)
}

/// [`run_arm`] on an already discretized distribution. `cfg.distribution` is
/// ignored.
pub fn run_arm_on(
    arm: Arm,
    disc: &DiscretizedDistribution,
    cfg: &SweepConfig,
) -> Result<ScalingReport> {
    cfg.validate()?;
    let bench = Workbench::new(disc);
    let rows = cfg
        .targets
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            bench.point(
                arm,
                t,
                &cfg.allocation,
                cfg.repetitions,
                derive_seed(cfg.seed, &[arm.stream(), i as u64]),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let fit = fit_loglog_slope(&rows, derive_seed(cfg.seed, &[arm.stream(), u64::MAX]))?;
    let flags = rows
        .iter()
        .fold(FlagCounts::default(), |acc, r| acc.merge(r.flags));
    Ok(ScalingReport {
        arm,
        rows,
        fit,
        flags,
    })
}

/// How [`decomposition_check`] produces `ε_l` and `μ̂`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecompositionMode {
    /// Sampled `ε_l`, MLAE on the erroneous state.
    #[default]
    Sampled,
    /// `ε_l ≡ 0`.
    NoPrepError,
    /// `μ̂ := μ′`, an infinitely precise mean estimate.
    ExactQmc,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionReport {
    /// `E[(μ − μ̂)²]`.
    pub lhs: f64,
    /// `E[(μ′ − μ̂)²] + k² E[ε_l²]`.
    pub rhs: f64,
    /// `2k E[ε_l (μ′ − μ̂)]`, the term separating `lhs` from `rhs`.
    pub cross: f64,
    pub lhs_stderr: f64,
    pub rhs_stderr: f64,
    pub cross_stderr: f64,
    /// `√(lhs_stderr² + rhs_stderr²)`.
    pub combined_stderr: f64,
    /// `E[(μ′ − μ̂)²]`.
    pub qmc_mse: f64,
    /// `E[ε_l²]`.
    pub prep_mse: f64,
    pub k: f64,
    pub repetitions: usize,
    pub flags: FlagCounts,
}

/// Splits the pipeline's mean squared error into the estimation error about the
/// erroneous mean `μ′ = μ − kε_l` and the preparation error `k² ε_l²`.
pub fn decomposition_check(
    disc: &DiscretizedDistribution,
    prep_samples: u64,
    sched: &MlaeSchedule,
    repetitions: usize,
    mode: DecompositionMode,
    seed: u64,
) -> Result<DecompositionReport> {
    if repetitions < MIN_DECOMPOSITION_REPETITIONS {
        return Err(Error::InvalidParameter(format!(
            "decomposition needs at least {MIN_DECOMPOSITION_REPETITIONS} repetitions, got {repetitions}"
        )));
    }
    if prep_samples == 0 {
        return Err(Error::InvalidParameter("prep_samples must be positive".into()));
    }
    let mu = exact_mean(disc);
    let k = half_gap_k(disc)?;
    let left = LeftMassEstimator::new(disc);
    let mlae = Mlae::new(sched.clone());
    let scale = (disc.len() - 1) as f64;

    struct Rep {
        lhs: f64,
        rhs: f64,
        cross: f64,
        qmc: f64,
        eps2: f64,
        flags: RunFlags,
    }
    let reps: Vec<Rep> = (0..repetitions as u64)
        .into_par_iter()
        .map(|r| {
            let s = derive_seed(seed, &[r]);
            let err = match mode {
                DecompositionMode::NoPrepError => FirstAngleError::fixed(0.0),
                _ => left.draw(prep_samples, derive_seed(s, &[0])),
            };
            let pert = perturb_first_iteration(disc, &err)?;
            let eps = pert.epsilon_applied;
            let mu_prime = mu - k * eps;
            let (mu_hat, flags) = match mode {
                DecompositionMode::ExactQmc => (mu_prime, RunFlags::default()),
                _ => {
                    let t = mean_to_amplitude(&pert.state)?;
                    let rec = mlae.record(&t, derive_seed(s, &[1]));
                    (rec.estimate * scale, rec.flags)
                }
            };
            let qmc = (mu_prime - mu_hat).powi(2);
            Ok(Rep {
                lhs: (mu - mu_hat).powi(2),
                rhs: qmc + (k * eps).powi(2),
                cross: 2.0 * k * eps * (mu_prime - mu_hat),
                qmc,
                eps2: eps * eps,
                flags: RunFlags {
                    clamped: pert.clamped,
                    ..flags
                },
            })
        })
        .collect::<Result<_>>()?;

    let col = |f: fn(&Rep) -> f64| reps.iter().map(f).collect::<Vec<f64>>();
    let (lhs, rhs, cross) = (col(|r| r.lhs), col(|r| r.rhs), col(|r| r.cross));
    let se = |v: &[f64], i: u64| {
        stats::bootstrap_stderr_of_mean(v, BOOTSTRAP_RESAMPLES, derive_seed(seed, &[u64::MAX, i]))
    };
    let (lhs_stderr, rhs_stderr, cross_stderr) = (se(&lhs, 0), se(&rhs, 1), se(&cross, 2));
    let mut flags = FlagCounts::default();
    for r in &reps {
        flags.add(r.flags);
    }
    Ok(DecompositionReport {
        lhs: stats::mean(&lhs),
        rhs: stats::mean(&rhs),
        cross: stats::mean(&cross),
        lhs_stderr,
        rhs_stderr,
        cross_stderr,
        combined_stderr: lhs_stderr.hypot(rhs_stderr),
        qmc_mse: stats::mean(&col(|r| r.qmc)),
        prep_mse: stats::mean(&col(|r| r.eps2)),
        k,
        repetitions,
        flags,
    })
}

/// Predicted pipeline MSE `A/N_q² + B/N′_s`, with preparation samples costing
/// `ops_per_sample` each and queries costing one unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MseModel {
    /// `A = 3 S a(1 − a)(2ⁿ − 1)²`, the asymptotic MLAE error constant in index units.
    pub qmc_coef: f64,
    /// `B = k² p_l (1 − p_l)`.
    pub prep_coef: f64,
    pub ops_per_sample: u64,
    /// Smallest feasible query count (one shot at depth zero per shot slot).
    pub min_queries: u64,
}

impl MseModel {
    pub fn for_distribution(
        disc: &DiscretizedDistribution,
        shots: u64,
        cost: CostModel,
    ) -> Result<Self> {
        let a = mean_to_amplitude(&build_state(&angles_from_pmf(disc)))?.a;
        let k = half_gap_k(disc)?;
        let pl = left_mass(disc);
        let scale = (disc.len() - 1) as f64;
        Ok(Self {
            qmc_coef: 3.0 * shots as f64 * a * (1.0 - a) * scale * scale,
            prep_coef: k * k * pl * (1.0 - pl),
            ops_per_sample: cost.ops_per_sample,
            min_queries: shots,
        })
    }

    pub fn qmc_term(&self, queries: f64) -> f64 {
        self.qmc_coef / (queries * queries)
    }

    pub fn prep_term(&self, prep_samples: f64) -> f64 {
        if self.prep_coef == 0.0 {
            0.0
        } else {
            self.prep_coef / prep_samples
        }
    }

    pub fn mse(&self, prep_samples: f64, queries: f64) -> f64 {
        self.qmc_term(queries) + self.prep_term(prep_samples)
    }

    /// Stationarity residual `(B/(ops N′_s²)) / (2A/N_q³) − 1` of the cost-constrained
    /// optimum; zero at the exact continuous optimum.
    pub fn stationarity_residual(&self, prep_samples: f64, queries: f64) -> f64 {
        let ops = self.ops_per_sample as f64;
        (self.prep_coef / (ops * prep_samples * prep_samples))
            / (2.0 * self.qmc_coef / queries.powi(3))
            - 1.0
    }

    fn min_cost(&self) -> u64 {
        self.min_queries + if self.prep_coef > 0.0 { self.ops_per_sample } else { 0 }
    }

    /// Grid search over `grid + 1` query counts spaced evenly in log between the
    /// minimum and the whole budget; preparation takes what is left.
    pub fn allocate(&self, total_cost: u64, grid: usize) -> Result<Allocation> {
        if total_cost < self.min_cost() {
            return Err(Error::InfeasibleBudget {
                budget: total_cost,
                minimum: self.min_cost(),
            });
        }
        if grid == 0 {
            return Err(Error::InvalidParameter("grid needs at least one step".into()));
        }
        let ops = self.ops_per_sample;
        let max_q = if self.prep_coef > 0.0 { total_cost - ops } else { total_cost };
        let (lo, hi) = ((self.min_queries as f64).ln(), (max_q as f64).ln());
        let mut best: Option<Allocation> = None;
        for j in 0..=grid {
            let q = ((lo + (hi - lo) * j as f64 / grid as f64).exp().round() as u64)
                .clamp(self.min_queries, max_q);
            let ns = (total_cost - q) / ops;
            let cand = Allocation {
                total_cost,
                prep_samples: ns,
                queries: q,
                prep_term: self.prep_term(ns as f64),
                qmc_term: self.qmc_term(q as f64),
                predicted_mse: self.mse(ns as f64, q as f64),
            };
            if best.as_ref().is_none_or(|b| cand.predicted_mse < b.predicted_mse) {
                best = Some(cand);
            }
        }
        Ok(best.expect("grid is nonempty"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Allocation {
    pub total_cost: u64,
    pub prep_samples: u64,
    pub queries: u64,
    pub prep_term: f64,
    pub qmc_term: f64,
    pub predicted_mse: f64,
}

impl Allocation {
    pub fn predicted_rmse(&self) -> f64 {
        self.predicted_mse.sqrt()
    }
}

/// Best `(N′_s, N_q)` split of `total_cost` under the predicted MSE of `disc`.
pub fn budget_allocator(
    total_cost: u64,
    disc: &DiscretizedDistribution,
    shots: u64,
    cost: CostModel,
    grid: usize,
) -> Result<Allocation> {
    MseModel::for_distribution(disc, shots, cost)?.allocate(total_cost, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Family;

    fn uniform(n: u32) -> DiscretizedDistribution {
        let len = 1usize << n;
        DiscretizedDistribution::from_probs(vec![1.0 / len as f64; len]).unwrap()
    }

    fn synthetic(power: f64) -> Vec<ScalingRow> {
        (0..6)
            .map(|i| {
                let c = 10u64.pow(2 + i);
                ScalingRow::synthetic(c, (c as f64).powf(power))
            })
            .collect()
    }

    #[test]
    fn exact_power_laws_fit_exactly() {
        let f = fit_loglog_slope(&synthetic(-1.0), 1).unwrap();
        assert!((f.slope + 1.0).abs() < 1e-12);
        assert!((f.ci95.1 - f.ci95.0).abs() < 1e-12);
        let f = fit_loglog_slope(&synthetic(-0.5), 1).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12);
    }

    #[test]
    fn fit_rejects_short_spans() {
        let rows: Vec<_> = (0..5).map(|i| ScalingRow::synthetic(100 + 10 * i, 1.0)).collect();
        assert!(matches!(
            fit_loglog_slope(&rows, 0),
            Err(Error::InsufficientSpan { points: 5, .. })
        ));
        assert!(matches!(
            fit_loglog_slope(&synthetic(-1.0)[..3], 0),
            Err(Error::InsufficientSpan { points: 3, .. })
        ));
    }

    #[test]
    fn allocation_rule_sizes() {
        let r = AllocationRule { c_s: 1.0, c_q: 100.0, shots: 25 };
        assert_eq!(r.prep_samples(0.1), 100);
        assert_eq!(r.prep_samples(2.0), 1);
        assert_eq!(r.query_budget(0.01), 10_000);
        assert!(r.schedule(0.01).unwrap().queries() <= 10_000);
        let tight = AllocationRule { c_q: 1.0, ..r };
        assert!(matches!(tight.schedule(0.1), Err(Error::InfeasibleAllocation(_))));
    }

    #[test]
    fn sweep_config_validation() {
        let cfg = SweepConfig {
            distribution: DistributionSpec::new(Family::standard_normal(), 4),
            targets: vec![0.1, 0.01],
            repetitions: 100,
            allocation: AllocationRule::default(),
            seed: 1,
        };
        assert!(cfg.validate().is_ok());
        assert!(SweepConfig { targets: vec![0.01, 0.1], ..cfg.clone() }.validate().is_err());
        assert!(SweepConfig { repetitions: 99, ..cfg.clone() }.validate().is_err());
        let t = SweepConfig::log_targets(0.1, 0.001, 5);
        assert!((t[2] - 0.01).abs() < 1e-15 && (t[4] - 0.001).abs() < 1e-15);
    }

    #[test]
    fn decomposition_without_prep_error_is_exact() {
        let disc = uniform(4);
        let sched = MlaeSchedule::exponential(4, 10).unwrap();
        let r = decomposition_check(&disc, 100, &sched, 1000, DecompositionMode::NoPrepError, 3)
            .unwrap();
        assert_eq!(r.lhs, r.rhs);
        assert_eq!(r.cross, 0.0);
        assert_eq!(r.prep_mse, 0.0);
    }

    #[test]
    fn decomposition_with_exact_qmc() {
        let disc = uniform(4);
        let sched = MlaeSchedule::exponential(2, 1).unwrap();
        let r = decomposition_check(&disc, 50, &sched, 2000, DecompositionMode::ExactQmc, 4)
            .unwrap();
        assert_eq!(r.cross, 0.0);
        assert_eq!(r.qmc_mse, 0.0);
        let want = r.k * r.k * r.prep_mse;
        assert!((r.lhs - want).abs() <= 1e-12 * want, "{} vs {want}", r.lhs);
        // ε_l is binomial: E[ε²] = p_l(1 − p_l)/N′_s = 0.25/50
        assert!((r.prep_mse / 0.005 - 1.0).abs() < 0.1);
    }

    #[test]
    fn decomposition_rejects_few_reps() {
        let disc = uniform(2);
        let sched = MlaeSchedule::exponential(2, 1).unwrap();
        assert!(decomposition_check(&disc, 10, &sched, 999, DecompositionMode::Sampled, 0).is_err());
    }

    #[test]
    fn single_sample_pipeline_is_prep_dominated() {
        // N′_s = 1: ε_l = ±1/2 and the prep term k² p_l(1 − p_l) = 16 dwarfs the
        // MLAE error, so the RMSE sits at k/2 = 4
        let disc = uniform(4);
        let rule = AllocationRule { c_s: 1.0, c_q: 1000.0, shots: 50 };
        let row = pipeline_rmse(&disc, 1.0, &rule, 200, 9).unwrap();
        assert_eq!(row.prep_samples, 1);
        assert!((row.rmse - 4.0).abs() < 0.1, "{}", row.rmse);
        assert!(row.flags.clamped == 0);
    }

    #[test]
    fn zero_gap_puts_budget_into_queries() {
        let m = MseModel {
            qmc_coef: 10.0,
            prep_coef: 0.0,
            ops_per_sample: 7,
            min_queries: 10,
        };
        let a = m.allocate(100_000, 1000).unwrap();
        assert_eq!(a.queries, 100_000);
        assert_eq!(a.prep_samples, 0);
    }

    #[test]
    fn allocation_is_stationary_and_not_beaten() {
        let disc = uniform(4);
        let model = MseModel::for_distribution(&disc, 10, CostModel::new(4, 1e-3)).unwrap();
        for c in [10_000u64, 1_000_000, 10_000_000] {
            let a = model.allocate(c, 10_000).unwrap();
            assert!(a.prep_samples * model.ops_per_sample + a.queries <= c);
            let r = model.stationarity_residual(a.prep_samples as f64, a.queries as f64);
            assert!(r.abs() < 0.02, "C = {c}: residual {r}");
            // no split on a fine linear scan does better beyond the grid resolution
            let ops = model.ops_per_sample;
            let scan = (1..=200_000u64)
                .map(|i| (c - ops) * i / 200_000)
                .filter(|&q| q >= model.min_queries)
                .map(|q| model.mse(((c - q) / ops) as f64, q as f64))
                .fold(f64::INFINITY, f64::min);
            assert!(a.predicted_mse <= scan * (1.0 + 1e-4), "{} vs {scan}", a.predicted_mse);
        }
    }

    #[test]
    fn infeasible_budget() {
        let disc = uniform(4);
        assert!(matches!(
            budget_allocator(5, &disc, 10, CostModel::new(4, 1.0), 100),
            Err(Error::InfeasibleBudget { budget: 5, minimum: 14 })
        ));
    }

    #[test]
    fn arm_names_round_trip() {
        for a in Arm::ALL {
            assert_eq!(a.as_str().parse::<Arm>().unwrap(), a);
        }
        assert!("quantum".parse::<Arm>().is_err());
    }

    #[test]
    fn predicted_optimal_rmse_falls_as_inverse_root_cost() {
        let disc = uniform(4);
        let budgets = [10_000u64, 100_000, 1_000_000, 10_000_000];
        let rows: Vec<ScalingRow> = budgets
            .iter()
            .map(|&c| {
                let a = budget_allocator(c, &disc, 10, CostModel::new(4, 1e-3), 10_000).unwrap();
                ScalingRow::synthetic(c, a.predicted_rmse())
            })
            .collect();
        let f = fit_loglog_slope(&rows, 0).unwrap();
        assert!((f.slope + 0.5).abs() <= 0.02, "slope {}", f.slope);
    }
}
