//! Noiseless amplitude-estimation mean estimation, simulated at the level of
//! measurement statistics.
//!
//! The encoded mean is mapped to a good-state probability
//! `a = Σ_i amps_i² · i / (2ⁿ − 1)`. A shot at Grover depth `m` succeeds with
//! probability `sin²((2m + 1) θ_a)` where `a = sin² θ_a`, and costs `2m + 1`
//! oracle queries. The amplitude is recovered by maximizing the joint binomial
//! likelihood of the shot counts.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use serde::Serialize;

use crate::classical::{EstimateRecord, Estimator, RunFlags};
use crate::error::{Error, Result};
use crate::grover_rudolph::PreparedState;
use crate::rng::stream_rng;

/// Grid points used for the global likelihood search over `[0, π/2]`.
pub const LIKELIHOOD_GRID: usize = 100_000;
/// Bracket width at which golden-section refinement stops.
pub const GOLDEN_TOL: f64 = 1e-12;
/// Likelihood difference under which two separated grid maxima count as tied.
pub const TIE_TOL: f64 = 1e-12;

/// Good-state probability and its angle, `a = sin² θ_a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmplitudeTarget {
    pub a: f64,
    pub theta_a: f64,
}

impl AmplitudeTarget {
    pub fn new(a: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::InvalidParameter(format!("amplitude {a} outside [0, 1]")));
        }
        Ok(Self {
            a,
            theta_a: a.sqrt().asin(),
        })
    }
}

/// Grover depths and shots per depth.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MlaeSchedule {
    pub depths: Vec<u64>,
    pub shots: u64,
}

impl MlaeSchedule {
    pub fn new(depths: Vec<u64>, shots: u64) -> Result<Self> {
        if depths.is_empty() || shots == 0 {
            return Err(Error::InvalidParameter(
                "schedule needs at least one depth and one shot".into(),
            ));
        }
        Ok(Self { depths, shots })
    }

    /// `K` depths `0, 1, 2, 4, …, 2^{K−2}`.
    pub fn exponential(k: u32, shots: u64) -> Result<Self> {
        if k == 0 || k > 40 {
            return Err(Error::InvalidParameter(format!("depth count {k} out of range")));
        }
        let depths = std::iter::once(0)
            .chain((0..k - 1).map(|j| 1u64 << j))
            .collect();
        Self::new(depths, shots)
    }

    /// Deepest exponential schedule whose query count does not exceed `budget`.
    pub fn for_budget(budget: u64, shots: u64) -> Result<Self> {
        let min = Self::exponential(1, shots)?;
        if min.queries() > budget {
            return Err(Error::InfeasibleAllocation(format!(
                "query budget {budget} is below the minimum schedule size {}",
                min.queries()
            )));
        }
        let mut best = min;
        for k in 2..=40 {
            let s = Self::exponential(k, shots)?;
            if s.queries() > budget {
                break;
            }
            best = s;
        }
        Ok(best)
    }

    /// Oracle queries `N_q = shots · Σ (2m + 1)`.
    pub fn queries(&self) -> u64 {
        self.shots * self.depths.iter().map(|m| 2 * m + 1).sum::<u64>()
    }

    /// `Σ (2m + 1)²`, the Fisher-information weight of the schedule.
    pub fn information_weight(&self) -> f64 {
        self.depths.iter().map(|m| ((2 * m + 1) as f64).powi(2)).sum()
    }

    /// Cramér-Rao standard deviation of `â` for a single run at amplitude `a`.
    pub fn cramer_rao_sd(&self, a: f64) -> f64 {
        (a * (1.0 - a) / (self.shots as f64 * self.information_weight())).sqrt()
    }
}

/// Maps the encoded mean onto a probability: `a = Σ amps² · i / (2ⁿ − 1)`.
pub fn mean_to_amplitude(state: &PreparedState) -> Result<AmplitudeTarget> {
    if state.n() == 0 {
        return Err(Error::InvalidParameter(
            "a single-point state encodes no mean".into(),
        ));
    }
    let scale = (state.amps().len() - 1) as f64;
    AmplitudeTarget::new((state.mean_index() / scale).clamp(0.0, 1.0))
}

/// Success probability of a shot at depth `m`: `sin²((2m + 1) θ_a)`.
pub fn grover_outcome_prob(t: &AmplitudeTarget, m: u64) -> f64 {
    ((2 * m + 1) as f64 * t.theta_a).sin().powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ShotRecord {
    pub depth: u64,
    pub hits: u64,
    pub shots: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MlaeOutcome {
    pub estimate: f64,
    pub theta: f64,
    pub trace: Vec<ShotRecord>,
    pub tie: bool,
}

/// Maximum-likelihood amplitude estimator for one schedule.
///
/// `ln sin²` and `ln cos²` of every depth are tabulated on the search grid once,
/// so each estimate costs one pass of multiply-adds over the table.
#[derive(Debug, Clone)]
pub struct Mlae {
    schedule: MlaeSchedule,
    factors: Vec<f64>,
    log_sin2: Vec<Vec<f64>>,
    log_cos2: Vec<Vec<f64>>,
}

fn grid_theta(j: usize) -> f64 {
    FRAC_PI_2 * j as f64 / (LIKELIHOOD_GRID - 1) as f64
}

impl Mlae {
    pub fn new(schedule: MlaeSchedule) -> Self {
        let factors: Vec<f64> = schedule.depths.iter().map(|m| (2 * m + 1) as f64).collect();
        let (log_sin2, log_cos2) = factors
            .iter()
            .map(|&f| {
                (0..LIKELIHOOD_GRID)
                    .map(|j| {
                        let (s, c) = (f * grid_theta(j)).sin_cos();
                        ((s * s).ln(), (c * c).ln())
                    })
                    .unzip::<_, _, Vec<f64>, Vec<f64>>()
            })
            .unzip();
        Self {
            schedule,
            factors,
            log_sin2,
            log_cos2,
        }
    }

    pub fn schedule(&self) -> &MlaeSchedule {
        &self.schedule
    }

    /// Draws Bernoulli shot outcomes at every depth.
    pub fn simulate(&self, t: &AmplitudeTarget, seed: u64) -> Vec<ShotRecord> {
        let mut rng = stream_rng(seed);
        self.schedule
            .depths
            .iter()
            .map(|&depth| {
                let p = grover_outcome_prob(t, depth);
                let hits = (0..self.schedule.shots)
                    .filter(|_| rng.random::<f64>() < p)
                    .count() as u64;
                ShotRecord {
                    depth,
                    hits,
                    shots: self.schedule.shots,
                }
            })
            .collect()
    }

    fn log_likelihood(&self, hits: &[f64], theta: f64) -> f64 {
        let shots = self.schedule.shots as f64;
        self.factors
            .iter()
            .zip(hits)
            .map(|(&f, &h)| {
                let (s, c) = (f * theta).sin_cos();
                let mut ll = 0.0;
                if h > 0.0 {
                    ll += h * (s * s).ln();
                }
                if shots - h > 0.0 {
                    ll += (shots - h) * (c * c).ln();
                }
                ll
            })
            .sum()
    }

    fn score(&self, hits: &[f64], theta: f64) -> f64 {
        let shots = self.schedule.shots as f64;
        self.factors
            .iter()
            .zip(hits)
            .map(|(&f, &h)| {
                let (s, c) = (f * theta).sin_cos();
                2.0 * f * (h * c / s - (shots - h) * s / c)
            })
            .sum()
    }

    /// Maximizes the likelihood for (possibly fractional) hit counts.
    /// Returns `θ̂` and whether separated grid maxima tied.
    pub fn maximize(&self, hits: &[f64]) -> (f64, bool) {
        assert_eq!(hits.len(), self.factors.len());
        let shots = self.schedule.shots as f64;
        let mut ll = vec![0.0_f64; LIKELIHOOD_GRID];
        for (k, &h) in hits.iter().enumerate() {
            if h > 0.0 {
                for (acc, v) in ll.iter_mut().zip(&self.log_sin2[k]) {
                    *acc += h * v;
                }
            }
            if shots - h > 0.0 {
                for (acc, v) in ll.iter_mut().zip(&self.log_cos2[k]) {
                    *acc += (shots - h) * v;
                }
            }
        }
        let (mut best, mut best_ll) = (0usize, f64::NEG_INFINITY);
        for (j, &v) in ll.iter().enumerate() {
            if v > best_ll {
                best = j;
                best_ll = v;
            }
        }
        let tie = ll
            .iter()
            .enumerate()
            .any(|(j, &v)| j.abs_diff(best) > 1 && v >= best_ll - TIE_TOL);

        let lo = grid_theta(best.saturating_sub(1));
        let hi = grid_theta((best + 1).min(LIKELIHOOD_GRID - 1));
        let mut theta = self.golden_section(hits, lo, hi);
        if !(self.log_likelihood(hits, theta) >= best_ll) {
            theta = grid_theta(best);
        }
        (self.polish(hits, theta, lo, hi), tie)
    }

    fn golden_section(&self, hits: &[f64], mut lo: f64, mut hi: f64) -> f64 {
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = hi - inv_phi * (hi - lo);
        let mut x2 = lo + inv_phi * (hi - lo);
        let mut f1 = self.log_likelihood(hits, x1);
        let mut f2 = self.log_likelihood(hits, x2);
        while hi - lo > GOLDEN_TOL {
            if f1 >= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - inv_phi * (hi - lo);
                f1 = self.log_likelihood(hits, x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + inv_phi * (hi - lo);
                f2 = self.log_likelihood(hits, x2);
            }
        }
        // the bracket ends may beat the interior when the maximum sits on 0 or π/2
        [lo, 0.5 * (lo + hi), hi]
            .into_iter()
            .max_by(|a, b| {
                self.log_likelihood(hits, *a)
                    .total_cmp(&self.log_likelihood(hits, *b))
            })
            .unwrap_or(lo)
    }

    /// Bisects the score function around `theta` once golden section has
    /// stalled on likelihood round-off.
    fn polish(&self, hits: &[f64], theta: f64, lo: f64, hi: f64) -> f64 {
        let delta = 1e-9;
        let (mut a, mut b) = ((theta - delta).max(lo), (theta + delta).min(hi));
        let (mut sa, sb) = (self.score(hits, a), self.score(hits, b));
        if !(sa.is_finite() && sb.is_finite()) || sa.signum() == sb.signum() || sa == 0.0 {
            return theta;
        }
        for _ in 0..60 {
            let mid = 0.5 * (a + b);
            let sm = self.score(hits, mid);
            if sm.signum() == sa.signum() {
                a = mid;
                sa = sm;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    }

    pub fn estimate(&self, t: &AmplitudeTarget, seed: u64) -> MlaeOutcome {
        let trace = self.simulate(t, seed);
        let hits: Vec<f64> = trace.iter().map(|r| r.hits as f64).collect();
        let (theta, tie) = self.maximize(&hits);
        MlaeOutcome {
            estimate: theta.sin().powi(2),
            theta,
            trace,
            tie,
        }
    }

    /// Estimate from the expected (noise-free) hit counts at `t`.
    pub fn estimate_from_expected(&self, t: &AmplitudeTarget) -> f64 {
        let shots = self.schedule.shots as f64;
        let hits: Vec<f64> = self
            .schedule
            .depths
            .iter()
            .map(|&m| shots * grover_outcome_prob(t, m))
            .collect();
        self.maximize(&hits).0.sin().powi(2)
    }

    pub fn record(&self, t: &AmplitudeTarget, seed: u64) -> EstimateRecord {
        let out = self.estimate(t, seed);
        let nq = self.schedule.queries();
        EstimateRecord {
            estimator: Estimator::QuantumMLAE,
            estimate: out.estimate,
            true_value: t.a,
            queries_or_samples: nq,
            cost_units: quantum_cost_units(nq, 0),
            seed,
            flags: RunFlags {
                likelihood_tie: out.tie,
                clamped: false,
            },
        }
    }

    /// Mean-index estimate for a prepared state.
    pub fn qmc_mean(&self, state: &PreparedState, seed: u64) -> Result<EstimateRecord> {
        let t = mean_to_amplitude(state)?;
        let scale = (state.amps().len() - 1) as f64;
        let rec = self.record(&t, seed);
        Ok(EstimateRecord {
            estimate: rec.estimate * scale,
            true_value: t.a * scale,
            ..rec
        })
    }
}

/// Cost of a quantum run: every query pays for one state preparation.
pub fn quantum_cost_units(queries: u64, state_prep_units: u64) -> u64 {
    queries * (1 + state_prep_units)
}

/// One maximum-likelihood amplitude estimate. Builds the likelihood table on each
/// call; reuse an [`Mlae`] across repetitions.
pub fn mlae_estimate(t: &AmplitudeTarget, sched: &MlaeSchedule, seed: u64) -> EstimateRecord {
    Mlae::new(sched.clone()).record(t, seed)
}

/// Quantum Monte-Carlo estimate of the mean index encoded in `state`.
pub fn qmc_mean(state: &PreparedState, sched: &MlaeSchedule, seed: u64) -> Result<EstimateRecord> {
    Mlae::new(sched.clone()).qmc_mean(state, seed)
}
