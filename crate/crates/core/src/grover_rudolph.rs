//! Amplitude-level Grover-Rudolph state preparation.
//!
//! The state is grown one qubit at a time. At level `m` each of the `2ᵐ`
//! dyadic intervals is split in two by a rotation `θ[m][i] = arccos √f(i)`,
//! where `f(i)` is the fraction of the interval's mass lying in its left half.
//! The new qubit is appended as the least significant bit, so interval `i`
//! becomes cells `2i` (left) and `2i + 1` (right).

use std::f64::consts::FRAC_PI_4;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::classical::Sampler;
use crate::dist::{self, left_mass, ContinuousDistribution, DiscretizedDistribution};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream_rng};
use crate::stats::neumaier_sum;

/// Intervals lighter than this get the `π/4` convention instead of a computed angle.
pub const VANISHING_MASS: f64 = 1e-300;
/// Tolerance on `Σ amps² = 1`.
pub const NORM_TOL: f64 = 1e-12;

/// Per-level rotation angles, `levels[m][i]` for `m < n`, `i < 2ᵐ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngleSchedule {
    levels: Vec<Vec<f64>>,
    /// `(level, interval)` pairs that received the vanishing-mass convention.
    substitutions: Vec<(u32, usize)>,
}

impl AngleSchedule {
    pub fn from_levels(levels: Vec<Vec<f64>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidParameter("schedule needs at least one level".into()));
        }
        for (m, level) in levels.iter().enumerate() {
            if level.len() != 1 << m {
                return Err(Error::InvalidParameter(format!(
                    "level {m} has {} angles, expected {}",
                    level.len(),
                    1usize << m
                )));
            }
            if let Some(t) = level
                .iter()
                .find(|t| !(0.0..=std::f64::consts::FRAC_PI_2).contains(*t))
            {
                return Err(Error::InvalidParameter(format!(
                    "angle {t} at level {m} is outside [0, π/2]"
                )));
            }
        }
        Ok(Self {
            levels,
            substitutions: Vec::new(),
        })
    }

    pub fn n(&self) -> u32 {
        self.levels.len() as u32
    }

    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    /// The unconditional rotation on the first qubit.
    pub fn first_angle(&self) -> f64 {
        self.levels[0][0]
    }

    pub fn substitutions(&self) -> &[(u32, usize)] {
        &self.substitutions
    }

    /// Replaces the first-level angle.
    pub fn with_first_angle(mut self, theta: f64) -> Result<Self> {
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) {
            return Err(Error::InvalidParameter(format!(
                "angle {theta} is outside [0, π/2]"
            )));
        }
        self.levels[0][0] = theta;
        Ok(self)
    }
}

/// Real, non-negative amplitudes of a `2ⁿ`-dimensional state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreparedState {
    amps: Vec<f64>,
}

impl PreparedState {
    pub fn new(amps: Vec<f64>) -> Result<Self> {
        if amps.is_empty() || !amps.len().is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "state length {} is not a power of two",
                amps.len()
            )));
        }
        if let Some(a) = amps.iter().find(|a| !a.is_finite() || **a < 0.0) {
            return Err(Error::InvalidParameter(format!("amplitude {a} is negative or non-finite")));
        }
        let norm = neumaier_sum(amps.iter().map(|a| a * a));
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParameter(format!("state norm² is {norm}")));
        }
        Ok(Self { amps })
    }

    pub fn n(&self) -> u32 {
        self.amps.len().trailing_zeros()
    }

    pub fn amps(&self) -> &[f64] {
        &self.amps
    }

    /// Measurement probabilities `amps²`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a * a).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        neumaier_sum(self.amps.iter().map(|a| a * a))
    }

    /// Mean index of the encoded distribution, `Σ i·amps_i²`.
    pub fn mean_index(&self) -> f64 {
        neumaier_sum(self.amps.iter().enumerate().map(|(i, a)| i as f64 * a * a))
    }
}

/// Sampled error on the first-level left mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FirstAngleError {
    /// Signed error `p̂_l − p_l`.
    pub epsilon_l: f64,
    /// Number of samples `N′_s` behind the estimate (0 when injected by hand).
    pub n_samples: u64,
    pub seed: u64,
}

impl FirstAngleError {
    /// A hand-picked error, not drawn from samples.
    pub fn fixed(epsilon_l: f64) -> Self {
        Self {
            epsilon_l,
            n_samples: 0,
            seed: 0,
        }
    }
}

/// Angle splitting a node of mass `left + right`; `None` when the node is vanishing.
fn split_angle(left: f64, right: f64) -> Option<f64> {
    if left + right < VANISHING_MASS {
        return None;
    }
    // atan2(√R, √L) = arccos √(L / (L + R)) without the cancellation near f = 1
    Some(right.max(0.0).sqrt().atan2(left.max(0.0).sqrt()))
}

/// Fraction of the mass of `[lo, hi)` that lies in `[lo, (lo + hi)/2)`, from the analytic CDF.
pub fn split_ratio(d: &ContinuousDistribution, lo: f64, hi: f64) -> Result<f64> {
    let (x_l, x_u) = d.support();
    if !(lo < hi && lo >= x_l && hi <= x_u) {
        return Err(Error::InvalidParameter(format!(
            "interval [{lo}, {hi}) is empty or outside the support [{x_l}, {x_u})"
        )));
    }
    let mid = 0.5 * (lo + hi);
    let left = d.mass(lo, mid);
    let right = d.mass(mid, hi);
    if left + right < VANISHING_MASS {
        return Err(Error::VanishingMass { lo, hi });
    }
    Ok((left / (left + right)).clamp(0.0, 1.0))
}

/// Angles encoding `disc` exactly: each split ratio is a ratio of partial sums of the pmf.
pub fn angles_from_pmf(disc: &DiscretizedDistribution) -> AngleSchedule {
    let n = disc.n() as usize;
    // tree[m] holds the 2ᵐ node masses at level m; tree[n] is the pmf itself
    let mut tree: Vec<Vec<f64>> = vec![Vec::new(); n + 1];
    tree[n] = disc.probs().to_vec();
    for m in (0..n).rev() {
        tree[m] = tree[m + 1].chunks_exact(2).map(|c| c[0] + c[1]).collect();
    }
    let mut substitutions = Vec::new();
    let levels = (0..n)
        .map(|m| {
            let children = &tree[m + 1];
            (0..1usize << m)
                .map(|i| {
                    split_angle(children[2 * i], children[2 * i + 1]).unwrap_or_else(|| {
                        substitutions.push((m as u32, i));
                        FRAC_PI_4
                    })
                })
                .collect()
        })
        .collect();
    AngleSchedule {
        levels,
        substitutions,
    }
}

/// Angle schedule whose state reproduces `discretize(d, n)`.
pub fn angles_exact(d: &ContinuousDistribution, n: u32) -> Result<AngleSchedule> {
    Ok(angles_from_pmf(&dist::discretize(d, n)?))
}

/// Angle schedule from analytic interval masses on the dyadic refinement of the support.
/// Its state encodes the exact cell masses `∫ p` rather than the left-Riemann pmf.
pub fn angles_from_cdf(d: &ContinuousDistribution, n: u32) -> Result<AngleSchedule> {
    if !(1..=dist::MAX_QUBITS).contains(&n) {
        return Err(Error::InvalidParameter(format!("n = {n} out of range")));
    }
    let (x_l, x_u) = d.support();
    let mut substitutions = Vec::new();
    let levels = (0..n)
        .map(|m| {
            let count = 1usize << m;
            let w = (x_u - x_l) / count as f64;
            (0..count)
                .map(|i| {
                    let lo = x_l + i as f64 * w;
                    let mid = lo + 0.5 * w;
                    let hi = if i + 1 == count { x_u } else { lo + w };
                    split_angle(d.mass(lo, mid), d.mass(mid, hi)).unwrap_or_else(|| {
                        substitutions.push((m, i));
                        FRAC_PI_4
                    })
                })
                .collect()
        })
        .collect();
    Ok(AngleSchedule {
        levels,
        substitutions,
    })
}

/// Runs the iterative doubling: `amp_i → (amp_i cos θ[m][i], amp_i sin θ[m][i])`.
pub fn build_state(schedule: &AngleSchedule) -> PreparedState {
    let mut amps = vec![1.0_f64];
    for level in &schedule.levels {
        amps = amps
            .iter()
            .zip(level)
            .flat_map(|(&a, &theta)| {
                let (s, c) = theta.sin_cos();
                [a * c, a * s]
            })
            .collect();
    }
    PreparedState { amps }
}

/// State produced when the first rotation encodes `p_l + ε_l` instead of `p_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    pub state: PreparedState,
    /// The error actually applied after clamping `p_l + ε_l` into `[0, 1]`.
    pub epsilon_applied: f64,
    pub clamped: bool,
}

/// Rescales the left half by `(p_l + ε_l)/p_l` and the right half by
/// `(1 − p_l − ε_l)/(1 − p_l)`, leaving every deeper split ratio untouched.
pub fn perturb_first_iteration(
    disc: &DiscretizedDistribution,
    err: &FirstAngleError,
) -> Result<Perturbation> {
    let pl = left_mass(disc);
    if !(pl > 0.0 && pl < 1.0) {
        return Err(Error::DegenerateHalf(pl));
    }
    let wanted = pl + err.epsilon_l;
    let target = wanted.clamp(0.0, 1.0);
    let clamped = target != wanted;
    let left_scale = target / pl;
    let right_scale = (1.0 - target) / (1.0 - pl);
    let half = disc.half();
    let amps = disc
        .probs()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let s = if i < half { left_scale } else { right_scale };
            (p * s).sqrt()
        })
        .collect();
    Ok(Perturbation {
        state: PreparedState { amps },
        epsilon_applied: target - pl,
        clamped,
    })
}

/// Estimates the first-level left mass by sampling and counting.
#[derive(Debug, Clone)]
pub struct LeftMassEstimator {
    sampler: Sampler,
    half: usize,
    left_mass: f64,
}

impl LeftMassEstimator {
    pub fn new(disc: &DiscretizedDistribution) -> Self {
        Self {
            sampler: Sampler::new(disc),
            half: disc.half(),
            left_mass: left_mass(disc),
        }
    }

    pub fn left_mass(&self) -> f64 {
        self.left_mass
    }

    /// Draws `n_samples` indices and returns the counting error on `p_l`.
    ///
    /// Only the side of the half boundary matters, so each draw is decided by
    /// comparing its uniform variate with the sampler's cumulative mass there;
    /// the counts are identical to classifying full `Sampler::sample` draws.
    pub fn draw(&self, n_samples: u64, seed: u64) -> FirstAngleError {
        assert!(n_samples >= 1, "at least one sample is needed");
        let mut rng = stream_rng(seed);
        let cut = self.sampler.mass_below(self.half);
        let hits = (0..n_samples).filter(|_| rng.random::<f64>() < cut).count();
        FirstAngleError {
            epsilon_l: hits as f64 / n_samples as f64 - self.left_mass,
            n_samples,
            seed,
        }
    }
}

/// Monte-Carlo estimate of the first split: `N′_s` samples, count those in the left half.
pub fn mc_first_angle(disc: &DiscretizedDistribution, n_samples: u64, seed: u64) -> FirstAngleError {
    LeftMassEstimator::new(disc).draw(n_samples, seed)
}

/// Schedule in which every split ratio is replaced by an independent binomial
/// estimate from `n_samples` draws. For exploration; the acceptance experiments
/// only perturb the first level.
pub fn angles_all_levels_noisy(
    disc: &DiscretizedDistribution,
    n_samples: u64,
    seed: u64,
) -> Result<AngleSchedule> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be positive".into()));
    }
    let exact = angles_from_pmf(disc);
    let levels = exact
        .levels
        .iter()
        .enumerate()
        .map(|(m, level)| {
            level
                .iter()
                .enumerate()
                .map(|(i, &theta)| {
                    let f = theta.cos().powi(2).clamp(0.0, 1.0);
                    let binom = Binomial::new(n_samples, f).expect("f lies in [0, 1]");
                    let mut rng = stream_rng(derive_seed(seed, &[m as u64, i as u64]));
                    let f_hat = binom.sample(&mut rng) as f64 / n_samples as f64;
                    f_hat.sqrt().clamp(0.0, 1.0).acos()
                })
                .collect()
        })
        .collect();
    Ok(AngleSchedule {
        levels,
        substitutions: exact.substitutions,
    })
}
