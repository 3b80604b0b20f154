//! Classical Monte-Carlo baseline: inverse-CDF sampling from the discretized
//! pmf, sample-mean estimation, operation-count accounting and RMSE studies.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dist::{exact_mean, DiscretizedDistribution};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream_rng};
use crate::stats::{self, neumaier_sum};

/// Bootstrap resamples used for RMSE standard errors.
pub const BOOTSTRAP_RESAMPLES: usize = 1000;
/// Minimum repetitions accepted by [`rmse_study`].
pub const MIN_REPETITIONS: usize = 30;

/// Inverse-CDF sampler: cumulative sums plus binary search, `O(log N)` comparisons per draw.
#[derive(Debug, Clone)]
pub struct Sampler {
    cdf: Vec<f64>,
}

impl Sampler {
    pub fn new(disc: &DiscretizedDistribution) -> Self {
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = disc
            .probs()
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        // entries after the last non-zero mass must never be selected
        let last = disc.probs().iter().rposition(|&p| p > 0.0).unwrap_or(0);
        for c in &mut cdf[last..] {
            *c = 1.0;
        }
        Self { cdf }
    }

    /// Draws an index `i` with probability `p_i`.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.cdf.partition_point(|&c| c <= u)
    }

    /// `P(index < i)` as stored in the table: `sample` returns an index below
    /// `i` exactly when its uniform draw is below this value.
    pub fn mass_below(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.cdf[i.min(self.cdf.len()) - 1]
        }
    }

    pub fn len(&self) -> usize {
        self.cdf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cdf.is_empty()
    }
}

/// One draw from `disc`. Builds the cumulative table on every call; use
/// [`Sampler`] directly in loops.
pub fn sample<R: Rng + ?Sized>(disc: &DiscretizedDistribution, rng: &mut R) -> usize {
    Sampler::new(disc).sample(rng)
}

/// Per-sample operation count: `n` comparisons for the index search plus
/// `⌈log₂(1/ε)⌉` bits of precision for the target accuracy `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CostModel {
    pub bits_per_sample: u64,
    pub ops_per_sample: u64,
}

impl CostModel {
    pub fn new(n: u32, eps_target: f64) -> Self {
        assert!(eps_target > 0.0, "accuracy target must be positive");
        let precision_bits = (1.0 / eps_target).log2().ceil().max(0.0) as u64;
        Self {
            bits_per_sample: n as u64,
            ops_per_sample: n as u64 + precision_bits,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CostLedger {
    pub samples_drawn: u64,
    pub cost_units: u64,
    pub cost_model: CostModel,
}

impl CostLedger {
    pub fn new(cost_model: CostModel) -> Self {
        Self {
            samples_drawn: 0,
            cost_units: 0,
            cost_model,
        }
    }

    pub fn record(&mut self, samples: u64) {
        self.samples_drawn += samples;
        self.cost_units = self.samples_drawn * self.cost_model.ops_per_sample;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Estimator {
    ClassicalMean,
    PlBinomial,
    QuantumMLAE,
    GRPipeline,
}

impl Estimator {
    pub fn as_str(self) -> &'static str {
        match self {
            Estimator::ClassicalMean => "classical_mean",
            Estimator::PlBinomial => "pl_binomial",
            Estimator::QuantumMLAE => "quantum_mlae",
            Estimator::GRPipeline => "gr_pipeline",
        }
    }
}

/// Numerical conditions noticed while producing an estimate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct RunFlags {
    /// Several separated likelihood maxima tied; the leftmost was taken.
    pub likelihood_tie: bool,
    /// `p_l + ε_l` left `[0, 1]` and was clamped.
    pub clamped: bool,
}

impl RunFlags {
    pub fn any(&self) -> bool {
        self.likelihood_tie || self.clamped
    }

    pub fn merge(self, other: RunFlags) -> RunFlags {
        RunFlags {
            likelihood_tie: self.likelihood_tie || other.likelihood_tie,
            clamped: self.clamped || other.clamped,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRecord {
    pub estimator: Estimator,
    pub estimate: f64,
    pub true_value: f64,
    pub queries_or_samples: u64,
    pub cost_units: u64,
    pub seed: u64,
    #[serde(skip)]
    pub flags: RunFlags,
}

impl EstimateRecord {
    pub fn sq_error(&self) -> f64 {
        (self.estimate - self.true_value).powi(2)
    }
}

/// Sample mean of `n_samples` indices drawn with `sampler`.
pub fn sample_mean(sampler: &Sampler, n_samples: u64, seed: u64) -> f64 {
    let mut rng = stream_rng(seed);
    // integer accumulation keeps the sum exact
    let total: u64 = (0..n_samples).map(|_| sampler.sample(&mut rng) as u64).sum();
    total as f64 / n_samples as f64
}

/// Classical estimate of the mean index from `n_samples` draws.
///
/// The cost model targets accuracy `1/√N_s`, the scale at which the sample mean
/// converges.
pub fn estimate_mean(disc: &DiscretizedDistribution, n_samples: u64, seed: u64) -> EstimateRecord {
    assert!(n_samples >= 1, "at least one sample is needed");
    let sampler = Sampler::new(disc);
    let model = CostModel::new(disc.n(), 1.0 / (n_samples as f64).sqrt());
    estimate_mean_with(&sampler, exact_mean(disc), model, n_samples, seed)
}

pub fn estimate_mean_with(
    sampler: &Sampler,
    true_value: f64,
    cost_model: CostModel,
    n_samples: u64,
    seed: u64,
) -> EstimateRecord {
    let mut ledger = CostLedger::new(cost_model);
    let estimate = sample_mean(sampler, n_samples, seed);
    ledger.record(n_samples);
    EstimateRecord {
        estimator: Estimator::ClassicalMean,
        estimate,
        true_value,
        queries_or_samples: n_samples,
        cost_units: ledger.cost_units,
        seed,
        flags: RunFlags::default(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RmseStudy {
    pub rmse: f64,
    /// Bootstrap standard error of `rmse`.
    pub stderr: f64,
    /// Per-repetition squared errors, in repetition order.
    #[serde(skip)]
    pub sq_errors: Vec<f64>,
}

/// RMSE of √(mean of squared errors) with a bootstrap standard error.
pub fn rmse_with_stderr(sq_errors: Vec<f64>, seed: u64) -> RmseStudy {
    let rmse_of = |s: &[f64]| stats::mean(s).sqrt();
    let rmse = rmse_of(&sq_errors);
    let reps = stats::bootstrap(&sq_errors, BOOTSTRAP_RESAMPLES, seed, rmse_of);
    RmseStudy {
        rmse,
        stderr: stats::std_dev(&reps),
        sq_errors,
    }
}

/// Runs `estimator` on `repetitions` derived seeds and measures its RMSE about
/// `true_value`. Repetitions run in parallel; results do not depend on scheduling.
pub fn rmse_study<F>(estimator: F, true_value: f64, repetitions: usize, seed: u64) -> Result<RmseStudy>
where
    F: Fn(u64) -> f64 + Sync,
{
    if repetitions < MIN_REPETITIONS {
        return Err(Error::InvalidParameter(format!(
            "rmse_study needs at least {MIN_REPETITIONS} repetitions, got {repetitions}"
        )));
    }
    let sq_errors: Vec<f64> = (0..repetitions as u64)
        .into_par_iter()
        .map(|r| (estimator(derive_seed(seed, &[r])) - true_value).powi(2))
        .collect();
    Ok(rmse_with_stderr(sq_errors, derive_seed(seed, &[u64::MAX])))
}

/// Range of the sampled mean when every mass of the discretized pmf is off by at
/// most a relative `eps_s_max`: `((1 − ε) μ_d, (1 + ε) μ_d)`.
pub fn sampling_inflation_bound(mu_d: f64, eps_s_max: f64) -> (f64, f64) {
    ((1.0 - eps_s_max) * mu_d, (1.0 + eps_s_max) * mu_d)
}

/// Bias contribution `(ε_d + ε_s)²` to the mean squared error.
pub fn bias_budget(eps_d_max: f64, eps_s_max: f64) -> f64 {
    (eps_d_max + eps_s_max).powi(2)
}

/// Exact variance of the index under `disc`.
pub fn index_variance(disc: &DiscretizedDistribution) -> f64 {
    let mu = exact_mean(disc);
    neumaier_sum(
        disc.probs()
            .iter()
            .enumerate()
            .map(|(i, p)| p * (i as f64 - mu).powi(2)),
    )
}
