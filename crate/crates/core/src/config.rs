//! TOML run configuration: one section per subcommand, every key optional.
//!
//! ```toml
//! seed = 7
//!
//! [distribution]
//! family = "normal"
//! mean = 0.0
//! sd = 1.0
//! n = 10
//!
//! [sweep]
//! targets = [0.1, 0.01, 0.001]
//! repetitions = 400
//! arms = ["pipeline", "exact"]
//!
//! [sweep.allocation]
//! c_s = 1.0
//! c_q = 128.0
//! shots = 100
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dist::{DistributionSpec, Family};
use crate::error::{Error, Result};
use crate::experiments::{AllocationRule, Arm, DecompositionMode, SweepConfig};
use crate::quantum::MlaeSchedule;

/// Master seed used when none is given.
pub const DEFAULT_SEED: u64 = 20_240_611;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub distribution: DistributionSpec,
    pub prepare: PrepareSection,
    pub classical: ClassicalSection,
    pub quantum: QuantumSection,
    pub decompose: DecomposeSection,
    pub sweep: SweepSection,
    pub allocate: AllocateSection,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            distribution: DistributionSpec::new(Family::standard_normal(), 10),
            prepare: PrepareSection::default(),
            classical: ClassicalSection::default(),
            quantum: QuantumSection::default(),
            decompose: DecomposeSection::default(),
            sweep: SweepSection::default(),
            allocate: AllocateSection::default(),
        }
    }
}

/// How `prepare` sets the rotation angles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AngleRoute {
    /// Partial sums of the discretized pmf.
    #[default]
    Pmf,
    /// Exact cell masses from the analytic CDF.
    Cdf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrepareSection {
    pub route: AngleRoute,
    /// Estimate the first split from this many samples; 0 keeps it exact.
    pub prep_samples: u64,
    /// Fixed first-split error, overriding `prep_samples`.
    pub epsilon: Option<f64>,
}

impl Default for PrepareSection {
    fn default() -> Self {
        Self {
            route: AngleRoute::Pmf,
            prep_samples: 0,
            epsilon: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassicalSection {
    pub samples: u64,
    pub repetitions: usize,
}

impl Default for ClassicalSection {
    fn default() -> Self {
        Self {
            samples: 10_000,
            repetitions: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuantumSection {
    /// Number of Grover depths `K` in the exponential schedule.
    pub depths: u32,
    pub shots: u64,
    pub repetitions: usize,
}

impl Default for QuantumSection {
    fn default() -> Self {
        Self {
            depths: 7,
            shots: 100,
            repetitions: 1,
        }
    }
}

impl QuantumSection {
    pub fn schedule(&self) -> Result<MlaeSchedule> {
        MlaeSchedule::exponential(self.depths, self.shots)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecomposeSection {
    pub prep_samples: u64,
    pub depths: u32,
    pub shots: u64,
    pub repetitions: usize,
    pub mode: DecompositionMode,
}

impl Default for DecomposeSection {
    fn default() -> Self {
        // 60 shots on 4 depths is 1080 queries; far fewer shots per depth
        // lets the likelihood lock onto aliased modes
        Self {
            prep_samples: 10_000,
            depths: 4,
            shots: 60,
            repetitions: 10_000,
            mode: DecompositionMode::Sampled,
        }
    }
}

impl DecomposeSection {
    pub fn schedule(&self) -> Result<MlaeSchedule> {
        MlaeSchedule::exponential(self.depths, self.shots)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub targets: Vec<f64>,
    pub repetitions: usize,
    pub arms: Vec<Arm>,
    pub allocation: AllocationRule,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            targets: SweepConfig::log_targets(1e-1, 1e-3, 5),
            repetitions: 400,
            arms: vec![Arm::Pipeline, Arm::Exact],
            allocation: AllocationRule::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AllocateSection {
    pub budgets: Vec<u64>,
    pub shots: u64,
    pub grid: usize,
    /// Sampler accuracy that sets the per-sample operation count.
    pub eps_target: f64,
}

impl Default for AllocateSection {
    fn default() -> Self {
        Self {
            budgets: vec![10_000, 100_000, 1_000_000, 10_000_000],
            shots: 10,
            grid: 10_000,
            eps_target: 1e-3,
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn sweep_config(&self) -> SweepConfig {
        SweepConfig {
            distribution: self.distribution,
            targets: self.sweep.targets.clone(),
            repetitions: self.sweep.repetitions,
            allocation: self.sweep.allocation,
            seed: self.seed,
        }
    }
}
