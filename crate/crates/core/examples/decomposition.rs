//! Splits the pipeline MSE into estimation error about the erroneous mean and the
//! preparation error, in all three modes.
//!
//! ```bash
//! cargo run --release --example decomposition
//! ```

use grqmc::dist::{discretize, truncate, Family};
use grqmc::experiments::{decomposition_check, DecompositionMode};
use grqmc::quantum::MlaeSchedule;

fn main() -> grqmc::Result<()> {
    let disc = discretize(&truncate(Family::Uniform { lo: 0.0, hi: 1.0 }, 1e-9)?, 4)?;
    let sched = MlaeSchedule::exponential(4, 60)?;
    for mode in [
        DecompositionMode::Sampled,
        DecompositionMode::NoPrepError,
        DecompositionMode::ExactQmc,
    ] {
        let r = decomposition_check(&disc, 10_000, &sched, 2_000, mode, 3)?;
        println!(
            "{mode:?}: lhs {:.4e}  rhs {:.4e}  cross {:+.2e} (se {:.1e})  qmc {:.3e}  k^2 prep {:.3e}",
            r.lhs,
            r.rhs,
            r.cross,
            r.cross_stderr,
            r.qmc_mse,
            r.k * r.k * r.prep_mse
        );
    }
    Ok(())
}
