//! Sample-mean RMSE against the sample count, with the fitted log-log slope.
//!
//! ```bash
//! cargo run --release --example classical_baseline
//! ```

use grqmc::dist::{DistributionSpec, Family};
use grqmc::experiments::{fit_loglog_slope_on, run_arm, Arm, SweepConfig};

fn main() -> grqmc::Result<()> {
    let cfg = SweepConfig {
        distribution: DistributionSpec::new(Family::standard_normal(), 10),
        targets: SweepConfig::log_targets(0.1, 0.003, 5),
        repetitions: 200,
        allocation: Default::default(),
        seed: 11,
    };
    let report = run_arm(Arm::Classical, &cfg)?;
    for row in &report.rows {
        println!(
            "N_s {:8}  cost {:10}  rmse {:.4e} +- {:.1e}",
            row.prep_samples, row.cost_units, row.rmse, row.stderr
        );
    }
    let by_samples = fit_loglog_slope_on(&report.rows, |r| r.prep_samples as f64, cfg.seed)?;
    println!(
        "slope vs samples {:.3} CI [{:.3}, {:.3}]",
        by_samples.slope, by_samples.ci95.0, by_samples.ci95.1
    );
    Ok(())
}
