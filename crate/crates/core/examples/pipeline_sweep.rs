//! Runs the pipeline and exact-preparation arms side by side: sampling the first
//! split pulls the pipeline back to the classical slope.
//!
//! ```bash
//! cargo run --release --example pipeline_sweep
//! ```

use grqmc::dist::{DistributionSpec, Family};
use grqmc::experiments::{run_arm, Arm, SweepConfig};

fn main() -> grqmc::Result<()> {
    let cfg = SweepConfig {
        distribution: DistributionSpec::new(Family::standard_normal(), 10),
        targets: SweepConfig::log_targets(0.1, 0.001, 5),
        repetitions: 100,
        allocation: Default::default(),
        seed: 17,
    };
    for arm in [Arm::Pipeline, Arm::Exact] {
        let report = run_arm(arm, &cfg)?;
        println!("{arm}:");
        for row in &report.rows {
            println!(
                "  target {:.1e}  N's {:8}  N_q {:7}  cost {:10}  rmse {:.3e}",
                row.target, row.prep_samples, row.queries, row.cost_units, row.rmse
            );
        }
        let f = report.fit;
        println!("  slope {:.3} CI [{:.3}, {:.3}]", f.slope, f.ci95.0, f.ci95.1);
    }
    Ok(())
}
