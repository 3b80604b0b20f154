//! Splits a total cost between first-split samples and amplitude-estimation
//! queries to minimize the predicted MSE.
//!
//! ```bash
//! cargo run --release --example budget_allocation
//! ```

use grqmc::classical::CostModel;
use grqmc::dist::{discretize, truncate, Family};
use grqmc::experiments::MseModel;

fn main() -> grqmc::Result<()> {
    let disc = discretize(&truncate(Family::standard_normal(), 1e-9)?, 10)?;
    let model = MseModel::for_distribution(&disc, 10, CostModel::new(10, 1e-3))?;
    println!(
        "A {:.3e}  B {:.3e}  ops/sample {}",
        model.qmc_coef, model.prep_coef, model.ops_per_sample
    );
    for total in [10_000u64, 100_000, 1_000_000, 10_000_000] {
        let a = model.allocate(total, 10_000)?;
        println!(
            "cost {total:9}  N's {:8}  N_q {:8}  prep {:.3e}  qmc {:.3e}  rmse {:.3e}",
            a.prep_samples,
            a.queries,
            a.prep_term,
            a.qmc_term,
            a.predicted_rmse()
        );
    }
    Ok(())
}
