//! Truncates and discretizes each density family, then compares the discrete
//! mean with the continuous one against the first-order error bound.
//!
//! ```bash
//! cargo run --release --example discretize
//! ```

use grqmc::dist::{discretization_error_report, discretize, exact_mean, left_mass, truncate, Family};

fn main() -> grqmc::Result<()> {
    for name in ["normal", "exponential", "logistic", "uniform"] {
        let d = truncate(Family::standard(name)?, 1e-9)?;
        let (lo, hi) = d.support();
        println!("{name}: support [{lo:.4}, {hi:.4}]");
        for n in [4, 8, 12] {
            let disc = discretize(&d, n)?;
            let r = discretization_error_report(&d, n)?;
            println!(
                "  n={n:2}  index mean {:10.4}  p_l {:.6}  |mu - mu_d| {:.3e}  bound {:.3e}",
                exact_mean(&disc),
                left_mass(&disc),
                r.measured,
                r.bound
            );
        }
    }
    Ok(())
}
