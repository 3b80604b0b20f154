//! Estimates the first split from samples, perturbs the state and shows the
//! encoded mean moving by exactly `-k eps`.
//!
//! ```bash
//! cargo run --release --example first_angle_error
//! ```

use grqmc::dist::{discretize, exact_mean, half_gap_k, left_mass, truncate, Family};
use grqmc::grover_rudolph::{perturb_first_iteration, LeftMassEstimator};

fn main() -> grqmc::Result<()> {
    let d = truncate(Family::standard_normal(), 1e-9)?;
    let disc = discretize(&d, 8)?;
    let (mu, k, pl) = (exact_mean(&disc), half_gap_k(&disc)?, left_mass(&disc));
    println!("mu {mu:.4}, k {k:.4}, p_l {pl:.6}");

    let est = LeftMassEstimator::new(&disc);
    for samples in [100, 10_000, 1_000_000] {
        let err = est.draw(samples, 7);
        let pert = perturb_first_iteration(&disc, &err)?;
        let shifted = pert.state.mean_index();
        println!(
            "N's={samples:8}  eps {:+.3e}  mean' {shifted:.6}  mu - k eps {:.6}  binomial sd {:.3e}",
            err.epsilon_l,
            mu - k * err.epsilon_l,
            (pl * (1.0 - pl) / samples as f64).sqrt()
        );
    }
    Ok(())
}
