//! Builds the rotation schedule for a discretized normal, prepares the state and
//! checks that squared amplitudes reproduce the pmf.
//!
//! ```bash
//! cargo run --release --example grover_rudolph
//! ```

use grqmc::dist::{discretize, truncate, Family};
use grqmc::grover_rudolph::{angles_exact, angles_from_pmf, build_state};

fn main() -> grqmc::Result<()> {
    let d = truncate(Family::standard_normal(), 1e-9)?;
    let n = 6;
    let disc = discretize(&d, n)?;
    let schedule = angles_from_pmf(&disc);
    for (m, level) in schedule.levels().iter().enumerate().take(3) {
        let shown: Vec<String> = level.iter().map(|t| format!("{t:.4}")).collect();
        println!("iteration {m}: {}", shown.join(" "));
    }

    let state = build_state(&schedule);
    let worst = state
        .amps()
        .iter()
        .zip(disc.probs())
        .map(|(a, p)| (a * a - p).abs())
        .fold(0.0, f64::max);
    println!("norm {:.15}, max |amp^2 - p| {worst:.2e}", state.norm_sqr());

    // angles from the analytic CDF differ only by the discretization rule
    let analytic = angles_exact(&d, n)?;
    println!(
        "first angle: pmf route {:.10}, analytic route {:.10}",
        schedule.first_angle(),
        analytic.first_angle()
    );
    Ok(())
}
