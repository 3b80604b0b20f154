//! Maximum-likelihood amplitude estimation on a fixed amplitude: RMSE against the
//! Cramer-Rao floor as the schedule deepens.
//!
//! ```bash
//! cargo run --release --example mlae
//! ```

use grqmc::quantum::{AmplitudeTarget, Mlae, MlaeSchedule};
use grqmc::rng::derive_seed;

fn main() -> grqmc::Result<()> {
    let t = AmplitudeTarget::new(0.3)?;
    let reps = 200;
    for k in 3..=8 {
        let mlae = Mlae::new(MlaeSchedule::exponential(k, 100)?);
        let mse: f64 = (0..reps)
            .map(|r| (mlae.estimate(&t, derive_seed(5, &[k as u64, r])).estimate - t.a).powi(2))
            .sum::<f64>()
            / reps as f64;
        let sched = mlae.schedule();
        println!(
            "K={k}  N_q {:6}  rmse {:.3e}  cramer-rao {:.3e}",
            sched.queries(),
            mse.sqrt(),
            sched.cramer_rao_sd(t.a)
        );
    }

    let one = Mlae::new(MlaeSchedule::exponential(4, 100)?).estimate(&t, 1);
    for shot in &one.trace {
        println!("depth {:3}: {:3}/{} hits", shot.depth, shot.hits, shot.shots);
    }
    Ok(())
}
