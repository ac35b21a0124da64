//! Mini-batch gradient spread and the probability bound relating a
//! mini-batch gradient to a noisy full-batch gradient.
//!
//! Run with `cargo run --example sgd_bound`.

use ranklab::noisekit::RngStream;
use ranklab::oracle::{check_sgd_bound, sgd_bound_problem};
use ranklab::trainer::sgd_gradient_stats;

fn main() -> ranklab::Result<()> {
    let (w, d) = sgd_bound_problem(1)?;
    let mut rng = RngStream::new(1, 0);
    for batch in [1, 4, 10, 20, 40] {
        let stats = sgd_gradient_stats(&w, &d, batch, 2000, &mut rng)?;
        println!("batch {batch:>2}: gamma ≈ {:.4}", stats.gamma_hat);
    }
    for delta in [0.1, 0.2, 0.5] {
        let report = check_sgd_bound(&w, &d, 8, 0.05, delta, 5000, &mut rng)?;
        println!(
            "delta {delta}: {} of {} draws exceed the bound (worst ratio {:.3})",
            report.failures, report.trials, report.worst_violation
        );
    }
    Ok(())
}
