//! Training on noisy inputs or targets shifts the linear-network gradient
//! by a closed-form term; check it against direct recomputation.
//!
//! Run with `cargo run --example noise_identities`.

use ranklab::linalg::relative_error;
use ranklab::netcore::closed_form_gradient;
use ranklab::noisekit::{input_noise_phi, output_noise_gradient, RngStream};
use ranklab::{Activation, Dataset, NetworkWeights};

fn main() -> ranklab::Result<()> {
    let mut rng = RngStream::new(11, 0);
    let w = NetworkWeights::new(vec![
        rng.gaussian_matrix(5, 6, 0.4),
        rng.gaussian_matrix(4, 5, 0.4),
        rng.gaussian_matrix(3, 4, 0.4),
    ])?;
    let d = Dataset::new(
        rng.gaussian_matrix(6, 10, 1.0),
        rng.gaussian_matrix(3, 10, 1.0),
    )?;

    let eps_x = rng.gaussian_matrix(6, 10, 0.3);
    let noisy_x = Dataset::new(&d.x + &eps_x, d.y.clone())?;
    let eps_y = rng.gaussian_matrix(3, 10, 0.3);
    let noisy_y = Dataset::new(d.x.clone(), &d.y + &eps_y)?;

    for i in 0..w.depth() {
        let clean = closed_form_gradient(&w, Activation::LINEAR, &d, i)?;
        let shifted = closed_form_gradient(&w, Activation::LINEAR, &noisy_x, i)?;
        let phi = input_noise_phi(&w, &d, &eps_x, i)?;
        let predicted = &clean + &phi;
        let direct_y = closed_form_gradient(&w, Activation::LINEAR, &noisy_y, i)?;
        let predicted_y = output_noise_gradient(&w, &d, &eps_y, i)?;
        println!(
            "W{}: input noise {:.1e}   output noise {:.1e}   |phi| {:.3}",
            i + 1,
            relative_error(&shifted, &predicted),
            relative_error(&direct_y, &predicted_y),
            phi.frobenius_norm()
        );
    }
    Ok(())
}
