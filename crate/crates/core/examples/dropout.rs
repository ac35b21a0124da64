//! Gaussian dropout against additive input noise on a two-layer linear
//! network: closed-form expected losses and their Monte-Carlo estimates.
//!
//! Run with `cargo run --example dropout`.

use ranklab::noisekit::{
    gaussian_dropout_expected_loss, input_noise_expected_loss, input_noise_loss_sample,
    output_dropout_loss_sample, weight_dropout_expected_loss, weight_dropout_loss_sample,
    RngStream,
};
use ranklab::{Dataset, NetworkWeights};

fn monte_carlo(
    n: usize,
    mut draw: impl FnMut() -> ranklab::Result<f64>,
) -> ranklab::Result<(f64, f64)> {
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        samples.push(draw()?);
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok((mean, (var / n as f64).sqrt()))
}

fn main() -> ranklab::Result<()> {
    let mut rng = RngStream::new(5, 0);
    let w = NetworkWeights::new(vec![
        rng.gaussian_matrix(3, 4, 0.5),
        rng.gaussian_matrix(2, 3, 0.5),
    ])?;
    let d = Dataset::new(
        rng.gaussian_matrix(4, 6, 1.0),
        rng.gaussian_matrix(2, 6, 1.0),
    )?;
    let sigma = 0.4;
    let beta = sigma * sigma;
    let n = 50_000;

    let output_closed = gaussian_dropout_expected_loss(&w, &d, sigma)?;
    let input_closed = input_noise_expected_loss(&w, &d, beta)?;
    let weight_closed = weight_dropout_expected_loss(&w, &d, sigma)?;
    println!("closed forms at beta = sigma^2: dropout {output_closed:.12}, input noise {input_closed:.12}");

    let (m, se) = monte_carlo(n, || output_dropout_loss_sample(&w, &d, sigma, &mut rng))?;
    println!("mask on outputs : MC {m:.5} ± {se:.5}  closed {output_closed:.5}");
    let (m, se) = monte_carlo(n, || input_noise_loss_sample(&w, &d, beta, &mut rng))?;
    println!("input noise     : MC {m:.5} ± {se:.5}  closed {input_closed:.5}");
    let (m, se) = monte_carlo(n, || weight_dropout_loss_sample(&w, &d, sigma, &mut rng))?;
    println!("mask on W2      : MC {m:.5} ± {se:.5}  closed {weight_closed:.5}");
    Ok(())
}
