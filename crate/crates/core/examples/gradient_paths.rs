//! The three gradient paths — closed form, backprop, finite differences —
//! on one linear and one tanh network.
//!
//! Run with `cargo run --example gradient_paths`.

use ranklab::linalg::relative_error;
use ranklab::netcore::{backprop_gradients, closed_form_gradient, finite_difference_gradient};
use ranklab::noisekit::RngStream;
use ranklab::{Activation, ActivationKind, Dataset, NetworkWeights};

fn main() -> ranklab::Result<()> {
    let mut rng = RngStream::new(3, 0);
    let w = NetworkWeights::new(vec![
        rng.gaussian_matrix(4, 5, 0.5),
        rng.gaussian_matrix(3, 4, 0.5),
        rng.gaussian_matrix(2, 3, 0.5),
    ])?;
    let d = Dataset::new(
        rng.gaussian_matrix(5, 7, 1.0),
        rng.gaussian_matrix(2, 7, 1.0),
    )?;

    println!("linear network");
    let bp = backprop_gradients(&w, Activation::LINEAR, &d)?;
    for (i, g) in bp.iter().enumerate() {
        let cf = closed_form_gradient(&w, Activation::LINEAR, &d, i)?;
        let fd = finite_difference_gradient(&w, Activation::LINEAR, &d, i)?;
        println!(
            "  W{}: |closed - backprop| {:.1e}   |backprop - fd| {:.1e}",
            i + 1,
            relative_error(&cf, g),
            relative_error(g, &fd)
        );
    }

    let act = Activation::hidden_and_output(ActivationKind::Tanh);
    println!("tanh on hidden and output layers");
    for (i, g) in backprop_gradients(&w, act, &d)?.iter().enumerate() {
        let fd = finite_difference_gradient(&w, act, &d, i)?;
        println!(
            "  W{}: |backprop - fd| {:.1e}",
            i + 1,
            relative_error(g, &fd)
        );
    }
    if let Err(e) = closed_form_gradient(&w, act, &d, 0) {
        println!("  closed form: {e}");
    }
    Ok(())
}
