//! Plain and perturbed gradient descent on a small certified problem,
//! compared against the least-squares floor.
//!
//! Run with `cargo run --example perturbed_training`.

use ranklab::datagen::{low_rank_init, synth_dataset, InitScale};
use ranklab::netcore::optimal_loss;
use ranklab::noisekit::{NoiseMode, NoiseSpec};
use ranklab::trainer::{train, TrainConfig};
use ranklab::{Activation, LayerDims};

fn main() -> ranklab::Result<()> {
    let dims: LayerDims = "30x20x10".parse()?;
    let data = synth_dataset(30, 10, 100, 1)?;
    let floor = optimal_loss(&data)?;
    let w0 = low_rank_init(&dims, 4, InitScale::DEFAULT, 1)?;

    for (label, mode) in [
        ("gd", NoiseMode::None),
        ("perturbed", NoiseMode::Gradient { sigma: 1e-3 }),
    ] {
        let cfg = TrainConfig {
            learning_rate: 1e-3,
            iterations: 4000,
            noise: NoiseSpec::new(mode, 7)?,
            ..TrainConfig::default()
        };
        let (_, traj) = train(&w0, Activation::LINEAR, &data, &cfg)?;
        let last = traj.last().expect("at least one record");
        println!(
            "{label:>9}: rank {} -> {}, loss {:.6} (floor {:.6}, relative gap {:.2e})",
            traj.records[0].rank_product,
            last.rank_product,
            last.loss,
            floor,
            (last.loss - floor) / floor
        );
    }
    Ok(())
}
