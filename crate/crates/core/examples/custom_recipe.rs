//! Define a small experiment in the recipe format and run both arms from
//! the same data and initial weights.
//!
//! Run with `cargo run --example custom_recipe`.

use ranklab::cli::{run_recipe, trajectory_csv, ExperimentRecipe, RecipeOutput};

const RECIPE: &str = "
version = 1
name = small
dims = 60x40x20
activation = linear
samples = 100
data_seed = 3
init_rank = 8
learning_rate = 2e-3
iterations = 40
arms = gd, perturbed
arm.gd.noise = none
arm.perturbed.noise = grad:1e-2
expected_arm = perturbed
expected_final_rank = 20
below_full_arm = gd
";

fn main() -> ranklab::Result<()> {
    let recipe = ExperimentRecipe::parse(RECIPE)?;
    let outcome = run_recipe(&recipe, &RecipeOutput::default())?;
    print!("{}", outcome.log);
    let perturbed = outcome.arm("perturbed").expect("arm exists");
    println!("\nperturbed arm, first rows:");
    for line in trajectory_csv(&perturbed.trajectory, recipe.dims.depth())
        .lines()
        .take(6)
    {
        println!("{line}");
    }
    Ok(())
}
