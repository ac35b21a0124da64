//! Raise the rank of a rank-deficient matrix by one and measure how far it
//! moved.
//!
//! Run with `cargo run --example rank_bump`.

use ranklab::linalg::{
    matrix_cosine, numerical_rank, rank_bump, rank_bump_cosine, singular_values,
};
use ranklab::noisekit::RngStream;
use ranklab::{DenseMatrix, RankTolerance};

fn main() -> ranklab::Result<()> {
    let tol = RankTolerance::DEFAULT;
    let mut rng = RngStream::new(42, 0);
    // 6×5 of rank 2
    let a = rng
        .gaussian_matrix(6, 2, 1.0)
        .matmul(&rng.gaussian_matrix(2, 5, 1.0));
    let sigma = singular_values(&a)?;
    let eps = 0.5 * sigma[1];

    // each bump must stay below the smallest retained singular value,
    // which after a bump is the previous eps
    let mut current = a.clone();
    for step in 0..3 {
        let next = rank_bump(&current, eps / 2f64.powi(step))?;
        println!(
            "rank {} -> {}   ||A - A'||_2 = {:.3e}",
            numerical_rank(&current, tol)?,
            numerical_rank(&next, tol)?,
            (&current - &next).spectral_norm()?
        );
        current = next;
    }

    let bumped = rank_bump(&a, eps)?;
    println!(
        "cos(A, A') = {:.15} (closed form {:.15})",
        matrix_cosine(&a, &bumped)?,
        rank_bump_cosine(&sigma[..2], eps)
    );

    match rank_bump(&DenseMatrix::identity(3), 0.1) {
        Err(e) => println!("identity: {e}"),
        Ok(_) => unreachable!("full-rank input is refused"),
    }
    Ok(())
}
