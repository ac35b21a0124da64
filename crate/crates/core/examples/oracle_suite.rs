//! Run the oracle checks at reduced trial counts, then once more against a
//! rank bump that does nothing to show the harness catching it.
//!
//! Run with `cargo run --example oracle_suite`.

use ranklab::oracle::{run_suite, Suite, SuiteConfig};
use ranklab::DenseMatrix;

fn broken_bump(a: &DenseMatrix, _eps: f64) -> ranklab::Result<DenseMatrix> {
    Ok(a.clone())
}

fn main() -> ranklab::Result<()> {
    let mut cfg = SuiteConfig::new(Suite::All, 7);
    cfg.trials = Some(50);
    println!("name trials failures worst_violation pass");
    for report in run_suite(&cfg)? {
        println!("{report}");
    }

    println!("\nwith a broken rank bump:");
    let mut cfg = SuiteConfig::new(Suite::Rank, 7);
    cfg.trials = Some(50);
    cfg.bump = broken_bump;
    for report in run_suite(&cfg)? {
        println!("{report}");
    }
    Ok(())
}
