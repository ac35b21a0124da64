//! Generate a certified dataset, save it, read it back, and show what a
//! failing certificate looks like.
//!
//! Run with `cargo run --example certify_dataset`.

use ranklab::datagen::{read_dataset, synth_certified, verify_assumptions, write_dataset};
use ranklab::{Dataset, LayerDims};

fn main() -> ranklab::Result<()> {
    let (data, cert) = synth_certified(10, 5, 50, 1)?;
    println!("{cert}\n");

    let mut bytes = Vec::new();
    write_dataset(&data, &mut bytes)?;
    let back = read_dataset(bytes.as_slice())?;
    println!(
        "{} bytes on disk, round trip exact: {}",
        bytes.len(),
        back == data
    );

    // a network narrower than min(d_x, d_y) breaks assumption (i)
    let narrow: LayerDims = "10x3x5".parse()?;
    let cert = verify_assumptions(&data, &narrow)?;
    println!(
        "10x3x5: certified {} ({:?})",
        cert.certified(),
        cert.first_violation()
    );

    // duplicated input rows make X·Xᵀ singular
    let mut x = data.x.clone();
    for j in 0..x.cols() {
        let v = x.get(0, j);
        x.set(1, j, v);
    }
    let cert = verify_assumptions(&Dataset::new(x, data.y.clone())?, &"10x5".parse()?)?;
    println!(
        "duplicated row: certified {} ({:?})",
        cert.certified(),
        cert.first_violation()
    );

    match synth_certified(10, 5, 5, 1) {
        Err(e) => println!("m = 5: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
