//! Interval exchange transformations: orbits, breakpoint scans, and their
//! embedding as return maps on a cut-open segment.
//!
//! ```bash
//! cargo run --example iet_orbits
//! ```

use closing_lab::iet::{Iet, KeaneOutcome};

fn main() -> closing_lab::Result<()> {
    let golden = Iet::rotation(0.618033988749894848)?;
    let (orbit, _) = golden.orbit(0.0, 8);
    println!("golden rotation orbit of 0: {orbit:.6?}");
    match golden.keane_check(10_000) {
        KeaneOutcome::MinimalSoFar { depth } => {
            println!("  no breakpoint connection within {depth} steps: minimal so far")
        }
        KeaneOutcome::ConnectionFound { step, breakpoint } => {
            println!("  connection at step {step} through {breakpoint}")
        }
    }

    let rational = Iet::rotation(1.0 / 3.0)?;
    println!("\nrotation by 1/3: {:?}", rational.keane_check(10));

    // a flipped exchange reverses orientation on its first interval
    let flip = Iet::new(vec![0.5, 0.5], vec![2, 1], vec![true, false])?;
    let (orbit, _) = flip.orbit(0.25, 4);
    println!("\nflip exchange orbit of 0.25: {orbit:?} (period 2)");
    println!("  breakpoint scan: {:?}", flip.keane_check(10));

    // unroll the circle at a cut and embed as a return map
    let map = golden.as_return_map(0.0)?;
    println!("\ngolden rotation embedded on [0, 1]:");
    for b in map.branches() {
        println!(
            "  branch ({:.6}, {:.6}), orientation {}",
            b.domain.lo,
            b.domain.hi,
            b.orientation()
        );
    }
    let flipped = flip.as_return_map(0.0)?;
    let orientations: Vec<f64> = flipped.branches().iter().map(|b| b.orientation()).collect();
    println!("flip exchange embedded: orientations {orientations:?}");
    Ok(())
}
