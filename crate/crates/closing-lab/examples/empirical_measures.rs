//! Empirical measures along orbits: equidistribution, exact invariance
//! defects, and the non-atomicity proxy.
//!
//! ```bash
//! cargo run --example empirical_measures
//! ```

use closing_lab::ergodic::{dyadic_intervals, empirical_measure, invariance_defect};
use closing_lab::iet::Iet;

fn main() -> closing_lab::Result<()> {
    let map = Iet::rotation(0.618033988749894848)?.as_return_map(0.0)?;
    let n = 10_000;

    let mu = empirical_measure(&map, 0.0, n, 10)?;
    println!("golden rotation, orbit of 0, n = {n}, 10 bins:");
    for (i, mass) in mu.masses().iter().enumerate() {
        println!("  bin {i}: {mass:.4}");
    }

    // the defect against the branchwise preimage telescopes to <= 2/n
    let intervals = dyadic_intervals(map.segment(), 0.1);
    let defect = invariance_defect(&map, &mu, &intervals);
    println!(
        "invariance defect over dyadic intervals: {defect:.2e} (2/n = {:.2e})",
        2.0 / n as f64
    );

    // finer bins: no single bin hoards mass on a minimal exchange
    let fine = empirical_measure(&map, 0.0, n, 100)?;
    println!(
        "max bin mass over 100 bins: {} (uniform would be 0.01)",
        fine.max_bin_mass()
    );

    // a contracting map instead concentrates everything at its fixed point
    let toy = closing_lab::segment_map::ReturnMap::new(
        closing_lab::segment_map::Segment::centered(-1.0, 0.9)?,
        vec![closing_lab::segment_map::Branch::affine(
            -1.0, 0.9, 0.05, -0.001,
        )],
    )?;
    let mu = empirical_measure(&toy, 0.5, 1000, 256)?;
    println!(
        "\ntoy contraction: max bin mass {} (the fixed point's bin)",
        mu.max_bin_mass()
    );
    Ok(())
}
