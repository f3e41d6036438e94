//! First-return maps induced on subsegments: the rotation induces a
//! three-interval exchange, and a contracted map induces returns whose
//! derivatives shrink below any target after enough depth.
//!
//! ```bash
//! cargo run --example induced_first_return
//! ```

use closing_lab::cli::load_scenario;
use closing_lab::iet::Iet;
use closing_lab::segment_map::{propagate_contraction, Segment};

fn main() -> closing_lab::Result<()> {
    // the golden rotation on [0, 0.2): a three-interval exchange with
    // return times 5, 8, 3 (left to right)
    let map = Iet::rotation(0.618033988749894848)?.as_return_map(0.0)?;
    let sub = Segment::new(0.0, 0.2, 0.1)?;
    let induced = map.induced_first_return(sub, 100)?;
    println!("golden rotation induced on [0, 0.2):");
    for (branch, time) in induced.map.branches().iter().zip(&induced.return_times) {
        println!(
            "  ({:.9}, {:.9}) -> return time {time}, slope {}",
            branch.domain.lo,
            branch.domain.hi,
            branch.deriv(branch.domain.midpoint())
        );
    }
    println!("  excluded cells: {}", induced.excluded.len());

    // a contracted reparametrization of the rotation: after the propagation
    // depth every induced branch contracts below K
    let scenario = load_scenario("mixed_slope")?;
    let map = scenario.return_map()?;
    let cert = map
        .contraction_certificate(0.9, 64, 1e-4)?
        .certificate()
        .copied()
        .expect("slopes 0.5/0.8 contract at depth 1");
    let prop = propagate_contraction(&cert, 0.8, 0.1)?;
    println!(
        "\nmixed-slope map: kappa = {:.3}, propagation depth d*n = {}",
        cert.kappa, prop.return_depth
    );

    // window around a point deep in the forward orbit
    let center = map.iterate(0.3, 20_000)?.last();
    let w = 2e-3;
    let sub = Segment::new(center - w, center + w, center)?;
    let induced = map.induced_first_return(sub, 200)?;
    println!("window around {center:.6}:");
    for (branch, time) in induced.map.branches().iter().zip(&induced.return_times) {
        println!(
            "  return time {time} (beyond {}), |derivative| {:.3e} < 0.1",
            prop.return_depth,
            branch.deriv(branch.domain.midpoint()).abs()
        );
    }
    Ok(())
}
