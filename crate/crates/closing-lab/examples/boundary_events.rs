//! Scan the twist parameter for iterates crossing a branch-domain endpoint:
//! the one-dimensional shadow of a saddle connection appearing mid-sweep.
//!
//! ```bash
//! cargo run --example boundary_events
//! ```

use closing_lab::cli::load_scenario;
use closing_lab::twist::{boundary_event_scan, perturbed_iterate, TwistFamily};

fn main() -> closing_lab::Result<()> {
    let scenario = load_scenario("two_branch")?;
    let map = scenario.return_map()?;
    let twist = TwistFamily::new(&scenario.segment, 0.1, 5)?;
    let q = 0.19;

    println!("interior branch endpoints: {:?}", map.interior_endpoints());
    let events = boundary_event_scan(&map, &twist, q, 3, 21)?;
    for ev in &events {
        println!(
            "iterate {} crosses {} at lambda = {:.9}",
            ev.step, ev.boundary, ev.lambda
        );
        let orbit = perturbed_iterate(&map, &twist, ev.lambda, q, ev.step)?;
        println!("  orbit there: {:?}", orbit.points);
    }
    if events.is_empty() {
        println!("no crossings for this start");
    }

    // a map with a single full branch has nothing to cross
    let toy = load_scenario("toy_contraction")?;
    let map = toy.return_map()?;
    let twist = TwistFamily::new(&toy.segment, 0.1, 5)?;
    let none = boundary_event_scan(&map, &twist, 0.5, 5, 33)?;
    println!("\ntoy map events: {} (single full branch)", none.len());
    Ok(())
}
