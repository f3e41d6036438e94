//! The twist family and the closing search: find the parameter that sends a
//! recurrent orbit exactly onto the marked point.
//!
//! ```bash
//! cargo run --example twist_closing
//! ```

use closing_lab::cli::load_scenario;
use closing_lab::twist::{
    closing_search, drift_bound_check, perturbed_iterate, ClosingOutcome, TwistFamily,
};

fn main() -> closing_lab::Result<()> {
    let scenario = load_scenario("toy_contraction")?;
    let map = scenario.return_map()?;
    let twist = TwistFamily::new(&scenario.segment, 0.1, 5)?;

    println!(
        "twist family: delta = {}, plateau {:?}, support {:?}",
        twist.delta(),
        twist.plateau(),
        twist.support()
    );
    println!(
        "  E_0.5(0) = {} (plateau shift lambda * delta)",
        twist.eval(0.5, 0.0)
    );
    println!(
        "  E_1(0.8) = {} (identity outside the support)",
        twist.eval(1.0, 0.8)
    );

    let cert = map
        .contraction_certificate(0.1, 64, 1e-4)?
        .certificate()
        .copied()
        .expect("the toy map contracts at depth 1");

    let q = 0.5;
    let plain = map.iterate(q, 3)?;
    let full = perturbed_iterate(&map, &twist, 1.0, q, 3)?;
    println!("\norbit of {q}: unperturbed {:?}", plain.points);
    println!("            full twist  {:?}", full.points);

    match closing_search(&map, &twist, q, &cert, 1e-12, 64)? {
        ClosingOutcome::Closed(result) => {
            println!(
                "\nclosed after N = {} steps at lambda* = {:.9} (residual {:.1e})",
                result.n_steps, result.lambda_star, result.residual
            );
            println!("  perturbed orbit: {:?}", result.orbit);
        }
        ClosingOutcome::SaddleConnection(ev) => {
            println!("\nsaddle connection first: {ev:?}")
        }
    }

    let drift = drift_bound_check(&map, &twist, &cert, q, 3, &[0.0, 0.25, 0.5, 1.0])?;
    println!(
        "drift: max deviation {:.6} <= kappa*delta/(1-kappa) = {:.6}",
        drift.max_deviation, drift.bound
    );
    Ok(())
}
