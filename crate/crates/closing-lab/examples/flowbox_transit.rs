//! The flow-box realization of the twist: calibrate the drift constant by
//! shooting, integrate transits across the box, and compare against the
//! twist family.
//!
//! ```bash
//! cargo run --example flowbox_transit
//! ```

use closing_lab::flowbox::{
    calibrate_eta, cr_norm_estimate, transit_map, verify_transit_vs_twist, FlowBoxField,
    DEFAULT_SHOOT_STEP,
};
use closing_lab::ode::OdeOptions;
use closing_lab::segment_map::Segment;
use closing_lab::twist::TwistFamily;

fn main() -> closing_lab::Result<()> {
    let (epsilon, delta, order) = (0.1, 0.01, 7);
    let extent = (-1.0, 0.9);

    let cal = calibrate_eta(
        epsilon,
        delta,
        extent,
        order,
        &OdeOptions::fixed(DEFAULT_SHOOT_STEP),
    )?;
    println!(
        "calibration: eta = {} (closed form {}, residual {:.1e})",
        cal.eta, cal.closed_form, cal.residual
    );
    let field = FlowBoxField::with_eta(epsilon, delta, extent, order, cal.eta)?;

    let opts = OdeOptions::fixed(1e-4);
    println!(
        "transit(1, -4 delta) = {} (target -3 delta = {})",
        transit_map(&field, 1.0, -4.0 * delta, &opts)?,
        -3.0 * delta
    );
    println!(
        "transit(0.5, 0) = {} (plateau shift 0.5 * delta)",
        transit_map(&field, 0.5, 0.0, &opts)?
    );
    println!(
        "transit(1, -0.5) = {} (outside the bump: identity)",
        transit_map(&field, 1.0, -0.5, &opts)?
    );

    let segment = Segment::centered(-1.0, 0.9)?;
    let twist = TwistFamily::new(&segment, delta, order)?;
    let ys: Vec<f64> = (0..=20)
        .map(|i| -4.0 * delta + 8.0 * delta * i as f64 / 20.0)
        .collect();
    let report = verify_transit_vs_twist(&field, &twist, &[0.0, 0.25, 0.5, 1.0], &ys, &opts)?;
    println!(
        "\nagainst the twist family: max plateau discrepancy {:.2e}, shift excess {:.2e}",
        report.max_plateau_discrepancy, report.max_shift_excess
    );

    for r in 0..=2 {
        println!(
            "C^{r} norm of the perturbation: {}",
            cr_norm_estimate(&field, 1.0, r, 400)
        );
    }
    Ok(())
}
