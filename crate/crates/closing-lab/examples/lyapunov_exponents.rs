//! Lyapunov estimates, log-derivative integrals, continuous majorants and
//! the uniform Birkhoff bound.
//!
//! ```bash
//! cargo run --example lyapunov_exponents
//! ```

use closing_lab::cli::load_scenario;
use closing_lab::ergodic::{
    continuous_majorant, empirical_measure, exponent_equivalence_report, lyapunov_estimate,
    uniform_birkhoff_check, BirkhoffCheck,
};
use closing_lab::iet::Iet;

fn main() -> closing_lab::Result<()> {
    // constant slope: the estimate is exactly ln 0.05
    let toy = load_scenario("toy_contraction")?.return_map()?;
    let est = lyapunov_estimate(&toy, 0.5, 100)?;
    println!(
        "toy map: lyapunov {} (ln 0.05 = {})",
        est.value,
        0.05f64.ln()
    );

    // isometries have exponent exactly zero
    let golden = Iet::rotation(0.618033988749894848)?.as_return_map(0.0)?;
    let est = lyapunov_estimate(&golden, 0.2, 1000)?;
    println!("golden rotation: lyapunov {} exactly", est.value);

    // two slopes visited with rotation frequencies: the exponent mixes them
    let mixed = load_scenario("mixed_slope")?.return_map()?;
    let est = lyapunov_estimate(&mixed, 0.3, 100_000)?;
    let alpha = 0.6180339887498949f64;
    let target = alpha * 0.8f64.ln() + (1.0 - alpha) * 0.5f64.ln();
    println!(
        "mixed slopes: lyapunov {:.6} vs frequency-weighted {:.6}",
        est.value, target
    );

    // the three equivalent formulations agree numerically
    let report = exponent_equivalence_report(&mixed, &[0.3, 0.72], 100_000, 256)?;
    println!(
        "equivalence: max |integral - liminf proxy| = {:.2e}, measured c = {:.4}",
        report.max_discrepancy, report.measured_c
    );

    // a continuous majorant of log|DP| that still integrates below -c
    let mu = empirical_measure(&toy, 0.5, 1000, 256)?;
    let maj = continuous_majorant(&toy, -2.9, &[mu])?;
    println!(
        "\ntoy majorant: phi(0) = {:.4}, integral {:.4} < -2.9",
        maj.majorant.eval(0.0),
        maj.integrals[0]
    );
    let phi = maj.majorant;
    match uniform_birkhoff_check(&toy, |x| phi.eval(x), 2.9, 1..=20, 200)? {
        BirkhoffCheck::Pass { threshold_n } => {
            println!("uniform Birkhoff bound holds from n = {threshold_n} on")
        }
        BirkhoffCheck::Fail { n, x, average } => {
            println!("violated at n = {n}, x = {x}: average {average}")
        }
    }
    Ok(())
}
