//! Drive the same experiments the `closing-lab` binary runs, from code:
//! load a bundled scenario, run a subcommand, inspect the report.
//!
//! ```bash
//! cargo run --example scenario_experiments
//! ```

use closing_lab::cli::{load_scenario, run_in, Flags, Subcommand};

fn main() -> closing_lab::Result<()> {
    let out = std::env::temp_dir().join("closing-lab-example");

    let toy = load_scenario("toy_contraction")?;
    let (report, code) = run_in(Subcommand::Close, &toy, &Flags::default(), &out)?;
    println!("{}", report.render());
    println!("exit code {code}\n");

    // hypothesis violations are first-class outcomes, not tool failures
    let iet = load_scenario("golden_iet")?;
    let (report, code) = run_in(Subcommand::Close, &iet, &Flags::default(), &out)?;
    println!("{}", report.render());
    println!("exit code {code} (closing requires a contraction certificate)");
    Ok(())
}
