use std::process::ExitCode;

use closing_lab::cli::{self, Flags, Subcommand};

const USAGE: &str = "\
closing-lab — return-map closing experiments on a transversal segment

USAGE:
  closing-lab <COMMAND> <SCENARIO> [flags]

COMMANDS:
  analyze         contraction certificate, Lyapunov estimates, exponent equivalence
  close           twist closing search with drift-bound check
  measure         empirical measures and invariance defects
  verify-flowbox  flow-box calibration and transit-vs-twist discrepancies
  sweep           parameter sweeps (lambda, delta, depth, C^r norms) as CSV

SCENARIO: a path to a scenario file, or a bundled name:
  toy_contraction, two_branch, golden_iet, flip_iet, rational_iet,
  mixed_slope, power_square, flowbox_default

FLAGS (override scenario values):
  --q=<f>             starting point
  --delta=<f>         twist amplitude
  --profile=<n>       twist profile order (odd)
  --tol=<f>           closing residual tolerance
  --depth=<n>         iteration and search depth limit
  --orbit=<n>         orbit length for measures and averages
  --bins=<n>          measure bins
  --grid=<f>          derivative-sup grid resolution
  --kappa-target=<f>  contraction certificate target
  --lambdas=<f,f,..>  lambda grid
  --epsilon=<f>       flow-box depth
  --order=<n>         flow-box bump order (odd)
  --ode-step=<f>      fixed RK step for transits

ENVIRONMENT:
  CLOSING_LAB_OUT     output directory for CSV files (default: current dir)

CSV COLUMNS:
  *_closing_orbit.csv  step, unperturbed, perturbed
  *_exponents.csv      start, lyapunov, tail_min, log_integral
  *_measure.csv        bin_lo, mass
  *_transit.csv        y_in, lambda, y_out, discrepancy, on_plateau
  *_sweep_depth.csv    n, sup_abs_deriv
  *_sweep_lambda.csv   lambda, steps, final_offset
  *_sweep_delta.csv    delta, n, lambda_star, residual
  *_sweep_crnorm.csv   epsilon, delta, r, cr_norm

EXIT CODES:
  0  success    2  hypothesis violated (no contraction, gate failed)    1  error
";

fn parse_val<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("invalid value for --{key}: `{value}`"))
}

fn parse_flags(args: &[String]) -> Result<Flags, String> {
    let mut flags = Flags::default();
    for arg in args {
        let Some(rest) = arg.strip_prefix("--") else {
            return Err(format!("unexpected argument `{arg}`"));
        };
        let (key, value) = rest
            .split_once('=')
            .ok_or_else(|| format!("flag `--{rest}` needs a value: --{rest}=<...>"))?;
        match key {
            "q" => flags.q = Some(parse_val(key, value)?),
            "delta" => flags.delta = Some(parse_val(key, value)?),
            "profile" => flags.profile = Some(parse_val(key, value)?),
            "tol" => flags.tol = Some(parse_val(key, value)?),
            "depth" => flags.depth = Some(parse_val(key, value)?),
            "orbit" => flags.orbit = Some(parse_val(key, value)?),
            "bins" => flags.bins = Some(parse_val(key, value)?),
            "grid" => flags.grid = Some(parse_val(key, value)?),
            "kappa-target" => flags.kappa_target = Some(parse_val(key, value)?),
            "epsilon" => flags.epsilon = Some(parse_val(key, value)?),
            "order" => flags.order = Some(parse_val(key, value)?),
            "ode-step" => flags.ode_step = Some(parse_val(key, value)?),
            "lambdas" => {
                let mut list = Vec::new();
                for tok in value.split(',') {
                    list.push(parse_val(key, tok.trim())?);
                }
                flags.lambdas = Some(list);
            }
            other => return Err(format!("unknown flag `--{other}`")),
        }
    }
    Ok(flags)
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--help" || a == "-h") || args.is_empty() {
        print!("{USAGE}");
        return ExitCode::SUCCESS;
    }
    if args.len() < 2 {
        eprintln!("error: expected a subcommand and a scenario\n");
        eprint!("{USAGE}");
        return ExitCode::FAILURE;
    }
    let cmd: Subcommand = match args[0].parse() {
        Ok(cmd) => cmd,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    let scenario = match cli::load_scenario(&args[1]) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    let flags = match parse_flags(&args[2..]) {
        Ok(f) => f,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::FAILURE;
        }
    };
    match cli::run(cmd, &scenario, &flags) {
        Ok((report, code)) => {
            print!("{}", report.render());
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
