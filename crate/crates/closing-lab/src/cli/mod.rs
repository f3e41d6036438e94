//! Experiment orchestration: scenario loading, the `analyze` / `close` /
//! `measure` / `verify-flowbox` / `sweep` subcommands, and report/CSV
//! emission. The `closing-lab` binary is a thin wrapper around [`run`].
//!
//! Exit codes: 0 on success, 2 when a standing hypothesis fails (no
//! contraction certificate, `kappa >= 1/3`, a violated sign bracket), 1 for
//! tool errors.

pub mod report;
pub mod scenario;

use std::path::{Path, PathBuf};

use crate::ergodic::{
    dyadic_intervals, empirical_measure, exponent_equivalence_report, invariance_defect,
};
use crate::flowbox::{
    calibrate_eta, cr_norm_estimate, transit_map, verify_transit_vs_twist, FlowBoxField,
    DEFAULT_SHOOT_STEP,
};
use crate::ode::OdeOptions;
use crate::segment_map::{
    propagate_contraction, CertificateOutcome, ContractionCertificate, ReturnMap,
};
use crate::twist::{
    closing_search, drift_bound_check, perturbed_iterate, ClosingOutcome, TwistFamily,
};
use crate::{Error, Result};

pub use report::{fmt, write_csv, Line, Report, Section};
pub use scenario::{
    load_scenario, parse_scenario, Dynamics, Experiment, FlowBoxSpec, Scenario, TwistSpec,
};

/// Environment variable naming the CSV output directory.
pub const OUT_DIR_ENV: &str = "CLOSING_LAB_OUT";

/// The experiment subcommands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Analyze,
    Close,
    Measure,
    VerifyFlowbox,
    Sweep,
}

impl std::str::FromStr for Subcommand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analyze" => Ok(Subcommand::Analyze),
            "close" => Ok(Subcommand::Close),
            "measure" => Ok(Subcommand::Measure),
            "verify-flowbox" => Ok(Subcommand::VerifyFlowbox),
            "sweep" => Ok(Subcommand::Sweep),
            other => Err(Error::Parameter(format!(
                "unknown subcommand `{other}` (expected analyze, close, measure, verify-flowbox, sweep)"
            ))),
        }
    }
}

impl Subcommand {
    fn name(&self) -> &'static str {
        match self {
            Subcommand::Analyze => "analyze",
            Subcommand::Close => "close",
            Subcommand::Measure => "measure",
            Subcommand::VerifyFlowbox => "verify-flowbox",
            Subcommand::Sweep => "sweep",
        }
    }
}

/// Command-line overrides of scenario values.
#[derive(Debug, Clone, Default)]
pub struct Flags {
    pub q: Option<f64>,
    pub delta: Option<f64>,
    pub profile: Option<usize>,
    pub tol: Option<f64>,
    pub depth: Option<usize>,
    pub orbit: Option<usize>,
    pub bins: Option<usize>,
    pub grid: Option<f64>,
    pub kappa_target: Option<f64>,
    pub lambdas: Option<Vec<f64>>,
    pub epsilon: Option<f64>,
    pub order: Option<usize>,
    pub ode_step: Option<f64>,
}

impl Flags {
    fn apply(&self, scenario: &Scenario) -> Scenario {
        let mut s = scenario.clone();
        if let Some(q) = self.q {
            s.experiment.q = Some(q);
        }
        if let Some(v) = self.tol {
            s.experiment.tol = v;
        }
        if let Some(v) = self.depth {
            s.experiment.depth = v;
        }
        if let Some(v) = self.orbit {
            s.experiment.orbit = v;
        }
        if let Some(v) = self.bins {
            s.experiment.bins = v;
        }
        if let Some(v) = self.grid {
            s.experiment.grid = v;
        }
        if let Some(v) = self.kappa_target {
            s.experiment.kappa_target = v;
        }
        if let Some(v) = &self.lambdas {
            s.experiment.lambdas = v.clone();
        }
        if self.delta.is_some() || self.profile.is_some() {
            let base = s.twist.unwrap_or(TwistSpec {
                delta: self.delta.unwrap_or(0.0),
                profile: 5,
            });
            s.twist = Some(TwistSpec {
                delta: self.delta.unwrap_or(base.delta),
                profile: self.profile.unwrap_or(base.profile),
            });
        }
        if self.epsilon.is_some()
            || self.order.is_some()
            || self.ode_step.is_some()
            || (self.delta.is_some() && s.flowbox.is_some())
        {
            let base = s.flowbox.unwrap_or(FlowBoxSpec {
                epsilon: self.epsilon.unwrap_or(0.1),
                delta: s.twist.map(|t| t.delta).unwrap_or(0.01),
                order: 7,
                ode_step: 1e-4,
            });
            s.flowbox = Some(FlowBoxSpec {
                epsilon: self.epsilon.unwrap_or(base.epsilon),
                delta: self.delta.unwrap_or(base.delta),
                order: self.order.unwrap_or(base.order),
                ode_step: self.ode_step.unwrap_or(base.ode_step),
            });
        }
        s
    }
}

/// Runs a subcommand against a scenario; CSV files go to the directory named
/// by `CLOSING_LAB_OUT` (default: the current directory). Returns the report
/// and the process exit code.
pub fn run(cmd: Subcommand, scenario: &Scenario, flags: &Flags) -> Result<(Report, i32)> {
    let dir = std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."));
    run_in(cmd, scenario, flags, &dir)
}

/// [`run`] with an explicit output directory.
pub fn run_in(
    cmd: Subcommand,
    scenario: &Scenario,
    flags: &Flags,
    out_dir: &Path,
) -> Result<(Report, i32)> {
    let scenario = flags.apply(scenario);
    let exp = scenario.experiment.clone();
    let mut report = Report::new(
        &scenario.name,
        cmd.name(),
        exp.seed,
        exp.grid,
        scenario.flowbox.map(|f| f.ode_step),
    );
    let outcome = match cmd {
        Subcommand::Analyze => analyze(&scenario, &mut report, out_dir),
        Subcommand::Close => close(&scenario, &mut report, out_dir),
        Subcommand::Measure => measure(&scenario, &mut report, out_dir),
        Subcommand::VerifyFlowbox => verify_flowbox(&scenario, &mut report, out_dir),
        Subcommand::Sweep => sweep(&scenario, &mut report, out_dir),
    };
    match outcome {
        Ok(code) => {
            let code = if code == 0 && !report.all_bounds_pass() {
                1
            } else {
                code
            };
            Ok((report, code))
        }
        Err(Error::Hypothesis(msg)) => {
            report.section("hypothesis violation").info(msg);
            Ok((report, 2))
        }
        Err(e) => Err(e),
    }
}

fn certificate_or_report(
    map: &ReturnMap,
    exp: &Experiment,
    report: &mut Report,
) -> Result<Option<ContractionCertificate>> {
    let outcome = map.contraction_certificate(exp.kappa_target, exp.depth, exp.grid)?;
    let section = report.section("contraction certificate");
    match outcome {
        CertificateOutcome::Certified(cert) => {
            section
                .info(format!(
                    "certified: n = {}, kappa = {}, sup witness = {}, grid = {}",
                    cert.n, cert.kappa, cert.sup_witness, cert.grid_resolution
                ))
                .bound(
                    "sup |DP^n| below target",
                    cert.sup_witness,
                    "<",
                    exp.kappa_target,
                );
            Ok(Some(cert))
        }
        CertificateOutcome::Failed { best_n, best_sup } => {
            section.info(format!(
                "no contraction certificate up to depth {} (best sup {} at n = {})",
                exp.depth, best_sup, best_n
            ));
            Ok(None)
        }
    }
}

fn spread_starts(map: &ReturnMap, q: f64) -> Vec<f64> {
    let seg = map.segment();
    let mut starts = vec![q];
    for frac in [0.31, 0.72] {
        let x = seg.lo() + seg.len() * frac;
        if starts.iter().all(|s| (s - x).abs() > 1e-6) {
            starts.push(x);
        }
    }
    starts
        .into_iter()
        .filter(|&x| {
            map.iterate(x, 4)
                .map(|o| o.stop.is_completed())
                .unwrap_or(false)
        })
        .collect()
}

fn analyze(scenario: &Scenario, report: &mut Report, out_dir: &Path) -> Result<i32> {
    let exp = &scenario.experiment;
    let map = scenario.return_map()?;
    let q = scenario.start_point();

    let sup1 = map.sup_abs_deriv(1, exp.grid)?;
    report.section("derivative bounds").info(format!(
        "sup |DP| = {} (grid {})",
        sup1.sup, sup1.resolution
    ));

    let cert = certificate_or_report(&map, exp, report)?;

    let mut starts = spread_starts(&map, q);
    if starts.is_empty() {
        // fall back to the configured start; short orbits are reported as is
        starts.push(q);
    }
    let exponents = exponent_equivalence_report(&map, &starts, exp.orbit, exp.bins)?;
    let section = report.section("lyapunov exponents & equivalence");
    for row in &exponents.rows {
        section.info(format!(
            "start {}: average {}, tail min {}, log-integral {}",
            row.start, row.lyapunov.value, row.lyapunov.tail_min, row.integral
        ));
    }
    section.info(format!(
        "orbit proxies vs measure integrals: max discrepancy {}",
        exponents.max_discrepancy
    ));
    if exponents.measured_c.is_infinite() {
        section.info("exponents diverge: a derivative vanishes along some orbit");
    } else if exponents.negative_exponents() {
        section.info(format!(
            "uniformly negative exponents: measured c = {}",
            exponents.measured_c
        ));
    } else {
        section.info("no negative uniform exponent constant exists for these orbits");
    }

    if let Some(cert) = cert {
        let prop = propagate_contraction(&cert, sup1.sup.max(1e-300), exp.propagate_k)?;
        report.section("contraction propagation").info(format!(
            "L0 = {}, d = {}, induced return maps contract below {} beyond depth {}",
            prop.l0, prop.d, exp.propagate_k, prop.return_depth
        ));
    }

    let rows: Vec<Vec<String>> = exponents
        .rows
        .iter()
        .map(|r| {
            vec![
                fmt(r.start),
                fmt(r.lyapunov.value),
                fmt(r.lyapunov.tail_min),
                fmt(r.integral),
            ]
        })
        .collect();
    let path = write_csv(
        out_dir,
        &format!("{}_exponents.csv", scenario.name),
        "start,lyapunov,tail_min,log_integral",
        &rows,
    )?;
    report.csv_files.push(path);
    Ok(0)
}

fn close(scenario: &Scenario, report: &mut Report, out_dir: &Path) -> Result<i32> {
    let exp = &scenario.experiment;
    let map = scenario.return_map()?;
    let q = scenario.start_point();

    let cert = match certificate_or_report(&map, exp, report)? {
        Some(cert) => cert,
        None => {
            return Err(Error::Hypothesis(
                "no contraction certificate: the closing search requires an \
                 infinitesimal contraction"
                    .into(),
            ))
        }
    };

    let twist = scenario
        .twist_family()?
        .ok_or_else(|| Error::Validation("closing needs a [twist] section or --delta".into()))?;

    let outcome = closing_search(&map, &twist, q, &cert, exp.tol, exp.depth)?;
    match outcome {
        ClosingOutcome::Closed(result) => {
            let marked = map.segment().marked();
            let kappa = cert.kappa;
            let delta = twist.delta();
            let section = report.section("closing search");
            section
                .info(format!(
                    "window [{}, {}], N = {}, lambda* = {}",
                    marked - kappa * delta,
                    marked,
                    result.n_steps,
                    result.lambda_star
                ))
                .bound("closing residual", result.residual, "<=", exp.tol)
                .bound(
                    "sign bracket at lambda = 1",
                    result.lambda_one_value - marked,
                    ">=",
                    -3.0 * kappa * delta + delta,
                );
            if result.events.is_empty() {
                section.info("no boundary events on the lambda sweep");
            }
            for ev in &result.events {
                section.info(format!(
                    "boundary event: lambda = {}, step {}, endpoint {}",
                    ev.lambda, ev.step, ev.boundary
                ));
            }

            let drift = drift_bound_check(&map, &twist, &cert, q, result.n_steps, &exp.lambdas)?;
            report
                .section("drift bound")
                .bound(
                    "max orbit deviation",
                    drift.max_deviation,
                    "<=",
                    drift.bound,
                )
                .info(format!(
                    "worst deviation at n = {}, lambda = {}{}",
                    drift.worst.0,
                    drift.worst.1,
                    if drift.partial {
                        " (partial: orbit truncated)"
                    } else {
                        ""
                    }
                ));

            let plain = map.iterate(q, result.n_steps)?;
            let rows: Vec<Vec<String>> = (0..result.orbit.len())
                .map(|k| {
                    vec![
                        k.to_string(),
                        fmt(plain.points.get(k).copied().unwrap_or(f64::NAN)),
                        fmt(result.orbit[k]),
                    ]
                })
                .collect();
            let path = write_csv(
                out_dir,
                &format!("{}_closing_orbit.csv", scenario.name),
                "step,unperturbed,perturbed",
                &rows,
            )?;
            report.csv_files.push(path);
            Ok(0)
        }
        ClosingOutcome::SaddleConnection(ev) => {
            report.section("closing search").info(format!(
                "saddle connection: perturbed iterate {} crosses branch endpoint {} at \
                 lambda = {}; closing terminates in alternative (a)",
                ev.step, ev.boundary, ev.lambda
            ));
            Ok(0)
        }
    }
}

fn measure(scenario: &Scenario, report: &mut Report, out_dir: &Path) -> Result<i32> {
    let exp = &scenario.experiment;
    let map = scenario.return_map()?;
    let q = scenario.start_point();

    let mu = empirical_measure(&map, q, exp.orbit, exp.bins)?;
    let min_width = map.segment().len() / 64.0;
    let intervals = dyadic_intervals(map.segment(), min_width);
    let defect = invariance_defect(&map, &mu, &intervals);
    let telescoping = 2.0 / mu.realized_len() as f64;

    let section = report.section("empirical measure");
    section
        .info(format!(
            "start {}, orbit length {} (requested {}){}",
            q,
            mu.realized_len(),
            exp.orbit,
            if mu.truncated() { ", truncated" } else { "" }
        ))
        .bound("total mass error", (mu.total() - 1.0).abs(), "<=", 1e-12)
        .bound("invariance defect (dyadic)", defect, "<=", telescoping)
        .info(format!(
            "max bin mass = {} over {} bins",
            mu.max_bin_mass(),
            mu.bins()
        ));

    let worst_weak_star = intervals
        .iter()
        .map(|j| (mu.interval_mass(j) - j.len() / map.segment().len()).abs())
        .fold(0.0, f64::max);
    section.info(format!(
        "max |mu(J) - |J||/|segment| over dyadic intervals = {worst_weak_star}"
    ));

    for x in spread_starts(&map, q) {
        if (x - q).abs() <= 1e-9 {
            continue;
        }
        let other = empirical_measure(&map, x, exp.orbit, exp.bins)?;
        let d = invariance_defect(&map, &other, &intervals);
        section.info(format!(
            "start {}: defect {} over {} points",
            x,
            d,
            other.realized_len()
        ));
    }

    let rows: Vec<Vec<String>> = (0..mu.bins())
        .map(|i| vec![fmt(mu.bin_edge(i)), fmt(mu.masses()[i])])
        .collect();
    let path = write_csv(
        out_dir,
        &format!("{}_measure.csv", scenario.name),
        "bin_lo,mass",
        &rows,
    )?;
    report.csv_files.push(path);
    Ok(0)
}

fn verify_flowbox(scenario: &Scenario, report: &mut Report, out_dir: &Path) -> Result<i32> {
    let exp = &scenario.experiment;
    let spec = scenario.flowbox.ok_or_else(|| {
        Error::Validation("verify-flowbox needs a [flowbox] section or --epsilon/--ode-step".into())
    })?;
    let seg = scenario.segment;
    let extent = (seg.lo() - seg.marked(), seg.hi() - seg.marked());

    let shoot = OdeOptions::fixed(DEFAULT_SHOOT_STEP);
    let cal = calibrate_eta(spec.epsilon, spec.delta, extent, spec.order, &shoot)?;
    let field = FlowBoxField::with_eta(spec.epsilon, spec.delta, extent, spec.order, cal.eta)?;
    let twist = TwistFamily::new(&seg, spec.delta, spec.order)?;

    let section = report.section("calibration");
    section
        .info(format!(
            "eta (shooting) = {}, closed form 1/integral(phi1) = {}",
            cal.eta, cal.closed_form
        ))
        .bound("shooting vs closed form", cal.discrepancy, "<=", 1e-8)
        .bound("shooting residual", cal.residual, "<=", 1e-8);

    let opts = OdeOptions::fixed(spec.ode_step);
    let d = spec.delta;
    let target = transit_map(&field, 1.0, -4.0 * d, &opts)?;
    report.section("transit map").bound(
        "|transit(1, -4 delta) + 3 delta|",
        (target + 3.0 * d).abs(),
        "<=",
        1e-6,
    );

    let mut ys: Vec<f64> = (0..=20)
        .map(|i| -4.0 * d + 8.0 * d * i as f64 / 20.0)
        .collect();
    ys.extend((0..=16).map(|i| -8.0 * d + 16.0 * d * i as f64 / 16.0));
    ys.sort_by(f64::total_cmp);
    ys.dedup_by(|a, b| (*a - *b).abs() < 1e-15);

    let tr = verify_transit_vs_twist(&field, &twist, &exp.lambdas, &ys, &opts)?;
    let halved = OdeOptions::fixed(spec.ode_step / 2.0);
    let tr_half = verify_transit_vs_twist(&field, &twist, &exp.lambdas, &ys, &halved)?;

    let section = report.section("transit vs twist");
    section
        .bound(
            "max plateau discrepancy",
            tr.max_plateau_discrepancy,
            "<=",
            1e-6,
        )
        .bound("one-sided shift excess", tr.max_shift_excess, "<=", 1e-9)
        .info(format!(
            "plateau discrepancy {} at step {}, {} at step {}",
            tr.max_plateau_discrepancy,
            spec.ode_step,
            tr_half.max_plateau_discrepancy,
            spec.ode_step / 2.0
        ))
        .info(
            "plateau transits reduce to bump quadrature, so their composite error \
             sits at rounding level and is insensitive to the step",
        );

    let c0 = cr_norm_estimate(&field, 1.0, 0, 400);
    let c1 = cr_norm_estimate(&field, 1.0, 1, 400);
    report.section("perturbation size").info(format!(
        "C^0 norm = {} (eta * delta = {}), C^1 norm = {}",
        c0,
        field.eta() * field.delta(),
        c1
    ));

    let rows: Vec<Vec<String>> = tr
        .rows
        .iter()
        .map(|r| {
            vec![
                fmt(r.y),
                fmt(r.lambda),
                fmt(r.exit),
                fmt((r.exit - (r.y + r.lambda * d)).abs()),
                (if r.plateau_discrepancy.is_some() {
                    "1"
                } else {
                    "0"
                })
                .to_string(),
            ]
        })
        .collect();
    let path = write_csv(
        out_dir,
        &format!("{}_transit.csv", scenario.name),
        "y_in,lambda,y_out,discrepancy,on_plateau",
        &rows,
    )?;
    report.csv_files.push(path);
    Ok(0)
}

/// Convergence-order ratio `e(h) / e(h/2)` of the transit map on
/// ramp-crossing entries, against a reference at `h / 8`; fourth-order
/// stepping gives roughly 16.
pub fn ramp_order_ratio(field: &FlowBoxField, step: f64) -> Result<f64> {
    let d = field.delta();
    let mut worst_e1 = 0.0f64;
    let mut worst_e2 = 0.0f64;
    for y in [5.5 * d, -6.5 * d, 6.2 * d] {
        let reference = transit_map(field, 1.0, y, &OdeOptions::fixed(step / 8.0))?;
        let e1 = (transit_map(field, 1.0, y, &OdeOptions::fixed(step))? - reference).abs();
        let e2 = (transit_map(field, 1.0, y, &OdeOptions::fixed(step / 2.0))? - reference).abs();
        if e1 > worst_e1 {
            worst_e1 = e1;
            worst_e2 = e2;
        }
    }
    if worst_e2 == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(worst_e1 / worst_e2)
}

fn sweep(scenario: &Scenario, report: &mut Report, out_dir: &Path) -> Result<i32> {
    let exp = &scenario.experiment;
    let map = scenario.return_map()?;
    let q = scenario.start_point();

    // depth sweep of the iterated derivative sup
    let mut depth_rows = Vec::new();
    for n in 1..=exp.depth.min(16) {
        match map.sup_abs_deriv(n, exp.grid) {
            Ok(est) => depth_rows.push(vec![n.to_string(), fmt(est.sup)]),
            Err(Error::DomainExhausted { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    let path = write_csv(
        out_dir,
        &format!("{}_sweep_depth.csv", scenario.name),
        "n,sup_abs_deriv",
        &depth_rows,
    )?;
    report.csv_files.push(path);
    report
        .section("depth sweep")
        .info(format!("{} depths written", depth_rows.len()));

    // lambda sweep of the perturbed endpoint, when a twist is declared
    if let Some(twist) = scenario.twist_family()? {
        let n = exp.depth.clamp(1, 8);
        let marked = map.segment().marked();
        let mut rows = Vec::new();
        for i in 0..=32 {
            let lambda = i as f64 / 32.0;
            let orbit = perturbed_iterate(&map, &twist, lambda, q, n)?;
            rows.push(vec![
                fmt(lambda),
                orbit.steps().to_string(),
                fmt(orbit.last() - marked),
            ]);
        }
        let path = write_csv(
            out_dir,
            &format!("{}_sweep_lambda.csv", scenario.name),
            "lambda,steps,final_offset",
            &rows,
        )?;
        report.csv_files.push(path);
        report
            .section("lambda sweep")
            .info(format!("perturbed endpoint offsets at depth {n}"));

        // amplitude sweep of the closing search, when a certificate exists
        if let CertificateOutcome::Certified(cert) =
            map.contraction_certificate(exp.kappa_target, exp.depth, exp.grid)?
        {
            if cert.n == 1 && cert.kappa < 1.0 / 3.0 {
                let c = map.segment().symmetric_radius();
                let mut rows = Vec::new();
                for i in 1..=8 {
                    let delta = c / 8.0 * 0.98 * i as f64 / 8.0;
                    let Ok(t) = TwistFamily::new(map.segment(), delta, 5) else {
                        continue;
                    };
                    match closing_search(&map, &t, q, &cert, exp.tol, exp.depth) {
                        Ok(ClosingOutcome::Closed(res)) => rows.push(vec![
                            fmt(delta),
                            res.n_steps.to_string(),
                            fmt(res.lambda_star),
                            fmt(res.residual),
                        ]),
                        Ok(ClosingOutcome::SaddleConnection(_)) | Err(Error::Search(_)) => continue,
                        Err(e) => return Err(e),
                    }
                }
                let path = write_csv(
                    out_dir,
                    &format!("{}_sweep_delta.csv", scenario.name),
                    "delta,n,lambda_star,residual",
                    &rows,
                )?;
                report.csv_files.push(path);
                report
                    .section("delta sweep")
                    .info(format!("{} amplitudes closed", rows.len()));
            }
        }
    }

    // C^r-norm scaling of the flow-box perturbation
    if let Some(spec) = scenario.flowbox {
        let seg = scenario.segment;
        let extent = (seg.lo() - seg.marked(), seg.hi() - seg.marked());
        let shoot = OdeOptions::fixed(DEFAULT_SHOOT_STEP);
        let mut rows = Vec::new();
        for k in 0..4 {
            let delta = spec.delta / (1 << k) as f64;
            let cal = calibrate_eta(spec.epsilon, delta, extent, spec.order, &shoot)?;
            let field = FlowBoxField::with_eta(spec.epsilon, delta, extent, spec.order, cal.eta)?;
            for r in 0..=2 {
                rows.push(vec![
                    fmt(spec.epsilon),
                    fmt(delta),
                    r.to_string(),
                    fmt(cr_norm_estimate(&field, 1.0, r, 200)),
                ]);
            }
        }
        let path = write_csv(
            out_dir,
            &format!("{}_sweep_crnorm.csv", scenario.name),
            "epsilon,delta,r,cr_norm",
            &rows,
        )?;
        report.csv_files.push(path);
        report
            .section("C^r norm sweep")
            .info("perturbation norms for halved amplitudes");
    }

    Ok(0)
}
