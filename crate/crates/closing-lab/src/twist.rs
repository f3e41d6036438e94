//! The one-parameter twist family `E_lambda` and the closing search.
//!
//! `E_lambda(x) = x + lambda * delta * psi(x)` with `psi` a bump equal to 1
//! on the plateau `[-4 delta, 4 delta]` around the marked point and 0 outside
//! `[-7 delta, 7 delta]`. Each member is a diffeomorphism of the segment
//! fixing a neighborhood of the boundary; the plateau displacement is exactly
//! `lambda * delta` and the displacement is never larger anywhere.
//!
//! Acting on a return map `P` by post-composition gives the perturbed family
//! `P_lambda = E_lambda ∘ P`. For a `kappa`-contraction the perturbed orbit
//! stays within `kappa * delta / (1 - kappa)` of the unperturbed orbit before
//! the final twist, which brackets the closing equation and lets a bisection
//! in `lambda` land an orbit exactly on the marked point.

use crate::profile::BumpFunction;
use crate::segment_map::{ContractionCertificate, MapEval, Orbit, ReturnMap, Segment, StopReason};
use crate::{Error, Result};

/// Grid used by the construction-time verification of the family axioms.
const CONSTRUCTION_GRID: usize = 2048;

/// The twist family on a segment.
#[derive(Debug, Clone)]
pub struct TwistFamily {
    segment: Segment,
    delta: f64,
    profile_order: usize,
    bump: BumpFunction,
}

impl TwistFamily {
    /// Builds the family and verifies its axioms on a grid.
    ///
    /// Requires `delta < c / 8` where `c` is the distance from the marked
    /// point to the nearer segment endpoint, and a ramp shallow enough that
    /// every member stays a diffeomorphism.
    pub fn new(segment: &Segment, delta: f64, profile_order: usize) -> Result<Self> {
        let c = segment.symmetric_radius();
        if !(delta > 0.0) {
            return Err(Error::Parameter(format!(
                "twist amplitude must be positive, got {delta}"
            )));
        }
        if delta >= c / 8.0 {
            return Err(Error::Parameter(format!(
                "delta < c/8 violated: delta = {delta}, c = {c}, c/8 = {}",
                c / 8.0
            )));
        }
        let m = segment.marked();
        let bump = BumpFunction::new(
            (m - 7.0 * delta, m + 7.0 * delta),
            (m - 4.0 * delta, m + 4.0 * delta),
            profile_order,
        )?;
        let steep = delta * bump.sup_deriv();
        if steep >= 1.0 {
            return Err(Error::Parameter(format!(
                "diffeomorphism condition violated: delta * sup|psi'| = {steep} >= 1"
            )));
        }
        let family = TwistFamily {
            segment: *segment,
            delta,
            profile_order,
            bump,
        };
        family.verify_axioms(CONSTRUCTION_GRID, 1e-12)?;
        Ok(family)
    }

    pub fn segment(&self) -> &Segment {
        &self.segment
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn profile_order(&self) -> usize {
        self.profile_order
    }

    /// Plateau of exact displacement, `[m - 4 delta, m + 4 delta]`.
    pub fn plateau(&self) -> (f64, f64) {
        self.bump.plateau()
    }

    /// Support of the twist, `[m - 7 delta, m + 7 delta]`.
    pub fn support(&self) -> (f64, f64) {
        self.bump.support()
    }

    /// Worst-case steepness `delta * sup |psi'|`; the derivative of every
    /// member is at least `1 -` this.
    pub fn steepness(&self) -> f64 {
        self.delta * self.bump.sup_deriv()
    }

    /// `E_lambda(x)`.
    pub fn eval(&self, lambda: f64, x: f64) -> f64 {
        x + lambda * self.delta * self.bump.eval(x)
    }

    /// `d/dx E_lambda(x)`.
    pub fn deriv(&self, lambda: f64, x: f64) -> f64 {
        1.0 + lambda * self.delta * self.bump.deriv(x)
    }

    /// Checks the family axioms on an `grid + 1`-point sweep for
    /// `lambda` in `{0, 1/2, 1}`: exact plateau displacement, one-sided
    /// displacement bound, monotonicity, identity outside the support.
    pub fn verify_axioms(&self, grid: usize, tol: f64) -> Result<()> {
        let (lo, hi) = (self.segment.lo(), self.segment.hi());
        let (p0, p1) = self.plateau();
        let (s0, s1) = self.support();
        let floor = 1.0 - self.steepness();
        for lambda in [0.0, 0.5, 1.0] {
            for i in 0..=grid {
                let x = lo + (hi - lo) * i as f64 / grid as f64;
                let shift = self.eval(lambda, x) - x;
                if x >= p0 && x <= p1 && (shift - lambda * self.delta).abs() > tol {
                    return Err(Error::Parameter(format!(
                        "plateau displacement violated at x = {x}, lambda = {lambda}"
                    )));
                }
                if shift > lambda * self.delta + tol || shift < -tol {
                    return Err(Error::Parameter(format!(
                        "displacement bound violated at x = {x}, lambda = {lambda}"
                    )));
                }
                if (x <= s0 || x >= s1) && shift != 0.0 {
                    return Err(Error::Parameter(format!(
                        "twist is not the identity outside its support at x = {x}"
                    )));
                }
                if self.deriv(lambda, x) < floor - tol {
                    return Err(Error::Parameter(format!(
                        "derivative floor violated at x = {x}, lambda = {lambda}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Orbit of the perturbed map `E_lambda ∘ P` from `q`.
pub fn perturbed_iterate(
    map: &ReturnMap,
    twist: &TwistFamily,
    lambda: f64,
    q: f64,
    n: usize,
) -> Result<Orbit> {
    let mut points = Vec::with_capacity(n + 1);
    points.push(q);
    let mut current = q;
    for step in 1..=n {
        match map.eval(current)? {
            MapEval::Value(y) => {
                current = twist.eval(lambda, y);
                points.push(current);
            }
            MapEval::SaddleHit => {
                return Ok(Orbit {
                    points,
                    stop: StopReason::SaddleHit { step },
                })
            }
            MapEval::LeftDomain => {
                return Ok(Orbit {
                    points,
                    stop: StopReason::LeftDomain { step },
                })
            }
        }
    }
    Ok(Orbit {
        points,
        stop: StopReason::Completed,
    })
}

/// Measured drift of the perturbed orbit against its uniform bound.
#[derive(Debug, Clone, Copy)]
pub struct DriftCheck {
    /// Largest deviation `|P ∘ (E_lambda ∘ P)^(n-1)(q) - P^n(q)|` seen.
    pub max_deviation: f64,
    /// The uniform bound `kappa * delta / (1 - kappa)`.
    pub bound: f64,
    /// `(n, lambda)` attaining the maximum.
    pub worst: (usize, f64),
    /// True when some orbit truncated and the check is partial.
    pub partial: bool,
}

/// Measures the deviation between the twisted and untwisted orbits (before
/// the final twist) over `n <= n_max` and the given `lambda` grid, and
/// compares it against `kappa * delta / (1 - kappa)`.
pub fn drift_bound_check(
    map: &ReturnMap,
    twist: &TwistFamily,
    cert: &ContractionCertificate,
    q: f64,
    n_max: usize,
    lambdas: &[f64],
) -> Result<DriftCheck> {
    if cert.n != 1 {
        return Err(Error::Hypothesis(format!(
            "drift bound requires a depth-1 contraction certificate, got n = {}",
            cert.n
        )));
    }
    let kappa = cert.kappa;
    let bound = kappa * twist.delta() / (1.0 - kappa);
    let plain = map.iterate(q, n_max)?;
    let mut partial = !plain.stop.is_completed();
    let mut max_deviation = 0.0;
    let mut worst = (0, 0.0);
    for &lambda in lambdas {
        let twisted = perturbed_iterate(map, twist, lambda, q, n_max.saturating_sub(1))?;
        if !twisted.stop.is_completed() {
            partial = true;
        }
        let depth = twisted
            .points
            .len()
            .min(plain.points.len().saturating_sub(1));
        for k in 0..depth {
            // apply the untwisted map to the twisted orbit point
            let y = match map.eval(twisted.points[k])? {
                MapEval::Value(y) => y,
                _ => {
                    partial = true;
                    break;
                }
            };
            let deviation = (y - plain.points[k + 1]).abs();
            if deviation > max_deviation {
                max_deviation = deviation;
                worst = (k + 1, lambda);
            }
        }
    }
    Ok(DriftCheck {
        max_deviation,
        bound,
        worst,
        partial,
    })
}

/// A perturbed iterate crossing a branch-domain endpoint: the one-dimensional
/// shadow of a saddle connection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEvent {
    pub lambda: f64,
    pub step: usize,
    pub boundary: f64,
}

/// Scans a `lambda` grid for perturbed iterates crossing an interior
/// branch-domain endpoint, refining each sign change by bisection.
pub fn boundary_event_scan(
    map: &ReturnMap,
    twist: &TwistFamily,
    q: f64,
    n: usize,
    lambda_points: usize,
) -> Result<Vec<BoundaryEvent>> {
    let mut events: Vec<BoundaryEvent> = Vec::new();
    if lambda_points < 2 {
        return Ok(events);
    }
    let endpoints: Vec<f64> = map.interior_endpoints().to_vec();
    if endpoints.is_empty() {
        return Ok(events);
    }
    let orbit_at = |lambda: f64| -> Result<Vec<f64>> {
        Ok(perturbed_iterate(map, twist, lambda, q, n)?.points)
    };
    let mut grid = Vec::with_capacity(lambda_points);
    for i in 0..lambda_points {
        let lambda = i as f64 / (lambda_points - 1) as f64;
        grid.push((lambda, orbit_at(lambda)?));
    }
    for pair in grid.windows(2) {
        let (l0, ref o0) = pair[0];
        let (l1, ref o1) = pair[1];
        for step in 1..=n {
            if step >= o0.len() || step >= o1.len() {
                continue;
            }
            for &e in &endpoints {
                let g0 = o0[step] - e;
                let g1 = o1[step] - e;
                if g0 == 0.0 || g0.signum() == g1.signum() {
                    continue;
                }
                // refine by bisection on the crossing
                let (mut a, mut b) = (l0, l1);
                let mut ga = g0;
                let mut hit = None;
                for _ in 0..80 {
                    let mid = 0.5 * (a + b);
                    let om = orbit_at(mid)?;
                    if step >= om.len() {
                        break;
                    }
                    let gm = om[step] - e;
                    if gm.abs() <= 1e-10 {
                        hit = Some(mid);
                        break;
                    }
                    if gm.signum() == ga.signum() {
                        a = mid;
                        ga = gm;
                    } else {
                        b = mid;
                    }
                }
                if let Some(lambda) = hit {
                    let duplicate = events.iter().any(|ev| {
                        ev.step == step
                            && (ev.boundary - e).abs() <= 1e-9
                            && (ev.lambda - lambda).abs() <= 1e-6
                    });
                    if !duplicate {
                        events.push(BoundaryEvent {
                            lambda,
                            step,
                            boundary: e,
                        });
                    }
                }
            }
        }
    }
    events.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    Ok(events)
}

/// A successful closing: after `n_steps` applications of `E_lambda ∘ P` the
/// orbit of `q` lands on the marked point within `residual`.
#[derive(Debug, Clone)]
pub struct ClosingResult {
    pub n_steps: usize,
    pub lambda_star: f64,
    pub residual: f64,
    /// Perturbed orbit at `lambda_star`.
    pub orbit: Vec<f64>,
    /// Value of `P_1^N(q)`, for the sign bracket at `lambda = 1`.
    pub lambda_one_value: f64,
    /// Boundary events observed on a coarse sweep of `[0, 1]`.
    pub events: Vec<BoundaryEvent>,
}

/// Outcome of the closing search.
#[derive(Debug)]
pub enum ClosingOutcome {
    /// A twist parameter closing the orbit through the marked point.
    Closed(ClosingResult),
    /// Some perturbed iterate crossed a branch endpoint first: the sweep
    /// produces a saddle connection instead of a closed orbit.
    SaddleConnection(BoundaryEvent),
}

/// Searches for the smallest `N` with `P^N(q)` in the closing window
/// `[marked - kappa * delta, marked]`, checks the sign bracket at
/// `lambda = 1`, and bisects `lambda` until the perturbed orbit lands on the
/// marked point within `tol`.
///
/// Requires a depth-1 contraction certificate with `kappa < 1/3` (so that
/// `-3 kappa delta + delta > 0`;
/// a failed certificate or a violated bracket is a hypothesis error, not a
/// tool failure.
pub fn closing_search(
    map: &ReturnMap,
    twist: &TwistFamily,
    q: f64,
    cert: &ContractionCertificate,
    tol: f64,
    depth_limit: usize,
) -> Result<ClosingOutcome> {
    if cert.n != 1 {
        return Err(Error::Hypothesis(format!(
            "closing requires a depth-1 contraction certificate, got n = {}",
            cert.n
        )));
    }
    let kappa = cert.kappa;
    if kappa >= 1.0 / 3.0 {
        return Err(Error::Hypothesis(format!(
            "kappa < 1/3 gate violated: kappa = {kappa}"
        )));
    }
    let marked = map.segment().marked();
    let delta = twist.delta();
    let window = (marked - kappa * delta, marked);

    let plain = map.iterate(q, depth_limit)?;
    let n_steps = match plain
        .points
        .iter()
        .enumerate()
        .skip(1)
        .find(|(_, &x)| x >= window.0 && x <= window.1)
    {
        Some((n, _)) => n,
        None => {
            return Err(Error::Search(format!(
                "no N <= {} with P^N(q) in [{}, {}]; deepest orbit point reached {:?}",
                plain.steps(),
                window.0,
                window.1,
                plain.stop
            )))
        }
    };

    // f(lambda) = P_lambda^N(q) - marked, monitoring truncation
    enum Probe {
        Value(f64),
        Truncated,
    }
    let probe = |lambda: f64| -> Result<Probe> {
        let orbit = perturbed_iterate(map, twist, lambda, q, n_steps)?;
        if orbit.points.len() == n_steps + 1 {
            Ok(Probe::Value(orbit.last() - marked))
        } else {
            Ok(Probe::Truncated)
        }
    };

    // a truncation during the sweep is a saddle connection; locate it
    let locate_event = |lo: f64, hi: f64| -> Result<BoundaryEvent> {
        let events = boundary_event_scan(map, twist, q, n_steps, 257)?;
        if let Some(ev) = events
            .iter()
            .find(|ev| ev.lambda >= lo - 1e-9 && ev.lambda <= hi + 1e-9)
        {
            return Ok(*ev);
        }
        Err(Error::Search(format!(
            "perturbed orbit truncates between lambda = {lo} and {hi}, but no crossing was isolated"
        )))
    };

    let f0 = match probe(0.0)? {
        Probe::Value(v) => v,
        Probe::Truncated => {
            return Err(Error::Search(
                "unperturbed orbit shorter than the closing depth".into(),
            ))
        }
    };
    if f0 > 0.0 {
        return Err(Error::Hypothesis(format!(
            "P^N(q) = {} lies above the marked point",
            f0 + marked
        )));
    }
    let f1 = match probe(1.0)? {
        Probe::Value(v) => v,
        Probe::Truncated => return Ok(ClosingOutcome::SaddleConnection(locate_event(0.0, 1.0)?)),
    };
    let sign_floor = -3.0 * kappa * delta + delta;
    if f1 < sign_floor {
        return Err(Error::Hypothesis(format!(
            "sign bracket violated: P_1^N(q) - marked = {f1} < -3*kappa*delta + delta = {sign_floor}"
        )));
    }

    let (mut lo, mut hi) = (0.0, 1.0);
    let mut f_lo = f0;
    let mut lambda_star = if f0 == 0.0 { Some(0.0) } else { None };
    if lambda_star.is_none() {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            match probe(mid)? {
                Probe::Value(v) => {
                    if v.abs() <= tol {
                        lambda_star = Some(mid);
                        break;
                    }
                    if v.signum() == f_lo.signum() {
                        lo = mid;
                        f_lo = v;
                    } else {
                        hi = mid;
                    }
                }
                Probe::Truncated => {
                    return Ok(ClosingOutcome::SaddleConnection(locate_event(lo, hi)?))
                }
            }
        }
    }
    let lambda_star = lambda_star.ok_or_else(|| {
        Error::Search(format!(
            "bisection did not reach residual {tol} within 200 iterations"
        ))
    })?;

    // independent re-iteration for the certified residual
    let orbit = perturbed_iterate(map, twist, lambda_star, q, n_steps)?;
    let residual = (orbit.last() - marked).abs();
    if residual > tol {
        return Err(Error::Search(format!(
            "re-iterated residual {residual} exceeds the tolerance {tol}"
        )));
    }
    let events = boundary_event_scan(map, twist, q, n_steps, 65)?;
    Ok(ClosingOutcome::Closed(ClosingResult {
        n_steps,
        lambda_star,
        residual,
        orbit: orbit.points,
        lambda_one_value: f1 + marked,
        events,
    }))
}
