//! The flow-box realization of the twist: a rectangle `[-eps, 0] x [a, b]`
//! in rectified coordinates carrying the field
//! `(1, 0) + lambda * eta * phi1(x) * phi2(y) * (0, delta)`,
//! with `phi1`, `phi2` bump functions in the transversal and flow-transverse
//! directions. The first component is identically 1, so `x` is a time-like
//! coordinate and the transit map from the entry edge `x = -eps` to the exit
//! edge `x = 0` is well defined. After calibrating `eta` so the trajectory
//! from `(-eps, -4 delta)` exits at `(0, -3 delta)`, the transit map restricted
//! to the plateau is the exact upward shift by `lambda * delta`: the twist
//! family, realized by a flow.

use crate::ode::{self, OdeOptions};
pub use crate::profile::BumpFunction;
use crate::twist::TwistFamily;
use crate::{Error, Result};

/// Default fixed step for transit integration.
pub const DEFAULT_TRANSIT_STEP: f64 = 1e-4;

/// Default fixed step for shooting calibration; fine enough that the
/// quadrature error stays far below the calibration agreement target.
pub const DEFAULT_SHOOT_STEP: f64 = 5e-6;

/// Builds a bump with the given support, plateau and smoothness order.
pub fn make_bump(support: (f64, f64), plateau: (f64, f64), order: usize) -> Result<BumpFunction> {
    BumpFunction::new(support, plateau, order)
}

/// The perturbed unit-horizontal field on a rectangle.
#[derive(Debug, Clone)]
pub struct FlowBoxField {
    epsilon: f64,
    delta: f64,
    eta: f64,
    phi1: BumpFunction,
    phi2: BumpFunction,
    y_extent: (f64, f64),
}

impl FlowBoxField {
    /// Builds the field with an explicit drift constant `eta`.
    ///
    /// The rectangle's vertical extent must contain the flow-direction
    /// support `[-7 delta, 7 delta]` with a margin of `2 delta`.
    pub fn with_eta(
        epsilon: f64,
        delta: f64,
        y_extent: (f64, f64),
        order: usize,
        eta: f64,
    ) -> Result<Self> {
        if !(epsilon > 0.0) || !(delta > 0.0) {
            return Err(Error::Parameter(format!(
                "box depth and amplitude must be positive, got eps = {epsilon}, delta = {delta}"
            )));
        }
        let (a, b) = y_extent;
        if a > -9.0 * delta || b < 9.0 * delta {
            return Err(Error::Parameter(format!(
                "vertical extent [{a}, {b}] must contain [-7 delta, 7 delta] with margin 2 delta"
            )));
        }
        let phi1 = BumpFunction::new(
            (-0.9 * epsilon, -0.1 * epsilon),
            (-0.8 * epsilon, -0.2 * epsilon),
            order,
        )?;
        let phi2 = BumpFunction::new(
            (-7.0 * delta, 7.0 * delta),
            (-6.0 * delta, 6.0 * delta),
            order,
        )?;
        Ok(FlowBoxField {
            epsilon,
            delta,
            eta,
            phi1,
            phi2,
            y_extent,
        })
    }

    /// Builds the field with `eta` calibrated by shooting.
    pub fn calibrated(
        epsilon: f64,
        delta: f64,
        y_extent: (f64, f64),
        order: usize,
        shoot: &OdeOptions,
    ) -> Result<(Self, Calibration)> {
        let cal = calibrate_eta(epsilon, delta, y_extent, order, shoot)?;
        let field = Self::with_eta(epsilon, delta, y_extent, order, cal.eta)?;
        Ok((field, cal))
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn phi1(&self) -> &BumpFunction {
        &self.phi1
    }

    pub fn phi2(&self) -> &BumpFunction {
        &self.phi2
    }

    pub fn y_extent(&self) -> (f64, f64) {
        self.y_extent
    }

    /// Vertical component of the field at `(x, y)` for the given `lambda`;
    /// the horizontal component is identically 1.
    pub fn vertical_rate(&self, lambda: f64, x: f64, y: f64) -> f64 {
        lambda * self.eta * self.delta * self.phi1.eval(x) * self.phi2.eval(y)
    }

    /// The perturbation added to the horizontal field, as a vector.
    pub fn perturbation(&self, lambda: f64, x: f64, y: f64) -> (f64, f64) {
        (0.0, self.vertical_rate(lambda, x, y))
    }
}

/// Shooting calibration of the drift constant.
#[derive(Debug, Clone, Copy)]
pub struct Calibration {
    /// The shooting result.
    pub eta: f64,
    /// Closed form `1 / integral(phi1)`.
    pub closed_form: f64,
    /// `|eta - closed_form|`.
    pub discrepancy: f64,
    /// Final shooting residual `|exit + 3 delta|`.
    pub residual: f64,
}

/// Calibrates `eta` so the full-twist trajectory from `(-eps, -4 delta)`
/// exits at `(0, -3 delta)`. Since that trajectory stays inside the
/// flow-direction plateau, the closed form `1 / integral(phi1)` seeds a
/// secant iteration on the shooting map.
pub fn calibrate_eta(
    epsilon: f64,
    delta: f64,
    y_extent: (f64, f64),
    order: usize,
    shoot: &OdeOptions,
) -> Result<Calibration> {
    calibrate_eta_with_lambda(epsilon, delta, y_extent, order, shoot, 1.0)
}

/// Calibration against an arbitrary twist strength; `lambda = 0` cannot
/// produce any vertical displacement and is reported as a shooting error.
pub fn calibrate_eta_with_lambda(
    epsilon: f64,
    delta: f64,
    y_extent: (f64, f64),
    order: usize,
    shoot: &OdeOptions,
    lambda: f64,
) -> Result<Calibration> {
    let probe = |eta: f64| -> Result<f64> {
        let field = FlowBoxField::with_eta(epsilon, delta, y_extent, order, eta)?;
        let exit = transit_map(&field, lambda, -4.0 * delta, shoot)?;
        Ok(exit + 3.0 * delta)
    };
    let closed_form = {
        let field = FlowBoxField::with_eta(epsilon, delta, y_extent, order, 1.0)?;
        1.0 / field.phi1.integral()
    };
    let mut e0 = closed_form;
    let mut f0 = probe(e0)?;
    let mut e1 = closed_form * 1.02;
    let mut f1 = probe(e1)?;
    for _ in 0..32 {
        if f1.abs() <= 1e-12 {
            break;
        }
        let df = f1 - f0;
        if df.abs() < 1e-300 {
            return Err(Error::Ode(format!(
                "shooting cannot bracket the exit target: displacement insensitive to eta \
                 (residual {f1}, lambda = {lambda})"
            )));
        }
        let next = e1 - f1 * (e1 - e0) / df;
        e0 = e1;
        f0 = f1;
        e1 = next;
        f1 = probe(e1)?;
    }
    let residual = f1.abs();
    if residual > 1e-8 {
        return Err(Error::Ode(format!(
            "shooting residual {residual} above tolerance 1e-8"
        )));
    }
    Ok(Calibration {
        eta: e1,
        closed_form,
        discrepancy: (e1 - closed_form).abs(),
        residual,
    })
}

/// Exit ordinate at `x = 0` of the integral curve entering at `(-eps, y)`.
pub fn transit_map(field: &FlowBoxField, lambda: f64, y: f64, opts: &OdeOptions) -> Result<f64> {
    let (a, b) = field.y_extent;
    if y < a || y > b {
        return Err(Error::Parameter(format!(
            "entry ordinate {y} outside the rectangle [{a}, {b}]"
        )));
    }
    let f = |x: f64, y: f64| field.vertical_rate(lambda, x, y);
    ode::integrate(&f, -field.epsilon, y, 0.0, opts, |x, y| {
        if y < a - 1e-12 || y > b + 1e-12 {
            Err(Error::Ode(format!(
                "trajectory left the rectangle vertically at x = {x}, y = {y}"
            )))
        } else {
            Ok(())
        }
    })
}

/// A sampled transit map at one parameter value, with its integrator record.
#[derive(Debug, Clone)]
pub struct TransitTable {
    pub lambda: f64,
    pub entries: Vec<f64>,
    pub exits: Vec<f64>,
    pub ode: OdeOptions,
}

impl TransitTable {
    pub fn sample(
        field: &FlowBoxField,
        lambda: f64,
        entries: Vec<f64>,
        opts: &OdeOptions,
    ) -> Result<Self> {
        let mut exits = Vec::with_capacity(entries.len());
        for &y in &entries {
            exits.push(transit_map(field, lambda, y, opts)?);
        }
        Ok(TransitTable {
            lambda,
            entries,
            exits,
            ode: *opts,
        })
    }

    /// Strict monotonicity of exit in entry (trajectories cannot cross).
    pub fn is_strictly_increasing(&self) -> bool {
        self.exits.windows(2).all(|w| w[1] > w[0])
    }
}

/// One grid entry of the transit-vs-twist comparison.
#[derive(Debug, Clone, Copy)]
pub struct TransitRow {
    pub lambda: f64,
    pub y: f64,
    pub exit: f64,
    /// `|exit - (y + lambda * delta)|` when `y` lies on the twist plateau.
    pub plateau_discrepancy: Option<f64>,
    /// `(exit - y) - lambda * delta`; the one-sided bound requires this
    /// to be non-positive up to integrator error.
    pub shift_excess: f64,
}

/// Grid comparison of the flow transit against the twist family it realizes.
#[derive(Debug)]
pub struct TransitReport {
    pub rows: Vec<TransitRow>,
    pub max_plateau_discrepancy: f64,
    pub max_shift_excess: f64,
}

/// Integrates the field across the box on a `(lambda, y)` grid and compares
/// exits with the twist family: exact shift on the plateau, one-sided shift
/// bound everywhere. The twist must use the same amplitude.
pub fn verify_transit_vs_twist(
    field: &FlowBoxField,
    twist: &TwistFamily,
    lambdas: &[f64],
    ys: &[f64],
    opts: &OdeOptions,
) -> Result<TransitReport> {
    if (twist.delta() - field.delta).abs() > 1e-15 {
        return Err(Error::Parameter(format!(
            "twist amplitude {} does not match the field amplitude {}",
            twist.delta(),
            field.delta
        )));
    }
    let delta = field.delta;
    let marked = twist.segment().marked();
    let mut rows = Vec::with_capacity(lambdas.len() * ys.len());
    let mut max_plateau: f64 = 0.0;
    let mut max_excess = f64::NEG_INFINITY;
    for &lambda in lambdas {
        for &y in ys {
            let exit = transit_map(field, lambda, y, opts)?;
            // the rectified frame puts the marked point at the origin
            let on_plateau = y >= -4.0 * delta && y <= 4.0 * delta;
            let plateau_discrepancy = on_plateau.then(|| {
                let twisted = twist.eval(lambda, marked + y) - marked;
                (exit - twisted).abs()
            });
            let shift_excess = (exit - y) - lambda * delta;
            if let Some(d) = plateau_discrepancy {
                max_plateau = max_plateau.max(d);
            }
            max_excess = max_excess.max(shift_excess);
            rows.push(TransitRow {
                lambda,
                y,
                exit,
                plateau_discrepancy,
                shift_excess,
            });
        }
    }
    Ok(TransitReport {
        rows,
        max_plateau_discrepancy: max_plateau,
        max_shift_excess: max_excess,
    })
}

fn central_difference(f: &impl Fn(f64) -> f64, x: f64, order: usize, h: f64) -> f64 {
    if order == 0 {
        return f(x);
    }
    let mut acc = 0.0;
    let mut coeff = 1.0;
    for m in 0..=order {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * coeff * f(x + (order as f64 / 2.0 - m as f64) * h);
        coeff = coeff * (order - m) as f64 / (m + 1) as f64;
    }
    acc / h.powi(order as i32)
}

/// Estimates the C^r norm of the perturbation term by central finite
/// differences on a grid: the largest `|d^i/dx^i d^j/dy^j|` over all
/// `i + j <= r`. The perturbation is a product of one-variable bumps, so the
/// mixed partial factors through per-axis differences.
pub fn cr_norm_estimate(field: &FlowBoxField, lambda: f64, r: usize, grid: usize) -> f64 {
    let h = 1e-3 * field.delta;
    let scale = lambda * field.eta * field.delta;
    let (x0, x1) = field.phi1.support();
    let (y0, y1) = field.phi2.support();
    let mut worst: f64 = 0.0;
    for i in 0..=r {
        // largest |phi1^(i)| over the grid
        let mut mx: f64 = 0.0;
        for g in 0..=grid {
            let x = x0 - h + (x1 - x0 + 2.0 * h) * g as f64 / grid as f64;
            mx = mx.max(central_difference(&|u| field.phi1.eval(u), x, i, h).abs());
        }
        for j in 0..=(r - i) {
            let mut my: f64 = 0.0;
            for g in 0..=grid {
                let y = y0 - h + (y1 - y0 + 2.0 * h) * g as f64 / grid as f64;
                my = my.max(central_difference(&|v| field.phi2.eval(v), y, j, h).abs());
            }
            worst = worst.max(scale.abs() * mx * my);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segment_map::Segment;

    const EPS: f64 = 0.1;
    const DELTA: f64 = 0.01;
    const ORDER: usize = 7;
    const Y_EXTENT: (f64, f64) = (-1.0, 0.9);

    fn shoot_opts() -> OdeOptions {
        OdeOptions::fixed(DEFAULT_SHOOT_STEP)
    }

    fn calibrated_field() -> (FlowBoxField, Calibration) {
        FlowBoxField::calibrated(EPS, DELTA, Y_EXTENT, ORDER, &shoot_opts()).unwrap()
    }

    #[test]
    fn calibration_matches_closed_form() {
        let (_, cal) = calibrated_field();
        assert!((cal.closed_form - 1.0 / 0.07).abs() < 1e-12);
        assert!(cal.discrepancy <= 1e-8, "discrepancy {}", cal.discrepancy);
        assert!(cal.residual <= 1e-8);
    }

    #[test]
    fn closed_form_scales_inversely_with_depth() {
        let f1 = FlowBoxField::with_eta(EPS, DELTA, Y_EXTENT, ORDER, 1.0).unwrap();
        let f2 = FlowBoxField::with_eta(2.0 * EPS, DELTA, Y_EXTENT, ORDER, 1.0).unwrap();
        assert!((f2.phi1().integral() - 2.0 * f1.phi1().integral()).abs() < 1e-15);
    }

    #[test]
    fn calibration_fails_without_twist() {
        let err =
            calibrate_eta_with_lambda(EPS, DELTA, Y_EXTENT, ORDER, &shoot_opts(), 0.0).unwrap_err();
        assert!(matches!(err, Error::Ode(_)));
    }

    #[test]
    fn transit_hits_the_calibration_target() {
        let (field, _) = calibrated_field();
        let exit = transit_map(&field, 1.0, -4.0 * DELTA, &OdeOptions::fixed(1e-4)).unwrap();
        assert!((exit + 3.0 * DELTA).abs() < 1e-6, "exit {exit}");
    }

    #[test]
    fn transit_is_plateau_shift() {
        let (field, _) = calibrated_field();
        let exit = transit_map(&field, 0.5, 0.0, &OdeOptions::fixed(1e-4)).unwrap();
        assert!((exit - 0.5 * DELTA).abs() < 1e-6);
    }

    #[test]
    fn transit_identity_outside_support() {
        let (field, _) = calibrated_field();
        let exit = transit_map(&field, 1.0, -0.5, &OdeOptions::fixed(1e-4)).unwrap();
        assert_eq!(exit, -0.5);
        // the unperturbed member is exactly the identity
        let exit = transit_map(&field, 0.0, 0.02, &OdeOptions::fixed(1e-4)).unwrap();
        assert_eq!(exit, 0.02);
    }

    #[test]
    fn plateau_shift_is_uniform_in_entry() {
        // the shift on the plateau does not depend on the entry ordinate
        let (field, _) = calibrated_field();
        let opts = OdeOptions::fixed(1e-4);
        let mut shifts = Vec::new();
        for i in 0..=16 {
            let y = -4.0 * DELTA + 8.0 * DELTA * i as f64 / 16.0;
            shifts.push(transit_map(&field, 0.7, y, &opts).unwrap() - y);
        }
        let max = shifts.iter().copied().fold(f64::MIN, f64::max);
        let min = shifts.iter().copied().fold(f64::MAX, f64::min);
        assert!(max - min <= 2e-12, "spread {}", max - min);
    }

    #[test]
    fn transit_monotone_in_entry() {
        let (field, _) = calibrated_field();
        let ys: Vec<f64> = (0..=60).map(|i| -0.09 + 0.18 * i as f64 / 60.0).collect();
        let table = TransitTable::sample(&field, 1.0, ys, &OdeOptions::fixed(1e-3)).unwrap();
        assert!(table.is_strictly_increasing());
    }

    #[test]
    fn transit_agrees_with_twist_on_plateau() {
        let (field, _) = calibrated_field();
        let segment = Segment::centered(-1.0, 0.9).unwrap();
        let twist = TwistFamily::new(&segment, DELTA, ORDER).unwrap();
        let ys: Vec<f64> = (0..=20)
            .map(|i| -4.0 * DELTA + 8.0 * DELTA * i as f64 / 20.0)
            .collect();
        let report = verify_transit_vs_twist(
            &field,
            &twist,
            &[0.0, 0.25, 0.5, 1.0],
            &ys,
            &OdeOptions::fixed(1e-4),
        )
        .unwrap();
        assert!(report.max_plateau_discrepancy <= 1e-6);
        assert!(report.max_shift_excess <= 1e-9);
    }

    #[test]
    fn ramp_entry_shifts_strictly_less() {
        // entries up to 5 delta still shift by exactly delta (the rising
        // trajectory stays inside the flow-direction plateau); above that
        // the shift falls strictly short
        let (field, _) = calibrated_field();
        let y = 5.0 * DELTA;
        let exit = transit_map(&field, 1.0, y, &OdeOptions::fixed(1e-4)).unwrap();
        assert!((exit - y - DELTA).abs() < 1e-6);
        let y = 5.5 * DELTA;
        let exit = transit_map(&field, 1.0, y, &OdeOptions::fixed(1e-4)).unwrap();
        assert!(exit - y < DELTA - 1e-5, "shift {}", exit - y);
        assert!(exit > y);
    }

    #[test]
    fn cr_norm_sup_is_eta_delta() {
        let (field, _) = calibrated_field();
        let c0 = cr_norm_estimate(&field, 1.0, 0, 400);
        assert!((c0 - field.eta() * DELTA).abs() < 1e-6, "c0 = {c0}");
        assert_eq!(cr_norm_estimate(&field, 0.0, 3, 100), 0.0);
    }

    #[test]
    fn cr_norm_first_order_matches_ramp_derivative() {
        let (field, _) = calibrated_field();
        let c1 = cr_norm_estimate(&field, 1.0, 1, 2000);
        // dominated by eta * delta * sup|phi2'|
        let expected = field.eta() * DELTA * field.phi2().sup_deriv();
        assert!(
            (c1 - expected).abs() <= 1e-3 * expected,
            "c1 = {c1}, expected {expected}"
        );
    }

    #[test]
    fn geometry_validation() {
        assert!(FlowBoxField::with_eta(EPS, DELTA, (-0.05, 0.05), ORDER, 1.0).is_err());
        assert!(FlowBoxField::with_eta(-0.1, DELTA, Y_EXTENT, ORDER, 1.0).is_err());
    }
}
