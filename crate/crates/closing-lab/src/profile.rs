//! Smooth ramp and bump profiles with closed-form derivatives and integrals.
//!
//! A profile of order `p` (odd) uses the polynomial smoothstep of degree `p`
//! in its shoulders. A ramp is a derivative-level trapezoid: its derivative
//! rises along a smoothstep shoulder over the first quarter, is flat over
//! the middle half, and falls symmetrically. The maximum slope of the unit
//! ramp is 4/3 for every order, and the glue to the constant plateaus is as
//! smooth as the shoulder smoothstep.

use crate::{Error, Result};

/// Fraction of the unit ramp occupied by each smoothstep shoulder.
const SHOULDER: f64 = 0.25;

fn binomial(n: usize, k: usize) -> f64 {
    let mut v = 1.0;
    for i in 0..k {
        v = v * (n - i) as f64 / (i + 1) as f64;
    }
    v
}

/// Polynomial smoothstep of degree `2n + 1`: monotone `[0,1] -> [0,1]` with
/// derivatives `1..=n` vanishing at both endpoints.
#[derive(Debug, Clone, Copy)]
pub struct SmoothStep {
    n: usize,
    /// Leading constant of the derivative `c * t^n (1-t)^n`.
    c: f64,
}

impl SmoothStep {
    /// Builds the smoothstep from its odd polynomial degree.
    pub fn from_degree(degree: usize) -> Result<Self> {
        if degree % 2 == 0 || degree == 0 || degree > 31 {
            return Err(Error::Parameter(format!(
                "profile order must be an odd integer in [1, 31], got {degree}"
            )));
        }
        let n = (degree - 1) / 2;
        // (2n+1)! / (n!)^2 = (2n+1) * C(2n, n)
        let c = (2 * n + 1) as f64 * binomial(2 * n, n);
        Ok(SmoothStep { n, c })
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return 1.0;
        }
        let n = self.n;
        let mut acc = 0.0;
        for j in 0..=n {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let p = (n + j + 1) as f64;
            acc += sign * binomial(n, j) * t.powi((n + j + 1) as i32) / p;
        }
        self.c * acc
    }

    /// Closed-form derivative `c * t^n (1-t)^n`.
    pub fn deriv(&self, t: f64) -> f64 {
        if t <= 0.0 || t >= 1.0 {
            return 0.0;
        }
        self.c * t.powi(self.n as i32) * (1.0 - t).powi(self.n as i32)
    }

    /// Integral of the smoothstep from 0 to `t`.
    pub fn integral(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= 1.0 {
            // The smoothstep is symmetric about t = 1/2.
            return t - 0.5;
        }
        let n = self.n;
        let mut acc = 0.0;
        for j in 0..=n {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let p = (n + j + 1) as f64;
            let q = (n + j + 2) as f64;
            acc += sign * binomial(n, j) * t.powi((n + j + 2) as i32) / (p * q);
        }
        self.c * acc
    }
}

/// Monotone unit ramp `[0,1] -> [0,1]` whose derivative is a smooth trapezoid.
///
/// All derivatives available to the shoulder smoothstep vanish at both ends,
/// so gluing the ramp between the constants 0 and 1 preserves that smoothness
/// class. The maximum slope is `1 / (1 - SHOULDER) = 4/3`.
#[derive(Debug, Clone, Copy)]
pub struct Ramp {
    step: SmoothStep,
    order: usize,
}

impl Ramp {
    pub fn new(order: usize) -> Result<Self> {
        Ok(Ramp {
            step: SmoothStep::from_degree(order)?,
            order,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn eval(&self, t: f64) -> f64 {
        let a = SHOULDER;
        if t <= 0.0 {
            0.0
        } else if t < a {
            a * self.step.integral(t / a) / (1.0 - a)
        } else if t <= 1.0 - a {
            (t - 0.5 * a) / (1.0 - a)
        } else if t < 1.0 {
            1.0 - a * self.step.integral((1.0 - t) / a) / (1.0 - a)
        } else {
            1.0
        }
    }

    pub fn deriv(&self, t: f64) -> f64 {
        let a = SHOULDER;
        if t <= 0.0 || t >= 1.0 {
            0.0
        } else if t < a {
            self.step.eval(t / a) / (1.0 - a)
        } else if t <= 1.0 - a {
            1.0 / (1.0 - a)
        } else {
            self.step.eval((1.0 - t) / a) / (1.0 - a)
        }
    }

    pub fn deriv2(&self, t: f64) -> f64 {
        let a = SHOULDER;
        if t <= 0.0 || t >= 1.0 {
            0.0
        } else if t < a {
            self.step.deriv(t / a) / (a * (1.0 - a))
        } else if t <= 1.0 - a {
            0.0
        } else {
            -self.step.deriv((1.0 - t) / a) / (a * (1.0 - a))
        }
    }

    /// Maximum slope of the unit ramp.
    pub fn sup_deriv(&self) -> f64 {
        1.0 / (1.0 - SHOULDER)
    }
}

/// A bump: 1 on a plateau, 0 outside a support, monotone ramps between.
///
/// The ramps are odd-symmetric about their midpoints, so each ramp
/// integrates to exactly half its width.
#[derive(Debug, Clone)]
pub struct BumpFunction {
    support: (f64, f64),
    plateau: (f64, f64),
    ramp: Ramp,
}

impl BumpFunction {
    pub fn new(support: (f64, f64), plateau: (f64, f64), order: usize) -> Result<Self> {
        let (s0, s1) = support;
        let (p0, p1) = plateau;
        if !(s0 < p0 && p0 <= p1 && p1 < s1) {
            return Err(Error::Parameter(format!(
                "plateau [{p0}, {p1}] must lie strictly inside support [{s0}, {s1}]"
            )));
        }
        Ok(BumpFunction {
            support,
            plateau,
            ramp: Ramp::new(order)?,
        })
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn plateau(&self) -> (f64, f64) {
        self.plateau
    }

    pub fn order(&self) -> usize {
        self.ramp.order()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (s0, s1) = self.support;
        let (p0, p1) = self.plateau;
        if x <= s0 || x >= s1 {
            0.0
        } else if x >= p0 && x <= p1 {
            1.0
        } else if x < p0 {
            self.ramp.eval((x - s0) / (p0 - s0))
        } else {
            self.ramp.eval((s1 - x) / (s1 - p1))
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let (s0, s1) = self.support;
        let (p0, p1) = self.plateau;
        if x <= s0 || x >= s1 || (x >= p0 && x <= p1) {
            0.0
        } else if x < p0 {
            self.ramp.deriv((x - s0) / (p0 - s0)) / (p0 - s0)
        } else {
            -self.ramp.deriv((s1 - x) / (s1 - p1)) / (s1 - p1)
        }
    }

    pub fn deriv2(&self, x: f64) -> f64 {
        let (s0, s1) = self.support;
        let (p0, p1) = self.plateau;
        if x <= s0 || x >= s1 || (x >= p0 && x <= p1) {
            0.0
        } else if x < p0 {
            let w = p0 - s0;
            self.ramp.deriv2((x - s0) / w) / (w * w)
        } else {
            let w = s1 - p1;
            self.ramp.deriv2((s1 - x) / w) / (w * w)
        }
    }

    /// Derivative of order `k` for `k <= 2` in closed form.
    pub fn derivative(&self, x: f64, k: usize) -> f64 {
        match k {
            0 => self.eval(x),
            1 => self.deriv(x),
            2 => self.deriv2(x),
            _ => panic!("closed-form bump derivatives available up to order 2"),
        }
    }

    /// Exact integral over the real line: plateau width plus half of each
    /// ramp width.
    pub fn integral(&self) -> f64 {
        let (s0, s1) = self.support;
        let (p0, p1) = self.plateau;
        (p1 - p0) + 0.5 * (p0 - s0) + 0.5 * (s1 - p1)
    }

    /// Upper bound for `|d/dx|`, attained in the middle of the steeper ramp.
    pub fn sup_deriv(&self) -> f64 {
        let (s0, s1) = self.support;
        let (p0, p1) = self.plateau;
        let w = (p0 - s0).min(s1 - p1);
        self.ramp.sup_deriv() / w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn smoothstep_endpoints_and_midpoint() {
        for degree in [1, 3, 5, 7] {
            let s = SmoothStep::from_degree(degree).unwrap();
            assert_eq!(s.eval(0.0), 0.0);
            assert_eq!(s.eval(1.0), 1.0);
            assert!((s.eval(0.5) - 0.5).abs() < 1e-12, "degree {degree}");
        }
    }

    #[test]
    fn smoothstep_classic_values() {
        // degree 3: 3t^2 - 2t^3, degree 5: 10t^3 - 15t^4 + 6t^5
        let s3 = SmoothStep::from_degree(3).unwrap();
        let s5 = SmoothStep::from_degree(5).unwrap();
        for t in [0.1, 0.3, 0.7, 0.9] {
            assert!((s3.eval(t) - (3.0 * t * t - 2.0 * t * t * t)).abs() < 1e-12);
            let v5 = 10.0 * t.powi(3) - 15.0 * t.powi(4) + 6.0 * t.powi(5);
            assert!((s5.eval(t) - v5).abs() < 1e-12);
        }
    }

    #[test]
    fn smoothstep_derivative_matches_finite_difference() {
        for degree in [3, 5, 7] {
            let s = SmoothStep::from_degree(degree).unwrap();
            for t in [0.11, 0.42, 0.77] {
                let d = s.deriv(t);
                let est = fd(|u| s.eval(u), t, 1e-6);
                assert!((d - est).abs() < 1e-7, "degree {degree}, t {t}");
            }
        }
    }

    #[test]
    fn smoothstep_integral_is_half() {
        for degree in [1, 3, 5, 7, 9] {
            let s = SmoothStep::from_degree(degree).unwrap();
            assert!((s.integral(1.0) - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn even_or_zero_degree_rejected() {
        assert!(SmoothStep::from_degree(0).is_err());
        assert!(SmoothStep::from_degree(4).is_err());
    }

    #[test]
    fn ramp_is_symmetric_and_bounded() {
        for order in [1, 3, 5, 7] {
            let r = Ramp::new(order).unwrap();
            assert_eq!(r.eval(0.0), 0.0);
            assert_eq!(r.eval(1.0), 1.0);
            assert!((r.eval(0.5) - 0.5).abs() < 1e-12);
            let mut sup: f64 = 0.0;
            for i in 0..=1000 {
                let t = i as f64 / 1000.0;
                // odd symmetry about the midpoint
                assert!((r.eval(t) + r.eval(1.0 - t) - 1.0).abs() < 1e-12);
                sup = sup.max(r.deriv(t));
            }
            assert!(sup <= r.sup_deriv() + 1e-12);
            assert!((sup - r.sup_deriv()).abs() < 1e-9, "flat top reached");
        }
    }

    #[test]
    fn ramp_derivatives_match_finite_differences() {
        let r = Ramp::new(7).unwrap();
        for t in [0.05, 0.13, 0.24, 0.5, 0.81, 0.93] {
            assert!((r.deriv(t) - fd(|u| r.eval(u), t, 1e-6)).abs() < 1e-7);
            assert!((r.deriv2(t) - fd(|u| r.deriv(u), t, 1e-6)).abs() < 1e-6);
        }
    }

    #[test]
    fn bump_geometry() {
        // transversal-direction bump for a box of depth 0.1
        let eps = 0.1;
        let phi1 =
            BumpFunction::new((-0.9 * eps, -0.1 * eps), (-0.8 * eps, -0.2 * eps), 7).unwrap();
        assert_eq!(phi1.eval(-0.05), 1.0);
        assert_eq!(phi1.eval(-0.095), 0.0);
        assert_eq!(phi1.eval(0.0), 0.0);
        assert!((phi1.integral() - 0.07).abs() < 1e-15);

        // flow-direction bump for delta = 0.01
        let d = 0.01;
        let phi2 = BumpFunction::new((-7.0 * d, 7.0 * d), (-6.0 * d, 6.0 * d), 7).unwrap();
        assert_eq!(phi2.eval(0.0), 1.0);
        assert_eq!(phi2.eval(0.07), 0.0);
        assert_eq!(phi2.eval(-0.07), 0.0);

        // a symmetric ramp passes through 1/2 at its midpoint
        let mid = -0.85 * eps;
        assert!((phi1.eval(mid) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bump_integral_matches_quadrature() {
        let b = BumpFunction::new((-0.7, 0.7), (-0.4, 0.4), 5).unwrap();
        let n = 200_000;
        let (lo, hi) = (-0.7, 0.7);
        let h = (hi - lo) / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            acc += b.eval(lo + (i as f64 + 0.5) * h) * h;
        }
        assert!((acc - b.integral()).abs() < 1e-9);
    }

    #[test]
    fn bump_requires_interior_plateau() {
        assert!(BumpFunction::new((0.0, 1.0), (0.0, 0.5), 3).is_err());
        assert!(BumpFunction::new((0.0, 1.0), (0.6, 0.5), 3).is_err());
    }
}
