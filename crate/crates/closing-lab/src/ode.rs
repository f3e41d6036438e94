//! Small ODE stepping utilities for scalar fields `dy/dx = f(x, y)`.

/// Stepping policy for trajectory integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepMode {
    /// Classical 4th-order scheme with a fixed step; reproducible
    /// bit-for-bit across runs.
    Fixed(f64),
    /// Step-doubling control on the same scheme.
    Adaptive { tol: f64, initial: f64 },
}

/// Integrator options carried alongside every transit result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub mode: StepMode,
}

impl OdeOptions {
    pub fn fixed(step: f64) -> Self {
        OdeOptions {
            mode: StepMode::Fixed(step),
        }
    }

    pub fn adaptive(tol: f64, initial: f64) -> Self {
        OdeOptions {
            mode: StepMode::Adaptive { tol, initial },
        }
    }

    pub fn step_hint(&self) -> f64 {
        match self.mode {
            StepMode::Fixed(h) => h,
            StepMode::Adaptive { initial, .. } => initial,
        }
    }
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions::fixed(1e-4)
    }
}

/// One classical 4th-order step of `dy/dx = f(x, y)`.
pub fn rk4_step(f: &impl Fn(f64, f64) -> f64, x: f64, y: f64, h: f64) -> f64 {
    let k1 = f(x, y);
    let k2 = f(x + 0.5 * h, y + 0.5 * h * k1);
    let k3 = f(x + 0.5 * h, y + 0.5 * h * k2);
    let k4 = f(x + h, y + h * k3);
    y + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
}

/// Integrates from `x0` to `x1 > x0`, calling `inspect` after every accepted
/// step (for geometry checks); returns the final value.
pub fn integrate(
    f: &impl Fn(f64, f64) -> f64,
    x0: f64,
    y0: f64,
    x1: f64,
    opts: &OdeOptions,
    mut inspect: impl FnMut(f64, f64) -> crate::Result<()>,
) -> crate::Result<f64> {
    let span = x1 - x0;
    match opts.mode {
        StepMode::Fixed(step) => {
            let count = (span / step).ceil().max(1.0) as usize;
            let h = span / count as f64;
            let mut x = x0;
            let mut y = y0;
            for _ in 0..count {
                y = rk4_step(f, x, y, h);
                x += h;
                inspect(x, y)?;
            }
            Ok(y)
        }
        StepMode::Adaptive { tol, initial } => {
            let mut x = x0;
            let mut y = y0;
            let mut h = initial.min(span);
            while x < x1 {
                if x + h > x1 {
                    h = x1 - x;
                }
                let full = rk4_step(f, x, y, h);
                let half = rk4_step(f, x, y, 0.5 * h);
                let two_halves = rk4_step(f, x + 0.5 * h, half, 0.5 * h);
                let err = (two_halves - full).abs() / 15.0;
                if err > tol && h > 1e-12 {
                    h *= 0.5;
                    continue;
                }
                y = two_halves;
                x += h;
                inspect(x, y)?;
                if err < tol / 32.0 {
                    h *= 2.0;
                }
            }
            Ok(y)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_step_integrates_sine() {
        // dy/dx = cos x from 0 to pi/2: y = sin(pi/2) = 1
        let f = |x: f64, _: f64| x.cos();
        let y = integrate(
            &f,
            0.0,
            0.0,
            std::f64::consts::FRAC_PI_2,
            &OdeOptions::fixed(1e-3),
            |_, _| Ok(()),
        )
        .unwrap();
        assert!((y - 1.0).abs() < 1e-10);
    }

    #[test]
    fn fourth_order_convergence() {
        let f = |x: f64, y: f64| y * x.sin();
        let exact = |x: f64| (1.0 - x.cos()).exp();
        let run =
            |h: f64| integrate(&f, 0.0, 1.0, 2.0, &OdeOptions::fixed(h), |_, _| Ok(())).unwrap();
        let e1 = (run(1e-2) - exact(2.0)).abs();
        let e2 = (run(5e-3) - exact(2.0)).abs();
        let ratio = e1 / e2;
        assert!(ratio > 8.0 && ratio < 32.0, "ratio {ratio}");
    }

    #[test]
    fn adaptive_matches_fixed() {
        let f = |x: f64, y: f64| y * x.sin();
        let a = integrate(&f, 0.0, 1.0, 2.0, &OdeOptions::fixed(1e-4), |_, _| Ok(())).unwrap();
        let b = integrate(
            &f,
            0.0,
            1.0,
            2.0,
            &OdeOptions::adaptive(1e-12, 1e-2),
            |_, _| Ok(()),
        )
        .unwrap();
        assert!((a - b).abs() < 1e-9);
    }
}
