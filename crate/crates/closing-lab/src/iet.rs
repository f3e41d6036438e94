//! Interval exchange transformations (with flips) on the circle.
//!
//! An exchange of `m` intervals is described by their lengths (summing to 1),
//! the permutation rearranging them, and a per-interval flip flag reversing
//! orientation. The derivative has magnitude 1 away from the finitely many
//! breakpoints, which makes exchanges the exact-derivative model dynamics for
//! return maps of flows without contraction.

use crate::interval::Interval;
use crate::segment_map::{Branch, BranchKind, ReturnMap, Segment};
use crate::{Error, Result};

/// Tolerance for landing on a breakpoint.
pub const BREAKPOINT_TOL: f64 = 1e-12;

/// Outcome of one application of the exchange.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IetEval {
    Value(f64),
    Discontinuity,
}

/// Verdict of a finite-depth minimality scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KeaneOutcome {
    /// No breakpoint orbit hit another breakpoint within the scanned depth.
    /// Finite-depth evidence of minimality, not a proof.
    MinimalSoFar { depth: usize },
    /// A forward orbit of a one-sided breakpoint image reached a breakpoint.
    ConnectionFound { step: usize, breakpoint: f64 },
}

/// An interval exchange transformation of the unit circle.
#[derive(Debug, Clone)]
pub struct Iet {
    lengths: Vec<f64>,
    permutation: Vec<usize>,
    flips: Vec<bool>,
    /// Left endpoints of the domain intervals (cumulative lengths).
    breaks: Vec<f64>,
    /// Left endpoints of the image slots, indexed by domain interval.
    image_starts: Vec<f64>,
}

impl Iet {
    /// Builds an exchange from lengths (positive, summing to 1), a
    /// permutation of `{1, ..., m}` in one-line notation, and flip flags.
    pub fn new(lengths: Vec<f64>, permutation: Vec<usize>, flips: Vec<bool>) -> Result<Self> {
        let m = lengths.len();
        if m == 0 {
            return Err(Error::Parameter(
                "an exchange needs at least one interval".into(),
            ));
        }
        if permutation.len() != m || flips.len() != m {
            return Err(Error::Parameter(format!(
                "lengths/permutation/flips sizes disagree: {m}/{}/{}",
                permutation.len(),
                flips.len()
            )));
        }
        if lengths.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::Parameter("interval lengths must be positive".into()));
        }
        let sum: f64 = lengths.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Parameter(format!(
                "interval lengths must sum to 1, got {sum}"
            )));
        }
        let mut seen = vec![false; m];
        for &p in &permutation {
            if p == 0 || p > m || seen[p - 1] {
                return Err(Error::Parameter(format!(
                    "permutation {permutation:?} is not a bijection on 1..={m}"
                )));
            }
            seen[p - 1] = true;
        }
        // exact unit total for the internal breakpoints
        let lengths: Vec<f64> = lengths.iter().map(|l| l / sum).collect();
        let mut breaks = Vec::with_capacity(m);
        let mut acc = 0.0;
        for l in &lengths {
            breaks.push(acc);
            acc += l;
        }
        // image slot i starts after every interval placed before it
        let mut image_starts = vec![0.0; m];
        for i in 0..m {
            let mut start = 0.0;
            for j in 0..m {
                if permutation[j] < permutation[i] {
                    start += lengths[j];
                }
            }
            image_starts[i] = start;
        }
        Ok(Iet {
            lengths,
            permutation,
            flips,
            breaks,
            image_starts,
        })
    }

    /// Rotation by `alpha` as a two-interval exchange.
    pub fn rotation(alpha: f64) -> Result<Self> {
        if !(0.0 < alpha && alpha < 1.0) {
            return Err(Error::Parameter(format!(
                "rotation angle must lie in (0, 1), got {alpha}"
            )));
        }
        Iet::new(vec![1.0 - alpha, alpha], vec![2, 1], vec![false, false])
    }

    pub fn intervals(&self) -> usize {
        self.lengths.len()
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn flips(&self) -> &[bool] {
        &self.flips
    }

    /// Interior breakpoints (the left endpoints of intervals 2..m).
    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks[1..]
    }

    fn reduce(x: f64) -> f64 {
        let f = x - x.floor();
        if f >= 1.0 {
            f - 1.0
        } else {
            f
        }
    }

    fn interval_index(&self, x: f64) -> usize {
        match self.breaks.binary_search_by(|b| b.total_cmp(&x)) {
            Ok(i) => i,
            Err(i) => i - 1,
        }
    }

    fn image_unreduced(&self, i: usize, x: f64) -> f64 {
        let offset = x - self.breaks[i];
        if self.flips[i] {
            self.image_starts[i] + self.lengths[i] - offset
        } else {
            self.image_starts[i] + offset
        }
    }

    /// One application of the exchange on the circle.
    pub fn eval(&self, x: f64) -> IetEval {
        let x = Self::reduce(x);
        for &b in self.breakpoints() {
            if (x - b).abs() <= BREAKPOINT_TOL {
                return IetEval::Discontinuity;
            }
        }
        let i = self.interval_index(x);
        IetEval::Value(Self::reduce(self.image_unreduced(i, x)))
    }

    /// Forward orbit of length at most `n`, truncated at a discontinuity
    /// (the truncating step index is returned alongside).
    pub fn orbit(&self, x: f64, n: usize) -> (Vec<f64>, Option<usize>) {
        let mut points = Vec::with_capacity(n + 1);
        points.push(Self::reduce(x));
        let mut current = points[0];
        for step in 1..=n {
            match self.eval(current) {
                IetEval::Value(y) => {
                    points.push(y);
                    current = y;
                }
                IetEval::Discontinuity => return (points, Some(step)),
            }
        }
        (points, None)
    }

    /// One-sided images of the breakpoint at the left end of interval `i`.
    fn one_sided_images(&self, i: usize) -> [f64; 2] {
        let right = if self.flips[i] {
            self.image_starts[i] + self.lengths[i]
        } else {
            self.image_starts[i]
        };
        let j = i - 1;
        let left = if self.flips[j] {
            self.image_starts[j]
        } else {
            self.image_starts[j] + self.lengths[j]
        };
        [Self::reduce(left), Self::reduce(right)]
    }

    /// Scans the forward orbits of the one-sided breakpoint images for a hit
    /// on another breakpoint: the standard no-connection evidence for
    /// minimality, reported at finite depth.
    pub fn keane_check(&self, depth: usize) -> KeaneOutcome {
        for i in 1..self.intervals() {
            for seed in self.one_sided_images(i) {
                let mut current = seed;
                for step in 1..=depth {
                    for &b in self.breakpoints() {
                        if (current - b).abs() <= BREAKPOINT_TOL {
                            return KeaneOutcome::ConnectionFound {
                                step,
                                breakpoint: b,
                            };
                        }
                    }
                    match self.eval(current) {
                        IetEval::Value(y) => current = y,
                        IetEval::Discontinuity => {
                            return KeaneOutcome::ConnectionFound {
                                step,
                                breakpoint: current,
                            }
                        }
                    }
                }
            }
        }
        KeaneOutcome::MinimalSoFar { depth }
    }

    /// Unrolls the circle to the segment `[cut, cut + 1]` and embeds the
    /// exchange as a return map with slopes of magnitude 1. The marked point
    /// of the segment is the cut.
    pub fn as_return_map(&self, cut: f64) -> Result<ReturnMap> {
        if !(0.0..1.0).contains(&cut) {
            return Err(Error::Parameter(format!(
                "cut must lie in [0, 1), got {cut}"
            )));
        }
        let segment = Segment::new(cut, cut + 1.0, cut)?;
        let lift = |y: f64| {
            let y = Self::reduce(y);
            if y >= cut {
                y
            } else {
                y + 1.0
            }
        };
        let mut branches = Vec::new();
        for i in 0..self.intervals() {
            let (d_lo, d_hi) = (self.breaks[i], self.breaks[i] + self.lengths[i]);
            // split the domain at the cut (at most one interval contains it)
            let mut pieces = Vec::new();
            if cut > d_lo + BREAKPOINT_TOL && cut < d_hi - BREAKPOINT_TOL {
                pieces.push((d_lo, cut));
                pieces.push((cut, d_hi));
            } else {
                pieces.push((d_lo, d_hi));
            }
            for (p_lo, p_hi) in pieces {
                // split further where the unreduced image crosses the cut
                // level (either cut or cut + 1)
                let (y_lo, y_hi) = (self.image_unreduced(i, p_lo), self.image_unreduced(i, p_hi));
                let (y_min, y_max) = (y_lo.min(y_hi), y_lo.max(y_hi));
                let crossing = [cut, cut + 1.0]
                    .into_iter()
                    .find(|c| *c > y_min + BREAKPOINT_TOL && *c < y_max - BREAKPOINT_TOL);
                let mut sub = Vec::new();
                if let Some(c) = crossing {
                    let x_c = if self.flips[i] {
                        self.breaks[i] + self.image_starts[i] + self.lengths[i] - c
                    } else {
                        self.breaks[i] + c - self.image_starts[i]
                    };
                    sub.push((p_lo, x_c));
                    sub.push((x_c, p_hi));
                } else {
                    sub.push((p_lo, p_hi));
                }
                for (s_lo, s_hi) in sub {
                    if s_hi - s_lo <= BREAKPOINT_TOL {
                        continue;
                    }
                    let mid = 0.5 * (s_lo + s_hi);
                    let x_mid = lift(mid);
                    let y_mid = lift(self.image_unreduced(i, mid));
                    let (slope, offset) = if self.flips[i] {
                        (-1.0, y_mid + x_mid)
                    } else {
                        (1.0, y_mid - x_mid)
                    };
                    branches.push(Branch::new(
                        Interval::new(x_mid - (mid - s_lo), x_mid + (s_hi - mid)),
                        BranchKind::Affine { slope, offset },
                    ));
                }
            }
        }
        ReturnMap::new(segment, branches)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segment_map::MapEval;

    const GOLDEN: f64 = 0.618033988749894848;

    fn flip_iet() -> Iet {
        Iet::new(vec![0.5, 0.5], vec![2, 1], vec![true, false]).unwrap()
    }

    #[test]
    fn rotation_eval() {
        let e = Iet::rotation(GOLDEN).unwrap();
        match e.eval(0.5) {
            IetEval::Value(y) => assert!((y - 0.1180339887).abs() < 1e-9),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn flip_eval_and_breakpoint() {
        let e = flip_iet();
        assert_eq!(e.eval(0.25), IetEval::Value(0.75));
        assert_eq!(e.eval(0.5), IetEval::Discontinuity);
    }

    #[test]
    fn rotation_orbit_of_zero() {
        let e = Iet::rotation(GOLDEN).unwrap();
        let (orbit, hit) = e.orbit(0.0, 5);
        assert!(hit.is_none());
        let expected = [0.0, 0.618034, 0.236068, 0.854102, 0.472136, 0.090170];
        for (a, b) in orbit.iter().zip(expected) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn orbit_zero_steps() {
        let e = flip_iet();
        let (orbit, hit) = e.orbit(0.25, 0);
        assert_eq!(orbit, vec![0.25]);
        assert!(hit.is_none());
    }

    #[test]
    fn flip_orbit_has_period_two() {
        let e = flip_iet();
        let (orbit, hit) = e.orbit(0.25, 2);
        assert!(hit.is_none());
        assert_eq!(orbit, vec![0.25, 0.75, 0.25]);
    }

    #[test]
    fn keane_scan_golden_rotation() {
        let e = Iet::rotation(GOLDEN).unwrap();
        assert_eq!(
            e.keane_check(10_000),
            KeaneOutcome::MinimalSoFar { depth: 10_000 }
        );
    }

    #[test]
    fn keane_scan_rational_rotation() {
        let e = Iet::rotation(1.0 / 3.0).unwrap();
        match e.keane_check(10) {
            KeaneOutcome::ConnectionFound { step, .. } => assert!(step <= 3),
            other => panic!("expected a connection, got {other:?}"),
        }
    }

    #[test]
    fn keane_scan_flip() {
        let e = flip_iet();
        assert!(matches!(
            e.keane_check(10),
            KeaneOutcome::ConnectionFound { .. }
        ));
    }

    #[test]
    fn embeds_golden_rotation_as_return_map() {
        let e = Iet::rotation(GOLDEN).unwrap();
        let p = e.as_return_map(0.0).unwrap();
        assert_eq!(p.branches().len(), 2);
        for b in p.branches() {
            assert_eq!(b.orientation(), 1.0);
            assert!((b.deriv(b.domain.midpoint()).abs() - 1.0).abs() < 1e-15);
        }
        assert_eq!(p.segment().marked(), 0.0);
    }

    #[test]
    fn embeds_flip_iet() {
        let e = flip_iet();
        let p = e.as_return_map(0.0).unwrap();
        assert_eq!(p.branches().len(), 2);
        let orientations: Vec<f64> = p.branches().iter().map(Branch::orientation).collect();
        assert_eq!(orientations, vec![-1.0, 1.0]);
    }

    #[test]
    fn embeds_identity_exchange() {
        let e = Iet::new(vec![1.0], vec![1], vec![false]).unwrap();
        let p = e.as_return_map(0.0).unwrap();
        assert_eq!(p.branches().len(), 1);
        assert_eq!(p.eval(0.3).unwrap(), MapEval::Value(0.3));
    }

    #[test]
    fn embedding_matches_circle_dynamics_for_nonzero_cut() {
        let e = Iet::rotation(GOLDEN).unwrap();
        let cut = 0.3;
        let p = e.as_return_map(cut).unwrap();
        for i in 0..500 {
            let x = i as f64 / 500.0;
            let unrolled = if x >= cut { x } else { x + 1.0 };
            match (e.eval(x), p.eval(unrolled).unwrap()) {
                (IetEval::Value(y), MapEval::Value(z)) => {
                    let y_lift = if y >= cut { y } else { y + 1.0 };
                    assert!((y_lift - z).abs() < 1e-12, "x = {x}: {y_lift} vs {z}");
                }
                (IetEval::Discontinuity, _) => {}
                // breakpoints of the unrolled map sit at preimages of the cut
                (_, MapEval::SaddleHit) | (_, MapEval::LeftDomain) => {}
            }
        }
    }

    #[test]
    fn injectivity_on_minimal_orbit() {
        let e = Iet::rotation(GOLDEN).unwrap();
        let (orbit, _) = e.orbit(0.1, 10_000);
        let mut sorted = orbit;
        sorted.sort_by(f64::total_cmp);
        for w in sorted.windows(2) {
            assert!(w[1] - w[0] > 1e-12);
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(Iet::new(vec![0.5, 0.4], vec![2, 1], vec![false, false]).is_err());
        assert!(Iet::new(vec![0.5, 0.5], vec![1, 1], vec![false, false]).is_err());
        assert!(Iet::new(vec![0.5, 0.5], vec![2, 1], vec![false]).is_err());
    }
}
