//! Open intervals of the real line.

/// An open interval `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn len(&self) -> f64 {
        (self.hi - self.lo).max(0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    /// Strict interior membership.
    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        if hi > lo {
            Some(Interval::new(lo, hi))
        } else {
            None
        }
    }

    /// True when `other` is contained in `self` up to `tol` at each endpoint.
    pub fn contains_interval(&self, other: &Interval, tol: f64) -> bool {
        other.lo >= self.lo - tol && other.hi <= self.hi + tol
    }
}

/// Sorts a family of intervals by left endpoint and drops degenerate ones.
pub fn normalize_family(mut family: Vec<Interval>) -> Vec<Interval> {
    family.retain(|j| j.len() > 1e-15);
    family.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    family
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intersection() {
        let a = Interval::new(0.0, 1.0);
        let b = Interval::new(0.5, 2.0);
        assert_eq!(a.intersect(&b), Some(Interval::new(0.5, 1.0)));
        assert_eq!(a.intersect(&Interval::new(1.0, 2.0)), None);
    }

    #[test]
    fn containment_is_strict() {
        let a = Interval::new(0.0, 1.0);
        assert!(a.contains(0.5));
        assert!(!a.contains(0.0));
        assert!(!a.contains(1.0));
    }
}
