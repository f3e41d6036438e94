//! Piecewise-smooth return maps on a transversal segment.
//!
//! A [`ReturnMap`] is a finite ordered collection of smooth strictly monotone
//! branches on pairwise disjoint open subintervals of a [`Segment`]. Points
//! outside the branch domains are classified: a branch endpoint in the
//! interior of the segment is a saddle hit (the orbit runs into a
//! saddle-point of the flow), anything else is a gap.

use crate::interval::{normalize_family, Interval};
use crate::{Error, Result};

/// Absolute tolerance for detecting a landing on a branch endpoint.
pub const SADDLE_TOL: f64 = 1e-12;

/// Default depth limit of the contraction-certificate search.
pub const DEFAULT_CERT_DEPTH: usize = 64;

/// Default grid spacing for derivative-sup estimates.
pub const DEFAULT_SUP_RESOLUTION: f64 = 1e-4;

const MIN_CELL: f64 = 1e-13;

/// The transversal segment, identified with a real interval by arclength.
/// `marked` is the designated point through which closing is attempted.
#[derive(Debug, Clone, Copy)]
pub struct Segment {
    lo: f64,
    hi: f64,
    marked: f64,
}

impl Segment {
    pub fn new(lo: f64, hi: f64, marked: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Parameter(format!(
                "segment bounds must satisfy lo < hi, got [{lo}, {hi}]"
            )));
        }
        if !(lo..=hi).contains(&marked) {
            return Err(Error::Parameter(format!(
                "marked point {marked} outside segment [{lo}, {hi}]"
            )));
        }
        Ok(Segment { lo, hi, marked })
    }

    /// Segment with the marked point at the origin.
    pub fn centered(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, 0.0)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn marked(&self) -> f64 {
        self.marked
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.lo..=self.hi).contains(&x)
    }

    pub fn interior(&self) -> Interval {
        Interval::new(self.lo, self.hi)
    }

    /// Distance from the marked point to the nearer segment endpoint.
    pub fn symmetric_radius(&self) -> f64 {
        (self.marked - self.lo).min(self.hi - self.marked)
    }
}

/// Analytic form of a branch map, with exact derivatives and inverses.
///
/// `Power` is the odd-symmetric power `offset + scale * sgn(u) * |u|^rho`
/// with `u = x - center` and `rho >= 1`; it covers parabolic saddles and
/// degenerate tangencies on either side of the center.
#[derive(Debug, Clone)]
pub enum BranchKind {
    Affine {
        slope: f64,
        offset: f64,
    },
    Power {
        offset: f64,
        scale: f64,
        center: f64,
        exponent: f64,
    },
    Composite(Vec<BranchKind>),
}

impl BranchKind {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            BranchKind::Affine { slope, offset } => slope * x + offset,
            BranchKind::Power {
                offset,
                scale,
                center,
                exponent,
            } => {
                let u = x - center;
                offset + scale * u.signum() * u.abs().powf(*exponent)
            }
            BranchKind::Composite(chain) => chain.iter().fold(x, |v, k| k.eval(v)),
        }
    }

    /// Signed derivative.
    pub fn deriv(&self, x: f64) -> f64 {
        match self {
            BranchKind::Affine { slope, .. } => *slope,
            BranchKind::Power {
                scale,
                center,
                exponent,
                ..
            } => {
                let u = (x - center).abs();
                scale * exponent * u.powf(exponent - 1.0)
            }
            BranchKind::Composite(chain) => {
                let mut v = x;
                let mut d = 1.0;
                for k in chain {
                    d *= k.deriv(v);
                    v = k.eval(v);
                }
                d
            }
        }
    }

    /// Exact inverse; branch maps are strictly monotone so this is total on
    /// the image.
    pub fn invert(&self, y: f64) -> f64 {
        match self {
            BranchKind::Affine { slope, offset } => (y - offset) / slope,
            BranchKind::Power {
                offset,
                scale,
                center,
                exponent,
            } => {
                let t = (y - offset) / scale;
                center + t.signum() * t.abs().powf(1.0 / exponent)
            }
            BranchKind::Composite(chain) => chain.iter().rev().fold(y, |v, k| k.invert(v)),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            BranchKind::Affine { slope, .. } => {
                if *slope == 0.0 || !slope.is_finite() {
                    return Err(Error::Parameter("affine slope must be nonzero".into()));
                }
            }
            BranchKind::Power {
                scale, exponent, ..
            } => {
                if *scale == 0.0 || !scale.is_finite() {
                    return Err(Error::Parameter("power scale must be nonzero".into()));
                }
                if !(*exponent >= 1.0) {
                    return Err(Error::Parameter(format!(
                        "power exponent must be >= 1, got {exponent}"
                    )));
                }
            }
            BranchKind::Composite(chain) => {
                if chain.is_empty() {
                    return Err(Error::Parameter("composite branch with no pieces".into()));
                }
                for k in chain {
                    k.validate()?;
                }
            }
        }
        Ok(())
    }
}

/// A branch of the return map: a smooth strictly monotone map on an open
/// subinterval, with image inside the segment.
#[derive(Debug, Clone)]
pub struct Branch {
    pub domain: Interval,
    pub kind: BranchKind,
}

impl Branch {
    pub fn new(domain: Interval, kind: BranchKind) -> Self {
        Branch { domain, kind }
    }

    pub fn affine(lo: f64, hi: f64, slope: f64, offset: f64) -> Self {
        Branch::new(Interval::new(lo, hi), BranchKind::Affine { slope, offset })
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.kind.eval(x)
    }

    pub fn deriv(&self, x: f64) -> f64 {
        self.kind.deriv(x)
    }

    /// Sign of the derivative on the branch.
    pub fn orientation(&self) -> f64 {
        self.deriv(self.domain.midpoint()).signum()
    }

    /// Open image interval (one-sided limits at the domain endpoints).
    pub fn image(&self) -> Interval {
        let a = self.eval(self.domain.lo);
        let b = self.eval(self.domain.hi);
        Interval::new(a.min(b), a.max(b))
    }

    /// Pulls an interval back through the branch: the open set of `x` in the
    /// branch domain with `f(x)` in `target`.
    pub fn pullback(&self, target: &Interval) -> Option<Interval> {
        let overlap = self.image().intersect(target)?;
        let a = self.kind.invert(overlap.lo);
        let b = self.kind.invert(overlap.hi);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let clipped = Interval::new(lo.max(self.domain.lo), hi.min(self.domain.hi));
        if clipped.len() > MIN_CELL {
            Some(clipped)
        } else {
            None
        }
    }
}

/// Outcome of a single application of the map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MapEval {
    Value(f64),
    /// The point is a branch-domain endpoint interior to the segment: the
    /// trajectory runs straight into a saddle.
    SaddleHit,
    /// The point lies in a gap between branch domains (or on the segment
    /// boundary).
    LeftDomain,
}

/// Why an orbit stopped before the requested number of steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopReason {
    Completed,
    SaddleHit { step: usize },
    LeftDomain { step: usize },
}

impl StopReason {
    pub fn is_completed(&self) -> bool {
        matches!(self, StopReason::Completed)
    }
}

/// A finite forward orbit. `points[0]` is the start; `stop` explains any
/// truncation.
#[derive(Debug, Clone)]
pub struct Orbit {
    pub points: Vec<f64>,
    pub stop: StopReason,
}

impl Orbit {
    pub fn last(&self) -> f64 {
        *self.points.last().expect("orbit contains its start")
    }

    /// Number of successful applications of the map.
    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }
}

/// Certifies that the n-th iterate contracts: the measured sup of
/// `|DP^n|` over the iterated domain is below `kappa`, which itself lies
/// below the requested target. The grid resolution is recorded so the
/// measurement can be re-checked at a finer scale.
#[derive(Debug, Clone, Copy)]
pub struct ContractionCertificate {
    pub n: usize,
    pub kappa: f64,
    pub sup_witness: f64,
    pub grid_resolution: f64,
}

/// Result of the contraction-certificate search.
#[derive(Debug, Clone, Copy)]
pub enum CertificateOutcome {
    Certified(ContractionCertificate),
    /// No iterate up to the depth limit contracted below the target; the
    /// best (smallest) sup seen is reported.
    Failed {
        best_n: usize,
        best_sup: f64,
    },
}

impl CertificateOutcome {
    pub fn certificate(&self) -> Option<&ContractionCertificate> {
        match self {
            CertificateOutcome::Certified(c) => Some(c),
            CertificateOutcome::Failed { .. } => None,
        }
    }
}

/// Derivative-sup estimate together with the grid spacing that produced it.
#[derive(Debug, Clone, Copy)]
pub struct SupEstimate {
    pub sup: f64,
    pub resolution: f64,
}

/// Outcome of propagating a certificate to deeper first-return maps: after
/// `return_depth = d * n` iterations, any induced first-return map is an
/// infinitesimal `K`-contraction.
#[derive(Debug, Clone, Copy)]
pub struct Propagation {
    pub l0: f64,
    pub d: usize,
    pub return_depth: usize,
}

/// A first-return map induced on a subsegment, with per-branch constant
/// return times. Cells of the subsegment that do not return within the
/// search depth (or fall out of the domain first) are reported in
/// `excluded`.
#[derive(Debug)]
pub struct InducedReturn {
    pub map: ReturnMap,
    pub return_times: Vec<usize>,
    pub excluded: Vec<Interval>,
}

/// The forward Poincaré return map on a segment.
#[derive(Debug, Clone)]
pub struct ReturnMap {
    segment: Segment,
    branches: Vec<Branch>,
    /// Branch-domain endpoints interior to the segment, sorted.
    saddles: Vec<f64>,
}

impl ReturnMap {
    /// Validates and builds a return map. Branch domains must be pairwise
    /// disjoint subintervals of the segment, branch maps strictly monotone
    /// with images inside the segment.
    pub fn new(segment: Segment, mut branches: Vec<Branch>) -> Result<Self> {
        branches.sort_by(|a, b| a.domain.lo.total_cmp(&b.domain.lo));
        let tol = 1e-9 * segment.len().max(1.0);
        for branch in &branches {
            branch.kind.validate()?;
            let d = &branch.domain;
            if d.is_empty() {
                return Err(Error::Parameter(format!(
                    "degenerate branch domain ({}, {})",
                    d.lo, d.hi
                )));
            }
            if d.lo < segment.lo - tol || d.hi > segment.hi + tol {
                return Err(Error::Parameter(format!(
                    "branch domain ({}, {}) not contained in segment [{}, {}]",
                    d.lo, d.hi, segment.lo, segment.hi
                )));
            }
            let img = branch.image();
            if img.lo < segment.lo - tol || img.hi > segment.hi + tol {
                return Err(Error::Parameter(format!(
                    "branch image ({}, {}) leaves segment [{}, {}]",
                    img.lo, img.hi, segment.lo, segment.hi
                )));
            }
            // strict monotonicity, sampled
            let m = 33;
            let mut sign = 0.0;
            for i in 0..=m {
                let x = d.lo + d.len() * (i as f64 + 0.5) / (m as f64 + 1.0);
                let s = branch.deriv(x).signum();
                if s != 0.0 {
                    if sign == 0.0 {
                        sign = s;
                    } else if s != sign {
                        return Err(Error::Parameter(format!(
                            "branch on ({}, {}) is not monotone",
                            d.lo, d.hi
                        )));
                    }
                }
            }
        }
        for pair in branches.windows(2) {
            if pair[1].domain.lo < pair[0].domain.hi - SADDLE_TOL {
                return Err(Error::Parameter(format!(
                    "branch domains ({}, {}) and ({}, {}) overlap",
                    pair[0].domain.lo, pair[0].domain.hi, pair[1].domain.lo, pair[1].domain.hi
                )));
            }
        }
        let mut saddles = Vec::new();
        for b in &branches {
            for e in [b.domain.lo, b.domain.hi] {
                if (e - segment.lo).abs() > SADDLE_TOL && (e - segment.hi).abs() > SADDLE_TOL {
                    saddles.push(e);
                }
            }
        }
        saddles.sort_by(f64::total_cmp);
        saddles.dedup_by(|a, b| (*a - *b).abs() <= SADDLE_TOL);
        Ok(ReturnMap {
            segment,
            branches,
            saddles,
        })
    }

    pub fn segment(&self) -> &Segment {
        &self.segment
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    /// Index of the branch whose open domain strictly contains `x`.
    pub fn branch_at(&self, x: f64) -> Option<usize> {
        // branches are sorted by left endpoint
        let i = self
            .branches
            .partition_point(|b| b.domain.lo < x)
            .checked_sub(1)?;
        self.branches[i].domain.contains(x).then_some(i)
    }

    /// Like [`branch_at`](Self::branch_at), but at the segment endpoints a
    /// branch abutting the endpoint answers with its one-sided extension:
    /// the map may be defined at the segment boundary even though the open
    /// branch intervals exclude it.
    fn branch_at_extended(&self, x: f64) -> Option<usize> {
        if let Some(i) = self.branch_at(x) {
            return Some(i);
        }
        if (x - self.segment.lo).abs() <= SADDLE_TOL {
            return self
                .branches
                .iter()
                .position(|b| (b.domain.lo - self.segment.lo).abs() <= SADDLE_TOL);
        }
        if (x - self.segment.hi).abs() <= SADDLE_TOL {
            return self
                .branches
                .iter()
                .position(|b| (b.domain.hi - self.segment.hi).abs() <= SADDLE_TOL);
        }
        None
    }

    /// Branch-domain endpoints interior to the segment (the saddle set).
    pub fn interior_endpoints(&self) -> &[f64] {
        &self.saddles
    }

    /// One application of the map. `x` must lie in the segment.
    pub fn eval(&self, x: f64) -> Result<MapEval> {
        if !self.segment.contains(x) {
            return Err(Error::OutsideSegment {
                x,
                lo: self.segment.lo,
                hi: self.segment.hi,
            });
        }
        for &e in &self.saddles {
            if (x - e).abs() <= SADDLE_TOL {
                return Ok(MapEval::SaddleHit);
            }
        }
        match self.branch_at_extended(x) {
            Some(i) => Ok(MapEval::Value(self.branches[i].eval(x))),
            None => Ok(MapEval::LeftDomain),
        }
    }

    /// Signed derivative at a point of the domain.
    pub fn deriv(&self, x: f64) -> Result<f64> {
        match self.branch_at_extended(x) {
            Some(i) => Ok(self.branches[i].deriv(x)),
            None => Err(Error::OutsideDomain { x }),
        }
    }

    /// Forward orbit of length at most `n`, truncated with a reason.
    pub fn iterate(&self, x: f64, n: usize) -> Result<Orbit> {
        let mut points = Vec::with_capacity(n + 1);
        points.push(x);
        let mut current = x;
        for step in 1..=n {
            match self.eval(current)? {
                MapEval::Value(y) => {
                    points.push(y);
                    current = y;
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

    /// The open intervals making up `dom(P^n)` minus the backward orbit of
    /// the segment boundary, computed by pulling branch domains back.
    pub fn domain_depth(&self, n: usize) -> Result<Vec<Interval>> {
        if n == 0 {
            return Err(Error::Parameter("domain depth requires n >= 1".into()));
        }
        let mut family: Vec<Interval> = self.branches.iter().map(|b| b.domain).collect();
        for _ in 1..n {
            family = self.pull_family(&family);
            if family.is_empty() {
                break;
            }
        }
        Ok(family)
    }

    fn pull_family(&self, family: &[Interval]) -> Vec<Interval> {
        let mut next = Vec::new();
        for branch in &self.branches {
            for j in family {
                if let Some(pre) = branch.pullback(j) {
                    next.push(pre);
                }
            }
        }
        normalize_family(next)
    }

    /// `|DP^n(x)|` by the chain rule along the orbit; `None` when the orbit
    /// leaves the domain before `n` applications.
    pub fn abs_deriv_n(&self, x: f64, n: usize) -> Option<f64> {
        let mut current = x;
        let mut prod = 1.0;
        for _ in 0..n {
            let i = self.branch_at(current)?;
            prod *= self.branches[i].deriv(current).abs();
            current = self.branches[i].eval(current);
        }
        Some(prod)
    }

    /// Upper estimate of `sup |DP^n|` over `dom(P^n)`, from a grid with
    /// one-sided endpoint probes and a local maximization polish.
    pub fn sup_abs_deriv(&self, n: usize, resolution: f64) -> Result<SupEstimate> {
        if n == 0 {
            return Err(Error::Parameter("sup|DP^n| requires n >= 1".into()));
        }
        if !(resolution > 0.0) {
            return Err(Error::Parameter("grid resolution must be positive".into()));
        }
        let family = self.domain_depth(n)?;
        if family.is_empty() {
            return Err(Error::DomainExhausted { depth: n });
        }
        let total: f64 = family.iter().map(Interval::len).sum();
        // keep the total sample count bounded; report the spacing in use
        let effective = resolution.max(total / 200_000.0);
        let mut best = f64::NEG_INFINITY;
        let mut best_x = family[0].midpoint();
        for j in &family {
            let inset = (j.len() * 1e-9).max(1e-15);
            let count = ((j.len() / effective).ceil() as usize).clamp(1, 200_000);
            for i in 0..=count {
                let mut x = j.lo + j.len() * i as f64 / count as f64;
                if i == 0 {
                    x = j.lo + inset;
                } else if i == count {
                    x = j.hi - inset;
                }
                if let Some(v) = self.abs_deriv_n(x, n) {
                    if v > best {
                        best = v;
                        best_x = x;
                    }
                }
            }
        }
        // local polish around the grid maximum
        let radius = effective;
        let (mut a, mut b) = (best_x - radius, best_x + radius);
        for _ in 0..60 {
            let m1 = a + (b - a) / 3.0;
            let m2 = b - (b - a) / 3.0;
            let v1 = self.abs_deriv_n(m1, n).unwrap_or(f64::NEG_INFINITY);
            let v2 = self.abs_deriv_n(m2, n).unwrap_or(f64::NEG_INFINITY);
            if v1 < v2 {
                a = m1;
            } else {
                b = m2;
            }
            best = best.max(v1.max(v2));
        }
        Ok(SupEstimate {
            sup: best,
            resolution: effective,
        })
    }

    /// Searches for the smallest `n <= depth_limit` whose iterate contracts
    /// below `kappa_target` on the measurement grid.
    pub fn contraction_certificate(
        &self,
        kappa_target: f64,
        depth_limit: usize,
        resolution: f64,
    ) -> Result<CertificateOutcome> {
        if !(0.0 < kappa_target && kappa_target < 1.0) {
            return Err(Error::Parameter(format!(
                "contraction target must lie in (0, 1), got {kappa_target}"
            )));
        }
        let mut best_n = 0;
        let mut best_sup = f64::INFINITY;
        for n in 1..=depth_limit {
            let est = self.sup_abs_deriv(n, resolution)?;
            if est.sup < kappa_target {
                let kappa = (est.sup * (1.0 + 1e-9)).max(f64::MIN_POSITIVE);
                return Ok(CertificateOutcome::Certified(ContractionCertificate {
                    n,
                    kappa,
                    sup_witness: est.sup,
                    grid_resolution: est.resolution,
                }));
            }
            if est.sup < best_sup {
                best_sup = est.sup;
                best_n = n;
            }
        }
        Ok(CertificateOutcome::Failed { best_n, best_sup })
    }

    /// First-return map to a subsegment, by exact interval subdivision.
    ///
    /// Every maximal open cell of the subsegment over which the return time
    /// and the branch itinerary are constant becomes one induced branch (a
    /// composite of the visited branch maps). Cells that leave the domain or
    /// do not come back within `depth` steps are excluded and reported.
    pub fn induced_first_return(&self, sub: Segment, depth: usize) -> Result<InducedReturn> {
        if sub.lo < self.segment.lo - SADDLE_TOL || sub.hi > self.segment.hi + SADDLE_TOL {
            return Err(Error::Parameter(format!(
                "subsegment [{}, {}] not contained in [{}, {}]",
                sub.lo, sub.hi, self.segment.lo, self.segment.hi
            )));
        }
        struct Cell {
            dom: Interval,
            img: Interval,
            chain: Vec<BranchKind>,
            steps: usize,
        }
        let target = sub.interior();
        let mut frontier = vec![Cell {
            dom: target,
            img: target,
            chain: Vec::new(),
            steps: 0,
        }];
        let mut finished: Vec<(Interval, Vec<BranchKind>, usize)> = Vec::new();
        let mut excluded: Vec<Interval> = Vec::new();

        // pulls a subinterval of `img` back to the cell's domain
        let pull = |chain: &[BranchKind], dom: &Interval, piece: &Interval| -> Option<Interval> {
            let a = chain.iter().rev().fold(piece.lo, |v, k| k.invert(v));
            let b = chain.iter().rev().fold(piece.hi, |v, k| k.invert(v));
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let clipped = Interval::new(lo.max(dom.lo), hi.min(dom.hi));
            (clipped.len() > MIN_CELL).then_some(clipped)
        };

        while let Some(cell) = frontier.pop() {
            if cell.dom.len() <= MIN_CELL {
                continue;
            }
            if cell.img.len() <= MIN_CELL {
                // the image collapsed below resolution without returning
                excluded.push(cell.dom);
                continue;
            }
            if cell.steps >= 1 {
                if let Some(inside) = cell.img.intersect(&target) {
                    // the part of the cell that lands in the subsegment
                    // returns now; the rest keeps going
                    if let Some(dom_in) = pull(&cell.chain, &cell.dom, &inside) {
                        finished.push((dom_in, cell.chain.clone(), cell.steps));
                    }
                    for outside in [
                        Interval::new(cell.img.lo, inside.lo),
                        Interval::new(inside.hi, cell.img.hi),
                    ] {
                        if outside.len() > MIN_CELL {
                            if let Some(dom_out) = pull(&cell.chain, &cell.dom, &outside) {
                                frontier.push(Cell {
                                    dom: dom_out,
                                    img: outside,
                                    chain: cell.chain.clone(),
                                    steps: cell.steps,
                                });
                            }
                        }
                    }
                    continue;
                }
            }
            if cell.steps >= depth {
                excluded.push(cell.dom);
                continue;
            }
            let mut covered = 0.0;
            for branch in &self.branches {
                if let Some(overlap) = cell.img.intersect(&branch.domain) {
                    covered += overlap.len();
                    if let Some(dom_piece) = pull(&cell.chain, &cell.dom, &overlap) {
                        let lo = branch.eval(overlap.lo);
                        let hi = branch.eval(overlap.hi);
                        let mut chain = cell.chain.clone();
                        chain.push(branch.kind.clone());
                        frontier.push(Cell {
                            dom: dom_piece,
                            img: Interval::new(lo.min(hi), lo.max(hi)),
                            chain,
                            steps: cell.steps + 1,
                        });
                    }
                }
            }
            if cell.img.len() - covered > MIN_CELL {
                // gap portions never return
                for gap in self.gaps_within(&cell.img) {
                    if let Some(dom_gap) = pull(&cell.chain, &cell.dom, &gap) {
                        excluded.push(dom_gap);
                    }
                }
            }
        }

        finished.sort_by(|a, b| a.0.lo.total_cmp(&b.0.lo));
        // merge touching cells that continue the same analytic branch
        let mut merged: Vec<(Interval, Vec<BranchKind>, usize)> = Vec::new();
        for (dom, chain, steps) in finished {
            if let Some(last) = merged.last_mut() {
                let touching = (dom.lo - last.0.hi).abs() <= 1e-11;
                if touching && last.2 == steps {
                    let left = BranchKind::Composite(last.1.clone());
                    let right = BranchKind::Composite(chain.clone());
                    // the left chain must continue the right one analytically:
                    // agree at the junction, in derivative, and across the
                    // absorbed cell
                    let x = dom.lo;
                    let m = dom.midpoint();
                    let val_ok = (left.eval(x) - right.eval(x)).abs() <= 1e-10
                        && (left.eval(m) - right.eval(m)).abs() <= 1e-10
                        && (left.eval(dom.hi) - right.eval(dom.hi)).abs() <= 1e-10;
                    let der_ok = (left.deriv(x) - right.deriv(x)).abs()
                        <= 1e-9 * left.deriv(x).abs().max(1.0);
                    if val_ok && der_ok {
                        last.0.hi = dom.hi;
                        continue;
                    }
                }
            }
            merged.push((dom, chain, steps));
        }

        let mut branches = Vec::with_capacity(merged.len());
        let mut return_times = Vec::with_capacity(merged.len());
        for (dom, mut chain, steps) in merged {
            let kind = if chain.len() == 1 {
                chain.pop().expect("non-empty chain")
            } else {
                BranchKind::Composite(chain)
            };
            branches.push(Branch::new(dom, kind));
            return_times.push(steps);
        }
        let map = ReturnMap::new(sub, branches)?;
        Ok(InducedReturn {
            map,
            return_times,
            excluded: normalize_family(excluded),
        })
    }

    /// Portions of `window` not covered by any branch domain.
    fn gaps_within(&self, window: &Interval) -> Vec<Interval> {
        let mut gaps = Vec::new();
        let mut cursor = window.lo;
        for b in &self.branches {
            if b.domain.hi <= window.lo || b.domain.lo >= window.hi {
                continue;
            }
            if b.domain.lo > cursor {
                gaps.push(Interval::new(cursor, b.domain.lo.min(window.hi)));
            }
            cursor = cursor.max(b.domain.hi);
        }
        if cursor < window.hi {
            gaps.push(Interval::new(cursor, window.hi));
        }
        gaps.into_iter().filter(|g| g.len() > MIN_CELL).collect()
    }
}

/// Smallest `d >= 1` with `max(1, L^(n-1)) * kappa^d < K`, together with the
/// iteration depth `d * n` beyond which any induced first-return map is an
/// infinitesimal `K`-contraction.
pub fn propagate_contraction(
    cert: &ContractionCertificate,
    l_bound: f64,
    k_target: f64,
) -> Result<Propagation> {
    if !(0.0 < k_target && k_target < 1.0) {
        return Err(Error::Parameter(format!(
            "propagation target must lie in (0, 1), got {k_target}"
        )));
    }
    if !(l_bound > 0.0) {
        return Err(Error::Parameter(
            "derivative bound L must be positive".into(),
        ));
    }
    let l0 = 1.0f64.max(l_bound.powi(cert.n as i32 - 1));
    let mut d = 1usize;
    while l0 * cert.kappa.powi(d as i32) >= k_target {
        d += 1;
        if d > 100_000 {
            return Err(Error::Search(
                "contraction propagation did not reach the target".into(),
            ));
        }
    }
    Ok(Propagation {
        l0,
        d,
        return_depth: d * cert.n,
    })
}
