//! Transverse-measure machinery: empirical measures along orbits, their
//! invariance defects, Birkhoff averages, Lyapunov estimates, integrals of
//! `log |DP|`, continuous majorants, and uniform Birkhoff bounds.

use crate::interval::Interval;
use crate::segment_map::{ReturnMap, Segment};
use crate::{Error, Result};

/// Default number of bins for empirical measures.
pub const DEFAULT_BINS: usize = 256;

/// Per-bin floor for the average of `log |DP|` before the integral is
/// declared divergent.
pub const LOG_FLOOR: f64 = -1e3;

/// Where an empirical measure came from.
#[derive(Debug, Clone)]
pub enum MeasureSource {
    /// Dirac average over a forward orbit.
    Orbit { start: f64, requested: usize },
    /// Length-proportional mass (Lebesgue on the segment).
    Uniform,
}

/// A Borel probability measure on the segment, aggregated over uniform bins.
/// Orbit-backed measures keep their orbit points so that interval masses can
/// be evaluated exactly, without binning error.
#[derive(Debug, Clone)]
pub struct EmpiricalMeasure {
    lo: f64,
    hi: f64,
    masses: Vec<f64>,
    source: MeasureSource,
    points: Option<Vec<f64>>,
    realized: usize,
    truncated: bool,
}

impl EmpiricalMeasure {
    /// Lebesgue measure on the segment, analytically binned.
    pub fn uniform(segment: &Segment, bins: usize) -> Self {
        EmpiricalMeasure {
            lo: segment.lo(),
            hi: segment.hi(),
            masses: vec![1.0 / bins as f64; bins],
            source: MeasureSource::Uniform,
            points: None,
            realized: 0,
            truncated: false,
        }
    }

    pub fn bins(&self) -> usize {
        self.masses.len()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Lower edge of bin `i`.
    pub fn bin_edge(&self, i: usize) -> f64 {
        self.lo + (self.hi - self.lo) * i as f64 / self.masses.len() as f64
    }

    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.masses.len() as f64
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn source(&self) -> &MeasureSource {
        &self.source
    }

    /// Number of orbit points actually used (0 for analytic measures).
    pub fn realized_len(&self) -> usize {
        self.realized
    }

    /// True when the orbit stopped before the requested length.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn max_bin_mass(&self) -> f64 {
        self.masses.iter().copied().fold(0.0, f64::max)
    }

    /// Exact measure of an interval: point counting for orbit measures,
    /// proportional length for the uniform measure.
    pub fn interval_mass(&self, j: &Interval) -> f64 {
        match (&self.source, &self.points) {
            (MeasureSource::Orbit { .. }, Some(points)) => {
                let count = points.iter().filter(|&&x| j.contains(x)).count();
                count as f64 / points.len() as f64
            }
            _ => {
                let clipped = Interval::new(j.lo.max(self.lo), j.hi.min(self.hi));
                clipped.len() / (self.hi - self.lo)
            }
        }
    }

    /// Exact mass of the preimage of `j` under the map, computed branchwise.
    pub fn pullback_mass(&self, map: &ReturnMap, j: &Interval) -> f64 {
        let preimages: Vec<Interval> = map
            .branches()
            .iter()
            .filter_map(|b| b.pullback(j))
            .collect();
        match (&self.source, &self.points) {
            (MeasureSource::Orbit { .. }, Some(points)) => {
                let count = points
                    .iter()
                    .filter(|&&x| preimages.iter().any(|p| p.contains(x)))
                    .count();
                count as f64 / points.len() as f64
            }
            _ => {
                preimages
                    .iter()
                    .map(|p| Interval::new(p.lo.max(self.lo), p.hi.min(self.hi)).len())
                    .sum::<f64>()
                    / (self.hi - self.lo)
            }
        }
    }
}

/// Dirac average over the forward orbit of `x`, aggregated into `bins`
/// uniform bins. A shorter-than-requested orbit yields a measure over the
/// realized length, flagged as truncated.
pub fn empirical_measure(
    map: &ReturnMap,
    x: f64,
    n: usize,
    bins: usize,
) -> Result<EmpiricalMeasure> {
    if n == 0 || bins == 0 {
        return Err(Error::Parameter(
            "empirical measure needs n >= 1 and bins >= 1".into(),
        ));
    }
    let orbit = map.iterate(x, n - 1)?;
    let seg = map.segment();
    let (lo, hi) = (seg.lo(), seg.hi());
    let mut masses = vec![0.0; bins];
    let scale = bins as f64 / (hi - lo);
    for &p in &orbit.points {
        let idx = (((p - lo) * scale).floor() as usize).min(bins - 1);
        masses[idx] += 1.0;
    }
    let realized = orbit.points.len();
    for m in &mut masses {
        *m /= realized as f64;
    }
    Ok(EmpiricalMeasure {
        lo,
        hi,
        masses,
        source: MeasureSource::Orbit {
            start: x,
            requested: n,
        },
        points: Some(orbit.points),
        realized,
        truncated: !orbit.stop.is_completed(),
    })
}

/// Largest defect `|mu(J) - mu(P^{-1} J)|` over the given intervals, with
/// the preimage computed branchwise and masses evaluated exactly.
pub fn invariance_defect(map: &ReturnMap, mu: &EmpiricalMeasure, intervals: &[Interval]) -> f64 {
    intervals
        .iter()
        .map(|j| (mu.interval_mass(j) - mu.pullback_mass(map, j)).abs())
        .fold(0.0, f64::max)
}

/// Dyadic subintervals of the segment down to widths >= `min_width`.
pub fn dyadic_intervals(segment: &Segment, min_width: f64) -> Vec<Interval> {
    let mut out = Vec::new();
    let len = segment.len();
    let mut pieces = 2usize;
    loop {
        let w = len / pieces as f64;
        if w < min_width {
            break;
        }
        for i in 0..pieces {
            out.push(Interval::new(
                segment.lo() + w * i as f64,
                segment.lo() + w * (i + 1) as f64,
            ));
        }
        pieces *= 2;
    }
    out
}

/// A Birkhoff average over a realized orbit.
#[derive(Debug, Clone, Copy)]
pub struct BirkhoffAverage {
    pub value: f64,
    /// Orbit points actually averaged.
    pub realized: usize,
    pub truncated: bool,
}

/// `(1/n) * sum of phi(P^k x)` over the realized orbit.
pub fn birkhoff_average(
    map: &ReturnMap,
    phi: impl Fn(f64) -> f64,
    x: f64,
    n: usize,
) -> Result<BirkhoffAverage> {
    if n == 0 {
        return Err(Error::Parameter("birkhoff average needs n >= 1".into()));
    }
    let orbit = map.iterate(x, n - 1)?;
    let mut acc = KahanSum::new();
    for &p in &orbit.points {
        acc.add(phi(p));
    }
    Ok(BirkhoffAverage {
        value: acc.value() / orbit.points.len() as f64,
        realized: orbit.points.len(),
        truncated: !orbit.stop.is_completed(),
    })
}

/// Finite-orbit Lyapunov data: `value` is the full average of `log |DP|`,
/// `tail_min` the minimum of the running averages over the last quarter of
/// the orbit (a finite-n liminf proxy, reported as such).
#[derive(Debug, Clone, Copy)]
pub struct LyapunovEstimate {
    pub value: f64,
    pub tail_min: f64,
    pub n: usize,
}

/// Lyapunov estimate along the orbit of `x`. A zero derivative on the orbit
/// sends the estimate to negative infinity.
pub fn lyapunov_estimate(map: &ReturnMap, x: f64, n: usize) -> Result<LyapunovEstimate> {
    if n == 0 {
        return Err(Error::Parameter("lyapunov estimate needs n >= 1".into()));
    }
    let orbit = map.iterate(x, n)?;
    let steps = orbit.steps();
    if steps == 0 {
        return Err(Error::Hypothesis(format!(
            "orbit of {x} leaves the domain immediately ({:?})",
            orbit.stop
        )));
    }
    let mut acc = KahanSum::new();
    let mut tail_min = f64::INFINITY;
    let tail_from = steps - steps / 4;
    for (k, &p) in orbit.points[..steps].iter().enumerate() {
        let d = map.deriv(p)?.abs();
        if d == 0.0 {
            // a vanishing derivative sends the whole product to zero
            return Ok(LyapunovEstimate {
                value: f64::NEG_INFINITY,
                tail_min: f64::NEG_INFINITY,
                n: k + 1,
            });
        }
        acc.add(d.ln());
        let running = acc.value() / (k + 1) as f64;
        if k + 1 >= tail_from {
            tail_min = tail_min.min(running);
        }
    }
    Ok(LyapunovEstimate {
        value: acc.value() / steps as f64,
        tail_min,
        n: steps,
    })
}

/// Classification of the integral of `log |DP|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogClass {
    Integrable,
    /// The negative part diverges; the integral is minus infinity.
    MinusInfinite,
}

/// Split integral of `log |DP|` against a measure. The positive part is
/// always finite because `|DP|` is bounded above.
#[derive(Debug, Clone, Copy)]
pub struct LogIntegrability {
    pub plus_integral: f64,
    pub minus_integral: f64,
    pub classification: LogClass,
}

impl LogIntegrability {
    /// Value in `[-inf, inf)`.
    pub fn value(&self) -> f64 {
        if self.classification == LogClass::MinusInfinite {
            f64::NEG_INFINITY
        } else {
            self.plus_integral - self.minus_integral
        }
    }
}

/// Integrates `log |DP|` against a binned measure by midpoint quadrature,
/// with geometric refinement toward branch endpoints where the derivative
/// may vanish or blow up. A per-bin average below [`LOG_FLOOR`] declares the
/// negative part divergent.
pub fn log_integral(map: &ReturnMap, mu: &EmpiricalMeasure) -> LogIntegrability {
    let mut plus = KahanSum::new();
    let mut minus = KahanSum::new();
    let mut divergent = false;
    for i in 0..mu.bins() {
        let mass = mu.masses()[i];
        if mass == 0.0 {
            continue;
        }
        let bin = Interval::new(mu.bin_edge(i), mu.bin_edge(i + 1));
        // restrict to the domain; the measure is supported in its closure
        let mut covered = 0.0;
        let mut bin_avg = KahanSum::new();
        for branch in map.branches() {
            if let Some(part) = bin.intersect(&branch.domain) {
                covered += part.len();
                let near_edge =
                    part.lo <= branch.domain.lo + 1e-12 || part.hi >= branch.domain.hi - 1e-12;
                let integral = if near_edge {
                    refined_log_integral(|x| branch.deriv(x).abs().ln(), &part)
                } else {
                    midpoint_log_integral(|x| branch.deriv(x).abs().ln(), &part, 8)
                };
                bin_avg.add(integral);
            }
        }
        if covered <= 0.0 {
            continue;
        }
        let avg = bin_avg.value() / covered;
        if avg < LOG_FLOOR {
            divergent = true;
            continue;
        }
        if avg >= 0.0 {
            plus.add(mass * avg);
        } else {
            minus.add(-mass * avg);
        }
    }
    LogIntegrability {
        plus_integral: plus.value(),
        minus_integral: if divergent {
            f64::INFINITY
        } else {
            minus.value()
        },
        classification: if divergent {
            LogClass::MinusInfinite
        } else {
            LogClass::Integrable
        },
    }
}

fn midpoint_log_integral(f: impl Fn(f64) -> f64, j: &Interval, pieces: usize) -> f64 {
    let w = j.len() / pieces as f64;
    let mut acc = 0.0;
    for i in 0..pieces {
        let x = j.lo + (i as f64 + 0.5) * w;
        acc += f(x).max(LOG_FLOOR) * w;
    }
    acc
}

/// Quadrature with dyadic shells toward both interval endpoints.
fn refined_log_integral(f: impl Fn(f64) -> f64, j: &Interval) -> f64 {
    let mid = j.midpoint();
    let mut acc = 0.0;
    for (a, mut b) in [(j.lo, mid), (j.hi, mid)] {
        // b is the inner edge, a the potentially singular endpoint
        for _ in 0..52 {
            let inner = a + 0.5 * (b - a);
            let x = a + 0.75 * (b - a);
            acc += f(x).max(LOG_FLOOR) * (b - inner).abs();
            b = inner;
            if (b - a).abs() < 1e-15 {
                break;
            }
        }
        acc += f(a + 0.5 * (b - a)).max(LOG_FLOOR) * (b - a).abs();
    }
    acc
}

/// A continuous piecewise-linear function on the segment.
#[derive(Debug, Clone)]
pub struct PiecewiseLinear {
    nodes: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = &self.nodes;
        if x <= n[0].0 {
            return n[0].1;
        }
        if x >= n[n.len() - 1].0 {
            return n[n.len() - 1].1;
        }
        let mut i = match n.binary_search_by(|(u, _)| u.total_cmp(&x)) {
            Ok(i) => return n[i].1,
            Err(i) => i,
        };
        if i == 0 {
            i = 1;
        }
        let (x0, y0) = n[i - 1];
        let (x1, y1) = n[i];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    /// Exact integral against a binned measure: per-bin mass times the exact
    /// average of the piecewise-linear function over the bin.
    pub fn integral_against(&self, mu: &EmpiricalMeasure) -> f64 {
        let mut acc = KahanSum::new();
        for i in 0..mu.bins() {
            let mass = mu.masses()[i];
            if mass == 0.0 {
                continue;
            }
            let (a, b) = (mu.bin_edge(i), mu.bin_edge(i + 1));
            acc.add(mass * self.average_on(a, b));
        }
        acc.value()
    }

    fn average_on(&self, a: f64, b: f64) -> f64 {
        // exact trapezoid integration over the linear pieces
        let mut xs = vec![a];
        for &(x, _) in &self.nodes {
            if x > a && x < b {
                xs.push(x);
            }
        }
        xs.push(b);
        let mut acc = 0.0;
        for w in xs.windows(2) {
            acc += 0.5 * (self.eval(w[0]) + self.eval(w[1])) * (w[1] - w[0]);
        }
        acc / (b - a)
    }
}

/// A continuous majorant of `log |DP|` with its integrals against the
/// measures it was checked on.
#[derive(Debug)]
pub struct MajorantReport {
    pub majorant: PiecewiseLinear,
    pub integrals: Vec<f64>,
    pub margin: f64,
    pub floor: f64,
}

/// Builds a continuous piecewise-linear majorant of `log |DP|` on the whole
/// segment, at least `margin` above it on the domain (with the divergence to
/// minus infinity near branch endpoints capped at `floor`), and verifies
/// that every supplied measure integrates it below `k_bound`.
pub fn continuous_majorant(
    map: &ReturnMap,
    k_bound: f64,
    measures: &[EmpiricalMeasure],
) -> Result<MajorantReport> {
    let margin = 0.01;
    let floor = LOG_FLOOR;
    let grid = 256;
    let mut nodes: Vec<(f64, f64)> = Vec::new();
    for branch in map.branches() {
        let d = &branch.domain;
        let mut branch_nodes = Vec::with_capacity(grid + 1);
        for i in 0..=grid {
            let x = d.lo + d.len() * i as f64 / grid as f64;
            branch_nodes.push((x, f64::NEG_INFINITY));
        }
        // node value: max of log|DP| over the two adjacent cells, sampled
        let samples_per_cell = 8;
        for i in 0..grid {
            let (a, _) = branch_nodes[i];
            let (b, _) = branch_nodes[i + 1];
            let mut cell_max = f64::NEG_INFINITY;
            for s in 0..=samples_per_cell {
                let x = a + (b - a) * s as f64 / samples_per_cell as f64;
                let v = branch.deriv(x).abs().ln().max(floor);
                cell_max = cell_max.max(v);
            }
            for k in [i, i + 1] {
                if branch_nodes[k].1 < cell_max {
                    branch_nodes[k].1 = cell_max;
                }
            }
        }
        for (x, v) in branch_nodes {
            nodes.push((x, v.max(floor) + margin));
        }
    }
    nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
    nodes.dedup_by(|a, b| {
        if (a.0 - b.0).abs() <= 1e-12 {
            b.1 = b.1.max(a.1);
            true
        } else {
            false
        }
    });
    if nodes.is_empty() {
        return Err(Error::Parameter("map has no branches to majorize".into()));
    }
    let mut phi = PiecewiseLinear { nodes };

    // verification sweep on a finer grid; raise nodes where undershooting
    for _ in 0..3 {
        let mut adjusted = false;
        for branch in map.branches() {
            let d = &branch.domain;
            let fine = 4096;
            for i in 1..fine {
                let x = d.lo + d.len() * i as f64 / fine as f64;
                let target = branch.deriv(x).abs().ln().max(floor);
                if phi.eval(x) < target + 0.5 * margin {
                    let bump = target + margin;
                    for node in &mut phi.nodes {
                        if (node.0 - x).abs() <= d.len() / 256.0 && node.1 < bump {
                            node.1 = bump;
                            adjusted = true;
                        }
                    }
                }
            }
        }
        if !adjusted {
            break;
        }
    }

    let integrals: Vec<f64> = measures.iter().map(|mu| phi.integral_against(mu)).collect();
    if let Some((i, bad)) = integrals.iter().enumerate().find(|(_, v)| **v >= k_bound) {
        return Err(Error::Hypothesis(format!(
            "majorant integral {bad} against measure {i} is not below the bound {k_bound}"
        )));
    }
    Ok(MajorantReport {
        majorant: phi,
        integrals,
        margin,
        floor,
    })
}

/// Result of the uniform Birkhoff sweep.
#[derive(Debug, Clone, Copy)]
pub enum BirkhoffCheck {
    /// Every tested `n` from `threshold_n` onward passed (and none failed).
    Pass { threshold_n: usize },
    /// First violation found.
    Fail { n: usize, x: f64, average: f64 },
}

/// Verifies `(1/n) * sum_{k<n} phi(P^k x) < -c` for every grid point of
/// `dom(P^(n-1))` and every `n` in the range. Returns the first violation,
/// or the smallest `n` from which all tested depths pass.
pub fn uniform_birkhoff_check(
    map: &ReturnMap,
    phi: impl Fn(f64) -> f64,
    c: f64,
    n_range: std::ops::RangeInclusive<usize>,
    grid: usize,
) -> Result<BirkhoffCheck> {
    if c <= 0.0 {
        return Err(Error::Parameter("uniform bound requires c > 0".into()));
    }
    let (n_lo, n_hi) = (*n_range.start(), *n_range.end());
    if n_lo == 0 {
        return Err(Error::Parameter("depth range must start at n >= 1".into()));
    }
    let seg = map.segment();
    let mut first_violation: Option<(usize, f64, f64)> = None;
    for g in 0..=grid {
        let x = seg.lo() + seg.len() * g as f64 / grid as f64;
        if !seg.contains(x) {
            continue;
        }
        // prefix sums of phi along the orbit
        let orbit = map.iterate(x, n_hi - 1)?;
        let mut acc = KahanSum::new();
        for (k, &p) in orbit.points.iter().enumerate() {
            acc.add(phi(p));
            let n = k + 1;
            if n < n_lo || n > n_hi {
                continue;
            }
            // x must lie in dom(P^(n-1)): the orbit realized n-1 steps
            let avg = acc.value() / n as f64;
            if avg >= -c {
                match first_violation {
                    Some((vn, _, _)) if vn <= n => {}
                    _ => first_violation = Some((n, x, avg)),
                }
            }
        }
    }
    Ok(match first_violation {
        Some((n, x, average)) => BirkhoffCheck::Fail { n, x, average },
        None => BirkhoffCheck::Pass { threshold_n: n_lo },
    })
}

/// One row of the exponent-equivalence cross-check: orbit-wise Lyapunov
/// data against the empirical-measure integral of `log |DP|`.
#[derive(Debug, Clone, Copy)]
pub struct ExponentRow {
    pub start: f64,
    pub lyapunov: LyapunovEstimate,
    pub integral: f64,
}

/// Numerical cross-check of the three equivalent formulations of uniformly
/// negative exponents: (a) negative liminf proxies, (b) measure integrals
/// below `-c`, (c) orbit averages below `-c`.
#[derive(Debug)]
pub struct ExponentReport {
    pub rows: Vec<ExponentRow>,
    /// Largest `|integral - tail_min|` over the rows.
    pub max_discrepancy: f64,
    /// Best uniform constant: all integrals and proxies lie below
    /// `-measured_c`.
    pub measured_c: f64,
}

impl ExponentReport {
    pub fn negative_exponents(&self) -> bool {
        self.measured_c > 0.0
    }
}

/// Cross-checks orbit proxies and measure integrals from several starts.
pub fn exponent_equivalence_report(
    map: &ReturnMap,
    starts: &[f64],
    n: usize,
    bins: usize,
) -> Result<ExponentReport> {
    let mut rows = Vec::with_capacity(starts.len());
    for &x in starts {
        let lyapunov = lyapunov_estimate(map, x, n)?;
        let mu = empirical_measure(map, x, n, bins)?;
        let integral = log_integral(map, &mu).value();
        rows.push(ExponentRow {
            start: x,
            lyapunov,
            integral,
        });
    }
    let max_discrepancy = rows
        .iter()
        .map(|r| (r.integral - r.lyapunov.tail_min).abs())
        .fold(0.0, f64::max);
    let worst = rows
        .iter()
        .map(|r| r.integral.max(r.lyapunov.tail_min).max(r.lyapunov.value))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(ExponentReport {
        rows,
        max_discrepancy,
        measured_c: -worst,
    })
}

/// Compensated summation; keeps long Birkhoff sums exact enough for the
/// additivity identities tested downstream.
#[derive(Debug, Clone, Copy)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        KahanSum {
            sum: 0.0,
            carry: 0.0,
        }
    }

    pub fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

impl Default for KahanSum {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iet::Iet;
    use crate::segment_map::{Branch, BranchKind, ReturnMap, Segment};

    const GOLDEN: f64 = 0.618033988749894848;

    fn toy_map() -> ReturnMap {
        let seg = Segment::centered(-1.0, 0.9).unwrap();
        ReturnMap::new(seg, vec![Branch::affine(-1.0, 0.9, 0.05, -0.001)]).unwrap()
    }

    fn golden_map() -> ReturnMap {
        Iet::rotation(GOLDEN).unwrap().as_return_map(0.0).unwrap()
    }

    fn square_map() -> ReturnMap {
        let seg = Segment::new(0.0, 1.0, 0.5).unwrap();
        ReturnMap::new(
            seg,
            vec![Branch::new(
                Interval::new(0.0, 1.0),
                BranchKind::Power {
                    offset: 0.0,
                    scale: 1.0,
                    center: 0.0,
                    exponent: 2.0,
                },
            )],
        )
        .unwrap()
    }

    #[test]
    fn golden_measure_equidistributes() {
        let p = golden_map();
        let mu = empirical_measure(&p, 0.0, 10_000, 10).unwrap();
        assert!((mu.total() - 1.0).abs() < 1e-12);
        for &m in mu.masses() {
            assert!((m - 0.1).abs() <= 1e-3, "bin mass {m}");
        }
    }

    #[test]
    fn toy_measure_concentrates_at_fixed_point() {
        let p = toy_map();
        let mu = empirical_measure(&p, 0.5, 1_000, DEFAULT_BINS).unwrap();
        let fix = -0.001 / 0.95;
        let idx = ((fix - p.segment().lo()) / mu.bin_width()).floor() as usize;
        assert!(mu.masses()[idx] >= 0.99);
    }

    #[test]
    fn single_point_measure() {
        let p = toy_map();
        let mu = empirical_measure(&p, 0.5, 1, 16).unwrap();
        assert_eq!(mu.realized_len(), 1);
        let idx = ((0.5 - p.segment().lo()) / mu.bin_width()).floor() as usize;
        assert_eq!(mu.masses()[idx], 1.0);
    }

    #[test]
    fn invariance_defect_telescopes() {
        let p = golden_map();
        let n = 10_000;
        let mu = empirical_measure(&p, 0.0, n, DEFAULT_BINS).unwrap();
        let intervals = dyadic_intervals(p.segment(), 0.1);
        let defect = invariance_defect(&p, &mu, &intervals);
        assert!(defect <= 2.0 / n as f64, "defect {defect}");
    }

    #[test]
    fn invariance_defect_uniform_measure_on_iet() {
        let p = golden_map();
        let mu = EmpiricalMeasure::uniform(p.segment(), DEFAULT_BINS);
        let intervals = dyadic_intervals(p.segment(), 0.05);
        let defect = invariance_defect(&p, &mu, &intervals);
        assert!(defect <= 1e-12, "defect {defect}");
    }

    #[test]
    fn invariance_defect_single_dirac() {
        let p = toy_map();
        let mu = empirical_measure(&p, 0.5, 1, 16).unwrap();
        // J contains x = 0.5 but not P(x) = 0.024
        let j = Interval::new(0.4, 0.6);
        let defect = invariance_defect(&p, &mu, &[j]);
        assert_eq!(defect, 1.0);
    }

    #[test]
    fn birkhoff_constant_function() {
        let p = golden_map();
        let avg = birkhoff_average(&p, |_| 1.0, 0.2, 1000).unwrap();
        assert_eq!(avg.value, 1.0);
    }

    #[test]
    fn birkhoff_cosine_mean_zero() {
        let p = golden_map();
        let avg =
            birkhoff_average(&p, |x| (2.0 * std::f64::consts::PI * x).cos(), 0.0, 100_000).unwrap();
        assert!(avg.value.abs() <= 1e-3, "average {}", avg.value);
    }

    #[test]
    fn birkhoff_log_slope_constant() {
        let p = toy_map();
        let avg = birkhoff_average(&p, |x| p.deriv(x).unwrap().abs().ln(), 0.5, 1000).unwrap();
        assert!((avg.value - 0.05f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn lyapunov_toy_is_log_slope() {
        let p = toy_map();
        let est = lyapunov_estimate(&p, 0.5, 100).unwrap();
        assert!((est.value - 0.05f64.ln()).abs() < 1e-12);
        assert!((est.tail_min - 0.05f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn lyapunov_iet_is_zero() {
        let p = golden_map();
        let est = lyapunov_estimate(&p, 0.2, 1000).unwrap();
        assert_eq!(est.value, 0.0);
        assert_eq!(est.tail_min, 0.0);
    }

    #[test]
    fn lyapunov_reports_divergence_at_zero_derivative() {
        // orbits of the squaring map fall onto 0, where the derivative
        // vanishes
        let p = square_map();
        let est = lyapunov_estimate(&p, 0.3, 2000).unwrap();
        assert_eq!(est.value, f64::NEG_INFINITY);
        assert_eq!(est.tail_min, f64::NEG_INFINITY);
    }

    #[test]
    fn lyapunov_chain_additivity() {
        let p = golden_map();
        let (n1, n2) = (600, 400);
        let full = lyapunov_estimate(&p, 0.2, n1 + n2).unwrap();
        let first = lyapunov_estimate(&p, 0.2, n1).unwrap();
        let mid = p.iterate(0.2, n1).unwrap().last();
        let second = lyapunov_estimate(&p, mid, n2).unwrap();
        let lhs = full.value * (n1 + n2) as f64;
        let rhs = first.value * n1 as f64 + second.value * n2 as f64;
        assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn log_integral_constant_slope() {
        let p = toy_map();
        let mu = empirical_measure(&p, 0.5, 500, DEFAULT_BINS).unwrap();
        let li = log_integral(&p, &mu);
        assert_eq!(li.classification, LogClass::Integrable);
        assert!((li.value() - 0.05f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn log_integral_square_map_lebesgue() {
        let p = square_map();
        let mu = EmpiricalMeasure::uniform(p.segment(), DEFAULT_BINS);
        let li = log_integral(&p, &mu);
        // integral of log(2x) over (0,1) is ln 2 - 1
        let exact = 2.0f64.ln() - 1.0;
        assert_eq!(li.classification, LogClass::Integrable);
        assert!(
            (li.value() - exact).abs() < 1e-3,
            "{} vs {exact}",
            li.value()
        );
    }

    #[test]
    fn log_integral_iet_is_zero() {
        let p = golden_map();
        let mu = empirical_measure(&p, 0.3, 2000, DEFAULT_BINS).unwrap();
        let li = log_integral(&p, &mu);
        assert_eq!(li.value(), 0.0);
    }

    #[test]
    fn majorant_constant_case() {
        let p = toy_map();
        let mu = empirical_measure(&p, 0.5, 500, DEFAULT_BINS).unwrap();
        let report = continuous_majorant(&p, -1.0, &[mu]).unwrap();
        let expected = 0.05f64.ln() + 0.01;
        for i in 0..100 {
            let x = -0.99 + 1.88 * i as f64 / 100.0;
            assert!((report.majorant.eval(x) - expected).abs() < 1e-9);
        }
        assert!(report.integrals[0] < -1.0);
    }

    #[test]
    fn majorant_caps_vanishing_derivative() {
        let p = square_map();
        let mu = EmpiricalMeasure::uniform(p.segment(), DEFAULT_BINS);
        let report = continuous_majorant(&p, 1.0, &[mu]).unwrap();
        // near the left endpoint log|DP| dives to -inf; the majorant stays
        // finite and above it
        let x: f64 = 1e-9;
        let log_dp = (2.0 * x).ln();
        assert!(report.majorant.eval(x) > log_dp);
        assert!(report.majorant.eval(x) >= LOG_FLOOR);
    }

    #[test]
    fn majorant_iet_with_margin() {
        let p = golden_map();
        let mu = empirical_measure(&p, 0.3, 2000, DEFAULT_BINS).unwrap();
        let report = continuous_majorant(&p, 0.5, &[mu]).unwrap();
        for i in 1..100 {
            let x = i as f64 / 100.0;
            assert!((report.majorant.eval(x) - 0.01).abs() < 1e-9);
        }
        assert!(report.integrals[0] < 0.5 && report.integrals[0] > 0.0);
    }

    #[test]
    fn majorant_fails_when_bound_too_tight() {
        let p = golden_map();
        let mu = empirical_measure(&p, 0.3, 2000, DEFAULT_BINS).unwrap();
        assert!(matches!(
            continuous_majorant(&p, 0.0, &[mu]),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn uniform_birkhoff_toy_passes_immediately() {
        let p = toy_map();
        let mu = empirical_measure(&p, 0.5, 500, DEFAULT_BINS).unwrap();
        let report = continuous_majorant(&p, -2.9, &[mu]).unwrap();
        let phi = report.majorant;
        let check = uniform_birkhoff_check(&p, |x| phi.eval(x), 2.9, 1..=20, 200).unwrap();
        match check {
            BirkhoffCheck::Pass { threshold_n } => assert_eq!(threshold_n, 1),
            other => panic!("expected pass, got {other:?}"),
        }
    }

    #[test]
    fn uniform_birkhoff_iet_fails() {
        let p = golden_map();
        let check = uniform_birkhoff_check(&p, |_| 0.01, 0.005, 1..=10, 100).unwrap();
        match check {
            BirkhoffCheck::Fail { n, average, .. } => {
                assert_eq!(n, 1);
                assert!((average - 0.01).abs() < 1e-12);
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn exponent_report_toy() {
        let p = toy_map();
        let report = exponent_equivalence_report(&p, &[0.5, -0.3], 500, DEFAULT_BINS).unwrap();
        assert!(report.negative_exponents());
        assert!((report.measured_c - 2.99).abs() < 0.02);
        assert!(report.max_discrepancy < 1e-6);
    }

    #[test]
    fn exponent_report_iet() {
        let p = golden_map();
        let report = exponent_equivalence_report(&p, &[0.2, 0.7], 2000, DEFAULT_BINS).unwrap();
        assert!(!report.negative_exponents());
        assert_eq!(report.measured_c, 0.0);
    }

    #[test]
    fn non_atomicity_proxy_for_minimal_iet() {
        let p = golden_map();
        let mu = empirical_measure(&p, 0.0, 10_000, 100).unwrap();
        assert!(mu.max_bin_mass() <= 0.02);
    }

    #[test]
    fn weak_star_interval_convergence_proxy() {
        let p = golden_map();
        let mu = empirical_measure(&p, 0.0, 10_000, DEFAULT_BINS).unwrap();
        for j in dyadic_intervals(p.segment(), 0.05) {
            assert!((mu.interval_mass(&j) - j.len()).abs() <= 1e-2);
        }
    }
}
