//! Scenario files: a line-based structured-text format describing the
//! segment, the dynamics (explicit branches or an interval exchange), the
//! twist and flow-box parameters, and experiment settings.
//!
//! ```text
//! schema = 1
//! name = toy_contraction
//! units = arclength
//!
//! [segment]
//! lo = -1
//! hi = 0.9
//! marked = 0
//!
//! [branch]            # repeatable, ordered
//! kind = affine       # or: power, with offset/scale/center/exponent
//! domain = -1 0.9
//! slope = 0.05
//! offset = -0.001
//!
//! [twist]
//! delta = 0.1
//! profile = 5
//!
//! [flowbox]
//! epsilon = 0.1
//! delta = 0.01
//! order = 7
//! ode_step = 1e-4
//!
//! [experiment]
//! q = 0.5
//! orbit = 10000
//! bins = 256
//! depth = 64
//! kappa_target = 0.1
//! tol = 1e-10
//! seed = 42
//! ```
//!
//! An `[iet]` section (lengths / permutation / flips / cut) replaces the
//! branch list for exchange scenarios. Comments start with `#`.

use std::collections::BTreeMap;
use std::path::Path;

use crate::iet::Iet;
use crate::interval::Interval;
use crate::segment_map::{Branch, BranchKind, ReturnMap, Segment};
use crate::twist::TwistFamily;
use crate::{Error, Result};

/// Bundled scenario files, compiled into the binary.
pub const BUNDLED: &[(&str, &str)] = &[
    (
        "toy_contraction",
        include_str!("../../scenarios/toy_contraction.scn"),
    ),
    ("two_branch", include_str!("../../scenarios/two_branch.scn")),
    ("golden_iet", include_str!("../../scenarios/golden_iet.scn")),
    ("flip_iet", include_str!("../../scenarios/flip_iet.scn")),
    (
        "rational_iet",
        include_str!("../../scenarios/rational_iet.scn"),
    ),
    (
        "mixed_slope",
        include_str!("../../scenarios/mixed_slope.scn"),
    ),
    (
        "power_square",
        include_str!("../../scenarios/power_square.scn"),
    ),
    (
        "flowbox_default",
        include_str!("../../scenarios/flowbox_default.scn"),
    ),
];

/// The dynamics a scenario runs on.
#[derive(Debug, Clone)]
pub enum Dynamics {
    Branches(Vec<Branch>),
    Exchange { iet: Iet, cut: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct TwistSpec {
    pub delta: f64,
    pub profile: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct FlowBoxSpec {
    pub epsilon: f64,
    pub delta: f64,
    pub order: usize,
    pub ode_step: f64,
}

/// Experiment parameters with their defaults.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub q: Option<f64>,
    pub orbit: usize,
    pub bins: usize,
    pub depth: usize,
    pub kappa_target: f64,
    pub propagate_k: f64,
    pub tol: f64,
    pub grid: f64,
    pub lambdas: Vec<f64>,
    pub seed: u64,
}

impl Default for Experiment {
    fn default() -> Self {
        Experiment {
            q: None,
            orbit: 10_000,
            bins: 256,
            depth: 64,
            kappa_target: 0.5,
            propagate_k: 0.1,
            tol: 1e-10,
            grid: 1e-4,
            lambdas: vec![0.0, 0.25, 0.5, 1.0],
            seed: 0,
        }
    }
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub segment: Segment,
    pub dynamics: Dynamics,
    pub twist: Option<TwistSpec>,
    pub flowbox: Option<FlowBoxSpec>,
    pub experiment: Experiment,
}

impl Scenario {
    /// Builds the return map this scenario runs on.
    pub fn return_map(&self) -> Result<ReturnMap> {
        match &self.dynamics {
            Dynamics::Branches(branches) => ReturnMap::new(self.segment, branches.clone()),
            Dynamics::Exchange { iet, cut } => iet.as_return_map(*cut),
        }
    }

    /// Builds the twist family from the scenario's spec.
    pub fn twist_family(&self) -> Result<Option<TwistFamily>> {
        match self.twist {
            Some(spec) => Ok(Some(TwistFamily::new(
                &self.segment,
                spec.delta,
                spec.profile,
            )?)),
            None => Ok(None),
        }
    }

    /// Starting point: explicit `q`, or the segment midpoint.
    pub fn start_point(&self) -> f64 {
        self.experiment
            .q
            .unwrap_or_else(|| 0.5 * (self.segment.lo() + self.segment.hi()))
    }
}

/// Loads a scenario from a filesystem path or a bundled name.
pub fn load_scenario(spec: &str) -> Result<Scenario> {
    let path = Path::new(spec);
    if path.exists() {
        let text = std::fs::read_to_string(path)?;
        return parse_scenario(&text);
    }
    if let Some((_, text)) = BUNDLED.iter().find(|(name, _)| *name == spec) {
        return parse_scenario(text);
    }
    // a path that looks like a file but does not exist is an I/O error
    Err(Error::Io(std::io::Error::new(
        std::io::ErrorKind::NotFound,
        format!("no such scenario file or bundled name: {spec}"),
    )))
}

struct RawSection {
    name: String,
    line: usize,
    entries: BTreeMap<String, (usize, String)>,
}

fn parse_raw(text: &str) -> Result<Vec<RawSection>> {
    let mut sections = vec![RawSection {
        name: String::new(),
        line: 0,
        entries: BTreeMap::new(),
    }];
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or(Error::Parse {
                line: line_no,
                msg: "unterminated section header".into(),
            })?;
            sections.push(RawSection {
                name: name.trim().to_string(),
                line: line_no,
                entries: BTreeMap::new(),
            });
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(Error::Parse {
            line: line_no,
            msg: format!("expected `key = value`, got `{line}`"),
        })?;
        let section = sections.last_mut().expect("sections start non-empty");
        let key = key.trim().to_string();
        if section.entries.contains_key(&key) {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("duplicate key `{key}` in section `{}`", section.name),
            });
        }
        section
            .entries
            .insert(key, (line_no, value.trim().to_string()));
    }
    Ok(sections)
}

struct SectionReader<'a> {
    section: &'a RawSection,
    used: Vec<String>,
}

impl<'a> SectionReader<'a> {
    fn new(section: &'a RawSection) -> Self {
        SectionReader {
            section,
            used: Vec::new(),
        }
    }

    fn raw(&mut self, key: &str) -> Option<(usize, &'a str)> {
        self.used.push(key.to_string());
        self.section
            .entries
            .get(key)
            .map(|(line, v)| (*line, v.as_str()))
    }

    fn f64(&mut self, key: &str) -> Result<Option<f64>> {
        match self.raw(key) {
            Some((line, v)) => parse_f64(v, line).map(Some),
            None => Ok(None),
        }
    }

    fn require_f64(&mut self, key: &str) -> Result<f64> {
        self.f64(key)?.ok_or(Error::Parse {
            line: self.section.line,
            msg: format!("section `{}` is missing `{key}`", self.section.name),
        })
    }

    fn usize(&mut self, key: &str) -> Result<Option<usize>> {
        match self.raw(key) {
            Some((line, v)) => v.parse::<usize>().map(Some).map_err(|_| Error::Parse {
                line,
                msg: format!("`{key}` must be a non-negative integer, got `{v}`"),
            }),
            None => Ok(None),
        }
    }

    fn f64_list(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.raw(key) {
            Some((line, v)) => {
                let mut out = Vec::new();
                for token in v.split_whitespace() {
                    out.push(parse_f64(token, line)?);
                }
                Ok(Some(out))
            }
            None => Ok(None),
        }
    }

    fn finish(self) -> Result<()> {
        for key in self.section.entries.keys() {
            if !self.used.contains(key) {
                return Err(Error::Parse {
                    line: self.section.entries[key].0,
                    msg: format!("unknown key `{key}` in section `{}`", self.section.name),
                });
            }
        }
        Ok(())
    }
}

fn parse_f64(v: &str, line: usize) -> Result<f64> {
    let value: f64 = v.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("expected a number, got `{v}`"),
    })?;
    if !value.is_finite() {
        return Err(Error::Parse {
            line,
            msg: format!("numeric fields must be finite, got `{v}`"),
        });
    }
    Ok(value)
}

/// Parses and validates a scenario from its text.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let sections = parse_raw(text)?;

    let mut top = SectionReader::new(&sections[0]);
    let schema = top.raw("schema").map(|(l, v)| (l, v.to_string()));
    match schema {
        Some((line, v)) if v != "1" => {
            return Err(Error::Parse {
                line,
                msg: format!("unsupported schema version `{v}`"),
            })
        }
        None => {
            return Err(Error::Parse {
                line: 1,
                msg: "missing `schema = 1`".into(),
            })
        }
        _ => {}
    }
    let name = match top.raw("name") {
        Some((_, v)) => v.to_string(),
        None => {
            return Err(Error::Parse {
                line: 1,
                msg: "missing `name`".into(),
            })
        }
    };
    if let Some((line, units)) = top.raw("units") {
        if units != "arclength" {
            return Err(Error::Parse {
                line,
                msg: format!("unsupported units `{units}` (only `arclength`)"),
            });
        }
    }
    top.finish()?;

    let mut segment: Option<Segment> = None;
    let mut branches: Vec<Branch> = Vec::new();
    let mut exchange: Option<(Iet, f64)> = None;
    let mut twist: Option<TwistSpec> = None;
    let mut flowbox: Option<FlowBoxSpec> = None;
    let mut experiment = Experiment::default();

    for section in &sections[1..] {
        let mut r = SectionReader::new(section);
        match section.name.as_str() {
            "segment" => {
                let lo = r.require_f64("lo")?;
                let hi = r.require_f64("hi")?;
                let marked = r.f64("marked")?.unwrap_or(0.0);
                segment = Some(Segment::new(lo, hi, marked).map_err(validation)?);
            }
            "branch" => {
                let (line, kind_name) = r.raw("kind").ok_or(Error::Parse {
                    line: section.line,
                    msg: "branch section is missing `kind`".into(),
                })?;
                let domain = r.f64_list("domain")?.ok_or(Error::Parse {
                    line: section.line,
                    msg: "branch section is missing `domain`".into(),
                })?;
                if domain.len() != 2 {
                    return Err(Error::Parse {
                        line: section.line,
                        msg: "`domain` takes exactly two numbers".into(),
                    });
                }
                let kind = match kind_name {
                    "affine" => BranchKind::Affine {
                        slope: r.require_f64("slope")?,
                        offset: r.require_f64("offset")?,
                    },
                    "power" => BranchKind::Power {
                        offset: r.require_f64("offset")?,
                        scale: r.require_f64("scale")?,
                        center: r.require_f64("center")?,
                        exponent: r.require_f64("exponent")?,
                    },
                    other => {
                        return Err(Error::Parse {
                            line,
                            msg: format!("unknown branch kind `{other}`"),
                        })
                    }
                };
                branches.push(Branch::new(Interval::new(domain[0], domain[1]), kind));
            }
            "iet" => {
                let lengths = r.f64_list("lengths")?.ok_or(Error::Parse {
                    line: section.line,
                    msg: "iet section is missing `lengths`".into(),
                })?;
                let permutation: Vec<usize> = r
                    .f64_list("permutation")?
                    .ok_or(Error::Parse {
                        line: section.line,
                        msg: "iet section is missing `permutation`".into(),
                    })?
                    .iter()
                    .map(|v| *v as usize)
                    .collect();
                let flips: Vec<bool> = r
                    .f64_list("flips")?
                    .unwrap_or_else(|| vec![0.0; lengths.len()])
                    .iter()
                    .map(|v| *v != 0.0)
                    .collect();
                let cut = r.f64("cut")?.unwrap_or(0.0);
                let iet = Iet::new(lengths, permutation, flips).map_err(validation)?;
                exchange = Some((iet, cut));
            }
            "twist" => {
                twist = Some(TwistSpec {
                    delta: r.require_f64("delta")?,
                    profile: r.usize("profile")?.unwrap_or(5),
                });
            }
            "flowbox" => {
                flowbox = Some(FlowBoxSpec {
                    epsilon: r.require_f64("epsilon")?,
                    delta: r.require_f64("delta")?,
                    order: r.usize("order")?.unwrap_or(7),
                    ode_step: r.f64("ode_step")?.unwrap_or(1e-4),
                });
            }
            "experiment" => {
                experiment.q = r.f64("q")?;
                if let Some(v) = r.usize("orbit")? {
                    experiment.orbit = v;
                }
                if let Some(v) = r.usize("bins")? {
                    experiment.bins = v;
                }
                if let Some(v) = r.usize("depth")? {
                    experiment.depth = v;
                }
                if let Some(v) = r.f64("kappa_target")? {
                    experiment.kappa_target = v;
                }
                if let Some(v) = r.f64("propagate_k")? {
                    experiment.propagate_k = v;
                }
                if let Some(v) = r.f64("tol")? {
                    experiment.tol = v;
                }
                if let Some(v) = r.f64("grid")? {
                    experiment.grid = v;
                }
                if let Some(v) = r.f64_list("lambdas")? {
                    experiment.lambdas = v;
                }
                if let Some(v) = r.usize("seed")? {
                    experiment.seed = v as u64;
                }
            }
            other => {
                return Err(Error::Parse {
                    line: section.line,
                    msg: format!("unknown section `[{other}]`"),
                })
            }
        }
        r.finish()?;
    }

    let dynamics = match (exchange, branches.is_empty()) {
        (Some(_), false) => {
            return Err(Error::Validation(
                "a scenario declares either branches or an iet, not both".into(),
            ))
        }
        (Some((iet, cut)), true) => Dynamics::Exchange { iet, cut },
        (None, false) => Dynamics::Branches(branches),
        (None, true) => {
            return Err(Error::Validation(
                "a scenario needs a branch list or an iet".into(),
            ))
        }
    };
    let segment = match (&dynamics, segment) {
        (_, Some(seg)) => seg,
        // an exchange carries its own segment
        (Dynamics::Exchange { iet, cut }, None) => *iet.as_return_map(*cut)?.segment(),
        (Dynamics::Branches(_), None) => {
            return Err(Error::Validation(
                "branch scenarios need a [segment]".into(),
            ))
        }
    };

    let scenario = Scenario {
        name,
        segment,
        dynamics,
        twist,
        flowbox,
        experiment,
    };
    validate(&scenario)?;
    Ok(scenario)
}

fn validation(e: Error) -> Error {
    Error::Validation(e.to_string())
}

/// Cross-field validation: the return map builds, twist and flow-box
/// references resolve.
fn validate(scenario: &Scenario) -> Result<()> {
    scenario.return_map().map_err(validation)?;
    if let Some(spec) = scenario.twist {
        TwistFamily::new(&scenario.segment, spec.delta, spec.profile).map_err(validation)?;
    }
    if let Some(spec) = scenario.flowbox {
        // geometry check with a placeholder drift constant; the vertical
        // extent is the segment in marked-centered coordinates
        let m = scenario.segment.marked();
        let extent = (scenario.segment.lo() - m, scenario.segment.hi() - m);
        crate::flowbox::FlowBoxField::with_eta(spec.epsilon, spec.delta, extent, spec.order, 1.0)
            .map_err(validation)?;
        if !(spec.ode_step > 0.0) {
            return Err(Error::Validation("ode_step must be positive".into()));
        }
        // the transit comparison needs a twist of the same amplitude
        TwistFamily::new(&scenario.segment, spec.delta, spec.order).map_err(validation)?;
    }
    if let Some(q) = scenario.experiment.q {
        if !scenario.segment.contains(q) {
            return Err(Error::Validation(format!(
                "starting point q = {q} lies outside the segment"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_scenarios_all_parse() {
        for (name, _) in BUNDLED {
            let scenario = load_scenario(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            scenario.return_map().unwrap();
        }
    }

    #[test]
    fn toy_scenario_fields() {
        let s = load_scenario("toy_contraction").unwrap();
        assert_eq!(s.name, "toy_contraction");
        assert_eq!(s.segment.lo(), -1.0);
        assert_eq!(s.segment.hi(), 0.9);
        assert_eq!(s.start_point(), 0.5);
        let t = s.twist.unwrap();
        assert_eq!(t.delta, 0.1);
        let map = s.return_map().unwrap();
        assert_eq!(map.branches().len(), 1);
    }

    #[test]
    fn oversized_twist_is_a_validation_error() {
        let text = "\
schema = 1
name = bad

[segment]
lo = -1
hi = 0.9

[branch]
kind = affine
domain = -1 0.9
slope = 0.05
offset = -0.001

[twist]
delta = 0.2
";
        match parse_scenario(text) {
            Err(Error::Validation(msg)) => assert!(msg.contains("c/8"), "{msg}"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_scenario("/nonexistent/path.scn"),
            Err(Error::Io(_))
        ));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "schema = 1\nname = x\n\n[segment]\nlo == 3\n";
        match parse_scenario(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("expected parse error, got {other:?}"),
        }
        let text = "schema = 1\nname = x\n\n[segment]\nlo = 0\nhi = 1\nbogus = 2\n";
        match parse_scenario(text) {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 7);
                assert!(msg.contains("bogus"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn golden_scenario_is_an_exchange() {
        let s = load_scenario("golden_iet").unwrap();
        assert!(matches!(s.dynamics, Dynamics::Exchange { .. }));
        assert!(s.twist.is_none());
        let map = s.return_map().unwrap();
        assert_eq!(map.branches().len(), 2);
    }
}
