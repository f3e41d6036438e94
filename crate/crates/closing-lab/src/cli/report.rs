//! Experiment reports: a structured-text summary where every asserted bound
//! carries the measured value and the bound side by side, plus CSV emission
//! for plot data.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::Result;

/// One line of a report section.
#[derive(Debug, Clone)]
pub enum Line {
    Info(String),
    /// A machine-checkable bound: `label: measured <rel> bound  [ok|VIOLATED]`.
    Bound {
        label: String,
        measured: f64,
        relation: &'static str,
        bound: f64,
    },
}

impl Line {
    pub fn passes(&self) -> bool {
        match self {
            Line::Info(_) => true,
            Line::Bound {
                measured,
                relation,
                bound,
                ..
            } => match *relation {
                "<=" => measured <= bound,
                "<" => measured < bound,
                ">=" => measured >= bound,
                ">" => measured > bound,
                _ => false,
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct Section {
    pub title: String,
    pub lines: Vec<Line>,
}

/// Reproducibility data carried by every report.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub version: String,
    pub seed: u64,
    pub grid: f64,
    pub ode_step: Option<f64>,
}

/// A full experiment report.
#[derive(Debug)]
pub struct Report {
    pub scenario: String,
    pub command: String,
    pub sections: Vec<Section>,
    pub provenance: Provenance,
    pub csv_files: Vec<PathBuf>,
}

impl Report {
    pub fn new(scenario: &str, command: &str, seed: u64, grid: f64, ode_step: Option<f64>) -> Self {
        Report {
            scenario: scenario.to_string(),
            command: command.to_string(),
            sections: Vec::new(),
            provenance: Provenance {
                version: env!("CARGO_PKG_VERSION").to_string(),
                seed,
                grid,
                ode_step,
            },
            csv_files: Vec::new(),
        }
    }

    pub fn section(&mut self, title: &str) -> &mut Section {
        self.sections.push(Section {
            title: title.to_string(),
            lines: Vec::new(),
        });
        self.sections.last_mut().expect("just pushed")
    }

    /// True when every bound line holds.
    pub fn all_bounds_pass(&self) -> bool {
        self.sections
            .iter()
            .flat_map(|s| &s.lines)
            .all(Line::passes)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "== {} :: {} ==", self.command, self.scenario);
        for section in &self.sections {
            let _ = writeln!(out, "\n[{}]", section.title);
            for line in &section.lines {
                match line {
                    Line::Info(text) => {
                        let _ = writeln!(out, "  {text}");
                    }
                    Line::Bound {
                        label,
                        measured,
                        relation,
                        bound,
                    } => {
                        let verdict = if line.passes() { "ok" } else { "VIOLATED" };
                        let _ = writeln!(
                            out,
                            "  {label}: measured {measured} {relation} bound {bound}  [{verdict}]"
                        );
                    }
                }
            }
        }
        let _ = writeln!(out, "\n[provenance]");
        let _ = writeln!(out, "  version = {}", self.provenance.version);
        let _ = writeln!(out, "  seed = {}", self.provenance.seed);
        let _ = writeln!(out, "  sup_grid_resolution = {}", self.provenance.grid);
        if let Some(step) = self.provenance.ode_step {
            let _ = writeln!(out, "  ode_step = {step}");
        }
        for path in &self.csv_files {
            let _ = writeln!(out, "  csv = {}", path.display());
        }
        out
    }
}

impl Section {
    pub fn info(&mut self, text: impl Into<String>) -> &mut Self {
        self.lines.push(Line::Info(text.into()));
        self
    }

    pub fn bound(
        &mut self,
        label: impl Into<String>,
        measured: f64,
        relation: &'static str,
        bound: f64,
    ) -> &mut Self {
        self.lines.push(Line::Bound {
            label: label.into(),
            measured,
            relation,
            bound,
        });
        self
    }
}

/// Writes a CSV file with the shortest-round-trip float formatting used
/// everywhere in this crate; byte-identical across identical runs.
pub fn write_csv(
    dir: &Path,
    file_name: &str,
    header: &str,
    rows: &[Vec<String>],
) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(file_name);
    let mut out = String::with_capacity(rows.len() * 32 + header.len() + 1);
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(&path, out)?;
    Ok(path)
}

/// Shortest round-trip decimal form of a float.
pub fn fmt(v: f64) -> String {
    format!("{v}")
}
