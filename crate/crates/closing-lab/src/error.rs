use thiserror::Error;

/// Errors shared by every module of the crate.
///
/// `Hypothesis` is not a tool failure: it reports that an experiment's
/// standing assumption (a contraction certificate, the `kappa < 1/3` gate,
/// the sign condition at `lambda = 1`) does not hold for the given map. The
/// command-line driver maps it to exit code 2, everything else to 1.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input outside the segment: x = {x}, segment [{lo}, {hi}]")]
    OutsideSegment { x: f64, lo: f64, hi: f64 },

    #[error("point not in the domain of the map: x = {x}")]
    OutsideDomain { x: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("domain exhausted: dom(P^{depth}) is empty")]
    DomainExhausted { depth: usize },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("search failed: {0}")]
    Search(String),

    #[error("ode integration failed: {0}")]
    Ode(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("scenario validation failed: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True when the error reports a violated experimental hypothesis rather
    /// than a tool failure.
    pub fn is_hypothesis(&self) -> bool {
        matches!(self, Error::Hypothesis(_))
    }
}
