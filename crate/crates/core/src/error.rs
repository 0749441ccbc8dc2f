use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the pipeline can report. Variant names are stable and are
/// emitted verbatim by [`Error::name`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point outside the effective domain of {operator}: {detail}")]
    OperatorDomainError { operator: String, detail: String },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unknown operator `{0}`")]
    UnknownOperator(String),
    #[error("bad parameters for `{operator}`: {detail}")]
    BadParams { operator: String, detail: String },
    #[error("invalid space or domain: {0}")]
    InvalidSpace(String),
    #[error("selection region is unbounded")]
    RegionUnbounded,
    #[error("selection grid needs {cells} cells, budget is {budget}")]
    GridTooFine { cells: usize, budget: usize },
    #[error("boundary distance {distance:e} does not exceed tolerance {tol:e}")]
    BoundaryTooClose { distance: f64, tol: f64 },
    #[error("degenerate zero near {point:?} (condition estimate {condition:e})")]
    DegenerateZero { point: Vec<f64>, condition: f64 },
    #[error("subdivision budget of {budget} boxes exhausted")]
    BudgetExhausted { budget: usize },
    #[error("map vanishes at boundary sample {point:?}")]
    ZeroOnBoundarySample { point: Vec<f64> },
    #[error("0 lies within {distance:e} of T(boundary) at sample {point:?}")]
    BoundaryHitsZero { distance: f64, point: Vec<f64> },
    #[error("degree not stabilized over a window of {window}: trace {trace:?}")]
    NotStabilized { window: usize, trace: Vec<Option<i64>> },
    #[error("inadmissible homotopy at t = {t}: {reason}")]
    InadmissibleHomotopy { t: f64, reason: String },
    #[error("residual {best:e} above tolerance {tol:e}")]
    ResidualNotMet { best: f64, tol: f64 },
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("degree or residual changed when the cone cap was doubled: {0}")]
    CapSensitive(String),
    #[error("no admissible radius found up to {max_radius}")]
    RadiusSearchFailed { max_radius: f64 },
}

impl Error {
    /// Variant name, used as the machine-readable error code.
    pub fn name(&self) -> &'static str {
        match self {
            Error::OperatorDomainError { .. } => "OperatorDomainError",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::UnknownOperator(_) => "UnknownOperator",
            Error::BadParams { .. } => "BadParams",
            Error::InvalidSpace(_) => "InvalidSpace",
            Error::RegionUnbounded => "RegionUnbounded",
            Error::GridTooFine { .. } => "GridTooFine",
            Error::BoundaryTooClose { .. } => "BoundaryTooClose",
            Error::DegenerateZero { .. } => "DegenerateZero",
            Error::BudgetExhausted { .. } => "BudgetExhausted",
            Error::ZeroOnBoundarySample { .. } => "ZeroOnBoundarySample",
            Error::BoundaryHitsZero { .. } => "BoundaryHitsZero",
            Error::NotStabilized { .. } => "NotStabilized",
            Error::InadmissibleHomotopy { .. } => "InadmissibleHomotopy",
            Error::ResidualNotMet { .. } => "ResidualNotMet",
            Error::HypothesisViolated(_) => "HypothesisViolated",
            Error::CapSensitive(_) => "CapSensitive",
            Error::RadiusSearchFailed { .. } => "RadiusSearchFailed",
        }
    }

    /// Configuration errors, as opposed to mathematical outcomes such as a
    /// boundary zero or a non-stabilizing trace.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::UnknownOperator(_)
                | Error::BadParams { .. }
                | Error::InvalidSpace(_)
                | Error::DimensionMismatch { .. }
        )
    }
}
