use thiserror::Error;

use crate::curve::SingularEventKind;

/// Errors raised by the integrators, singular charts and the extension engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("governing equation evaluated on a singular axis (x = {x}, y = {y})")]
    DivisionByAxis { x: f64, y: f64 },

    #[error("adaptive step {step:e} fell below the floor at s = {s}; likely an unhandled singularity")]
    StepSizeUnderflow { s: f64, step: f64 },

    #[error("{kind:?}: incoming slope^2 = {observed} but the limit is {expected} (tolerance {tolerance})")]
    LimitMismatch {
        kind: SingularEventKind,
        observed: f64,
        expected: f64,
        tolerance: f64,
    },

    #[error("chart width {width:e} shrank below the floor ({cause})")]
    ChartWidthUnderflow { width: f64, cause: String },

    #[error("sup |q/y| = {norm} exceeds the norm bound M = {bound}")]
    NormBoundExceeded { norm: f64, bound: f64 },

    #[error("running denominator {value} <= 0 at y = {y}")]
    DenominatorVanished { y: f64, value: f64 },

    #[error("expansion coefficient of order {0} is not available (k <= 2)")]
    UnsupportedOrder(usize),

    #[error("two singular events within {spacing:e} of arc length near s = {s}")]
    EventAccumulation { s: f64, spacing: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("at s = {s}: {source}")]
    At {
        s: f64,
        #[source]
        source: Box<SolverError>,
    },
}

impl SolverError {
    pub(crate) fn at(self, s: f64) -> Self {
        match self {
            e @ SolverError::At { .. } => e,
            e => SolverError::At {
                s,
                source: Box::new(e),
            },
        }
    }

    /// Strips any position wrappers.
    pub fn root(&self) -> &SolverError {
        match self {
            SolverError::At { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T> = std::result::Result<T, SolverError>;
