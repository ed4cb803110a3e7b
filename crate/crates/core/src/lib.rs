//! Generating curves of rotational and doubly rotational hypersurfaces with prescribed
//! mean curvature, extended through contacts with the rotation axes and the origin.

pub mod asymptotics;
pub mod cli;
pub mod chart;
pub mod curve;
pub mod engine;
pub mod error;
pub mod hfield;
pub mod integrator;
pub mod output;
pub mod quadrature;
pub mod report;

pub use curve::{
    residual_lm, residual_rot, ChartKind, CurveState, Geometry, ProfileCurve, SecondDerivs,
    Segment, SingularEvent, StitchReport, SingularEventKind, SolverConfig,
};
pub use error::{Result, SolverError};
pub use hfield::{eval_h, HField, MeanCurvature};
pub use engine::{extend, sweep, RunSpec};
pub use asymptotics::{EtaAccumulator, FGPair, PeriodDiagnostics};
pub use report::CheckReport;
