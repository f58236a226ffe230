//! Linear and nonlinear static analysis of planar frames.

mod model;
mod pushover;
mod structure;
mod target;

pub use model::{lateral_pattern, lateral_pattern_from, FrameAnalysis};
pub use pushover::{
    axial_forces, pushover, read_curve_csv, state_at, story_drifts, CurveRow, HingeEnd, HingeState, Monitor,
    PerformanceState, PushoverControl, PushoverStep, PushoverTrace, Termination,
};
pub use structure::{linear_static, Element, HingeSpec, LinearSolution, LoadCase, Structure};
pub use target::{
    effective_period, idealized_stiffness, rayleigh_period, target_displacement, C0Table, TargetDisplacementInputs,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("invalid model: {0}")]
    Model(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("stiffness matrix is not positive definite (mechanism)")]
    Mechanism,
    #[error("structure forms a mechanism under gravity loads")]
    GravityMechanism,
    #[error("hinge event limit exceeded within one step ({events} events)")]
    NonConvergence { events: usize },
    #[error("roof displacement {requested:.5} m beyond the attained {reached:.5} m")]
    NotReached { requested: f64, reached: f64 },
}
