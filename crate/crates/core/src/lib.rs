//! Projection-based solvers for monotone variational inequalities.
//!
//! Given a closed convex set `C` in a real Hilbert space and a monotone,
//! Lipschitz operator `A`, the problem `VI(C, A)` asks for `x ∈ C` with
//! `⟨Ax, y − x⟩ ≥ 0` for every `y ∈ C`. The crate provides:
//!
//! * [`hilbert`]: Euclidean space and a trapezoid-discretized `L2[0, 1]`.
//! * [`sets`]: whole space, boxes, balls and halfspaces with exact projections.
//! * [`operators`]: closed-form monotone operators and contractions.
//! * [`schedules`]: coefficient sequences, step policies, line searches and a
//!   checker for the summability conditions of the viscosity-Tseng scheme.
//! * [`solvers`]: the extragradient (EGM), Tseng (TEGM), viscosity subgradient
//!   extragradient (VSEGM), viscosity Tseng with line search (THEGM) and
//!   viscosity Tseng with computational errors (VTEGM) iterations, plus a run
//!   engine with traces and divergence diagnostics.
//! * [`oracle`]: independent fixed-point and grid-search solution finders.
//! * [`config`]: the JSON problem-file schema and the built-in presets.
//! * [`trace_csv`]: CSV serialization of solver traces.

pub mod config;
mod error;
pub mod hilbert;
pub mod operators;
pub mod oracle;
pub mod schedules;
pub mod sets;
pub mod solvers;
pub mod trace_csv;

pub use error::{Result, ViError};
pub use hilbert::{combine, inner, norm, Space, SpaceKind, Vector};
pub use operators::{Contraction, ContractionKind, Operator, OperatorKind};
pub use schedules::{
    eval_schedule, linesearch_residual, linesearch_tseng, validate_conditions, ConditionReport,
    LineSearchOutcome, PowerSequence, ScheduleSpec, ScheduleValues, Sequence, StepPolicy,
};
pub use sets::{ConvexSet, SetKind};
pub use solvers::{
    natural_residual, run, step_egm, step_tegm, step_thegm, step_vsegm, step_vtegm, Algorithm,
    RunStatus, SolverTrace, StoppingRule, TraceRow, VIProblem,
};
