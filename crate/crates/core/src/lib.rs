//! Elastic velocity-stress staggered-grid wavefield simulation on layered media.

pub mod error;
pub mod field;
pub mod geometry;
pub mod medium;
pub mod real;
pub mod receiver;
pub mod scenario;
pub mod signal;
pub mod solver;
pub mod source;
pub mod traceio;

pub use error::{Error, Result};
pub use field::Field3;
pub use geometry::{Component, GeographicBounds, Grid, LevelOfDetail, SimulationDomain, LEVELS};
pub use medium::{Layer, LayeredModel, ParameterVolume};
pub use real::Real;
pub use receiver::{Receiver, ReceiverPoint, TraceSet};
pub use scenario::{ResolvedScenario, Scenario};
pub use solver::{
    Backend, BackendKind, FieldSet, RunOutcome, Simulation, SimulationSetup, SolverOptions, SpongeProfile,
    StepReport,
};
pub use source::{MomentTensor, MomentTensorSource, PointSource, SourceTimeFunction, StfKind};
