//! Tick-synchronous closed-loop simulation.

mod compare;
mod engine;
mod kinematics;
mod metrics;
mod scenario;

use thiserror::Error;

use crate::controller::ControllerError;
use crate::environment::EnvironmentError;
use crate::geometry::GeometryError;
use crate::projection::ProjectionError;

pub use compare::{compare_modes, compare_modes_with, ComparisonReport, ComparisonRun, TracePoint};
pub use engine::{run_scenario, Simulation, TickFlags, TickRecord, VISIBILITY_TOL};
pub use kinematics::{Advance, Command, Kinematics, RobotState, DEFAULT_WAYPOINT_SPEED};
pub use metrics::{error_norm, Metrics, CONVERGENCE_TOL};
pub use scenario::{
    ControlMode, ControllerSection, EnvironmentSource, FrameSection, LightSection, PlantMode,
    PlantSection, PolarPoint, RobotSection, Scenario, ScenarioFile, Trajectory, TrajectoryFile,
    DEFAULT_TICK_RATE,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("failed to read {path}: {message}")]
    Io { path: String, message: String },
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
    #[error(transparent)]
    Environment(#[from] EnvironmentError),
    #[error(transparent)]
    Controller(#[from] ControllerError),
}

impl SimError {
    /// Whether the error stems from bad input rather than a failure mid-run.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            SimError::Io { .. }
                | SimError::Parse(_)
                | SimError::Scenario(_)
                | SimError::Environment(_)
        )
    }
}
