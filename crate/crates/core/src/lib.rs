//! Virtual-shadow cues for a robot working behind a human.
//!
//! The robot's position in the semicircle behind the human is mapped
//! linearly onto a point inside the human's display field of view. A virtual
//! directional light is then posed so the robot's shadow tip lands on that
//! point, optionally smoothed by a PID loop, and the silhouette is cast onto
//! a height-field model of the room.
//!
//! * [`geometry`]: frames and the polar mapping
//! * [`projection`]: light pose from setpoint, and the flat-ground forward model
//! * [`environment`]: height fields, ray casting and shadow footprints
//! * [`controller`]: PID law and first-order shadow plant
//! * [`sim`]: scenarios, the tick loop and run metrics
//! * [`batch`]: parallel/sequential batch evaluation
//! * [`telemetry`]: tick-log encoding

pub mod batch;
pub mod benchmarks;
pub mod controller;
pub mod environment;
pub mod geometry;
pub mod projection;
pub mod sim;
pub mod telemetry;

pub use geometry::{FrameConfig, GlobalCartesian, VirtualPolar, WorldPolar};
pub use projection::{LightPose, RobotGeometry};
pub use sim::{Scenario, Simulation, TickRecord};
