//! Shadow-receiving environment and footprint projection.

mod heightfield;
mod raycast;
mod shadow;

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::GlobalCartesian;

pub use heightfield::{load_heightfield, HeightField, HeightFieldFile};
pub use raycast::{raycast, raycast_flat};
pub use shadow::{project_shadow, silhouette_samples, ShadowFootprint, DEFAULT_SILHOUETTE_SAMPLES};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvironmentError {
    #[error("failed to read {path}: {message}")]
    Io { path: String, message: String },
    #[error("height field parse error: {0}")]
    Parse(String),
    #[error("invalid height field: {0}")]
    Invalid(String),
    #[error("cell ({i}, {j}) has invalid height {value}")]
    InvalidCell { i: usize, j: usize, value: f64 },
    #[error("ray direction must be a unit vector (norm {0})")]
    NotUnit(f64),
    #[error("ray origin z = {z} lies below the surface at {surface}")]
    OriginBelowSurface { z: f64, surface: f64 },
    #[error("robot at {0} is outside the environment")]
    RobotOutside(GlobalCartesian),
    #[error("light pose is degenerate: {0}")]
    DegeneratePose(String),
    #[error("invalid silhouette sample count {0}: must be odd and at least 3")]
    InvalidSampleCount(usize),
    #[error("no silhouette ray reached a surface")]
    EmptyFootprint,
    #[error("the shadow tip left the environment")]
    TipMissed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurfaceKind {
    Ground,
    ElevatedTop,
    WallFace,
}

/// A point on a shadow-receiving surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub kind: SurfaceKind,
}

impl SurfacePoint {
    pub fn new(x: f64, y: f64, z: f64, kind: SurfaceKind) -> Self {
        Self { x, y, z, kind }
    }

    pub fn position(&self) -> Point3<f64> {
        Point3::new(self.x, self.y, self.z)
    }

    pub fn ground_position(&self) -> GlobalCartesian {
        GlobalCartesian::new(self.x, self.y)
    }
}

/// What shadows fall on: an unbounded floor or a height field.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Environment {
    #[default]
    Flat,
    HeightField(HeightField),
}

impl Environment {
    pub fn raycast(
        &self,
        origin: Point3<f64>,
        direction: Vector3<f64>,
    ) -> Result<Option<SurfacePoint>, EnvironmentError> {
        match self {
            Environment::Flat => raycast_flat(origin, direction),
            Environment::HeightField(field) => raycast(field, origin, direction),
        }
    }

    /// Surface height under a ground position, `None` outside the field.
    pub fn height_at(&self, p: GlobalCartesian) -> Option<f64> {
        match self {
            Environment::Flat => Some(0.0),
            Environment::HeightField(field) => field.height_at(p),
        }
    }
}

impl From<HeightField> for Environment {
    fn from(field: HeightField) -> Self {
        Environment::HeightField(field)
    }
}
