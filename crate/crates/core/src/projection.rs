//! Directional-light pose that casts the robot's shadow tip onto a setpoint.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Matrix2, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    global_to_fov_polar, map_to_virtual, virtual_polar_to_global_unchecked,
    world_polar_to_global_unchecked, wrap_two_pi, FrameConfig, GeometryError, GlobalCartesian,
    VirtualPolar, WorldPolar,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProjectionError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("degenerate geometry: {0}")]
    Degenerate(&'static str),
    #[error("tilt {0} rad is outside (0, pi/2)")]
    TiltOutOfDomain(f64),
    #[error("invalid robot geometry: {0}")]
    InvalidRobot(String),
    #[error("invalid tilt bounds [{min}, {max}]")]
    InvalidTiltBounds { min: f64, max: f64 },
}

/// Tilt (elevation above the horizon) and pan (azimuth of the light's travel
/// direction) of the virtual directional light, radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LightPose {
    pub tilt: f64,
    pub pan: f64,
}

impl LightPose {
    pub fn new(tilt: f64, pan: f64) -> Self {
        Self {
            tilt,
            pan: wrap_two_pi(pan),
        }
    }

    /// Unit vector along which light travels.
    pub fn direction(&self) -> Vector3<f64> {
        let (sa, ca) = self.tilt.sin_cos();
        let (sg, cg) = self.pan.sin_cos();
        Vector3::new(cg * ca, sg * ca, -sa)
    }
}

/// Saturation bounds on the light tilt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TiltBounds {
    pub min: f64,
    pub max: f64,
}

impl Default for TiltBounds {
    fn default() -> Self {
        Self {
            min: 2f64.to_radians(),
            max: 85f64.to_radians(),
        }
    }
}

impl TiltBounds {
    pub fn validate(&self) -> Result<(), ProjectionError> {
        if !(self.min > 0.0 && self.min < self.max && self.max < FRAC_PI_2) {
            return Err(ProjectionError::InvalidTiltBounds {
                min: self.min,
                max: self.max,
            });
        }
        Ok(())
    }

    /// Clamps `tilt` into the bounds, reporting whether it moved.
    pub fn clamp(&self, tilt: f64) -> (f64, bool) {
        let c = tilt.clamp(self.min, self.max);
        (c, c != tilt)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotGeometry {
    /// Height of the robot's top above its base, meters.
    pub height: f64,
    /// Silhouette half-width used when sampling the footprint, meters.
    pub footprint_radius: f64,
}

impl Default for RobotGeometry {
    fn default() -> Self {
        Self {
            height: 1.2,
            footprint_radius: 0.3,
        }
    }
}

impl RobotGeometry {
    pub fn validate(&self) -> Result<(), ProjectionError> {
        if !(self.height.is_finite() && self.height > 0.0) {
            return Err(ProjectionError::InvalidRobot(format!(
                "height must be positive, got {}",
                self.height
            )));
        }
        if !(self.footprint_radius.is_finite() && self.footprint_radius >= 0.0) {
            return Err(ProjectionError::InvalidRobot(format!(
                "footprint radius must be non-negative, got {}",
                self.footprint_radius
            )));
        }
        Ok(())
    }
}

/// Tilt that stretches a shadow of a robot `h` tall to length `d`.
pub fn compute_tilt(h: f64, d: f64) -> Result<f64, ProjectionError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(ProjectionError::InvalidRobot(format!(
            "height must be positive, got {h}"
        )));
    }
    if d == 0.0 {
        return Err(ProjectionError::Degenerate(
            "shadow tip coincides with the robot base",
        ));
    }
    if !(d > 0.0 && d.is_finite()) {
        return Err(ProjectionError::Degenerate(
            "shadow length must be positive and finite",
        ));
    }
    Ok((h / d).atan())
}

/// Bearing from the robot's ground position to the shadow setpoint, in `[0, 2pi)`.
pub fn compute_pan(p_r: GlobalCartesian, p_d: GlobalCartesian) -> Result<f64, ProjectionError> {
    let delta = p_d - p_r;
    if delta.x == 0.0 && delta.y == 0.0 {
        return Err(ProjectionError::Degenerate("robot and setpoint coincide"));
    }
    Ok(wrap_two_pi(delta.heading()))
}

/// Exact light pose for one robot position, with everything derived on the way.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseSolution {
    pub pose: LightPose,
    pub setpoint: VirtualPolar,
    pub robot: GlobalCartesian,
    pub target: GlobalCartesian,
    pub distance: f64,
    /// Tilt was saturated at a bound (shadow will not reach the setpoint).
    pub clamped: bool,
}

/// Solves the direct-mode light pose for a robot at `p_r`.
///
/// The setpoint comes from the polar mapping; the tilt follows from the
/// shadow-robot distance and the pan is the bearing toward the setpoint.
/// A zero distance saturates at the upper tilt bound instead of failing.
pub fn compute_light_pose(
    p_r: WorldPolar,
    geom: &RobotGeometry,
    cfg: &FrameConfig,
    bounds: &TiltBounds,
) -> Result<PoseSolution, ProjectionError> {
    geom.validate()?;
    let setpoint = map_to_virtual(p_r, cfg)?;
    let robot = world_polar_to_global_unchecked(p_r, cfg);
    let target = virtual_polar_to_global_unchecked(setpoint, cfg);
    let distance = robot.distance(target);

    if distance == 0.0 {
        return Ok(PoseSolution {
            pose: LightPose::new(bounds.max, cfg.human_facing),
            setpoint,
            robot,
            target,
            distance,
            clamped: true,
        });
    }
    let (tilt, clamped) = bounds.clamp(compute_tilt(geom.height, distance)?);
    let pan = compute_pan(robot, target)?;
    Ok(PoseSolution {
        pose: LightPose { tilt, pan },
        setpoint,
        robot,
        target,
        distance,
        clamped,
    })
}

/// Length of the shadow cast on flat ground.
pub fn shadow_length(h: f64, tilt: f64) -> f64 {
    h / tilt.tan()
}

/// Shadow tip on the ground plane for a robot of height `h` standing at `p_r`.
pub fn forward_project_flat(
    p_r: GlobalCartesian,
    h: f64,
    pose: &LightPose,
) -> Result<GlobalCartesian, ProjectionError> {
    if !(pose.tilt > 0.0 && pose.tilt < FRAC_PI_2) {
        return Err(ProjectionError::TiltOutOfDomain(pose.tilt));
    }
    let len = shadow_length(h, pose.tilt);
    Ok(p_r + GlobalCartesian::from_polar(len, pose.pan))
}

/// Sensitivity of the flat-ground tip, in FOV polar coordinates `(r, beta)`,
/// to the light angles `(tilt, pan)`.
///
/// Rows are `(r, beta)`, columns `(tilt, pan)`. The radial distance used for
/// the angular row is floored at `min_radius` so the matrix stays finite
/// when the tip sits on the human.
pub fn tip_sensitivity(
    p_r: GlobalCartesian,
    h: f64,
    pose: &LightPose,
    cfg: &FrameConfig,
    min_radius: f64,
) -> Result<Matrix2<f64>, ProjectionError> {
    let tip = forward_project_flat(p_r, h, pose)?;
    let s = pose.tilt.sin();
    let len = shadow_length(h, pose.tilt);
    let (sg, cg) = pose.pan.sin_cos();
    // d tip / d tilt and d tip / d pan in the plane
    let dt_da = [-h / (s * s) * cg, -h / (s * s) * sg];
    let dt_dg = [-len * sg, len * cg];

    let rel = tip - cfg.human_position;
    let r = rel.norm().max(min_radius);
    let (ux, uy) = if rel.norm() > 0.0 {
        (rel.x / rel.norm(), rel.y / rel.norm())
    } else {
        let c = GlobalCartesian::from_polar(1.0, cfg.human_facing);
        (c.x, c.y)
    };
    let dr = [ux, uy];
    let db = [-uy / r, ux / r];
    let dot = |a: [f64; 2], b: [f64; 2]| a[0] * b[0] + a[1] * b[1];
    Ok(Matrix2::new(
        dot(dr, dt_da),
        dot(dr, dt_dg),
        dot(db, dt_da),
        dot(db, dt_dg),
    ))
}

/// FOV polar coordinates of the flat-ground tip for a pose.
pub fn flat_tip_fov_polar(
    p_r: GlobalCartesian,
    h: f64,
    pose: &LightPose,
    cfg: &FrameConfig,
) -> Result<[f64; 2], ProjectionError> {
    Ok(global_to_fov_polar(
        forward_project_flat(p_r, h, pose)?,
        cfg,
    ))
}
