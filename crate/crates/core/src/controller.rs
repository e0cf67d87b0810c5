//! PID smoothing of light-pose updates over a first-order shadow plant.
//!
//! The control law works on 2-vectors ordered `(radial, angular)`. The plant
//! moves the shadow state `x = (r_v, beta_v)` by `diag(-a, b) * u` for a
//! light-angle change `u = (d_tilt, d_pan)`, plus `diag(-f, g)` times the
//! robot's own polar motion.
//!
//! The tilt channel has a negative plant gain (more tilt means a shorter
//! shadow), so the tracking error is mapped into actuator space before it
//! reaches the PID law. [`ControllerState`] carries that map per tick; see
//! [`ErrorMap`].

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{wrap_pi, wrap_two_pi};
use crate::projection::{LightPose, TiltBounds};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControllerError {
    #[error("controller input is not finite: {0:?}")]
    NonFiniteInput([f64; 2]),
    #[error("invalid controller configuration: {0}")]
    InvalidConfig(String),
    #[error("error map is singular")]
    SingularErrorMap,
}

/// Proportional, integral and derivative gain matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidGains {
    pub kp: Matrix2<f64>,
    pub ki: Matrix2<f64>,
    pub kd: Matrix2<f64>,
}

impl Default for PidGains {
    fn default() -> Self {
        Self {
            kp: Matrix2::from_diagonal_element(0.4),
            ki: Matrix2::from_diagonal_element(0.02),
            kd: Matrix2::from_diagonal_element(0.05),
        }
    }
}

impl PidGains {
    pub fn diagonal(kp: f64, ki: f64, kd: f64) -> Self {
        Self {
            kp: Matrix2::from_diagonal_element(kp),
            ki: Matrix2::from_diagonal_element(ki),
            kd: Matrix2::from_diagonal_element(kd),
        }
    }
}

/// Positive constants of the first-order shadow plant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantParams {
    pub a: f64,
    pub b: f64,
    pub f: f64,
    pub g: f64,
}

impl Default for PlantParams {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: 1.0,
            f: 1.0,
            g: 1.0,
        }
    }
}

impl PlantParams {
    pub fn validate(&self) -> Result<(), ControllerError> {
        for (name, v) in [("a", self.a), ("b", self.b), ("f", self.f), ("g", self.g)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ControllerError::InvalidConfig(format!(
                    "plant parameter {name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn input_matrix(&self) -> Matrix2<f64> {
        Matrix2::new(-self.a, 0.0, 0.0, self.b)
    }

    pub fn exogenous_matrix(&self) -> Matrix2<f64> {
        Matrix2::new(-self.f, 0.0, 0.0, self.g)
    }
}

/// Per-tick bound on the light-angle change, radians per tick.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateLimits {
    pub tilt: f64,
    pub pan: f64,
}

impl Default for RateLimits {
    fn default() -> Self {
        Self {
            tilt: 0.05,
            pan: 0.1,
        }
    }
}

impl RateLimits {
    pub const UNLIMITED: Self = Self {
        tilt: f64::INFINITY,
        pan: f64::INFINITY,
    };
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerConfig {
    pub gains: PidGains,
    pub plant: PlantParams,
    pub rate_limits: RateLimits,
    /// Symmetric clamp on each channel of the integral accumulator.
    pub integral_limit: f64,
    pub tilt_bounds: TiltBounds,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            gains: PidGains::default(),
            plant: PlantParams::default(),
            rate_limits: RateLimits::default(),
            integral_limit: 10.0,
            tilt_bounds: TiltBounds::default(),
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<(), ControllerError> {
        self.plant.validate()?;
        let g = &self.gains;
        if !(g.kp.iter().chain(g.ki.iter()).chain(g.kd.iter())).all(|v| v.is_finite()) {
            return Err(ControllerError::InvalidConfig(
                "gains must be finite".into(),
            ));
        }
        if !(self.rate_limits.tilt > 0.0 && self.rate_limits.pan > 0.0) {
            return Err(ControllerError::InvalidConfig(
                "rate limits must be positive".into(),
            ));
        }
        if self.integral_limit.is_nan() || self.integral_limit <= 0.0 {
            return Err(ControllerError::InvalidConfig(
                "integral limit must be positive".into(),
            ));
        }
        self.tilt_bounds
            .validate()
            .map_err(|e| ControllerError::InvalidConfig(e.to_string()))
    }
}

/// Maps the tracking error `P_d - x` into actuator space before the PID law.
///
/// `Oriented` flips the radial channel to match the sign of the plant input
/// matrix, leaving loop gains at `K * a` and `K * b`. `Normalized` applies
/// the inverse of the local tip sensitivity, which makes the loop gain equal
/// to the PID gains regardless of where the robot is.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ErrorMap {
    Oriented,
    Normalized(Matrix2<f64>),
}

impl ErrorMap {
    pub fn from_sensitivity(sensitivity: &Matrix2<f64>) -> Result<Self, ControllerError> {
        sensitivity
            .try_inverse()
            .filter(|m| m.iter().all(|v| v.is_finite()))
            .map(ErrorMap::Normalized)
            .ok_or(ControllerError::SingularErrorMap)
    }

    pub fn apply(&self, e: &Vector2<f64>) -> Vector2<f64> {
        match self {
            ErrorMap::Oriented => Vector2::new(-e[0], e[1]),
            ErrorMap::Normalized(m) => m * e,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerState {
    pub integral: [f64; 2],
    pub prev_error: [f64; 2],
    /// Rendered shadow state in FOV polar coordinates. May leave the sector
    /// while the loop is converging.
    pub x: [f64; 2],
    pub light_pose: LightPose,
    pub k: u64,
}

impl ControllerState {
    pub fn new(x: [f64; 2], light_pose: LightPose) -> Self {
        Self {
            integral: [0.0; 2],
            prev_error: [0.0; 2],
            x,
            light_pose,
            k: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlOutput {
    /// `(d_tilt, d_pan)` in radians.
    pub u: [f64; 2],
    pub saturated: [bool; 2],
}

/// One evaluation of the discrete PID law on error `e`.
///
/// The integral includes `e` itself, the derivative uses the previous error
/// (zero before the first call), and each output channel is clamped to its
/// rate limit afterwards.
pub fn pid_step(
    cfg: &ControllerConfig,
    state: &mut ControllerState,
    e: [f64; 2],
) -> Result<ControlOutput, ControllerError> {
    if !(e[0].is_finite() && e[1].is_finite()) {
        return Err(ControllerError::NonFiniteInput(e));
    }
    let ev = Vector2::from(e);
    let lim = cfg.integral_limit;
    let integral = Vector2::new(
        (state.integral[0] + e[0]).clamp(-lim, lim),
        (state.integral[1] + e[1]).clamp(-lim, lim),
    );
    let prev = Vector2::from(state.prev_error);
    let g = &cfg.gains;
    let raw = g.kp * ev + g.ki * integral + g.kd * (ev - prev);

    state.integral = integral.into();
    state.prev_error = e;

    let limits = [cfg.rate_limits.tilt, cfg.rate_limits.pan];
    let mut u = [0.0; 2];
    let mut saturated = [false; 2];
    for c in 0..2 {
        u[c] = raw[c].clamp(-limits[c], limits[c]);
        saturated[c] = u[c] != raw[c];
    }
    Ok(ControlOutput { u, saturated })
}

/// First-order plant: `x + diag(-a, b) u + diag(-f, g) delta_pr`.
pub fn plant_step(
    x: [f64; 2],
    u: [f64; 2],
    delta_pr: [f64; 2],
    params: &PlantParams,
) -> Result<[f64; 2], ControllerError> {
    for v in [x, u, delta_pr] {
        if !(v[0].is_finite() && v[1].is_finite()) {
            return Err(ControllerError::NonFiniteInput(v));
        }
    }
    let next = Vector2::from(x)
        + params.input_matrix() * Vector2::from(u)
        + params.exogenous_matrix() * Vector2::from(delta_pr);
    Ok(next.into())
}

/// Tracking error `setpoint - measured`, angular channel wrapped to `(-pi, pi]`.
pub fn tracking_error(setpoint: [f64; 2], measured: [f64; 2]) -> [f64; 2] {
    // both on the apex: the angles carry no information
    if setpoint[0].abs() <= APEX_EPS && measured[0].abs() <= APEX_EPS {
        return [setpoint[0] - measured[0], 0.0];
    }
    [
        setpoint[0] - measured[0],
        wrap_pi(setpoint[1] - measured[1]),
    ]
}

/// Radius below which a virtual-polar point counts as the sector apex.
pub const APEX_EPS: f64 = 1e-9;

/// Applies a control output to a light pose, honoring the tilt bounds.
/// Returns the new pose and whether the tilt was clamped.
pub fn apply_control(pose: &LightPose, u: [f64; 2], bounds: &TiltBounds) -> (LightPose, bool) {
    let (tilt, clamped) = bounds.clamp(pose.tilt + u[0]);
    (
        LightPose {
            tilt,
            pan: wrap_two_pi(pose.pan + u[1]),
        },
        clamped,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TickControl {
    pub output: ControlOutput,
    pub pose: LightPose,
    pub error: [f64; 2],
    pub tilt_clamped: bool,
}

/// Closes the loop for one tick.
///
/// Computes `e = setpoint - measured`, runs the PID law on the mapped error,
/// applies the result to the light pose and advances the state. The state's
/// `x` becomes the plant model's prediction for the next tick; callers that
/// measure the rendered shadow directly overwrite it.
pub fn control_tick(
    cfg: &ControllerConfig,
    state: &mut ControllerState,
    setpoint: [f64; 2],
    measured: [f64; 2],
    delta_pr: [f64; 2],
    map: &ErrorMap,
) -> Result<TickControl, ControllerError> {
    if !(measured[0].is_finite() && measured[1].is_finite()) {
        return Err(ControllerError::NonFiniteInput(measured));
    }
    let error = tracking_error(setpoint, measured);
    let mapped = map.apply(&Vector2::from(error));
    let output = pid_step(cfg, state, mapped.into())?;
    let (pose, tilt_clamped) = apply_control(&state.light_pose, output.u, &cfg.tilt_bounds);
    state.light_pose = pose;
    state.x = plant_step(measured, output.u, delta_pr, &cfg.plant)?;
    state.k += 1;
    Ok(TickControl {
        output,
        pose,
        error,
        tilt_clamped,
    })
}
