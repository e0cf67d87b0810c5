//! Coordinate frames around the human and the linear shadow mapping.
//!
//! Three frames are involved:
//!
//! * the **world polar** frame covers the real-world semicircle behind the
//!   human (radius `l_w`, apex angle `theta_w`). `beta_w` is measured from
//!   the human's right-hand direction, sweeping through the rear half-plane,
//!   so `beta_w = 0` is to the right and `beta_w = theta_w` is to the left.
//! * the **virtual polar** frame covers the field-of-view sector in front of
//!   the human (radius `l_v`, apex angle `theta_v`, centered on the facing
//!   direction). `beta_v` is measured from the right FOV boundary toward the
//!   left boundary.
//! * the **global** frame is a plain Cartesian plane; headings are measured
//!   counter-clockwise from `+x`.
//!
//! Both polar frames share their apex at the human position, and a robot
//! moving to the human's right keeps its shadow on the right side of the FOV.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Slack granted when snapping floating-point noise back onto a boundary.
pub const BOUNDARY_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("{field} = {value} is outside [{min}, {max}]")]
    OutOfRange {
        field: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("{field} must be finite, got {value}")]
    NotFinite { field: &'static str, value: f64 },
    #[error("invalid frame configuration: {0}")]
    InvalidFrame(String),
}

fn check_range(field: &'static str, value: f64, min: f64, max: f64) -> Result<(), GeometryError> {
    if !value.is_finite() {
        return Err(GeometryError::NotFinite { field, value });
    }
    if value < min || value > max {
        return Err(GeometryError::OutOfRange {
            field,
            value,
            min,
            max,
        });
    }
    Ok(())
}

/// A point in the global Cartesian plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GlobalCartesian {
    pub x: f64,
    pub y: f64,
}

impl GlobalCartesian {
    pub const ORIGIN: Self = Self { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(radius: f64, heading: f64) -> Self {
        Self::new(radius * heading.cos(), radius * heading.sin())
    }

    pub fn distance(self, other: Self) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Bearing of `self` seen from the origin, in `(-pi, pi]`.
    pub fn heading(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn rotated(self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl std::ops::Add for GlobalCartesian {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for GlobalCartesian {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Mul<f64> for GlobalCartesian {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Self::new(self.x * rhs, self.y * rhs)
    }
}

impl fmt::Display for GlobalCartesian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.6}, {:.6})", self.x, self.y)
    }
}

/// Robot position in the real-world semicircle behind the human.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorldPolar {
    pub r_w: f64,
    pub beta_w: f64,
}

impl WorldPolar {
    pub const fn new(r_w: f64, beta_w: f64) -> Self {
        Self { r_w, beta_w }
    }

    pub fn validate(&self, cfg: &FrameConfig) -> Result<(), GeometryError> {
        check_range("r_w", self.r_w, 0.0, cfg.l_w)?;
        check_range("beta_w", self.beta_w, 0.0, cfg.theta_w)
    }
}

/// Shadow position in the FOV sector in front of the human.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VirtualPolar {
    pub r_v: f64,
    pub beta_v: f64,
}

impl VirtualPolar {
    pub const fn new(r_v: f64, beta_v: f64) -> Self {
        Self { r_v, beta_v }
    }

    pub fn validate(&self, cfg: &FrameConfig) -> Result<(), GeometryError> {
        check_range("r_v", self.r_v, 0.0, cfg.l_v)?;
        check_range("beta_v", self.beta_v, 0.0, cfg.theta_v)
    }

    pub fn to_array(self) -> [f64; 2] {
        [self.r_v, self.beta_v]
    }
}

/// Layout of the real-world semicircle and the virtual FOV sector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameConfig {
    /// User-declared radius of the real-world semicircle, meters.
    pub l_w: f64,
    /// Apex angle of the real-world region; pi for a semicircle.
    pub theta_w: f64,
    /// Maximum hologram distance, meters.
    pub l_v: f64,
    /// Display field of view, radians.
    pub theta_v: f64,
    pub human_position: GlobalCartesian,
    /// Global heading of the FOV centerline, radians.
    pub human_facing: f64,
}

impl Default for FrameConfig {
    fn default() -> Self {
        Self {
            l_w: 10.0,
            theta_w: PI,
            l_v: 5.0,
            theta_v: 34f64.to_radians(),
            human_position: GlobalCartesian::ORIGIN,
            human_facing: PI / 2.0,
        }
    }
}

impl FrameConfig {
    pub fn with_world_radius(l_w: f64) -> Self {
        Self {
            l_w,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let all_finite = [
            self.l_w,
            self.theta_w,
            self.l_v,
            self.theta_v,
            self.human_facing,
        ]
        .iter()
        .all(|v| v.is_finite())
            && self.human_position.is_finite();
        if !all_finite {
            return Err(GeometryError::InvalidFrame("non-finite field".into()));
        }
        if self.l_w <= 0.0 || self.l_v <= 0.0 {
            return Err(GeometryError::InvalidFrame(format!(
                "radii must be positive (l_w = {}, l_v = {})",
                self.l_w, self.l_v
            )));
        }
        if !(0.0 < self.theta_v && self.theta_v < self.theta_w && self.theta_w <= PI) {
            return Err(GeometryError::InvalidFrame(format!(
                "need 0 < theta_v < theta_w <= pi (theta_v = {}, theta_w = {})",
                self.theta_v, self.theta_w
            )));
        }
        Ok(())
    }

    /// Global heading of `beta_w = 0`, the human's right-hand side.
    fn world_reference_heading(&self) -> f64 {
        self.human_facing - PI / 2.0
    }

    /// Global heading of `beta_v = 0`, the right FOV boundary.
    fn virtual_reference_heading(&self) -> f64 {
        self.human_facing - self.theta_v / 2.0
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_pi(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// Wraps an angle into `[0, 2pi)`.
pub fn wrap_two_pi(angle: f64) -> f64 {
    let a = angle.rem_euclid(2.0 * PI);
    // rem_euclid can round up to exactly 2pi for tiny negative inputs
    if a >= 2.0 * PI {
        0.0
    } else {
        a
    }
}

/// The linear map from the real-world semicircle onto the FOV sector.
pub fn map_to_virtual(p: WorldPolar, cfg: &FrameConfig) -> Result<VirtualPolar, GeometryError> {
    p.validate(cfg)?;
    Ok(map_to_virtual_unchecked(p, cfg))
}

pub(crate) fn map_to_virtual_unchecked(p: WorldPolar, cfg: &FrameConfig) -> VirtualPolar {
    VirtualPolar {
        r_v: cfg.l_v - p.r_w * (cfg.l_v / cfg.l_w),
        beta_v: p.beta_w * (cfg.theta_v / cfg.theta_w),
    }
}

pub fn world_polar_to_global(
    p: WorldPolar,
    cfg: &FrameConfig,
) -> Result<GlobalCartesian, GeometryError> {
    p.validate(cfg)?;
    Ok(world_polar_to_global_unchecked(p, cfg))
}

pub(crate) fn world_polar_to_global_unchecked(p: WorldPolar, cfg: &FrameConfig) -> GlobalCartesian {
    // sweeping from the right through the rear is clockwise in the global frame
    let heading = cfg.world_reference_heading() - p.beta_w;
    cfg.human_position + GlobalCartesian::from_polar(p.r_w, heading)
}

/// World-polar coordinates of an arbitrary global point, without bounds.
///
/// The angle is wrapped so that the rear half-plane maps to `[0, pi]` and
/// the front half-plane to `(-pi, 0)`.
pub fn global_to_world_polar_raw(g: GlobalCartesian, cfg: &FrameConfig) -> WorldPolar {
    let rel = g - cfg.human_position;
    let r = rel.norm();
    if r == 0.0 {
        return WorldPolar::new(0.0, 0.0);
    }
    let beta = wrap_pi(cfg.world_reference_heading() - rel.heading());
    WorldPolar::new(r, beta)
}

/// Strict inverse of [`world_polar_to_global`]. Points within
/// [`BOUNDARY_EPS`] of the semicircle are snapped onto it.
pub fn global_to_world_polar(
    g: GlobalCartesian,
    cfg: &FrameConfig,
) -> Result<WorldPolar, GeometryError> {
    let mut p = global_to_world_polar_raw(g, cfg);
    // at the human the bearing is noise
    if p.r_w <= BOUNDARY_EPS && !(0.0..=cfg.theta_w).contains(&p.beta_w) {
        p.beta_w = 0.0;
    }
    if p.r_w > cfg.l_w && p.r_w <= cfg.l_w + BOUNDARY_EPS {
        p.r_w = cfg.l_w;
    }
    if p.beta_w < 0.0 && p.beta_w >= -BOUNDARY_EPS {
        p.beta_w = 0.0;
    }
    // the far edge may come back as -pi when theta_w = pi
    if p.beta_w <= -PI + BOUNDARY_EPS && cfg.theta_w >= PI - BOUNDARY_EPS {
        p.beta_w = cfg.theta_w;
    }
    if p.beta_w > cfg.theta_w && p.beta_w <= cfg.theta_w + BOUNDARY_EPS {
        p.beta_w = cfg.theta_w;
    }
    p.validate(cfg)?;
    Ok(p)
}

pub fn virtual_polar_to_global(
    p: VirtualPolar,
    cfg: &FrameConfig,
) -> Result<GlobalCartesian, GeometryError> {
    p.validate(cfg)?;
    Ok(virtual_polar_to_global_unchecked(p, cfg))
}

pub(crate) fn virtual_polar_to_global_unchecked(
    p: VirtualPolar,
    cfg: &FrameConfig,
) -> GlobalCartesian {
    let heading = cfg.virtual_reference_heading() + p.beta_v;
    cfg.human_position + GlobalCartesian::from_polar(p.r_v, heading)
}

/// FOV-frame polar coordinates `(r, beta)` of any global point.
///
/// Unlike [`VirtualPolar`] the result is unbounded: a shadow that has left
/// the sector still has a well-defined position, which the controller needs
/// in order to steer it back. `beta` is wrapped so that the sector centerline
/// sits furthest from the wrap seam.
pub fn global_to_fov_polar(g: GlobalCartesian, cfg: &FrameConfig) -> [f64; 2] {
    let rel = g - cfg.human_position;
    let r = rel.norm();
    if r == 0.0 {
        return [0.0, cfg.theta_v / 2.0];
    }
    let from_center = wrap_pi(rel.heading() - cfg.human_facing);
    [r, from_center + cfg.theta_v / 2.0]
}

/// Whether a global point lies in the FOV sector, with slack `tol` meters
/// radially and `tol` radians angularly.
pub fn in_fov_sector(g: GlobalCartesian, cfg: &FrameConfig, tol: f64) -> bool {
    let rel = g - cfg.human_position;
    let r = rel.norm();
    if r <= tol {
        return true;
    }
    let deviation = wrap_pi(rel.heading() - cfg.human_facing).abs();
    r <= cfg.l_v + tol && deviation <= cfg.theta_v / 2.0 + tol
}

/// Planar distance between the robot and its shadow setpoint.
pub fn shadow_robot_distance(
    p_r: WorldPolar,
    p_d: VirtualPolar,
    cfg: &FrameConfig,
) -> Result<f64, GeometryError> {
    let robot = world_polar_to_global(p_r, cfg)?;
    let shadow = virtual_polar_to_global(p_d, cfg)?;
    Ok(robot.distance(shadow))
}

/// Nearest point of the closed rear half-disk to `g`.
///
/// Returns the point and whether it had to move by more than
/// [`BOUNDARY_EPS`].
pub fn clamp_to_rear_semicircle(g: GlobalCartesian, cfg: &FrameConfig) -> (GlobalCartesian, bool) {
    let rel = g - cfg.human_position;
    // local frame: u along the right-hand direction, w pointing backwards
    let right = GlobalCartesian::from_polar(1.0, cfg.world_reference_heading());
    let back = GlobalCartesian::from_polar(1.0, cfg.human_facing + PI);
    let mut u = rel.x * right.x + rel.y * right.y;
    let mut w = rel.x * back.x + rel.y * back.y;
    if w < 0.0 {
        w = 0.0;
        u = u.clamp(-cfg.l_w, cfg.l_w);
    } else {
        let r = u.hypot(w);
        if r > cfg.l_w {
            u *= cfg.l_w / r;
            w *= cfg.l_w / r;
        }
    }
    let clamped = cfg.human_position + right * u + back * w;
    let moved = clamped.distance(g) > BOUNDARY_EPS;
    (if moved { clamped } else { g }, moved)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cfg10() -> FrameConfig {
        FrameConfig::with_world_radius(10.0)
    }

    #[test]
    fn mapping_boundaries() {
        let cfg = cfg10();
        let near = map_to_virtual(WorldPolar::new(0.0, 0.0), &cfg).unwrap();
        assert_eq!(near, VirtualPolar::new(5.0, 0.0));
        let rim = map_to_virtual(WorldPolar::new(10.0, PI), &cfg).unwrap();
        assert_abs_diff_eq!(rim.r_v, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rim.beta_v, 0.59341, epsilon = 1e-5);
    }

    #[test]
    fn mapping_interior_point() {
        let v = map_to_virtual(WorldPolar::new(4.0, PI / 2.0), &cfg10()).unwrap();
        assert_abs_diff_eq!(v.r_v, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.beta_v, 0.29671, epsilon = 1e-5);
    }

    #[test]
    fn mapping_rejects_out_of_range() {
        let err = map_to_virtual(WorldPolar::new(10.5, 0.1), &cfg10()).unwrap_err();
        assert!(matches!(
            err,
            GeometryError::OutOfRange { field: "r_w", .. }
        ));
        let err = map_to_virtual(WorldPolar::new(1.0, -0.1), &cfg10()).unwrap_err();
        assert!(matches!(
            err,
            GeometryError::OutOfRange {
                field: "beta_w",
                ..
            }
        ));
        let err = map_to_virtual(WorldPolar::new(f64::NAN, 0.1), &cfg10()).unwrap_err();
        assert!(matches!(err, GeometryError::NotFinite { field: "r_w", .. }));
    }

    #[test]
    fn world_frame_examples() {
        let cfg = cfg10();
        let behind = world_polar_to_global(WorldPolar::new(1.0, PI / 2.0), &cfg).unwrap();
        assert_abs_diff_eq!(behind.x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(behind.y, -1.0, epsilon = 1e-12);
        let origin = world_polar_to_global(WorldPolar::new(0.0, 1.3), &cfg).unwrap();
        assert_eq!(origin.norm(), 0.0);
        let right = world_polar_to_global(WorldPolar::new(2.0, 0.0), &cfg).unwrap();
        assert_abs_diff_eq!(right.x, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(right.y, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn virtual_frame_examples() {
        let cfg = cfg10();
        let apex = virtual_polar_to_global(VirtualPolar::new(0.0, 0.2), &cfg).unwrap();
        assert_eq!(apex.norm(), 0.0);
        let center =
            virtual_polar_to_global(VirtualPolar::new(1.0, cfg.theta_v / 2.0), &cfg).unwrap();
        assert_abs_diff_eq!(center.x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(center.y, 1.0, epsilon = 1e-12);
        let edge = virtual_polar_to_global(VirtualPolar::new(5.0, 0.0), &cfg).unwrap();
        assert_abs_diff_eq!(edge.x, 1.4618, epsilon = 1e-4);
        assert_abs_diff_eq!(edge.y, 4.7815, epsilon = 1e-4);
    }

    #[test]
    fn distance_examples() {
        let cfg = cfg10();
        let d = shadow_robot_distance(
            WorldPolar::new(1.0, PI / 2.0),
            VirtualPolar::new(1.0, cfg.theta_v / 2.0),
            &cfg,
        )
        .unwrap();
        assert_abs_diff_eq!(d, 2.0, epsilon = 1e-12);
        let d = shadow_robot_distance(WorldPolar::new(0.0, 0.0), VirtualPolar::new(0.0, 0.0), &cfg)
            .unwrap();
        assert_eq!(d, 0.0);
        let d = shadow_robot_distance(WorldPolar::new(2.0, 0.0), VirtualPolar::new(0.0, 0.3), &cfg)
            .unwrap();
        assert_abs_diff_eq!(d, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn frame_validation() {
        assert!(cfg10().validate().is_ok());
        let bad = FrameConfig {
            theta_v: 4.0,
            ..cfg10()
        };
        assert!(bad.validate().is_err());
        let bad = FrameConfig {
            l_w: 0.0,
            ..cfg10()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn offset_human_and_rotated_facing() {
        let cfg = FrameConfig {
            human_position: GlobalCartesian::new(3.0, -2.0),
            human_facing: 0.0,
            ..cfg10()
        };
        // facing +x: right-hand side is -y, behind is -x
        let right = world_polar_to_global(WorldPolar::new(1.0, 0.0), &cfg).unwrap();
        assert_abs_diff_eq!(right.x, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(right.y, -3.0, epsilon = 1e-12);
        let behind = world_polar_to_global(WorldPolar::new(1.0, PI / 2.0), &cfg).unwrap();
        assert_abs_diff_eq!(behind.x, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(behind.y, -2.0, epsilon = 1e-12);
    }

    #[test]
    fn clamp_policy() {
        let cfg = cfg10();
        let (p, moved) = clamp_to_rear_semicircle(GlobalCartesian::new(1.0, 2.0), &cfg);
        assert!(moved);
        assert_abs_diff_eq!(p.x, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.y, 0.0, epsilon = 1e-12);
        let (p, moved) = clamp_to_rear_semicircle(GlobalCartesian::new(0.0, -20.0), &cfg);
        assert!(moved);
        assert_abs_diff_eq!(p.y, -10.0, epsilon = 1e-12);
        let (p, moved) = clamp_to_rear_semicircle(GlobalCartesian::new(30.0, 5.0), &cfg);
        assert!(moved);
        assert_abs_diff_eq!(p.x, 10.0, epsilon = 1e-12);
        let inside = GlobalCartesian::new(-3.0, -4.0);
        assert_eq!(clamp_to_rear_semicircle(inside, &cfg), (inside, false));
    }

    #[test]
    fn rim_points_survive_round_trip() {
        let cfg = cfg10();
        for beta in [0.0, 0.3, PI / 2.0, PI - 1e-3, PI] {
            let p = WorldPolar::new(10.0, beta);
            let g = world_polar_to_global(p, &cfg).unwrap();
            let back = global_to_world_polar(g, &cfg).unwrap();
            assert_abs_diff_eq!(back.r_w, p.r_w, epsilon = 1e-9);
            assert_abs_diff_eq!(back.beta_w, p.beta_w, epsilon = 1e-9);
        }
    }

    #[test]
    fn fov_polar_matches_virtual_frame() {
        let cfg = cfg10();
        let p = VirtualPolar::new(3.2, 0.41);
        let g = virtual_polar_to_global(p, &cfg).unwrap();
        let [r, b] = global_to_fov_polar(g, &cfg);
        assert_abs_diff_eq!(r, 3.2, epsilon = 1e-12);
        assert_abs_diff_eq!(b, 0.41, epsilon = 1e-12);
        assert!(in_fov_sector(g, &cfg, 1e-9));
        assert!(!in_fov_sector(GlobalCartesian::new(0.0, -1.0), &cfg, 1e-9));
        assert!(!in_fov_sector(GlobalCartesian::new(0.0, 5.5), &cfg, 1e-9));
    }

    #[test]
    fn wrapping() {
        assert_abs_diff_eq!(wrap_pi(3.0 * PI), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(wrap_pi(-PI / 2.0), -PI / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(wrap_two_pi(-PI / 2.0), 1.5 * PI, epsilon = 1e-12);
        assert!(wrap_two_pi(-1e-18) < 2.0 * PI);
    }

    #[test]
    fn speck_in_front_of_human_is_the_apex() {
        let cfg = cfg10();
        let p = global_to_world_polar(GlobalCartesian::new(6e-18, 3e-17), &cfg).unwrap();
        assert_eq!(p.beta_w, 0.0);
        assert!(global_to_world_polar(GlobalCartesian::new(0.0, 1e-6), &cfg).is_err());
    }
}
