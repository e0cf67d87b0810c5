//! Scenario files.
//!
//! A scenario is a TOML (or JSON, over the wire) document. Angles are given
//! in degrees and converted to radians on load; every section is optional
//! except `duration` and `[trajectory]`. Unknown keys are rejected.
//!
//! ```toml
//! name = "near-pass"
//! duration = 12.0          # seconds
//! tick_rate = 30.0         # Hz
//! seed = 7
//! control_mode = "pid"     # "direct" | "pid"
//! plant_mode = "geometric" # "geometric" | "model"
//! environment = "room.toml"   # height-field file, relative to this file
//!
//! [frame]
//! l_w = 10.0
//! l_v = 5.0
//! theta_v_deg = 34.0
//! human_facing_deg = 90.0
//!
//! [robot]
//! height = 1.2
//! footprint_radius = 0.3
//!
//! [controller]
//! kp = [[0.4, 0.0], [0.0, 0.4]]   # row-major
//!
//! [trajectory]
//! kind = "waypoints"
//! speed = 1.0
//! points = [{ r = 6.0, beta_deg = 5.0 }, { r = 6.0, beta_deg = 175.0 }]
//! ```

use std::path::{Path, PathBuf};

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::controller::{ControllerConfig, PidGains, PlantParams, RateLimits};
use crate::environment::{load_heightfield, Environment, HeightField, HeightFieldFile};
use crate::geometry::{FrameConfig, GlobalCartesian, WorldPolar};
use crate::projection::{LightPose, RobotGeometry, TiltBounds};

pub const DEFAULT_TICK_RATE: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ControlMode {
    Direct,
    #[default]
    Pid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PlantMode {
    #[default]
    Geometric,
    Model,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Trajectory {
    Stationary {
        at: WorldPolar,
    },
    /// Constant-speed straight segments through the points, starting at the first.
    Waypoints {
        speed: f64,
        points: Vec<WorldPolar>,
    },
    Unicycle {
        start: WorldPolar,
        heading: f64,
        speed: f64,
        turn_rate: f64,
    },
    /// Walks a circular arc around the human, reversing at either end.
    Arc {
        radius: f64,
        from: f64,
        to: f64,
        speed: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub frame: FrameConfig,
    pub robot: RobotGeometry,
    pub silhouette_samples: usize,
    pub environment: Environment,
    pub tick_rate: f64,
    pub duration: f64,
    pub trajectory: Trajectory,
    pub control: ControlMode,
    pub plant: PlantMode,
    pub controller: ControllerConfig,
    pub initial_pose: Option<LightPose>,
    /// Standard deviation of the robot tracking noise, meters.
    pub position_noise: f64,
    pub seed: u64,
    /// Upper bound on RMS tracking error expected of this scenario.
    pub tracking_error_bound: Option<f64>,
}

impl Scenario {
    pub fn new(trajectory: Trajectory, duration: f64) -> Self {
        Self {
            name: "unnamed".into(),
            frame: FrameConfig::default(),
            robot: RobotGeometry::default(),
            silhouette_samples: crate::environment::DEFAULT_SILHOUETTE_SAMPLES,
            environment: Environment::Flat,
            tick_rate: DEFAULT_TICK_RATE,
            duration,
            trajectory,
            control: ControlMode::Pid,
            plant: PlantMode::Geometric,
            controller: ControllerConfig::default(),
            initial_pose: None,
            position_noise: 0.0,
            seed: 0,
            tracking_error_bound: None,
        }
    }

    /// Number of ticks the scenario runs for.
    pub fn tick_count(&self) -> u64 {
        (self.duration * self.tick_rate).round() as u64
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.tick_rate
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.frame.validate()?;
        self.robot.validate()?;
        self.controller.validate()?;
        if !(self.tick_rate.is_finite() && self.tick_rate > 0.0) {
            return Err(SimError::Scenario(format!(
                "tick_rate must be positive, got {}",
                self.tick_rate
            )));
        }
        if !(self.duration.is_finite() && self.duration >= 0.0) {
            return Err(SimError::Scenario(format!(
                "duration must be non-negative, got {}",
                self.duration
            )));
        }
        if !(self.position_noise.is_finite() && self.position_noise >= 0.0) {
            return Err(SimError::Scenario(
                "position_noise must be non-negative".into(),
            ));
        }
        if self.silhouette_samples < 3 || self.silhouette_samples.is_multiple_of(2) {
            return Err(SimError::Scenario(format!(
                "silhouette_samples must be odd and at least 3, got {}",
                self.silhouette_samples
            )));
        }
        let in_semicircle = |p: &WorldPolar, what: &str| {
            p.validate(&self.frame).map_err(|e| {
                SimError::Scenario(format!("{what} is outside the rear semicircle: {e}"))
            })
        };
        let positive = |v: f64, what: &str| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(SimError::Scenario(format!(
                    "{what} must be non-negative, got {v}"
                )))
            }
        };
        match &self.trajectory {
            Trajectory::Stationary { at } => in_semicircle(at, "stationary position")?,
            Trajectory::Waypoints { speed, points } => {
                positive(*speed, "speed")?;
                if points.is_empty() {
                    return Err(SimError::Scenario("waypoint list is empty".into()));
                }
                for (i, p) in points.iter().enumerate() {
                    in_semicircle(p, &format!("waypoint {i}"))?;
                }
            }
            Trajectory::Unicycle {
                start,
                heading,
                speed,
                turn_rate,
            } => {
                in_semicircle(start, "unicycle start")?;
                positive(*speed, "speed")?;
                if !(heading.is_finite() && turn_rate.is_finite()) {
                    return Err(SimError::Scenario(
                        "heading and turn rate must be finite".into(),
                    ));
                }
            }
            Trajectory::Arc {
                radius,
                from,
                to,
                speed,
            } => {
                positive(*speed, "speed")?;
                in_semicircle(&WorldPolar::new(*radius, *from), "arc start")?;
                in_semicircle(&WorldPolar::new(*radius, *to), "arc end")?;
            }
        }
        if let Some(pose) = &self.initial_pose {
            if !(pose.tilt > 0.0 && pose.tilt < std::f64::consts::FRAC_PI_2 && pose.pan.is_finite())
            {
                return Err(SimError::Scenario(
                    "initial light pose is degenerate".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str, base_dir: Option<&Path>) -> Result<Self, SimError> {
        let file: ScenarioFile =
            toml::from_str(text).map_err(|e| SimError::Parse(e.to_string()))?;
        file.into_scenario(base_dir)
    }

    pub fn from_json_str(text: &str, base_dir: Option<&Path>) -> Result<Self, SimError> {
        let file: ScenarioFile =
            serde_json::from_str(text).map_err(|e| SimError::Parse(e.to_string()))?;
        file.into_scenario(base_dir)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SimError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| SimError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let base = path.parent().map(Path::to_path_buf);
        let is_json = path.extension().is_some_and(|e| e == "json");
        if is_json {
            Self::from_json_str(&text, base.as_deref())
        } else {
            Self::from_toml_str(&text, base.as_deref())
        }
    }
}

// ---------------------------------------------------------------------------
// file schema

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolarPoint {
    pub r: f64,
    pub beta_deg: f64,
}

impl From<PolarPoint> for WorldPolar {
    fn from(p: PolarPoint) -> Self {
        WorldPolar::new(p.r, p.beta_deg.to_radians())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EnvironmentSource {
    Path(PathBuf),
    Inline(HeightFieldFile),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameSection {
    pub l_w: Option<f64>,
    pub theta_w_deg: Option<f64>,
    pub l_v: Option<f64>,
    pub theta_v_deg: Option<f64>,
    pub human_position: Option<[f64; 2]>,
    pub human_facing_deg: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotSection {
    pub height: Option<f64>,
    pub footprint_radius: Option<f64>,
    pub silhouette_samples: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LightSection {
    pub tilt_min_deg: Option<f64>,
    pub tilt_max_deg: Option<f64>,
    pub initial_tilt_deg: Option<f64>,
    pub initial_pan_deg: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSection {
    pub kp: Option<[[f64; 2]; 2]>,
    pub ki: Option<[[f64; 2]; 2]>,
    pub kd: Option<[[f64; 2]; 2]>,
    pub integral_limit: Option<f64>,
    pub max_delta_tilt_deg: Option<f64>,
    pub max_delta_pan_deg: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantSection {
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub f: Option<f64>,
    pub g: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TrajectoryFile {
    Stationary {
        at: PolarPoint,
    },
    Waypoints {
        speed: f64,
        points: Vec<PolarPoint>,
    },
    Unicycle {
        start: PolarPoint,
        heading_deg: f64,
        speed: f64,
        #[serde(default)]
        turn_rate_deg: f64,
    },
    Arc {
        radius: f64,
        from_deg: f64,
        to_deg: f64,
        speed: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub name: Option<String>,
    pub duration: f64,
    #[serde(default)]
    pub tick_rate: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub control_mode: ControlMode,
    #[serde(default)]
    pub plant_mode: PlantMode,
    #[serde(default)]
    pub position_noise: f64,
    #[serde(default)]
    pub tracking_error_bound: Option<f64>,
    #[serde(default)]
    pub environment: Option<EnvironmentSource>,
    #[serde(default)]
    pub frame: FrameSection,
    #[serde(default)]
    pub robot: RobotSection,
    #[serde(default)]
    pub light: LightSection,
    #[serde(default)]
    pub controller: ControllerSection,
    #[serde(default)]
    pub plant: PlantSection,
    pub trajectory: TrajectoryFile,
}

fn matrix(rows: [[f64; 2]; 2]) -> Matrix2<f64> {
    Matrix2::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1])
}

impl ScenarioFile {
    pub fn into_scenario(self, base_dir: Option<&Path>) -> Result<Scenario, SimError> {
        let frame_defaults = FrameConfig::default();
        let f = &self.frame;
        let frame = FrameConfig {
            l_w: f.l_w.unwrap_or(frame_defaults.l_w),
            theta_w: f
                .theta_w_deg
                .map_or(frame_defaults.theta_w, f64::to_radians),
            l_v: f.l_v.unwrap_or(frame_defaults.l_v),
            theta_v: f
                .theta_v_deg
                .map_or(frame_defaults.theta_v, f64::to_radians),
            human_position: f.human_position.map_or(frame_defaults.human_position, |p| {
                GlobalCartesian::new(p[0], p[1])
            }),
            human_facing: f
                .human_facing_deg
                .map_or(frame_defaults.human_facing, f64::to_radians),
        };

        let robot_defaults = RobotGeometry::default();
        let robot = RobotGeometry {
            height: self.robot.height.unwrap_or(robot_defaults.height),
            footprint_radius: self
                .robot
                .footprint_radius
                .unwrap_or(robot_defaults.footprint_radius),
        };

        let bounds_defaults = TiltBounds::default();
        let tilt_bounds = TiltBounds {
            min: self
                .light
                .tilt_min_deg
                .map_or(bounds_defaults.min, f64::to_radians),
            max: self
                .light
                .tilt_max_deg
                .map_or(bounds_defaults.max, f64::to_radians),
        };
        let initial_pose = match (self.light.initial_tilt_deg, self.light.initial_pan_deg) {
            (Some(t), Some(p)) => Some(LightPose::new(t.to_radians(), p.to_radians())),
            (None, None) => None,
            _ => {
                return Err(SimError::Scenario(
                    "initial_tilt_deg and initial_pan_deg must be given together".into(),
                ))
            }
        };

        let defaults = ControllerConfig::default();
        let c = &self.controller;
        let gains = PidGains {
            kp: c.kp.map_or(defaults.gains.kp, matrix),
            ki: c.ki.map_or(defaults.gains.ki, matrix),
            kd: c.kd.map_or(defaults.gains.kd, matrix),
        };
        let plant_defaults = PlantParams::default();
        let plant = PlantParams {
            a: self.plant.a.unwrap_or(plant_defaults.a),
            b: self.plant.b.unwrap_or(plant_defaults.b),
            f: self.plant.f.unwrap_or(plant_defaults.f),
            g: self.plant.g.unwrap_or(plant_defaults.g),
        };
        let controller = ControllerConfig {
            gains,
            plant,
            rate_limits: RateLimits {
                tilt: c
                    .max_delta_tilt_deg
                    .map_or(defaults.rate_limits.tilt, f64::to_radians),
                pan: c
                    .max_delta_pan_deg
                    .map_or(defaults.rate_limits.pan, f64::to_radians),
            },
            integral_limit: c.integral_limit.unwrap_or(defaults.integral_limit),
            tilt_bounds,
        };

        let environment = match self.environment {
            None => Environment::Flat,
            Some(EnvironmentSource::Inline(file)) => {
                Environment::HeightField(HeightField::from_file(file)?)
            }
            Some(EnvironmentSource::Path(p)) => {
                let resolved = match base_dir {
                    Some(base) if p.is_relative() => base.join(p),
                    _ => p,
                };
                Environment::HeightField(load_heightfield(resolved)?)
            }
        };

        let trajectory = match self.trajectory {
            TrajectoryFile::Stationary { at } => Trajectory::Stationary { at: at.into() },
            TrajectoryFile::Waypoints { speed, points } => Trajectory::Waypoints {
                speed,
                points: points.into_iter().map(Into::into).collect(),
            },
            TrajectoryFile::Unicycle {
                start,
                heading_deg,
                speed,
                turn_rate_deg,
            } => Trajectory::Unicycle {
                start: start.into(),
                heading: heading_deg.to_radians(),
                speed,
                turn_rate: turn_rate_deg.to_radians(),
            },
            TrajectoryFile::Arc {
                radius,
                from_deg,
                to_deg,
                speed,
            } => Trajectory::Arc {
                radius,
                from: from_deg.to_radians(),
                to: to_deg.to_radians(),
                speed,
            },
        };

        let scenario = Scenario {
            name: self.name.unwrap_or_else(|| "unnamed".into()),
            frame,
            robot,
            silhouette_samples: self
                .robot
                .silhouette_samples
                .unwrap_or(crate::environment::DEFAULT_SILHOUETTE_SAMPLES),
            environment,
            tick_rate: self.tick_rate.unwrap_or(DEFAULT_TICK_RATE),
            duration: self.duration,
            trajectory,
            control: self.control_mode,
            plant: self.plant_mode,
            controller,
            initial_pose,
            position_noise: self.position_noise,
            seed: self.seed,
            tracking_error_bound: self.tracking_error_bound,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}
