use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::kinematics::{Command, Kinematics};
use super::metrics::Metrics;
use super::scenario::{ControlMode, PlantMode, Scenario};
use super::SimError;
use crate::controller::{control_tick, tracking_error, ControllerState, ErrorMap};
use crate::environment::{project_shadow, ShadowFootprint, SurfaceKind, SurfacePoint};
use crate::geometry::{
    clamp_to_rear_semicircle, global_to_fov_polar, global_to_world_polar, in_fov_sector,
    map_to_virtual, virtual_polar_to_global_unchecked, world_polar_to_global_unchecked, wrap_pi,
    GlobalCartesian, VirtualPolar, WorldPolar,
};
use crate::projection::{compute_light_pose, forward_project_flat, tip_sensitivity, LightPose};

/// Slack for the FOV containment check on the rendered tip.
pub const VISIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TickFlags {
    /// Rate limit hit on `(tilt, pan)`.
    pub saturated: [bool; 2],
    /// Tilt pinned at a saturation bound.
    pub tilt_clamped: bool,
    /// Robot was commanded outside the rear semicircle and clamped.
    pub assumption_violated: bool,
    /// The tip ray left the environment; the tip was taken from the flat model.
    pub shadow_lost: bool,
    /// Tip inside the FOV sector.
    pub tip_visible: bool,
}

/// One closed-loop tick, as emitted on the tick stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub k: u64,
    pub time: f64,
    pub mode: ControlMode,
    pub robot: WorldPolar,
    pub robot_xy: GlobalCartesian,
    pub setpoint: VirtualPolar,
    pub setpoint_xy: GlobalCartesian,
    /// `setpoint - rendered shadow` in FOV polar coordinates after this tick's update.
    pub error: [f64; 2],
    /// Light-angle change applied this tick, `(d_tilt, d_pan)`.
    pub u: [f64; 2],
    pub light: LightPose,
    pub tip: SurfacePoint,
    pub footprint: Vec<SurfacePoint>,
    pub flags: TickFlags,
}

/// Closed-loop simulation of one scenario.
///
/// Each tick runs in a fixed order: advance the robot, map it to a shadow
/// setpoint, update the light (exactly, or through the PID loop), render the
/// shadow, emit a record.
pub struct Simulation {
    scenario: Scenario,
    kinematics: Kinematics,
    control: ControlMode,
    state: ControllerState,
    observed: WorldPolar,
    rng: ChaCha8Rng,
    noise: Option<Normal<f64>>,
    k: u64,
}

struct Rendered {
    footprint: Option<ShadowFootprint>,
    tip: SurfacePoint,
}

impl Simulation {
    pub fn new(scenario: Scenario) -> Result<Self, SimError> {
        scenario.validate()?;
        let kinematics = Kinematics::from_trajectory(&scenario.trajectory, &scenario.frame);
        let noise = (scenario.position_noise > 0.0)
            .then(|| Normal::new(0.0, scenario.position_noise).expect("validated noise"));
        let mut sim = Self {
            control: scenario.control,
            kinematics,
            rng: ChaCha8Rng::seed_from_u64(scenario.seed),
            noise,
            state: ControllerState::new([0.0; 2], LightPose::new(0.5, 0.0)),
            observed: WorldPolar::new(0.0, 0.0),
            k: 0,
            scenario,
        };
        let start = sim.kinematics.state().position;
        sim.observed = sim.observe(start)?;
        let pose = match sim.scenario.initial_pose {
            Some(p) => p,
            None => {
                compute_light_pose(
                    sim.observed,
                    &sim.scenario.robot,
                    &sim.scenario.frame,
                    &sim.scenario.controller.tilt_bounds,
                )?
                .pose
            }
        };
        let robot_xy = sim.robot_xy();
        let tip = sim.render_tip(robot_xy, &pose)?;
        sim.state = ControllerState::new(global_to_fov_polar(tip, &sim.scenario.frame), pose);
        Ok(sim)
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn tick_index(&self) -> u64 {
        self.k
    }

    pub fn light_pose(&self) -> LightPose {
        self.state.light_pose
    }

    pub fn controller_state(&self) -> &ControllerState {
        &self.state
    }

    pub fn control_mode(&self) -> ControlMode {
        self.control
    }

    /// Switches the control mode. Entering PID mode starts from a clean
    /// integral and derivative history at the current pose.
    pub fn set_control_mode(&mut self, mode: ControlMode) {
        if mode == ControlMode::Pid && self.control != ControlMode::Pid {
            self.state.integral = [0.0; 2];
            self.state.prev_error = [0.0; 2];
        }
        self.control = mode;
    }

    pub fn command(&mut self, command: Command) {
        self.kinematics.apply(command);
    }

    fn robot_xy(&self) -> GlobalCartesian {
        world_polar_to_global_unchecked(self.observed, &self.scenario.frame)
    }

    /// Tracked robot position: the true position plus optional noise, kept in
    /// the rear semicircle.
    fn observe(&mut self, truth: GlobalCartesian) -> Result<WorldPolar, SimError> {
        let mut p = truth;
        if let Some(noise) = &self.noise {
            p = p + GlobalCartesian::new(noise.sample(&mut self.rng), noise.sample(&mut self.rng));
        }
        let (p, _) = clamp_to_rear_semicircle(p, &self.scenario.frame);
        Ok(global_to_world_polar(p, &self.scenario.frame)?)
    }

    fn render(&self, robot_xy: GlobalCartesian, pose: &LightPose) -> Result<Rendered, SimError> {
        let s = &self.scenario;
        match project_shadow(
            robot_xy,
            &s.robot,
            pose,
            &s.environment,
            s.silhouette_samples,
        ) {
            Ok(fp) => Ok(Rendered {
                tip: fp.tip,
                footprint: Some(fp),
            }),
            Err(_) => {
                let flat = forward_project_flat(robot_xy, s.robot.height, pose)?;
                Ok(Rendered {
                    footprint: None,
                    tip: SurfacePoint::new(flat.x, flat.y, 0.0, SurfaceKind::Ground),
                })
            }
        }
    }

    fn render_tip(
        &self,
        robot_xy: GlobalCartesian,
        pose: &LightPose,
    ) -> Result<GlobalCartesian, SimError> {
        Ok(self.render(robot_xy, pose)?.tip.ground_position())
    }

    pub fn step(&mut self) -> Result<TickRecord, SimError> {
        let dt = self.scenario.dt();
        let frame = self.scenario.frame;
        let advance = self.kinematics.advance(dt, &frame);
        let previous = self.observed;
        self.observed = self.observe(advance.state.position)?;
        let robot = self.observed;
        let robot_xy = self.robot_xy();
        let setpoint = map_to_virtual(robot, &frame)?;
        let setpoint_xy = virtual_polar_to_global_unchecked(setpoint, &frame);
        let delta_pr = [
            robot.r_w - previous.r_w,
            wrap_pi(robot.beta_w - previous.beta_w),
        ];
        let prev_pose = self.state.light_pose;
        let mut flags = TickFlags {
            assumption_violated: advance.violated,
            ..TickFlags::default()
        };

        let (pose, u) = match self.control {
            ControlMode::Direct => {
                let sol = compute_light_pose(
                    robot,
                    &self.scenario.robot,
                    &frame,
                    &self.scenario.controller.tilt_bounds,
                )?;
                flags.tilt_clamped = sol.clamped;
                self.state.light_pose = sol.pose;
                self.state.integral = [0.0; 2];
                self.state.prev_error = [0.0; 2];
                self.state.k += 1;
                let u = [
                    sol.pose.tilt - prev_pose.tilt,
                    wrap_pi(sol.pose.pan - prev_pose.pan),
                ];
                (sol.pose, u)
            }
            ControlMode::Pid => {
                let (measured, map) = match self.scenario.plant {
                    PlantMode::Model => (self.state.x, ErrorMap::Oriented),
                    PlantMode::Geometric => {
                        let tip = self.render_tip(robot_xy, &prev_pose)?;
                        let sensitivity = tip_sensitivity(
                            robot_xy,
                            self.scenario.robot.height,
                            &prev_pose,
                            &frame,
                            MIN_SENSITIVITY_RADIUS * frame.l_v,
                        )?;
                        let map =
                            ErrorMap::from_sensitivity(&sensitivity).unwrap_or(ErrorMap::Oriented);
                        (global_to_fov_polar(tip, &frame), map)
                    }
                };
                let tc = control_tick(
                    &self.scenario.controller,
                    &mut self.state,
                    setpoint.to_array(),
                    measured,
                    delta_pr,
                    &map,
                )?;
                flags.saturated = tc.output.saturated;
                flags.tilt_clamped = tc.tilt_clamped;
                (tc.pose, tc.output.u)
            }
        };

        let rendered = self.render(robot_xy, &pose)?;
        flags.shadow_lost = rendered.footprint.is_none();
        let tip_xy = rendered.tip.ground_position();
        let tip_polar = global_to_fov_polar(tip_xy, &frame);
        let shown = match (self.control, self.scenario.plant) {
            (ControlMode::Pid, PlantMode::Model) => self.state.x,
            _ => tip_polar,
        };
        if !(self.control == ControlMode::Pid && self.scenario.plant == PlantMode::Model) {
            self.state.x = tip_polar;
        }
        flags.tip_visible = !flags.shadow_lost && in_fov_sector(tip_xy, &frame, VISIBILITY_TOL);

        let record = TickRecord {
            k: self.k,
            time: (self.k + 1) as f64 * dt,
            mode: self.control,
            robot,
            robot_xy,
            setpoint,
            setpoint_xy,
            error: tracking_error(setpoint.to_array(), shown),
            u,
            light: pose,
            tip: rendered.tip,
            footprint: rendered.footprint.map(|f| f.points).unwrap_or_default(),
            flags,
        };
        self.k += 1;
        Ok(record)
    }
}

/// Floor on the tip radius used for the angular sensitivity, as a fraction of `l_v`.
const MIN_SENSITIVITY_RADIUS: f64 = 1e-3;

/// Runs a scenario to completion.
pub fn run_scenario(scenario: &Scenario) -> Result<(Vec<TickRecord>, Metrics), SimError> {
    let mut sim = Simulation::new(scenario.clone())?;
    let n = scenario.tick_count();
    let mut records = Vec::with_capacity(n as usize);
    for _ in 0..n {
        records.push(sim.step()?);
    }
    let metrics = Metrics::from_records(&records);
    Ok((records, metrics))
}
