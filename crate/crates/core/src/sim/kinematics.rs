//! Robot motion: scripted trajectories and live unicycle/waypoint commands.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::scenario::Trajectory;
use crate::geometry::{
    clamp_to_rear_semicircle, global_to_world_polar_raw, world_polar_to_global_unchecked,
    FrameConfig, GlobalCartesian, WorldPolar,
};

/// Speed used for a waypoint command when the robot is standing still.
pub const DEFAULT_WAYPOINT_SPEED: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub position: GlobalCartesian,
    /// Global heading of travel, radians.
    pub heading: f64,
    /// Meters per second.
    pub speed: f64,
}

impl RobotState {
    pub fn world_polar(&self, cfg: &FrameConfig) -> WorldPolar {
        global_to_world_polar_raw(self.position, cfg)
    }
}

/// Live steering input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum Command {
    /// Head for a global point and stop there.
    Waypoint {
        waypoint: GlobalCartesian,
        #[serde(default)]
        speed: Option<f64>,
    },
    /// Drive straight; omitted fields keep their current value.
    Drive {
        #[serde(default)]
        heading: Option<f64>,
        #[serde(default)]
        speed: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
enum Motion {
    Stationary,
    Waypoints {
        targets: VecDeque<GlobalCartesian>,
    },
    Unicycle {
        turn_rate: f64,
    },
    Arc {
        radius: f64,
        from: f64,
        to: f64,
        beta: f64,
        forward: bool,
    },
}

/// Kinematic robot driven by a trajectory or live commands.
#[derive(Debug, Clone, PartialEq)]
pub struct Kinematics {
    state: RobotState,
    motion: Motion,
}

/// Outcome of advancing one tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Advance {
    pub state: RobotState,
    /// The commanded position left the rear semicircle and was clamped.
    pub violated: bool,
}

impl Kinematics {
    pub fn from_trajectory(trajectory: &Trajectory, cfg: &FrameConfig) -> Self {
        let to_global = |p: &WorldPolar| world_polar_to_global_unchecked(*p, cfg);
        match trajectory {
            Trajectory::Stationary { at } => Self {
                state: RobotState {
                    position: to_global(at),
                    heading: cfg.human_facing + std::f64::consts::PI,
                    speed: 0.0,
                },
                motion: Motion::Stationary,
            },
            Trajectory::Waypoints { speed, points } => {
                let mut targets: VecDeque<GlobalCartesian> = points.iter().map(to_global).collect();
                let start = targets.pop_front().expect("validated non-empty");
                let heading = targets
                    .front()
                    .map_or(cfg.human_facing + std::f64::consts::PI, |t| {
                        (*t - start).heading()
                    });
                Self {
                    state: RobotState {
                        position: start,
                        heading,
                        speed: *speed,
                    },
                    motion: Motion::Waypoints { targets },
                }
            }
            Trajectory::Unicycle {
                start,
                heading,
                speed,
                turn_rate,
            } => Self {
                state: RobotState {
                    position: to_global(start),
                    heading: *heading,
                    speed: *speed,
                },
                motion: Motion::Unicycle {
                    turn_rate: *turn_rate,
                },
            },
            Trajectory::Arc {
                radius,
                from,
                to,
                speed,
            } => {
                let start = WorldPolar::new(*radius, *from);
                let mut k = Self {
                    state: RobotState {
                        position: to_global(&start),
                        heading: 0.0,
                        speed: *speed,
                    },
                    motion: Motion::Arc {
                        radius: *radius,
                        from: *from,
                        to: *to,
                        beta: *from,
                        forward: true,
                    },
                };
                k.state.heading = k.arc_heading(cfg);
                k
            }
        }
    }

    pub fn state(&self) -> &RobotState {
        &self.state
    }

    fn arc_heading(&self, cfg: &FrameConfig) -> f64 {
        if let Motion::Arc {
            beta,
            from,
            to,
            forward,
            ..
        } = self.motion
        {
            // increasing beta_w turns clockwise around the human
            let increasing = (to >= from) == forward;
            let radial = cfg.human_facing - std::f64::consts::FRAC_PI_2 - beta;
            if increasing {
                radial - std::f64::consts::FRAC_PI_2
            } else {
                radial + std::f64::consts::FRAC_PI_2
            }
        } else {
            self.state.heading
        }
    }

    pub fn apply(&mut self, command: Command) {
        match command {
            Command::Drive { heading, speed } => {
                if let Some(h) = heading {
                    self.state.heading = h;
                }
                if let Some(s) = speed {
                    self.state.speed = s.max(0.0);
                }
                self.motion = Motion::Unicycle { turn_rate: 0.0 };
            }
            Command::Waypoint { waypoint, speed } => {
                let speed = speed.unwrap_or(if self.state.speed > 0.0 {
                    self.state.speed
                } else {
                    DEFAULT_WAYPOINT_SPEED
                });
                self.state.speed = speed.max(0.0);
                self.state.heading = (waypoint - self.state.position).heading();
                self.motion = Motion::Waypoints {
                    targets: VecDeque::from([waypoint]),
                };
            }
        }
    }

    /// Moves the robot for `dt` seconds, clamping it into the rear semicircle.
    pub fn advance(&mut self, dt: f64, cfg: &FrameConfig) -> Advance {
        let commanded = match &mut self.motion {
            Motion::Stationary => self.state.position,
            Motion::Unicycle { turn_rate } => {
                let p = self.state.position
                    + GlobalCartesian::from_polar(self.state.speed * dt, self.state.heading);
                self.state.heading += *turn_rate * dt;
                p
            }
            Motion::Waypoints { targets } => {
                let mut budget = self.state.speed * dt;
                let mut p = self.state.position;
                while budget > 0.0 {
                    let Some(target) = targets.front().copied() else {
                        break;
                    };
                    let gap = p.distance(target);
                    if gap <= budget {
                        p = target;
                        budget -= gap;
                        targets.pop_front();
                    } else {
                        let dir = (target - p) * (1.0 / gap);
                        p = p + dir * budget;
                        self.state.heading = dir.heading();
                        budget = 0.0;
                    }
                }
                if targets.is_empty() {
                    self.state.speed = 0.0;
                }
                p
            }
            Motion::Arc {
                radius,
                from,
                to,
                beta,
                forward,
            } => {
                let (lo, hi) = if from <= to {
                    (*from, *to)
                } else {
                    (*to, *from)
                };
                let span = hi - lo;
                let mut step = if *radius > 0.0 {
                    self.state.speed * dt / *radius
                } else {
                    0.0
                };
                if span == 0.0 {
                    step = 0.0;
                }
                let increasing = (*to >= *from) == *forward;
                let mut b = *beta + if increasing { step } else { -step };
                // reflect off either end, possibly several times for large steps
                let mut going_up = increasing;
                while span > 0.0 && (b > hi || b < lo) {
                    if b > hi {
                        b = 2.0 * hi - b;
                        going_up = false;
                    } else {
                        b = 2.0 * lo - b;
                        going_up = true;
                    }
                }
                *beta = b;
                *forward = going_up == (*to >= *from);
                world_polar_to_global_unchecked(WorldPolar::new(*radius, b), cfg)
            }
        };
        if matches!(self.motion, Motion::Arc { .. }) {
            self.state.heading = self.arc_heading(cfg);
        }
        let (position, violated) = clamp_to_rear_semicircle(commanded, cfg);
        self.state.position = position;
        Advance {
            state: self.state,
            violated,
        }
    }
}
