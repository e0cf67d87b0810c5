//! Batch evaluation over independent inputs.
//!
//! With the `parallel` feature (on by default) [`Execution::Parallel`] fans
//! work out over the rayon pool; without it every call runs sequentially.
//! Results always come back in input order, so both paths are
//! bit-identical.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::environment::{project_shadow, Environment, EnvironmentError, ShadowFootprint};
use crate::geometry::{FrameConfig, GlobalCartesian, WorldPolar};
use crate::projection::{
    compute_light_pose, LightPose, PoseSolution, ProjectionError, RobotGeometry, TiltBounds,
};
use crate::sim::{run_scenario, Metrics, Scenario, SimError, TickRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

pub fn map<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec == Execution::Parallel {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

pub fn join<A, B, RA, RB>(exec: Execution, a: A, b: B) -> (RA, RB)
where
    A: FnOnce() -> RA + Send,
    B: FnOnce() -> RB + Send,
    RA: Send,
    RB: Send,
{
    #[cfg(feature = "parallel")]
    if exec == Execution::Parallel {
        return rayon::join(a, b);
    }
    let _ = exec;
    (a(), b())
}

pub fn solve_light_poses(
    exec: Execution,
    positions: &[WorldPolar],
    geom: &RobotGeometry,
    cfg: &FrameConfig,
    bounds: &TiltBounds,
) -> Vec<Result<PoseSolution, ProjectionError>> {
    map(exec, positions, |p| {
        compute_light_pose(*p, geom, cfg, bounds)
    })
}

pub fn project_shadows(
    exec: Execution,
    requests: &[(GlobalCartesian, LightPose)],
    geom: &RobotGeometry,
    env: &Environment,
    samples: usize,
) -> Vec<Result<ShadowFootprint, EnvironmentError>> {
    map(exec, requests, |(p, pose)| {
        project_shadow(*p, geom, pose, env, samples)
    })
}

pub fn run_scenarios(
    exec: Execution,
    scenarios: &[Scenario],
) -> Vec<Result<(Vec<TickRecord>, Metrics), SimError>> {
    map(exec, scenarios, run_scenario)
}
