use std::f64::consts::{FRAC_PI_2, TAU};

use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use super::{Environment, EnvironmentError, SurfacePoint};
use crate::geometry::GlobalCartesian;
use crate::projection::{LightPose, RobotGeometry};

pub const DEFAULT_SILHOUETTE_SAMPLES: usize = 9;

/// Projected silhouette of the robot.
///
/// `points` are in sampling order: base samples, the top center, then the top
/// rim samples. Samples whose rays leave the environment are dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShadowFootprint {
    pub points: Vec<SurfacePoint>,
    pub tip: SurfacePoint,
}

/// Ray origins on the robot silhouette.
///
/// `count = 1 + 2m` gives `m` base-rim points, the top center, and `m` top-rim
/// points, spaced evenly around the robot starting from the light's pan. A
/// zero footprint radius collapses the silhouette to base center and top
/// center. The first returned index after the base samples is the top center.
pub fn silhouette_samples(
    base: GlobalCartesian,
    base_z: f64,
    geom: &RobotGeometry,
    pan: f64,
    count: usize,
    env: &Environment,
) -> Result<(Vec<Point3<f64>>, usize), EnvironmentError> {
    if count < 3 || count.is_multiple_of(2) {
        return Err(EnvironmentError::InvalidSampleCount(count));
    }
    let top_z = base_z + geom.height;
    if geom.footprint_radius == 0.0 {
        return Ok((
            vec![
                Point3::new(base.x, base.y, base_z),
                Point3::new(base.x, base.y, top_z),
            ],
            1,
        ));
    }
    let rim = (count - 1) / 2;
    let offsets: Vec<GlobalCartesian> = (0..rim)
        .map(|k| {
            GlobalCartesian::from_polar(geom.footprint_radius, pan + TAU * k as f64 / rim as f64)
        })
        .collect();
    let mut samples = Vec::with_capacity(count);
    for off in &offsets {
        let p = base + *off;
        // the base rim rests on whatever surface is under it
        let z = env.height_at(p).unwrap_or(base_z);
        samples.push(Point3::new(p.x, p.y, z));
    }
    samples.push(Point3::new(base.x, base.y, top_z));
    for off in &offsets {
        let p = base + *off;
        let z = env.height_at(p).map_or(top_z, |h| top_z.max(h));
        samples.push(Point3::new(p.x, p.y, z));
    }
    Ok((samples, rim))
}

/// Casts the robot's silhouette along the light onto the environment.
pub fn project_shadow(
    p_r: GlobalCartesian,
    geom: &RobotGeometry,
    pose: &LightPose,
    env: &Environment,
    samples: usize,
) -> Result<ShadowFootprint, EnvironmentError> {
    if !(pose.tilt > 0.0 && pose.tilt < FRAC_PI_2) || !pose.pan.is_finite() {
        return Err(EnvironmentError::DegeneratePose(format!(
            "tilt {} pan {}",
            pose.tilt, pose.pan
        )));
    }
    let base_z = env
        .height_at(p_r)
        .ok_or(EnvironmentError::RobotOutside(p_r))?;
    let (origins, tip_index) = silhouette_samples(p_r, base_z, geom, pose.pan, samples, env)?;
    let dir = pose.direction();

    let mut points = Vec::with_capacity(origins.len());
    let mut tip = None;
    for (idx, origin) in origins.into_iter().enumerate() {
        if let Some(hit) = env.raycast(origin, dir)? {
            if idx == tip_index {
                tip = Some(hit);
            }
            points.push(hit);
        }
    }
    if points.is_empty() {
        return Err(EnvironmentError::EmptyFootprint);
    }
    let tip = tip.ok_or(EnvironmentError::TipMissed)?;
    Ok(ShadowFootprint { points, tip })
}
