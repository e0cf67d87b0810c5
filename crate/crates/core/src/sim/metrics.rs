use serde::{Deserialize, Serialize};

use super::engine::TickRecord;

/// `|e|` below which the loop counts as converged.
pub const CONVERGENCE_TOL: f64 = 1e-3;

/// Smoothness and accuracy summary of a run.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub ticks: u64,
    pub max_delta_tilt: f64,
    pub rms_delta_tilt: f64,
    pub max_delta_pan: f64,
    pub rms_delta_pan: f64,
    /// RMS over ticks of the Euclidean norm of the tracking error 2-vector.
    pub rms_tracking_error: f64,
    pub max_tracking_error: f64,
    /// Fraction of ticks whose rendered tip lies inside the FOV sector.
    pub visibility_fraction: f64,
    /// First tick from which `|e| < CONVERGENCE_TOL` holds through the end.
    pub convergence_tick: Option<u64>,
    pub saturated_ticks: u64,
    pub assumption_violations: u64,
}

pub fn error_norm(e: &[f64; 2]) -> f64 {
    e[0].hypot(e[1])
}

fn rms(values: impl Iterator<Item = f64>, n: usize) -> f64 {
    (values.map(|v| v * v).sum::<f64>() / n as f64).sqrt()
}

impl Metrics {
    pub fn from_records(records: &[TickRecord]) -> Self {
        let n = records.len();
        if n == 0 {
            return Self::default();
        }
        let max = |f: &dyn Fn(&TickRecord) -> f64| records.iter().map(f).fold(0.0, f64::max);
        let mut convergence_tick = None;
        for r in records.iter().rev() {
            if error_norm(&r.error) < CONVERGENCE_TOL {
                convergence_tick = Some(r.k);
            } else {
                break;
            }
        }
        Self {
            ticks: n as u64,
            max_delta_tilt: max(&|r| r.u[0].abs()),
            rms_delta_tilt: rms(records.iter().map(|r| r.u[0]), n),
            max_delta_pan: max(&|r| r.u[1].abs()),
            rms_delta_pan: rms(records.iter().map(|r| r.u[1]), n),
            rms_tracking_error: rms(records.iter().map(|r| error_norm(&r.error)), n),
            max_tracking_error: max(&|r| error_norm(&r.error)),
            visibility_fraction: records.iter().filter(|r| r.flags.tip_visible).count() as f64
                / n as f64,
            convergence_tick,
            saturated_ticks: records
                .iter()
                .filter(|r| r.flags.saturated.iter().any(|s| *s))
                .count() as u64,
            assumption_violations: records
                .iter()
                .filter(|r| r.flags.assumption_violated)
                .count() as u64,
        }
    }
}
