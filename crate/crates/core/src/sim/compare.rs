use serde::{Deserialize, Serialize};

use super::engine::{run_scenario, TickRecord};
use super::metrics::Metrics;
use super::scenario::{ControlMode, Scenario};
use super::SimError;
use crate::batch::{join, Execution};

/// Per-tick light-angle changes of both modes side by side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub k: u64,
    pub direct: [f64; 2],
    pub pid: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub scenario: String,
    pub direct: Metrics,
    pub pid: Metrics,
    /// `|d_tilt|`, `|d_pan|` per tick.
    pub trace: Vec<TracePoint>,
}

impl ComparisonReport {
    pub fn pid_is_smoother(&self) -> bool {
        self.pid.max_delta_tilt < self.direct.max_delta_tilt
    }
}

pub struct ComparisonRun {
    pub report: ComparisonReport,
    pub direct: Vec<TickRecord>,
    pub pid: Vec<TickRecord>,
}

/// Runs the scenario in direct and PID mode over identical robot inputs.
pub fn compare_modes(scenario: &Scenario) -> Result<ComparisonReport, SimError> {
    compare_modes_with(scenario, Execution::default()).map(|run| run.report)
}

pub fn compare_modes_with(scenario: &Scenario, exec: Execution) -> Result<ComparisonRun, SimError> {
    let with_mode = |mode| Scenario {
        control: mode,
        ..scenario.clone()
    };
    let direct_scn = with_mode(ControlMode::Direct);
    let pid_scn = with_mode(ControlMode::Pid);
    let (direct, pid) = join(
        exec,
        || run_scenario(&direct_scn),
        || run_scenario(&pid_scn),
    );
    let (direct, direct_metrics) = direct?;
    let (pid, pid_metrics) = pid?;
    let trace = direct
        .iter()
        .zip(&pid)
        .map(|(d, p)| TracePoint {
            k: d.k,
            direct: [d.u[0].abs(), d.u[1].abs()],
            pid: [p.u[0].abs(), p.u[1].abs()],
        })
        .collect();
    Ok(ComparisonRun {
        report: ComparisonReport {
            scenario: scenario.name.clone(),
            direct: direct_metrics,
            pid: pid_metrics,
            trace,
        },
        direct,
        pid,
    })
}
