//! Bundled benchmark scenarios.
//!
//! The TOML files live in `scenarios/` next to this crate's manifest and are
//! also the presets served to clients.

use std::path::PathBuf;

use crate::sim::{Scenario, SimError};

pub const NEAR_PASS: &str = "near_pass";
pub const RIM_WALK: &str = "rim_walk";
pub const STATIONARY: &str = "stationary";
pub const RADIAL_APPROACH: &str = "radial_approach";
pub const CONVERGENCE: &str = "convergence";
pub const WALL_ROOM: &str = "wall_room";

pub const ALL: [&str; 6] = [
    NEAR_PASS,
    RIM_WALK,
    STATIONARY,
    RADIAL_APPROACH,
    CONVERGENCE,
    WALL_ROOM,
];

pub fn scenario_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

pub fn path(name: &str) -> PathBuf {
    scenario_dir().join(format!("{name}.toml"))
}

pub fn load(name: &str) -> Result<Scenario, SimError> {
    Scenario::load(path(name))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_loads() {
        for name in ALL {
            let s = load(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(s.tick_count() > 0, "{name}");
        }
    }

    #[test]
    fn unknown_preset_is_io_error() {
        assert!(matches!(load("nope"), Err(SimError::Io { .. })));
    }
}
