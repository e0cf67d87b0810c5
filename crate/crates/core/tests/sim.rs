use std::f64::consts::FRAC_PI_2;

use shadowcue_core::benchmarks;
use shadowcue_core::geometry::map_to_virtual;
use shadowcue_core::projection::forward_project_flat;
use shadowcue_core::sim::{
    compare_modes, run_scenario, Command, ControlMode, Metrics, Scenario, Simulation,
};
use shadowcue_core::telemetry::tick_log_bytes;

fn scenario(text: &str) -> Scenario {
    Scenario::from_toml_str(text, None).unwrap()
}

const STATIONARY_PID: &str = r#"
duration = 10.0
control_mode = "pid"
[trajectory]
kind = "stationary"
at = { r = 4.0, beta_deg = 90.0 }
"#;

#[test]
fn runs_are_deterministic() {
    for name in [benchmarks::NEAR_PASS, benchmarks::RADIAL_APPROACH] {
        let s = benchmarks::load(name).unwrap();
        let (a, _) = run_scenario(&s).unwrap();
        let (b, _) = run_scenario(&s).unwrap();
        assert_eq!(tick_log_bytes(&a), tick_log_bytes(&b), "{name}");
    }
}

#[test]
fn seed_changes_noisy_runs() {
    let s = benchmarks::load(benchmarks::NEAR_PASS).unwrap();
    let other = Scenario {
        seed: s.seed + 1,
        ..s.clone()
    };
    let (a, _) = run_scenario(&s).unwrap();
    let (b, _) = run_scenario(&other).unwrap();
    assert_ne!(a, b);
}

#[test]
fn setpoint_is_mapped_robot_every_tick() {
    for name in benchmarks::ALL {
        let s = benchmarks::load(name).unwrap();
        let (records, _) = run_scenario(&s).unwrap();
        for r in &records {
            assert_eq!(
                r.setpoint,
                map_to_virtual(r.robot, &s.frame).unwrap(),
                "{name} k={}",
                r.k
            );
            assert!(
                r.robot.r_w <= s.frame.l_w && (0.0..=s.frame.theta_w).contains(&r.robot.beta_w)
            );
        }
    }
}

#[test]
fn direct_mode_hits_setpoint_on_flat_ground() {
    let mut s = benchmarks::load(benchmarks::NEAR_PASS).unwrap();
    s.control = ControlMode::Direct;
    let (records, _) = run_scenario(&s).unwrap();
    for r in records.iter().filter(|r| !r.flags.tilt_clamped) {
        let tip = forward_project_flat(r.robot_xy, s.robot.height, &r.light).unwrap();
        assert!(tip.distance(r.setpoint_xy) < 1e-6, "k={}", r.k);
        assert!(
            r.tip.ground_position().distance(r.setpoint_xy) < 1e-6,
            "k={}",
            r.k
        );
    }
}

#[test]
fn radial_approach_moves_setpoint_linearly() {
    let s = benchmarks::load(benchmarks::RADIAL_APPROACH).unwrap();
    let (records, _) = run_scenario(&s).unwrap();
    let ratio = s.frame.l_v / s.frame.l_w;
    let mut moving = 0;
    for w in records.windows(2) {
        let dr_w = w[1].robot.r_w - w[0].robot.r_w;
        let dr_v = w[1].setpoint.r_v - w[0].setpoint.r_v;
        assert!((dr_v + ratio * dr_w).abs() < 1e-12, "k={}", w[1].k);
        if dr_w.abs() > 0.0 {
            assert!(
                (dr_w + 1.0 / s.tick_rate).abs() < 1e-9,
                "k={} dr_w={dr_w}",
                w[1].k
            );
            moving += 1;
        }
    }
    assert!(moving > 200);
}

#[test]
fn stationary_pid_settles_to_zero_motion() {
    let (records, m) = run_scenario(&scenario(STATIONARY_PID)).unwrap();
    assert_eq!(m.convergence_tick, Some(0));
    assert!(records
        .iter()
        .all(|r| r.u == [0.0, 0.0] || r.u.iter().all(|v| v.abs() < 1e-15)));
}

#[test]
fn stationary_direct_pose_is_constant() {
    let s = Scenario {
        control: ControlMode::Direct,
        ..scenario(STATIONARY_PID)
    };
    let (records, _) = run_scenario(&s).unwrap();
    assert!(records.iter().all(|r| r.light == records[0].light));
    let report = compare_modes(&s).unwrap();
    assert_eq!(report.direct.max_delta_tilt, 0.0);
    assert!(report.pid.max_delta_tilt < 1e-15);
}

#[test]
fn zero_duration_is_empty() {
    let s = Scenario {
        duration: 0.0,
        ..scenario(STATIONARY_PID)
    };
    let (records, m) = run_scenario(&s).unwrap();
    assert!(records.is_empty());
    assert_eq!(m, Metrics::default());
}

#[test]
fn tick_count_matches_duration() {
    let s = benchmarks::load(benchmarks::NEAR_PASS).unwrap();
    let (records, m) = run_scenario(&s).unwrap();
    assert_eq!(
        records.len() as u64,
        (s.duration * s.tick_rate).round() as u64
    );
    assert_eq!(m.ticks, records.len() as u64);
    assert!(records.iter().enumerate().all(|(i, r)| r.k == i as u64));
}

#[test]
fn speed_command_advances_by_one_tick_of_travel() {
    let s = scenario(STATIONARY_PID);
    let mut sim = Simulation::new(s.clone()).unwrap();
    let before = sim.step().unwrap();
    sim.command(Command::Drive {
        heading: Some(-FRAC_PI_2),
        speed: Some(0.5),
    });
    let after = sim.step().unwrap();
    let moved = after.robot_xy.distance(before.robot_xy);
    assert!((moved - 0.5 / s.tick_rate).abs() < 1e-12, "{moved}");
}

#[test]
fn switching_to_direct_snaps_to_exact_pose() {
    let s = benchmarks::load(benchmarks::NEAR_PASS).unwrap();
    let mut sim = Simulation::new(s.clone()).unwrap();
    for _ in 0..60 {
        sim.step().unwrap();
    }
    sim.set_control_mode(ControlMode::Direct);
    let r = sim.step().unwrap();
    assert_eq!(r.mode, ControlMode::Direct);
    let tip = forward_project_flat(r.robot_xy, s.robot.height, &r.light).unwrap();
    assert!(tip.distance(r.setpoint_xy) < 1e-6);
    sim.set_control_mode(ControlMode::Pid);
    let r = sim.step().unwrap();
    assert_eq!(r.mode, ControlMode::Pid);
}

#[test]
fn leaving_the_rear_half_is_clamped_and_flagged() {
    let mut sim = Simulation::new(scenario(STATIONARY_PID)).unwrap();
    sim.command(Command::Drive {
        heading: Some(FRAC_PI_2),
        speed: Some(3.0),
    });
    let records: Vec<_> = (0..90).map(|_| sim.step().unwrap()).collect();
    assert!(records.iter().any(|r| r.flags.assumption_violated));
    for r in &records {
        // human faces +y; the rear half is y <= 0
        assert!(r.robot_xy.y <= 1e-9, "k={} {:?}", r.k, r.robot_xy);
    }
}
