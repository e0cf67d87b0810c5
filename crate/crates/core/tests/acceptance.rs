//! Acceptance suite for the core library, criteria 1 through 9.
//!
//! Runs as a plain binary so every criterion prints exactly one line.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shadowcue_core::benchmarks;
use shadowcue_core::controller::{
    pid_step, plant_step, ControllerConfig, ControllerState, PidGains, PlantParams, RateLimits,
};
use shadowcue_core::environment::{project_shadow, Environment, HeightField, SurfaceKind};
use shadowcue_core::geometry::{
    map_to_virtual, virtual_polar_to_global, world_polar_to_global, FrameConfig, GlobalCartesian,
    WorldPolar,
};
use shadowcue_core::projection::{
    compute_light_pose, forward_project_flat, LightPose, RobotGeometry, TiltBounds,
};
use shadowcue_core::sim::{compare_modes, error_norm, run_scenario, ControlMode, CONVERGENCE_TOL};
use shadowcue_core::telemetry::tick_log_bytes;

const MAPPING_TOL: f64 = 1e-12;
const ROUND_TRIP_TOL: f64 = 1e-6;
const ARITHMETIC_TOL: f64 = 1e-12;
const STEADY_STATE_TOL: f64 = 1e-6;
const CONVERGENCE_DEADLINE: u64 = 200;
const STEADY_STATE_TICK: u64 = 1000;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(limit: Duration, started: Instant, outcome: Outcome) -> Outcome {
    let took = started.elapsed();
    match outcome {
        Ok(d) if took < limit => Ok(format!("{d}; {took:.2?} < {limit:?}")),
        Ok(d) => Err(format!("{d}; took {took:.2?}, limit {limit:?}")),
        Err(d) => Err(format!("{d}; {took:.2?}")),
    }
}

/// Frame with the headset constants: 5 m reach, 34 degree sector, 10 m rear radius.
fn headset_frame() -> FrameConfig {
    FrameConfig {
        l_v: 5.0,
        theta_v: 34f64.to_radians(),
        l_w: 10.0,
        theta_w: PI,
        ..FrameConfig::default()
    }
}

fn mapping_identities() -> Outcome {
    let started = Instant::now();
    let cfg = headset_frame();
    let cases = [
        (
            "r_w=0 -> r_v=l_v",
            map_to_virtual(WorldPolar::new(0.0, 1.0), &cfg).unwrap().r_v,
            5.0,
        ),
        (
            "r_w=l_w -> r_v=0",
            map_to_virtual(WorldPolar::new(10.0, 1.0), &cfg)
                .unwrap()
                .r_v,
            0.0,
        ),
        (
            "b_w=0 -> b_v=0",
            map_to_virtual(WorldPolar::new(4.0, 0.0), &cfg)
                .unwrap()
                .beta_v,
            0.0,
        ),
        (
            "b_w=pi -> b_v=theta_v",
            map_to_virtual(WorldPolar::new(4.0, PI), &cfg)
                .unwrap()
                .beta_v,
            34f64.to_radians(),
        ),
    ];
    let worst = cases
        .iter()
        .map(|(_, got, want)| (got - want).abs())
        .fold(0.0, f64::max);
    let failed: Vec<_> = cases
        .iter()
        .filter(|(_, got, want)| (got - want).abs() > MAPPING_TOL)
        .map(|(name, _, _)| *name)
        .collect();
    within(
        Duration::from_secs(1),
        started,
        check(
            failed.is_empty(),
            if failed.is_empty() {
                format!(
                    "{} identities, worst deviation {worst:.1e} (tol {MAPPING_TOL:.0e})",
                    cases.len()
                )
            } else {
                format!("worst deviation {worst:.1e} (tol {MAPPING_TOL:.0e}), off: {failed:?}")
            },
        ),
    )
}

fn random_position(rng: &mut ChaCha8Rng, cfg: &FrameConfig) -> WorldPolar {
    WorldPolar::new(
        rng.random_range(0.0..=cfg.l_w),
        rng.random_range(0.0..=cfg.theta_w),
    )
}

fn round_trip() -> Outcome {
    let started = Instant::now();
    let cfg = headset_frame();
    let geom = RobotGeometry::default();
    let bounds = TiltBounds::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    let mut clamped = 0;
    for _ in 0..1000 {
        let p = random_position(&mut rng, &cfg);
        let sol = compute_light_pose(p, &geom, &cfg, &bounds).unwrap();
        clamped += sol.clamped as usize;
        let robot = world_polar_to_global(p, &cfg).unwrap();
        let tip = forward_project_flat(robot, geom.height, &sol.pose).unwrap();
        let target = virtual_polar_to_global(map_to_virtual(p, &cfg).unwrap(), &cfg).unwrap();
        worst = worst.max(tip.distance(target));
    }
    within(
        Duration::from_secs(1),
        started,
        check(
            worst < ROUND_TRIP_TOL && clamped == 0,
            format!("1000 positions, worst miss {worst:.1e} m (tol {ROUND_TRIP_TOL:.0e}), {clamped} clamped"),
        ),
    )
}

fn linearity() -> Outcome {
    let cfg = headset_frame();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst_r, mut worst_b) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let (p, q) = (
            random_position(&mut rng, &cfg),
            random_position(&mut rng, &cfg),
        );
        let (vp, vq) = (
            map_to_virtual(p, &cfg).unwrap(),
            map_to_virtual(q, &cfg).unwrap(),
        );
        worst_r = worst_r.max(((vq.r_v - vp.r_v) + cfg.l_v / cfg.l_w * (q.r_w - p.r_w)).abs());
        worst_b = worst_b.max(
            ((vq.beta_v - vp.beta_v) - cfg.theta_v / cfg.theta_w * (q.beta_w - p.beta_w)).abs(),
        );
    }
    check(
        worst_r <= MAPPING_TOL && worst_b <= MAPPING_TOL,
        format!(
            "1000 pairs, worst dr {worst_r:.1e}, worst dbeta {worst_b:.1e} (tol {MAPPING_TOL:.0e})"
        ),
    )
}

type M = [[f64; 2]; 2];

fn mat_vec(m: &M, v: [f64; 2]) -> [f64; 2] {
    let mut out = [0.0; 2];
    for (i, row) in m.iter().enumerate() {
        for (j, mij) in row.iter().enumerate() {
            out[i] += mij * v[j];
        }
    }
    out
}

fn random_matrix(rng: &mut ChaCha8Rng) -> M {
    let mut m = [[0.0; 2]; 2];
    for row in &mut m {
        for v in row {
            *v = rng.random_range(-2.0..2.0);
        }
    }
    m
}

fn to_nalgebra(m: &M) -> nalgebra::Matrix2<f64> {
    nalgebra::Matrix2::new(m[0][0], m[0][1], m[1][0], m[1][1])
}

fn random_pair(rng: &mut ChaCha8Rng, span: f64) -> [f64; 2] {
    [rng.random_range(-span..span), rng.random_range(-span..span)]
}

/// PID and plant updates recomputed element by element from their definitions.
fn arithmetic_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst_pid, mut worst_plant) = (0.0f64, 0.0f64);
    let mut saturated = 0;
    for _ in 0..10_000 {
        let (kp, ki, kd) = (
            random_matrix(&mut rng),
            random_matrix(&mut rng),
            random_matrix(&mut rng),
        );
        let limit = rng.random_range(0.5..20.0);
        let rates = if rng.random_bool(0.5) {
            [f64::INFINITY; 2]
        } else {
            [rng.random_range(0.01..3.0), rng.random_range(0.01..3.0)]
        };
        let cfg = ControllerConfig {
            gains: PidGains {
                kp: to_nalgebra(&kp),
                ki: to_nalgebra(&ki),
                kd: to_nalgebra(&kd),
            },
            rate_limits: RateLimits {
                tilt: rates[0],
                pan: rates[1],
            },
            integral_limit: limit,
            ..ControllerConfig::default()
        };
        let mut state = ControllerState::new([0.0; 2], LightPose::new(0.3, 0.0));
        state.integral = random_pair(&mut rng, limit);
        state.prev_error = random_pair(&mut rng, 3.0);
        let (integral0, prev) = (state.integral, state.prev_error);
        let e = random_pair(&mut rng, 3.0);
        let out = pid_step(&cfg, &mut state, e).unwrap();

        let integral = [
            (integral0[0] + e[0]).max(-limit).min(limit),
            (integral0[1] + e[1]).max(-limit).min(limit),
        ];
        let p = mat_vec(&kp, e);
        let i = mat_vec(&ki, integral);
        let d = mat_vec(&kd, [e[0] - prev[0], e[1] - prev[1]]);
        for c in 0..2 {
            let raw = p[c] + i[c] + d[c];
            let want = raw.max(-rates[c]).min(rates[c]);
            saturated += (want != raw) as usize;
            worst_pid = worst_pid.max((out.u[c] - want).abs());
            worst_pid = worst_pid.max((state.integral[c] - integral[c]).abs());
        }
        if state.prev_error != e {
            worst_pid = f64::INFINITY;
        }

        let params = PlantParams {
            a: rng.random_range(0.1..3.0),
            b: rng.random_range(0.1..3.0),
            f: rng.random_range(0.1..3.0),
            g: rng.random_range(0.1..3.0),
        };
        let (x, u, dp) = (
            random_pair(&mut rng, 10.0),
            random_pair(&mut rng, 1.0),
            random_pair(&mut rng, 1.0),
        );
        let next = plant_step(x, u, dp, &params).unwrap();
        let bu: M = [[-params.a, 0.0], [0.0, params.b]];
        let bp: M = [[-params.f, 0.0], [0.0, params.g]];
        let (su, sp) = (mat_vec(&bu, u), mat_vec(&bp, dp));
        for c in 0..2 {
            worst_plant = worst_plant.max((next[c] - (x[c] + su[c] + sp[c])).abs());
        }
    }
    check(
        worst_pid <= ARITHMETIC_TOL && worst_plant <= ARITHMETIC_TOL,
        format!(
            "10000 inputs, worst pid {worst_pid:.1e}, worst plant {worst_plant:.1e} (tol {ARITHMETIC_TOL:.0e}), {saturated} saturated channels"
        ),
    )
}

fn convergence() -> Outcome {
    let s = benchmarks::load(benchmarks::CONVERGENCE).unwrap();
    let (records, metrics) = run_scenario(&s).unwrap();
    let converged = metrics.convergence_tick;
    let late = records
        .iter()
        .filter(|r| r.k >= STEADY_STATE_TICK)
        .map(|r| error_norm(&r.error))
        .fold(0.0, f64::max);
    let start = error_norm(&records[0].error);
    check(
        converged.is_some_and(|k| k <= CONVERGENCE_DEADLINE)
            && late < STEADY_STATE_TOL
            && records.len() as u64 > STEADY_STATE_TICK,
        format!(
            "|e| {start:.2} at tick 0, below {CONVERGENCE_TOL:.0e} for good from tick {converged:?} (deadline {CONVERGENCE_DEADLINE}), max |e| after tick {STEADY_STATE_TICK} {late:.1e} (tol {STEADY_STATE_TOL:.0e})"
        ),
    )
}

fn smoothing() -> Outcome {
    let started = Instant::now();
    let s = benchmarks::load(benchmarks::NEAR_PASS).unwrap();
    let bound = s
        .tracking_error_bound
        .expect("near-pass carries a tracking bound");
    let report = compare_modes(&s).unwrap();
    let (d, p) = (&report.direct, &report.pid);
    within(
        Duration::from_secs(10),
        started,
        check(
            p.max_delta_tilt < d.max_delta_tilt && p.rms_tracking_error < bound,
            format!(
                "max |d_tilt| pid {:.2e} vs direct {:.2e}; pid rms error {:.3} < bound {bound}",
                p.max_delta_tilt, d.max_delta_tilt, p.rms_tracking_error
            ),
        ),
    )
}

fn renderer() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let geom = RobotGeometry::default();
    let mut worst_ratio = 0.0f64;
    for cell in [0.05, 0.25, 1.0] {
        let n = (40.0 / cell) as usize;
        let env = Environment::from(HeightField::flat(
            GlobalCartesian::new(-20.0, -20.0),
            cell,
            n,
            n,
        ));
        let tol = f64::max(1e-6, 1e-3 * cell);
        for _ in 0..300 {
            let p = GlobalCartesian::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
            let pose = LightPose::new(rng.random_range(0.1..1.4), rng.random_range(0.0..2.0 * PI));
            let tip = project_shadow(p, &geom, &pose, &env, 9)
                .unwrap()
                .tip
                .ground_position();
            let analytic = forward_project_flat(p, geom.height, &pose).unwrap();
            worst_ratio = worst_ratio.max(tip.distance(analytic) / tol);
        }
    }

    let s = benchmarks::load(benchmarks::WALL_ROOM).unwrap();
    let Environment::HeightField(field) = &s.environment else {
        return Err("wall fixture has no height field".into());
    };
    let (records, _) = run_scenario(&s).unwrap();
    let r = &records[0];
    // wall face at y = 3; top ray leaves the robot's head along the light
    let dir = r.light.direction();
    let t = (3.0 - r.robot_xy.y) / dir.y;
    let expected = [r.robot_xy.x + t * dir.x, 3.0, s.robot.height + t * dir.z];
    let miss = ((r.tip.x - expected[0]).powi(2)
        + (r.tip.y - expected[1]).powi(2)
        + (r.tip.z - expected[2]).powi(2))
    .sqrt();
    let on_wall = r.tip.kind == SurfaceKind::WallFace && miss <= field.cell_size();
    within(
        Duration::from_secs(5),
        started,
        check(
            worst_ratio <= 1.0 && on_wall,
            format!(
                "flat fields: worst miss {worst_ratio:.1e} x tol; wall tip {:?} at z {:.3}, {miss:.1e} m from the face point (cell {})",
                r.tip.kind,
                r.tip.z,
                field.cell_size()
            ),
        ),
    )
}

fn containment() -> Outcome {
    let s = benchmarks::load(benchmarks::RIM_WALK).unwrap();
    let (records, m) = run_scenario(&s).unwrap();
    let on_rim = records
        .iter()
        .all(|r| (r.robot.r_w - s.frame.l_w).abs() < 1e-9);
    check(
        m.visibility_fraction == 1.0 && on_rim,
        format!(
            "rim-walk ({:?}) visibility {} over {} ticks",
            s.control, m.visibility_fraction, m.ticks
        ),
    )
}

fn determinism() -> Outcome {
    let mut bytes = 0;
    for name in benchmarks::ALL {
        let s = benchmarks::load(name).unwrap();
        let (a, _) = run_scenario(&s).unwrap();
        let (b, _) = run_scenario(&s).unwrap();
        let (la, lb) = (tick_log_bytes(&a), tick_log_bytes(&b));
        if la != lb {
            return Err(format!("{name}: tick logs differ"));
        }
        bytes += la.len();
    }
    Ok(format!(
        "{} benchmarks, {bytes} bytes identical across two runs",
        benchmarks::ALL.len()
    ))
}

/// Extra numbers reported next to the criteria, never gating.
fn notes() -> Vec<String> {
    let mut out = Vec::new();
    let mut quiet = benchmarks::load(benchmarks::NEAR_PASS).unwrap();
    quiet.position_noise = 0.0;
    let r = compare_modes(&quiet).unwrap();
    out.push(format!(
        "near-pass without tracking noise: max |d_tilt| pid {:.2e} vs direct {:.2e}",
        r.pid.max_delta_tilt, r.direct.max_delta_tilt
    ));
    let mut rim = benchmarks::load(benchmarks::RIM_WALK).unwrap();
    rim.control = ControlMode::Pid;
    let (_, m) = run_scenario(&rim).unwrap();
    out.push(format!(
        "rim-walk under pid: visibility {:.3}",
        m.visibility_fraction
    ));
    out
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("mapping identities", mapping_identities),
        ("inverse/forward round trip", round_trip),
        ("mapping linearity", linearity),
        ("pid/plant arithmetic oracle", arithmetic_oracle),
        ("convergence", convergence),
        ("smoothing on near-pass", smoothing),
        ("renderer oracle", renderer),
        ("fov containment on rim-walk", containment),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {} {name}: {detail}", i + 1)
            }
        }
    }
    for note in notes() {
        println!("note: {note}");
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
