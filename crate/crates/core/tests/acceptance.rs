//! One pass/fail line per acceptance criterion; exits non-zero if any fails.
//! Runs without the libtest harness so the lines always show.

mod common;

use std::time::{Duration, Instant};

use arcad_core::airframe::presets::{flat_quad, tilted_hexarotor};
use arcad_core::airframe::{hover_feasible, AirframeModel};
use arcad_core::analysis::{acceleration_set, omni_radius, response_metrics, wrench_set, WrenchComponent};
use arcad_core::dynamics::{Commands, Environment, Plant, RigidState};
use arcad_core::exec::Mode;
use arcad_core::nalgebra::{DVector, Matrix3, UnitQuaternion, Vector3, Vector6};
use arcad_core::scenario::{channel_metrics, csv_string, load_scenario, run_scenario};
use arcad_core::GRAVITY;
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rodrigues(v: &Vector3<f64>, k: &Vector3<f64>, angle: f64) -> Vector3<f64> {
    let (s, c) = angle.sin_cos();
    v * c + k.cross(v) * s + k * k.dot(v) * (1.0 - c)
}

/// Column i rebuilt from geometry alone: arm direction in the body plane,
/// thrust axis tilted about the arm by the sideward angle, moment r × a
/// plus the reaction torque along the axis.
fn geometric_column(af: &AirframeModel, i: usize) -> Vector6<f64> {
    let r = &af.rotors[i];
    let theta = r.placement_angle.to_radians();
    let arm = Vector3::new(theta.cos(), theta.sin(), 0.0);
    let pos = arm * r.arm_length + Vector3::new(0.0, 0.0, r.arm_z_offset);
    let axis = rodrigues(&Vector3::new(0.0, 0.0, -1.0), &arm, r.sideward_angle.to_radians());
    let moment = pos.cross(&axis) + axis * (r.spin_direction * r.torque_to_thrust);
    Vector6::new(axis.x, axis.y, axis.z, moment.x, moment.y, moment.z)
}

fn allocation_golden() -> Outcome {
    let start = Instant::now();
    let hex = tilted_hexarotor();
    let b = hex.allocation();
    let m = b.matrix();
    let worst = (0..6)
        .map(|i| (m.column(i) - geometric_column(&hex, i)).amax())
        .fold(0.0, f64::max);
    let axis1 = Vector3::new(m[(0, 0)], m[(1, 0)], m[(2, 0)]);
    let axis_err = (axis1 - Vector3::new(0.2500, -0.4330, -0.8660)).amax();
    let elapsed = start.elapsed();
    check(
        b.rank() == 6 && worst < 1e-12 && axis_err < 1e-4 && elapsed < Duration::from_secs(1),
        format!(
            "rank {}, column error {worst:.1e}, rotor-1 axis {axis1:.4?}, {elapsed:.2?}",
            b.rank()
        ),
    )
}

fn hover() -> Outcome {
    let start = Instant::now();
    let quad = flat_quad(1.0);
    let sol = hover_feasible(&quad, &quad.allocation());
    let u = sol.hover_thrusts.ok_or("hover reported infeasible")?;
    let u_err = u.iter().map(|v| (v - GRAVITY / 4.0).abs()).fold(0.0, f64::max);
    let spec = load_scenario(&scenario_path("quad_hover")).map_err(|e| e.to_string())?;
    let log = run_scenario(&spec).map_err(|e| e.to_string())?;
    let last = log.len() - 1;
    let drift = ["x", "y", "z"]
        .iter()
        .map(|a| {
            let s = log.require(&format!("state.{a}")).unwrap()[last];
            let r = log.require(&format!("setpoint.{a}")).unwrap()[last];
            (s - r).powi(2)
        })
        .sum::<f64>()
        .sqrt();
    let elapsed = start.elapsed();
    check(
        sol.feasible
            && u_err < 1e-9
            && drift < 0.01
            && spec.dt == 0.001
            && spec.duration == 5.0
            && elapsed < Duration::from_secs(10),
        format!(
            "u error {u_err:.1e}, drift after {} s {drift:.2e} m, {elapsed:.2?}",
            spec.duration
        ),
    )
}

fn attitude_step() -> Outcome {
    let start = Instant::now();
    let spec = load_scenario(&scenario_path("hex_attitude_step")).map_err(|e| e.to_string())?;
    let log = run_scenario(&spec).map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut parts = Vec::new();
    for axis in ["roll", "pitch", "yaw"] {
        let name = format!("state.{axis}");
        let m = channel_metrics(&log, &name, 0.02)
            .map_err(|e| e.to_string())?
            .ok_or(format!("no step detected on {name}"))?;
        let r = m.metrics;
        let finite = r.rise_time.is_some_and(f64::is_finite)
            && r.settling_time.is_some_and(f64::is_finite)
            && r.overshoot.is_finite();
        let settle_at = m.step.start as f64 * log.dt + r.settling_time.unwrap_or(f64::INFINITY);
        ok &= finite && settle_at <= 10.0 && r.steady_state_error < 0.5;
        parts.push(format!(
            "{axis} settles {settle_at:.2} s, sse {:.3}°, overshoot {:.1}%",
            r.steady_state_error, r.overshoot
        ));
    }
    let elapsed = start.elapsed();
    check(
        ok && elapsed < Duration::from_secs(30),
        format!("{}, {elapsed:.2?}", parts.join("; ")),
    )
}

fn wall_force() -> Outcome {
    let start = Instant::now();
    let spec = load_scenario(&scenario_path("hex_wall_5N")).map_err(|e| e.to_string())?;
    if spec.controller.as_ref().map(|c| c.selection.is_some()) != Some(true) || spec.environment.obstacles.is_empty() {
        return Err("fixture lacks the hybrid controller or the wall".into());
    }
    let log = run_scenario(&spec).map_err(|e| e.to_string())?;
    let fx = log.require("ee.fx").map_err(|e| e.to_string())?;
    let window = (2.0 / log.dt).round() as usize;
    let tail = &fx[fx.len() - window..];
    let (lo, hi) = tail
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let elapsed = start.elapsed();
    check(
        spec.duration == 20.0
            && (lo - 5.0).abs() <= 0.1
            && (hi - 5.0).abs() <= 0.1
            && elapsed < Duration::from_secs(60),
        format!("normal force over final 2 s in [{lo:.4}, {hi:.4}] N, {elapsed:.2?}"),
    )
}

fn soundness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut outside = 0;
    let mut worst_vol = 0.0_f64;
    for trial in 0..100 {
        let n = 3 + trial % 6;
        let af = random_airframe(&mut rng, n);
        let b = af.allocation();
        let limits = af.thrust_limits();
        let p = wrench_set(&b, &limits, WrenchComponent::Force).map_err(|e| e.to_string())?;
        let f = b.force_rows();
        let pts: Vec<Vector3<f64>> = (0..10_000)
            .map(|_| {
                let u = DVector::from_iterator(n, limits.iter().map(|l| rng.random_range(l.0..=l.1)));
                let v = &f * u;
                Vector3::new(v[0], v[1], v[2])
            })
            .collect();
        outside += p.count_outside(&pts, 1e-9, Mode::available());
        let (gens, _) = zonotope(&f, &limits);
        let expected = zonotope_volume(&gens);
        if expected > 0.0 {
            worst_vol = worst_vol.max((p.volume() - expected).abs() / expected);
        }
    }
    let elapsed = start.elapsed();
    check(
        outside == 0 && worst_vol <= 1e-6 && elapsed < Duration::from_secs(60),
        format!("{outside} of 10^6 samples outside, worst volume error {worst_vol:.1e}, {elapsed:.2?}"),
    )
}

fn degenerate() -> Outcome {
    let quad = flat_quad(1.0);
    let b = quad.allocation();
    let limits = quad.thrust_limits();
    let p = wrench_set(&b, &limits, WrenchComponent::Force).map_err(|e| e.to_string())?;
    let length = p
        .vertices
        .iter()
        .flat_map(|a| p.vertices.iter().map(move |b| (a - b).norm()))
        .fold(0.0, f64::max);
    let omni = omni_radius(&acceleration_set(&p, quad.mass, GRAVITY));
    let u_max = quad.rotors[0].thrust_max;
    check(
        p.affine_dimension == 1 && (length - 4.0 * u_max).abs() < 1e-9 && omni == 0.0,
        format!(
            "dimension {}, segment {length} N, omni radius {omni}",
            p.affine_dimension
        ),
    )
}

/// Attitude error after `t_end` of torque-free spin about the body z axis.
fn spin_error(dt: f64, t_end: f64) -> f64 {
    let mut quad = flat_quad(1.0);
    quad.inertia = Matrix3::from_diagonal(&Vector3::new(0.01, 0.015, 0.02));
    let plant = Plant::new(
        quad.clone(),
        Environment {
            gravity: 0.0,
            ..Environment::default()
        },
    );
    let w = 10.0;
    let mut s = RigidState::at_rest(&quad, Vector3::zeros());
    s.omega = Vector3::new(0.0, 0.0, w);
    let cmds = Commands {
        thrusts: DVector::zeros(4),
        servo_angles: quad.neutral_servos(),
    };
    let steps = (t_end / dt).round() as usize;
    for _ in 0..steps {
        s = plant.step(&s, &cmds, dt).unwrap();
    }
    let exact = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), w * steps as f64 * dt);
    s.attitude.angle_to(&exact)
}

fn integrator_order() -> Outcome {
    let coarse = spin_error(0.02, 2.0);
    let fine = spin_error(0.01, 2.0);
    let ratio = coarse / fine;
    let quad = flat_quad(1.0);
    let plant = Plant::new(quad.clone(), Environment::default());
    let mut s = RigidState::at_rest(&quad, Vector3::zeros());
    let idle = Commands {
        thrusts: DVector::zeros(4),
        servo_angles: quad.neutral_servos(),
    };
    for _ in 0..1000 {
        s = plant.step(&s, &idle, 0.001).map_err(|e| e.to_string())?;
    }
    let fall = s.position.z;
    check(
        (12.0..=20.0).contains(&ratio) && (fall - 4.905).abs() < 1e-6,
        format!("spin error {coarse:.2e} -> {fine:.2e}, ratio {ratio:.2}; free fall {fall:.9} m"),
    )
}

fn metrics_analytics() -> Outcome {
    let dt = 1e-4;
    let first = response_metrics(&first_order(dt, 20.0), dt, 0.0, 1.0).map_err(|e| e.to_string())?;
    let rise = first.rise_time.ok_or("no rise time")?;
    let settle = first.settling_time.ok_or("no settling time")?;
    let second = response_metrics(&second_order(0.5, dt, 40.0), dt, 0.0, 1.0).map_err(|e| e.to_string())?;
    check(
        (rise - 9f64.ln()).abs() < 1e-3
            && (settle - 50f64.ln()).abs() < 1e-3
            && (second.overshoot - 16.30).abs() < 0.05,
        format!(
            "rise {rise:.5} s, settling {settle:.5} s, overshoot {:.3}%",
            second.overshoot
        ),
    )
}

fn determinism() -> Outcome {
    let spec = load_scenario(&scenario_path("hex_wall_5N")).map_err(|e| e.to_string())?;
    let a = csv_string(&run_scenario(&spec).map_err(|e| e.to_string())?);
    let b = csv_string(&run_scenario(&spec).map_err(|e| e.to_string())?);
    check(
        a.as_bytes() == b.as_bytes(),
        format!("two runs, {} bytes each, identical = {}", a.len(), a == b),
    )
}

fn performance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let af = random_airframe(&mut rng, 8);
    let b = af.allocation();
    let limits = af.thrust_limits();
    let mut times: Vec<Duration> = (0..100)
        .map(|_| {
            let t = Instant::now();
            let p = wrench_set(&b, &limits, WrenchComponent::Force).unwrap();
            let e = t.elapsed();
            std::hint::black_box(p);
            e
        })
        .collect();
    times.sort();
    let median = times[50];
    check(
        median < Duration::from_millis(1),
        format!("median {median:.2?} over 100 calls, n = 8"),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("allocation golden", allocation_golden),
        ("hover correctness", hover),
        ("attitude step", attitude_step),
        ("wall force", wall_force),
        ("wrench-set soundness", soundness),
        ("degenerate set", degenerate),
        ("integrator order", integrator_order),
        ("metrics analytics", metrics_analytics),
        ("determinism", determinism),
        ("performance", performance),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(detail) => {
                println!("criterion {}: FAIL {name}: {detail}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
