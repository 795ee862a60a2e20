//! Independent oracles shared by the integration tests. Nothing here calls
//! the hull or polytope code.
#![allow(dead_code)]

use std::path::PathBuf;

use arcad_core::airframe::{AirframeModel, RotorSpec};
use arcad_core::lp::{self, LpOutcome};
use arcad_core::nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn scenario_path(name: &str) -> PathBuf {
    fixtures().join("scenarios").join(format!("{name}.toml"))
}

pub fn airframe_path(name: &str) -> PathBuf {
    fixtures().join("airframes").join(format!("{name}.toml"))
}

/// Random airframe with `n` rotors, random tilts and limits.
pub fn random_airframe(rng: &mut ChaCha8Rng, n: usize) -> AirframeModel {
    let rotors = (0..n)
        .map(|i| RotorSpec {
            placement_angle: 360.0 * i as f64 / n as f64 + rng.random_range(-15.0..15.0),
            arm_length: rng.random_range(0.15..0.5),
            arm_z_offset: rng.random_range(-0.05..0.05),
            spin_direction: if i % 2 == 0 { 1.0 } else { -1.0 },
            sideward_angle: rng.random_range(-45.0..45.0),
            dihedral_angle: rng.random_range(-30.0..30.0),
            inward_angle: 0.0,
            thrust_min: 0.0,
            thrust_max: rng.random_range(4.0..15.0),
            torque_to_thrust: 0.016,
            motor_time_constant: 0.02,
            tiltable: false,
        })
        .collect();
    AirframeModel {
        mass: 1.5,
        inertia: Matrix3::from_diagonal(&Vector3::new(0.02, 0.02, 0.04)),
        rotors,
        end_effector: None,
        linear_drag: Vector3::zeros(),
    }
}

/// Volume of the zonotope Σ [0, 1]·g_i.
pub fn zonotope_volume(generators: &[Vector3<f64>]) -> f64 {
    let n = generators.len();
    let mut v = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                v += Matrix3::from_columns(&[generators[i], generators[j], generators[k]])
                    .determinant()
                    .abs();
            }
        }
    }
    v
}

/// Generators `w_i g_i` and lower corner `Σ lo_i g_i` of a force or moment
/// zonotope given its 3×n map.
pub fn zonotope(map: &DMatrix<f64>, limits: &[(f64, f64)]) -> (Vec<Vector3<f64>>, Vector3<f64>) {
    let gens = (0..map.ncols())
        .map(|i| Vector3::new(map[(0, i)], map[(1, i)], map[(2, i)]) * (limits[i].1 - limits[i].0))
        .collect();
    let lo = (0..map.ncols())
        .map(|i| Vector3::new(map[(0, i)], map[(1, i)], map[(2, i)]) * limits[i].0)
        .sum();
    (gens, lo)
}

/// Largest `t ≥ 0` with `start + t·dir` attainable, i.e. `M u = start + t·dir`
/// for some `u` in the box, found by linear programming.
pub fn max_along(map: &DMatrix<f64>, limits: &[(f64, f64)], start: &Vector3<f64>, dir: &Vector3<f64>) -> Option<f64> {
    let n = map.ncols();
    let mut a = DMatrix::zeros(3, n + 1);
    a.view_mut((0, 0), (3, n)).copy_from(map);
    for r in 0..3 {
        a[(r, n)] = -dir[r];
    }
    let lo = DVector::from_iterator(n, limits.iter().map(|l| l.0));
    let rhs = start - map * lo;
    let mut upper: Vec<f64> = limits.iter().map(|l| l.1 - l.0).collect();
    upper.push(f64::INFINITY);
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    match lp::solve(&a, rhs.as_slice(), &upper, Some(&c)) {
        LpOutcome::Optimal { value, .. } => Some(value),
        _ => None,
    }
}

pub fn random_unit(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

/// First-order lag `1 − e^{−t}` sampled at `dt`.
pub fn first_order(dt: f64, t_end: f64) -> Vec<f64> {
    (0..=(t_end / dt).round() as usize)
        .map(|k| 1.0 - (-(k as f64) * dt).exp())
        .collect()
}

/// Unit step response of `ω² / (s² + 2ζω s + ω²)` with ω = 1, ζ < 1.
pub fn second_order(zeta: f64, dt: f64, t_end: f64) -> Vec<f64> {
    let wd = (1.0 - zeta * zeta).sqrt();
    let phi = zeta.acos();
    (0..=(t_end / dt).round() as usize)
        .map(|k| {
            let t = k as f64 * dt;
            1.0 - (-zeta * t).exp() * (wd * t + phi).sin() / wd
        })
        .collect()
}
