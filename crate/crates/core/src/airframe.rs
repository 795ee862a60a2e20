//! Airframe description and automatic allocation-matrix generation.
//!
//! A rotor's thrust axis starts at body `-z` (front-right-down frame) and is
//! tilted first about the arm's tangential axis (dihedral, with inward angle
//! subtracted) and then about the radial arm axis (sideward angle plus the
//! servo angle for tiltable rotors).

use nalgebra::{DMatrix, DVector, Matrix3, Matrix6xX, Vector3, Vector6};

use crate::error::{Error, Result};
use crate::lp::{self, LpOutcome};
use crate::GRAVITY;

#[derive(Debug, Clone, PartialEq)]
pub struct RotorSpec {
    /// Arm angle in the body x-y plane, degrees from +x toward +y.
    pub placement_angle: f64,
    pub arm_length: f64,
    pub arm_z_offset: f64,
    /// +1 or -1: sign of the reaction torque about the thrust axis.
    pub spin_direction: f64,
    pub sideward_angle: f64,
    pub dihedral_angle: f64,
    pub inward_angle: f64,
    pub thrust_min: f64,
    pub thrust_max: f64,
    /// Reaction moment per unit thrust, m.
    pub torque_to_thrust: f64,
    pub motor_time_constant: f64,
    pub tiltable: bool,
}

impl RotorSpec {
    /// An untilted rotor with the given placement and limits.
    pub fn flat(placement_angle: f64, arm_length: f64, spin_direction: f64, thrust_max: f64) -> Self {
        RotorSpec {
            placement_angle,
            arm_length,
            arm_z_offset: 0.0,
            spin_direction,
            sideward_angle: 0.0,
            dihedral_angle: 0.0,
            inward_angle: 0.0,
            thrust_min: 0.0,
            thrust_max,
            torque_to_thrust: 0.016,
            motor_time_constant: 0.02,
            tiltable: false,
        }
    }

    fn arm_direction(&self) -> Vector3<f64> {
        let th = self.placement_angle.to_radians();
        Vector3::new(th.cos(), th.sin(), 0.0)
    }

    pub fn thrust_range(&self) -> f64 {
        self.thrust_max - self.thrust_min
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EndEffectorSpec {
    pub mount_point: Vector3<f64>,
    pub direction: Vector3<f64>,
    pub length: f64,
}

impl EndEffectorSpec {
    /// Tip position in the body frame.
    pub fn tip_offset(&self) -> Vector3<f64> {
        self.mount_point + self.direction * self.length
    }

    /// Rotation from end-effector frame to body frame. The end-effector x
    /// axis is the arm direction; y is horizontal in the body frame when
    /// possible.
    pub fn frame(&self) -> Matrix3<f64> {
        let x = self.direction.normalize();
        let mut y = Vector3::z().cross(&x);
        if y.norm() < 1e-9 {
            y = x.cross(&Vector3::x());
        }
        let y = y.normalize();
        let z = x.cross(&y);
        Matrix3::from_columns(&[x, y, z])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AirframeModel {
    pub mass: f64,
    pub inertia: Matrix3<f64>,
    pub rotors: Vec<RotorSpec>,
    pub end_effector: Option<EndEffectorSpec>,
    pub linear_drag: Vector3<f64>,
}

impl AirframeModel {
    pub fn rotor_count(&self) -> usize {
        self.rotors.len()
    }

    pub fn thrust_limits(&self) -> Vec<(f64, f64)> {
        self.rotors.iter().map(|r| (r.thrust_min, r.thrust_max)).collect()
    }

    pub fn has_tiltable_rotors(&self) -> bool {
        self.rotors.iter().any(|r| r.tiltable)
    }

    /// Servo angles of zero for every rotor.
    pub fn neutral_servos(&self) -> Vec<f64> {
        vec![0.0; self.rotors.len()]
    }

    pub fn allocation(&self) -> AllocationMatrix {
        build_allocation_matrix(self, &self.neutral_servos()).expect("servo vector sized from the rotor list")
    }
}

/// 6×n map from rotor thrusts to body wrench (force rows first).
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationMatrix(pub Matrix6xX<f64>);

impl AllocationMatrix {
    pub fn rotor_count(&self) -> usize {
        self.0.ncols()
    }

    pub fn matrix(&self) -> &Matrix6xX<f64> {
        &self.0
    }

    /// Rows 1-3: force per unit thrust.
    pub fn force_rows(&self) -> DMatrix<f64> {
        self.0.rows(0, 3).into_owned()
    }

    /// Rows 4-6: moment per unit thrust.
    pub fn moment_rows(&self) -> DMatrix<f64> {
        self.0.rows(3, 3).into_owned()
    }

    pub fn apply(&self, thrusts: &DVector<f64>) -> Result<Vector6<f64>> {
        if thrusts.len() != self.rotor_count() {
            return Err(Error::Dimension {
                what: "thrust vector",
                expected: self.rotor_count(),
                got: thrusts.len(),
            });
        }
        Ok(&self.0 * thrusts)
    }

    /// Numeric rank with singular values below `1e-9·σ_max` treated as zero.
    pub fn rank(&self) -> usize {
        let svd = self.0.clone().svd(false, false);
        let smax = svd.singular_values.max();
        svd.singular_values.iter().filter(|&&s| s > 1e-9 * smax).count()
    }
}

/// Unit thrust axis of `rotor` in the body frame. `servo_angle` (degrees) is
/// added to the sideward tilt of tiltable rotors and ignored otherwise.
pub fn rotor_axis(rotor: &RotorSpec, servo_angle: f64) -> Vector3<f64> {
    let radial = rotor.arm_direction();
    let tangential = Vector3::z().cross(&radial);
    let dihedral = (rotor.dihedral_angle - rotor.inward_angle).to_radians();
    let servo = if rotor.tiltable { servo_angle } else { 0.0 };
    let sideward = (rotor.sideward_angle + servo).to_radians();

    let n0 = Vector3::new(0.0, 0.0, -1.0);
    let n1 = crate::math::rotate_about(&n0, &tangential, dihedral);
    crate::math::rotate_about(&n1, &radial, sideward)
}

pub fn rotor_position(rotor: &RotorSpec) -> Vector3<f64> {
    rotor.arm_direction() * rotor.arm_length + Vector3::new(0.0, 0.0, rotor.arm_z_offset)
}

/// Column `i` is `[n_i; r_i × n_i + d_i·k_i·n_i]`.
pub fn build_allocation_matrix(airframe: &AirframeModel, servo_angles: &[f64]) -> Result<AllocationMatrix> {
    let n = airframe.rotors.len();
    if servo_angles.len() != n {
        return Err(Error::Dimension {
            what: "servo angles",
            expected: n,
            got: servo_angles.len(),
        });
    }
    let mut b = Matrix6xX::zeros(n);
    for (i, (rotor, &servo)) in airframe.rotors.iter().zip(servo_angles).enumerate() {
        let axis = rotor_axis(rotor, servo);
        let pos = rotor_position(rotor);
        let moment = pos.cross(&axis) + axis * (rotor.spin_direction * rotor.torque_to_thrust);
        b.fixed_view_mut::<3, 1>(0, i).copy_from(&axis);
        b.fixed_view_mut::<3, 1>(3, i).copy_from(&moment);
    }
    Ok(AllocationMatrix(b))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HoverSolution {
    pub feasible: bool,
    pub hover_thrusts: Option<DVector<f64>>,
}

/// Wrench that holds the vehicle level against gravity.
pub fn hover_wrench(mass: f64, gravity: f64) -> Vector6<f64> {
    Vector6::new(0.0, 0.0, -mass * gravity, 0.0, 0.0, 0.0)
}

/// Decides whether some thrust vector inside the rotor box produces the
/// hover wrench. The minimum-norm solution is preferred when it lies inside
/// the box; otherwise a vertex of the feasible set is returned.
pub fn hover_feasible(airframe: &AirframeModel, b: &AllocationMatrix) -> HoverSolution {
    hover_feasible_with_gravity(airframe, b, GRAVITY)
}

pub fn hover_feasible_with_gravity(airframe: &AirframeModel, b: &AllocationMatrix, gravity: f64) -> HoverSolution {
    let target = hover_wrench(airframe.mass, gravity);
    let limits = airframe.thrust_limits();
    let lo = DVector::from_iterator(limits.len(), limits.iter().map(|l| l.0));
    let width: Vec<f64> = limits.iter().map(|l| l.1 - l.0).collect();

    let a = DMatrix::from_column_slice(6, b.0.ncols(), b.0.as_slice());
    let rhs = target - &b.0 * &lo;
    let outcome = lp::solve(&a, rhs.as_slice(), &width, None);
    let LpOutcome::Optimal { x, .. } = outcome else {
        return HoverSolution {
            feasible: false,
            hover_thrusts: None,
        };
    };

    let in_box = |u: &DVector<f64>| u.iter().zip(&limits).all(|(v, l)| *v >= l.0 && *v <= l.1);
    let residual = |u: &DVector<f64>| (&b.0 * u - target).amax();

    if let Some(pinv) = crate::control::allocation::pseudo_inverse(&b.0) {
        let u = pinv * target;
        if in_box(&u) && residual(&u) < 1e-10 {
            return HoverSolution {
                feasible: true,
                hover_thrusts: Some(u),
            };
        }
    }
    let u = lo + DVector::from_vec(x);
    HoverSolution {
        feasible: true,
        hover_thrusts: Some(u),
    }
}

/// Lists every violated invariant; empty when the airframe is usable. The
/// hover check only runs once the structural checks pass.
pub fn validate_airframe(airframe: &AirframeModel) -> Vec<String> {
    let mut v = Vec::new();
    if !(airframe.mass > 0.0) || !airframe.mass.is_finite() {
        v.push(format!("mass: must be positive, got {}", airframe.mass));
    }
    let i = &airframe.inertia;
    if !i.iter().all(|x| x.is_finite()) {
        v.push("inertia: entries must be finite".into());
    } else if (i - i.transpose()).norm() >= 1e-9 {
        v.push("inertia: must be symmetric".into());
    } else if i.cholesky().is_none() {
        v.push("inertia: must be positive definite".into());
    }
    if !airframe.linear_drag.iter().all(|d| d.is_finite() && *d >= 0.0) {
        v.push("linear_drag: entries must be finite and non-negative".into());
    }
    if airframe.rotors.is_empty() {
        v.push("rotor: at least one rotor is required".into());
    }
    for (k, r) in airframe.rotors.iter().enumerate() {
        let id = k + 1;
        let angles = [
            r.placement_angle,
            r.sideward_angle,
            r.dihedral_angle,
            r.inward_angle,
            r.arm_z_offset,
        ];
        if !angles.iter().all(|a| a.is_finite()) {
            v.push(format!("rotor {id}: angles and offsets must be finite"));
        }
        if !(r.thrust_min >= 0.0 && r.thrust_min < r.thrust_max && r.thrust_max.is_finite()) {
            v.push(format!(
                "rotor {id}: thrust interval must satisfy 0 <= thrust_min < thrust_max, got [{}, {}]",
                r.thrust_min, r.thrust_max
            ));
        }
        if !(r.arm_length >= 0.0) {
            v.push(format!("rotor {id}: arm_length must be >= 0, got {}", r.arm_length));
        }
        if !(r.torque_to_thrust >= 0.0) {
            v.push(format!(
                "rotor {id}: torque_to_thrust must be >= 0, got {}",
                r.torque_to_thrust
            ));
        }
        if !(r.motor_time_constant > 0.0) {
            v.push(format!(
                "rotor {id}: motor_time_constant must be > 0, got {}",
                r.motor_time_constant
            ));
        }
        if r.spin_direction != 1.0 && r.spin_direction != -1.0 {
            v.push(format!(
                "rotor {id}: spin_direction must be +1 or -1, got {}",
                r.spin_direction
            ));
        }
    }
    if let Some(ee) = &airframe.end_effector {
        if (ee.direction.norm() - 1.0).abs() > 1e-9 {
            v.push(format!(
                "end_effector: direction must be a unit vector, |d| = {}",
                ee.direction.norm()
            ));
        }
        if !(ee.length >= 0.0) {
            v.push(format!("end_effector: length must be >= 0, got {}", ee.length));
        }
    }
    if v.is_empty() && !hover_feasible(airframe, &airframe.allocation()).feasible {
        v.push(format!(
            "hover: weight {:.3} N cannot be balanced within the rotor thrust limits",
            airframe.mass * GRAVITY
        ));
    }
    v
}

/// Reference airframes used by tests, benches and the shipped fixtures.
pub mod presets {
    use super::*;

    /// Flat quadrotor, arms at 45°+k·90°, 0.25 m, limits [0, 8] N.
    pub fn flat_quad(mass: f64) -> AirframeModel {
        let spins = [1.0, -1.0, 1.0, -1.0];
        let rotors = [45.0, 135.0, 225.0, 315.0]
            .iter()
            .zip(spins)
            .map(|(&a, s)| RotorSpec::flat(a, 0.25, s, 8.0))
            .collect();
        AirframeModel {
            mass,
            inertia: Matrix3::from_diagonal(&Vector3::new(0.01, 0.01, 0.02)),
            rotors,
            end_effector: None,
            linear_drag: Vector3::zeros(),
        }
    }

    /// Hexarotor with alternating ±30° sideward arm tilt and a forward
    /// manipulator arm: m = 2 kg, L = 0.4 m, k_t = 0.016 m, limits [0, 12] N.
    pub fn tilted_hexarotor() -> AirframeModel {
        let placements = [30.0, 90.0, 150.0, 210.0, 270.0, 330.0];
        let directions = [-1.0, 1.0, -1.0, 1.0, -1.0, 1.0];
        let sideward = [-30.0, 30.0, -30.0, 30.0, -30.0, 30.0];
        let rotors = (0..6)
            .map(|i| RotorSpec {
                sideward_angle: sideward[i],
                thrust_max: 12.0,
                ..RotorSpec::flat(placements[i], 0.4, directions[i], 12.0)
            })
            .collect();
        AirframeModel {
            mass: 2.0,
            inertia: Matrix3::from_diagonal(&Vector3::new(0.03, 0.03, 0.05)),
            rotors,
            end_effector: Some(EndEffectorSpec {
                mount_point: Vector3::zeros(),
                direction: Vector3::x(),
                length: 0.6,
            }),
            linear_drag: Vector3::new(0.5, 0.5, 0.5),
        }
    }
}
