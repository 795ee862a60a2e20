//! Six-degree-of-freedom rigid body with first-order rotor and servo lag.
//!
//! Rotor thrusts and servo angles advance by the exact exponential update;
//! the rigid body advances by one classical RK4 step with the actuator
//! wrench frozen at its start-of-step value and contact re-evaluated in
//! every stage.

pub mod contact;

use nalgebra::{DVector, Matrix3, Quaternion, UnitQuaternion, Vector3, Vector6};

pub use contact::{contact_wrench, end_effector_pose, ContactOutput, ContactParams, Environment, Obstacle, TipState};

use crate::airframe::{build_allocation_matrix, AirframeModel, AllocationMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    Body,
    Inertial,
    EndEffector,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wrench {
    pub force: Vector3<f64>,
    pub moment: Vector3<f64>,
    pub frame: Frame,
}

impl Wrench {
    pub fn new(force: Vector3<f64>, moment: Vector3<f64>, frame: Frame) -> Self {
        Wrench { force, moment, frame }
    }

    pub fn zero(frame: Frame) -> Self {
        Wrench::new(Vector3::zeros(), Vector3::zeros(), frame)
    }

    pub fn from_vector(v: &Vector6<f64>, frame: Frame) -> Self {
        Wrench::new(v.fixed_rows::<3>(0).into(), v.fixed_rows::<3>(3).into(), frame)
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        Vector6::new(
            self.force.x,
            self.force.y,
            self.force.z,
            self.moment.x,
            self.moment.y,
            self.moment.z,
        )
    }

    pub fn is_finite(&self) -> bool {
        self.force.iter().chain(self.moment.iter()).all(|v| v.is_finite())
    }
}

/// Full simulation state. `servo_angles` holds one entry per rotor; entries
/// of non-tiltable rotors stay at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidState {
    pub time: f64,
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    /// Body to inertial.
    pub attitude: UnitQuaternion<f64>,
    /// Body rates, rad/s.
    pub omega: Vector3<f64>,
    pub thrusts: DVector<f64>,
    pub servo_angles: Vec<f64>,
}

impl RigidState {
    /// Level, motionless, rotors at their minimum thrust.
    pub fn at_rest(airframe: &AirframeModel, position: Vector3<f64>) -> Self {
        RigidState {
            time: 0.0,
            position,
            velocity: Vector3::zeros(),
            attitude: UnitQuaternion::identity(),
            omega: Vector3::zeros(),
            thrusts: DVector::from_iterator(airframe.rotor_count(), airframe.rotors.iter().map(|r| r.thrust_min)),
            servo_angles: airframe.neutral_servos(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Commands {
    pub thrusts: DVector<f64>,
    pub servo_angles: Vec<f64>,
}

pub fn body_wrench(b: &AllocationMatrix, thrusts: &DVector<f64>) -> Result<Wrench> {
    Ok(Wrench::from_vector(&b.apply(thrusts)?, Frame::Body))
}

/// Time derivative of the rigid-body part of the state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDerivative {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub attitude: Quaternion<f64>,
    pub omega: Vector3<f64>,
}

#[derive(Debug, Clone, Copy)]
struct Kinematics {
    p: Vector3<f64>,
    v: Vector3<f64>,
    q: Quaternion<f64>,
    w: Vector3<f64>,
}

impl Kinematics {
    fn advance(&self, d: &StateDerivative, h: f64) -> Self {
        Kinematics {
            p: self.p + d.position * h,
            v: self.v + d.velocity * h,
            q: self.q + d.attitude * h,
            w: self.w + d.omega * h,
        }
    }

    fn rotation(&self) -> UnitQuaternion<f64> {
        UnitQuaternion::from_quaternion(self.q)
    }
}

struct Body<'a> {
    airframe: &'a AirframeModel,
    inertia_inv: Matrix3<f64>,
    gravity: f64,
}

impl Body<'_> {
    fn derivative(&self, k: &Kinematics, act: &Wrench, ext: &Wrench) -> StateDerivative {
        let af = self.airframe;
        let r = k.rotation();
        let v_body = r.inverse_transform_vector(&k.v);
        let drag = af.linear_drag.component_mul(&v_body);
        let f_body = act.force + ext.force - drag;
        let accel = r * f_body / af.mass + Vector3::new(0.0, 0.0, self.gravity);
        let iw = af.inertia * k.w;
        let tau = act.moment + ext.moment - k.w.cross(&iw);
        let omega_quat = Quaternion::from_imag(k.w);
        StateDerivative {
            position: k.v,
            velocity: accel,
            attitude: k.q * omega_quat * 0.5,
            omega: self.inertia_inv * tau,
        }
    }
}

fn inertia_inverse(airframe: &AirframeModel) -> Matrix3<f64> {
    airframe
        .inertia
        .try_inverse()
        .unwrap_or_else(|| Matrix3::from_element(f64::NAN))
}

/// Newton-Euler equations: inertial translation with body-resolved drag and
/// body-frame rotation. Wrenches are in the body frame.
pub fn state_derivative(
    airframe: &AirframeModel,
    gravity: f64,
    state: &RigidState,
    actuator: &Wrench,
    external: &Wrench,
) -> StateDerivative {
    let body = Body {
        airframe,
        inertia_inv: inertia_inverse(airframe),
        gravity,
    };
    let k = Kinematics {
        p: state.position,
        v: state.velocity,
        q: *state.attitude.quaternion(),
        w: state.omega,
    };
    body.derivative(&k, actuator, external)
}

/// Vehicle plus environment, with the allocation matrix cached for
/// airframes without tiltable rotors.
#[derive(Debug, Clone)]
pub struct Plant {
    pub airframe: AirframeModel,
    pub environment: Environment,
    fixed_allocation: Option<AllocationMatrix>,
    inertia_inv: Matrix3<f64>,
    tip_offset: Option<Vector3<f64>>,
}

impl Plant {
    pub fn new(airframe: AirframeModel, environment: Environment) -> Self {
        let fixed_allocation = (!airframe.has_tiltable_rotors()).then(|| airframe.allocation());
        let inertia_inv = inertia_inverse(&airframe);
        let tip_offset = airframe.end_effector.as_ref().map(|e| e.tip_offset());
        Plant {
            airframe,
            environment,
            fixed_allocation,
            inertia_inv,
            tip_offset,
        }
    }

    /// Allocation matrix at the given actual servo angles.
    pub fn allocation(&self, servo_angles: &[f64]) -> Result<AllocationMatrix> {
        match &self.fixed_allocation {
            Some(b) => Ok(b.clone()),
            None => build_allocation_matrix(&self.airframe, servo_angles),
        }
    }

    fn contact_at(&self, k: &Kinematics) -> Wrench {
        let Some(offset) = self.tip_offset else {
            return Wrench::zero(Frame::Body);
        };
        if self.environment.obstacles.is_empty() {
            return Wrench::zero(Frame::Body);
        }
        let r = k.rotation();
        let tip = contact::tip_kinematics(&offset, &k.p, &k.v, &r, &k.w);
        match contact::tip_force(&self.environment, &tip) {
            Some(f) => {
                let fb = r.inverse_transform_vector(&f);
                Wrench::new(fb, offset.cross(&fb), Frame::Body)
            }
            None => Wrench::zero(Frame::Body),
        }
    }

    pub fn step(&self, state: &RigidState, commands: &Commands, dt: f64) -> Result<RigidState> {
        let af = &self.airframe;
        let n = af.rotor_count();
        if commands.thrusts.len() != n {
            return Err(Error::Dimension {
                what: "thrust commands",
                expected: n,
                got: commands.thrusts.len(),
            });
        }
        if commands.servo_angles.len() != n {
            return Err(Error::Dimension {
                what: "servo commands",
                expected: n,
                got: commands.servo_angles.len(),
            });
        }
        assert!(dt > 0.0, "time step must be positive");

        let b = self.allocation(&state.servo_angles)?;
        let act = body_wrench(&b, &state.thrusts)?;
        let body = Body {
            airframe: af,
            inertia_inv: self.inertia_inv,
            gravity: self.environment.gravity,
        };

        let k0 = Kinematics {
            p: state.position,
            v: state.velocity,
            q: *state.attitude.quaternion(),
            w: state.omega,
        };
        let f = |k: &Kinematics| body.derivative(k, &act, &self.contact_at(k));
        let d1 = f(&k0);
        let d2 = f(&k0.advance(&d1, dt / 2.0));
        let d3 = f(&k0.advance(&d2, dt / 2.0));
        let d4 = f(&k0.advance(&d3, dt));
        let sum = StateDerivative {
            position: d1.position + (d2.position + d3.position) * 2.0 + d4.position,
            velocity: d1.velocity + (d2.velocity + d3.velocity) * 2.0 + d4.velocity,
            attitude: d1.attitude + (d2.attitude + d3.attitude) * 2.0 + d4.attitude,
            omega: d1.omega + (d2.omega + d3.omega) * 2.0 + d4.omega,
        };
        let k1 = k0.advance(&sum, dt / 6.0);

        let mut thrusts = state.thrusts.clone();
        let mut servos = state.servo_angles.clone();
        for (i, rotor) in af.rotors.iter().enumerate() {
            let decay = (-dt / rotor.motor_time_constant).exp();
            let cmd = commands.thrusts[i].clamp(rotor.thrust_min, rotor.thrust_max);
            thrusts[i] = (cmd + (thrusts[i] - cmd) * decay).clamp(rotor.thrust_min, rotor.thrust_max);
            if rotor.tiltable {
                let cmd = commands.servo_angles[i];
                servos[i] = cmd + (servos[i] - cmd) * decay;
            }
        }

        let next = RigidState {
            time: state.time + dt,
            position: k1.p,
            velocity: k1.v,
            attitude: UnitQuaternion::new_normalize(k1.q),
            omega: k1.w,
            thrusts,
            servo_angles: servos,
        };
        check_finite(&next, k1.q)?;
        Ok(next)
    }
}

fn check_finite(s: &RigidState, raw_q: Quaternion<f64>) -> Result<()> {
    let named = [
        ("state.x", s.position.x),
        ("state.y", s.position.y),
        ("state.z", s.position.z),
        ("state.vx", s.velocity.x),
        ("state.vy", s.velocity.y),
        ("state.vz", s.velocity.z),
        (
            "state.attitude",
            if raw_q.norm() > 0.0 { raw_q.norm() } else { f64::NAN },
        ),
        ("state.p", s.omega.x),
        ("state.q", s.omega.y),
        ("state.r", s.omega.z),
    ];
    let bad = named
        .iter()
        .find(|(_, v)| !v.is_finite())
        .map(|(n, _)| n.to_string())
        .or_else(|| {
            s.thrusts
                .iter()
                .chain(s.servo_angles.iter())
                .position(|v| !v.is_finite())
                .map(|i| format!("rotor.{}", i + 1))
        });
    match bad {
        Some(channel) => Err(Error::Divergence { channel, time: s.time }),
        None => Ok(()),
    }
}

/// One integration step; see [`Plant::step`].
pub fn step(
    airframe: &AirframeModel,
    environment: &Environment,
    state: &RigidState,
    commands: &Commands,
    dt: f64,
) -> Result<RigidState> {
    Plant::new(airframe.clone(), environment.clone()).step(state, commands, dt)
}
