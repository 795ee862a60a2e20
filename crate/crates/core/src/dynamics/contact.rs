//! Penalty contact between the end-effector tip and environment obstacles.

use nalgebra::{UnitQuaternion, Vector3};

use super::{Frame, RigidState, Wrench};
use crate::airframe::AirframeModel;
use crate::error::{Error, Result};
use crate::GRAVITY;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactParams {
    pub stiffness: f64,
    pub damping: f64,
    pub tangential_viscous: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Obstacle {
    /// Half-space behind a plane; `normal` points toward free space.
    Plane {
        point: Vector3<f64>,
        normal: Vector3<f64>,
        contact: ContactParams,
    },
    AxisAlignedBox {
        min: Vector3<f64>,
        max: Vector3<f64>,
        contact: ContactParams,
    },
}

impl Obstacle {
    pub fn contact_params(&self) -> &ContactParams {
        match self {
            Obstacle::Plane { contact, .. } | Obstacle::AxisAlignedBox { contact, .. } => contact,
        }
    }

    /// Penetration depth and outward surface normal at `p`, when inside.
    pub fn penetration(&self, p: &Vector3<f64>) -> Option<(f64, Vector3<f64>)> {
        match self {
            Obstacle::Plane { point, normal, .. } => {
                let d = (point - p).dot(normal);
                (d > 0.0).then_some((d, *normal))
            }
            Obstacle::AxisAlignedBox { min, max, .. } => {
                if (0..3).any(|k| p[k] <= min[k] || p[k] >= max[k]) {
                    return None;
                }
                let mut best = (f64::INFINITY, Vector3::zeros());
                for k in 0..3 {
                    let mut n = Vector3::zeros();
                    let to_min = p[k] - min[k];
                    if to_min < best.0 {
                        n[k] = -1.0;
                        best = (to_min, n);
                    }
                    let mut n = Vector3::zeros();
                    let to_max = max[k] - p[k];
                    if to_max < best.0 {
                        n[k] = 1.0;
                        best = (to_max, n);
                    }
                }
                Some(best)
            }
        }
    }

    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        let c = self.contact_params();
        if !(c.stiffness > 0.0) {
            v.push(format!("obstacle: stiffness must be > 0, got {}", c.stiffness));
        }
        if !(c.damping >= 0.0 && c.tangential_viscous >= 0.0) {
            v.push("obstacle: damping and tangential_viscous must be >= 0".into());
        }
        match self {
            Obstacle::Plane { normal, .. } => {
                if (normal.norm() - 1.0).abs() > 1e-9 {
                    v.push(format!(
                        "obstacle: plane normal must be unit length, |n| = {}",
                        normal.norm()
                    ));
                }
            }
            Obstacle::AxisAlignedBox { min, max, .. } => {
                if (0..3).any(|k| !(min[k] < max[k])) {
                    v.push("obstacle: box min must be < max componentwise".into());
                }
            }
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    pub gravity: f64,
    pub obstacles: Vec<Obstacle>,
}

impl Default for Environment {
    fn default() -> Self {
        Environment {
            gravity: GRAVITY,
            obstacles: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TipState {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
}

pub fn end_effector_pose(airframe: &AirframeModel, state: &RigidState) -> Result<TipState> {
    let ee = airframe.end_effector.as_ref().ok_or(Error::MissingEndEffector)?;
    Ok(tip_kinematics(
        &ee.tip_offset(),
        &state.position,
        &state.velocity,
        &state.attitude,
        &state.omega,
    ))
}

pub(crate) fn tip_kinematics(
    offset: &Vector3<f64>,
    position: &Vector3<f64>,
    velocity: &Vector3<f64>,
    attitude: &UnitQuaternion<f64>,
    omega: &Vector3<f64>,
) -> TipState {
    TipState {
        position: position + attitude * offset,
        velocity: velocity + attitude * omega.cross(offset),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContactOutput {
    /// Wrench on the vehicle about its centre of mass, body frame.
    pub on_vehicle: Wrench,
    /// Force and moment applied to the environment, end-effector frame.
    pub measured: Wrench,
    /// Contact force on the vehicle, inertial frame.
    pub force_inertial: Vector3<f64>,
    pub in_contact: bool,
}

impl ContactOutput {
    pub fn none() -> Self {
        ContactOutput {
            on_vehicle: Wrench::zero(Frame::Body),
            measured: Wrench::zero(Frame::EndEffector),
            force_inertial: Vector3::zeros(),
            in_contact: false,
        }
    }
}

/// Inertial contact force on the vehicle from all obstacles touching the tip.
pub(crate) fn tip_force(env: &Environment, tip: &TipState) -> Option<Vector3<f64>> {
    let mut total = Vector3::zeros();
    let mut touching = false;
    for obstacle in &env.obstacles {
        let Some((depth, normal)) = obstacle.penetration(&tip.position) else {
            continue;
        };
        let c = obstacle.contact_params();
        let rate = -tip.velocity.dot(&normal);
        let fn_mag = (c.stiffness * depth + c.damping * rate).max(0.0);
        let v_t = tip.velocity - normal * tip.velocity.dot(&normal);
        total += normal * fn_mag - v_t * c.tangential_viscous;
        touching = true;
    }
    touching.then_some(total)
}

pub fn contact_wrench(airframe: &AirframeModel, env: &Environment, state: &RigidState) -> ContactOutput {
    let Some(ee) = airframe.end_effector.as_ref() else {
        return ContactOutput::none();
    };
    let offset = ee.tip_offset();
    let tip = tip_kinematics(&offset, &state.position, &state.velocity, &state.attitude, &state.omega);
    let Some(force) = tip_force(env, &tip) else {
        return ContactOutput::none();
    };
    let body_force = state.attitude.inverse_transform_vector(&force);
    let ee_frame = ee.frame();
    ContactOutput {
        on_vehicle: Wrench::new(body_force, offset.cross(&body_force), Frame::Body),
        measured: Wrench::new(
            ee_frame.transpose() * (-body_force),
            Vector3::zeros(),
            Frame::EndEffector,
        ),
        force_inertial: force,
        in_contact: true,
    }
}
