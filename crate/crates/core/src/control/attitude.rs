//! Attitude strategies for fully-actuated vehicles and the geometric
//! attitude controller.

use nalgebra::{Matrix3, Rotation3, Vector3};

use super::pid::PidGains;
use crate::dynamics::RigidState;
use crate::error::{Error, Result};
use crate::math::{vee, yaw_rotation_deg};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AttitudeStrategy {
    /// Level attitude at the desired yaw; lateral force comes from the rotors.
    ZeroTilt,
    /// Classic multirotor behaviour: tilt so the thrust axis carries the force.
    #[default]
    ThrustAligned,
    /// Track a full commanded attitude and realise the force in that frame.
    FullPose,
}

impl AttitudeStrategy {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "zero_tilt" => Some(AttitudeStrategy::ZeroTilt),
            "thrust_aligned" => Some(AttitudeStrategy::ThrustAligned),
            "full_pose" => Some(AttitudeStrategy::FullPose),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttitudeTarget {
    pub rotation: Rotation3<f64>,
    /// Force to produce in the desired body frame.
    pub body_force: Vector3<f64>,
}

pub fn attitude_strategy(
    strategy: AttitudeStrategy,
    force: &Vector3<f64>,
    yaw_deg: f64,
    pose: Option<&Rotation3<f64>>,
) -> Result<AttitudeTarget> {
    match strategy {
        AttitudeStrategy::ZeroTilt => {
            let r = yaw_rotation_deg(yaw_deg);
            Ok(AttitudeTarget {
                rotation: r,
                body_force: r.inverse_transform_vector(force),
            })
        }
        AttitudeStrategy::FullPose => {
            let r = pose.copied().unwrap_or_else(|| yaw_rotation_deg(yaw_deg));
            Ok(AttitudeTarget {
                rotation: r,
                body_force: r.inverse_transform_vector(force),
            })
        }
        AttitudeStrategy::ThrustAligned => {
            let mag = force.norm();
            if mag < 1e-9 {
                return Err(Error::DegenerateDirection(mag));
            }
            // body z points opposite to the desired force
            let b3 = -force / mag;
            let yaw = yaw_deg.to_radians();
            let heading = Vector3::new(yaw.cos(), yaw.sin(), 0.0);
            let mut b2 = b3.cross(&heading);
            if b2.norm() < 1e-9 {
                let side = Vector3::new(-yaw.sin(), yaw.cos(), 0.0);
                b2 = side - b3 * b3.dot(&side);
            }
            let b2 = b2.normalize();
            let b1 = b2.cross(&b3);
            let m = Matrix3::from_columns(&[b1, b2, b3]);
            Ok(AttitudeTarget {
                rotation: Rotation3::from_matrix_unchecked(m),
                body_force: Vector3::new(0.0, 0.0, -mag),
            })
        }
    }
}

/// `e_R = ½ vee(R_desᵀ R − Rᵀ R_des)`.
pub fn attitude_error(desired: &Rotation3<f64>, actual: &Rotation3<f64>) -> Vector3<f64> {
    let rd = desired.matrix();
    let r = actual.matrix();
    vee(&(rd.transpose() * r - r.transpose() * rd)) * 0.5
}

/// Body moment `−Kp e_R − Kd ω − Ki∫e_R + ω × Iω`.
pub fn attitude_control(
    gains: &PidGains,
    desired: &Rotation3<f64>,
    state: &RigidState,
    inertia: &Matrix3<f64>,
    integral: &Vector3<f64>,
) -> Vector3<f64> {
    let e_r = attitude_error(desired, &state.attitude.to_rotation_matrix());
    let w = state.omega;
    -gains.kp.component_mul(&e_r) - gains.kd.component_mul(&w) - gains.integral_term(integral) + w.cross(&(inertia * w))
}
