//! Hybrid force-position control: contact-frame axes are split between a
//! PI force loop with feedforward and the free-flight position loop.

use nalgebra::{Matrix3, Vector3};

use super::pid::PidGains;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceSelection {
    /// Rotation taking inertial vectors into the contact frame.
    pub rotation: Matrix3<f64>,
    /// `true` for force-controlled contact-frame axes.
    pub mask: [bool; 3],
}

impl ForceSelection {
    pub fn validate(&self) -> Vec<String> {
        let r = &self.rotation;
        if (r.transpose() * r - Matrix3::identity()).amax() > 1e-9 || (r.determinant() - 1.0).abs() > 1e-9 {
            vec!["selection.rotation: must be a proper orthonormal matrix".into()]
        } else {
            Vec::new()
        }
    }

    pub fn any(&self) -> bool {
        self.mask.iter().any(|&m| m)
    }

    /// Zeroes force-controlled components of an inertial vector, returning
    /// it in the contact frame.
    pub fn position_part(&self, inertial: &Vector3<f64>) -> Vector3<f64> {
        let c = self.rotation * inertial;
        Vector3::from_fn(|k, _| if self.mask[k] { 0.0 } else { c[k] })
    }
}

/// Force-loop error in the contact frame.
pub fn force_error(
    selection: &ForceSelection,
    desired_contact: &Vector3<f64>,
    measured_inertial: &Vector3<f64>,
) -> Vector3<f64> {
    let measured = selection.rotation * measured_inertial;
    Vector3::from_fn(|k, _| {
        if selection.mask[k] {
            desired_contact[k] - measured[k]
        } else {
            0.0
        }
    })
}

/// Merges the free-flight force with the force loop. Inputs:
///
/// - `desired_contact`: force to apply to the environment, contact frame;
/// - `measured_inertial`: force currently applied to the environment;
/// - `free_flight`: output of the position controller (inertial);
/// - `force_axis_bias`: inertial force added on the force axes only,
///   typically `−m g ẑ` plus velocity damping, so a non-horizontal force
///   axis still carries the weight and free-space approach stays bounded.
///
/// Returns the inertial force command. With an empty mask the free-flight
/// force is returned untouched.
pub fn hybrid_force_position(
    selection: &ForceSelection,
    force_gains: &PidGains,
    desired_contact: &Vector3<f64>,
    measured_inertial: &Vector3<f64>,
    free_flight: &Vector3<f64>,
    force_axis_bias: &Vector3<f64>,
    force_integral: &Vector3<f64>,
) -> Vector3<f64> {
    if !selection.any() {
        return *free_flight;
    }
    let e_f = force_error(selection, desired_contact, measured_inertial);
    let pi = force_gains.kp.component_mul(&e_f) + force_gains.integral_term(force_integral);
    let position_c = selection.rotation * free_flight;
    let bias_c = selection.rotation * force_axis_bias;
    let merged = Vector3::from_fn(|k, _| {
        if selection.mask[k] {
            desired_contact[k] + pi[k] + bias_c[k]
        } else {
            position_c[k]
        }
    });
    selection.rotation.transpose() * merged
}
