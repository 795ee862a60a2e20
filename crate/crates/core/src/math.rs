//! Small rotation helpers shared across modules.

use nalgebra::{Matrix3, Rotation3, UnitQuaternion, Vector3};

/// Rotates `v` about the unit axis `k` by `angle` radians (Rodrigues).
pub fn rotate_about(v: &Vector3<f64>, k: &Vector3<f64>, angle: f64) -> Vector3<f64> {
    let (s, c) = angle.sin_cos();
    v * c + k.cross(v) * s + k * (k.dot(v) * (1.0 - c))
}

/// Inverse of the hat map: extracts the axial vector of a skew matrix.
pub fn vee(m: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)])
}

pub fn hat(v: &Vector3<f64>) -> Matrix3<f64> {
    v.cross_matrix()
}

/// Body-to-inertial rotation from roll, pitch, yaw in degrees (Z-Y-X order).
pub fn rotation_from_euler_deg(roll: f64, pitch: f64, yaw: f64) -> Rotation3<f64> {
    Rotation3::from_euler_angles(roll.to_radians(), pitch.to_radians(), yaw.to_radians())
}

pub fn quaternion_from_euler_deg(roll: f64, pitch: f64, yaw: f64) -> UnitQuaternion<f64> {
    UnitQuaternion::from_euler_angles(roll.to_radians(), pitch.to_radians(), yaw.to_radians())
}

/// Roll, pitch, yaw in degrees.
pub fn euler_deg(q: &UnitQuaternion<f64>) -> Vector3<f64> {
    let (r, p, y) = q.euler_angles();
    Vector3::new(r.to_degrees(), p.to_degrees(), y.to_degrees())
}

/// Yaw-only rotation, angle in degrees.
pub fn yaw_rotation_deg(yaw: f64) -> Rotation3<f64> {
    Rotation3::from_axis_angle(&Vector3::z_axis(), yaw.to_radians())
}

/// Orthonormal pair `(u, v)` spanning the plane normal to `axis`, with
/// `u × v = axis`.
pub fn plane_basis(axis: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let helper = if axis.y.abs() < 0.9 { Vector3::y() } else { Vector3::x() };
    let u = helper.cross(axis).normalize();
    let v = axis.cross(&u);
    (u, v)
}
