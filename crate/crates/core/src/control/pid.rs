use nalgebra::Vector3;

use crate::dynamics::RigidState;

/// Per-axis PID gains. `integrator_limit` bounds the magnitude of the
/// integral term's contribution, not the raw integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidGains {
    pub kp: Vector3<f64>,
    pub ki: Vector3<f64>,
    pub kd: Vector3<f64>,
    pub integrator_limit: Vector3<f64>,
}

impl PidGains {
    pub fn pd(kp: f64, kd: f64) -> Self {
        PidGains {
            kp: Vector3::repeat(kp),
            ki: Vector3::zeros(),
            kd: Vector3::repeat(kd),
            integrator_limit: Vector3::zeros(),
        }
    }

    pub fn zero() -> Self {
        PidGains::pd(0.0, 0.0)
    }

    pub fn validate(&self, name: &str) -> Vec<String> {
        let mut v = Vec::new();
        for (label, g) in [
            ("kp", &self.kp),
            ("ki", &self.ki),
            ("kd", &self.kd),
            ("integrator_limit", &self.integrator_limit),
        ] {
            if !g.iter().all(|x| x.is_finite() && *x >= 0.0) {
                v.push(format!("{name}.{label}: gains must be finite and >= 0"));
            }
        }
        v
    }

    /// `Ki·∫e` clamped to `±integrator_limit`.
    pub fn integral_term(&self, integral: &Vector3<f64>) -> Vector3<f64> {
        let raw = self.ki.component_mul(integral);
        Vector3::from_fn(|k, _| raw[k].clamp(-self.integrator_limit[k], self.integrator_limit[k]))
    }

    /// Adds `error·dt` and clamps so the integral term never exceeds the
    /// limit (no wind-up beyond saturation).
    pub fn accumulate(&self, integral: &mut Vector3<f64>, error: &Vector3<f64>, dt: f64) {
        for k in 0..3 {
            if self.ki[k] > 0.0 {
                let cap = self.integrator_limit[k] / self.ki[k];
                integral[k] = (integral[k] + error[k] * dt).clamp(-cap, cap);
            } else {
                integral[k] = 0.0;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionSetpoint {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
}

/// Desired inertial force: `m·(Kp e_p + Kd e_v + Ki∫e_p) − m g ẑ` (NED, so
/// the gravity compensation points along −z).
pub fn position_control(
    gains: &PidGains,
    desired: &PositionSetpoint,
    state: &RigidState,
    mass: f64,
    gravity: f64,
    integral: &Vector3<f64>,
) -> Vector3<f64> {
    let e_p = desired.position - state.position;
    let e_v = desired.velocity - state.velocity;
    let accel = gains.kp.component_mul(&e_p) + gains.kd.component_mul(&e_v) + gains.integral_term(integral);
    accel * mass - Vector3::new(0.0, 0.0, mass * gravity)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::airframe::presets::flat_quad;
    use approx::assert_abs_diff_eq;

    fn state_at(p: Vector3<f64>) -> RigidState {
        RigidState::at_rest(&flat_quad(1.0), p)
    }

    #[test]
    fn gravity_compensation_only() {
        let sp = PositionSetpoint {
            position: Vector3::zeros(),
            velocity: Vector3::zeros(),
        };
        let f = position_control(
            &PidGains::pd(4.0, 2.0),
            &sp,
            &state_at(Vector3::zeros()),
            2.0,
            9.81,
            &Vector3::zeros(),
        );
        assert_abs_diff_eq!(f, Vector3::new(0.0, 0.0, -19.62), epsilon = 1e-12);
    }

    #[test]
    fn proportional_term() {
        let sp = PositionSetpoint {
            position: Vector3::new(1.0, 0.0, 0.0),
            velocity: Vector3::zeros(),
        };
        let f = position_control(
            &PidGains::pd(4.0, 0.0),
            &sp,
            &state_at(Vector3::zeros()),
            1.0,
            9.81,
            &Vector3::zeros(),
        );
        assert_abs_diff_eq!(f, Vector3::new(4.0, 0.0, -9.81), epsilon = 1e-12);
    }

    #[test]
    fn integral_is_clamped() {
        let gains = PidGains {
            ki: Vector3::repeat(2.0),
            integrator_limit: Vector3::new(0.5, 0.5, 0.5),
            ..PidGains::zero()
        };
        let sp = PositionSetpoint {
            position: Vector3::zeros(),
            velocity: Vector3::zeros(),
        };
        let f = position_control(
            &gains,
            &sp,
            &state_at(Vector3::zeros()),
            1.0,
            0.0,
            &Vector3::new(10.0, -10.0, 0.1),
        );
        assert_abs_diff_eq!(f, Vector3::new(0.5, -0.5, 0.2), epsilon = 1e-12);

        let mut integral = Vector3::zeros();
        for _ in 0..1000 {
            gains.accumulate(&mut integral, &Vector3::new(1.0, -1.0, 0.0), 0.01);
        }
        assert_abs_diff_eq!(integral, Vector3::new(0.25, -0.25, 0.0), epsilon = 1e-12);
        assert_abs_diff_eq!(
            gains.integral_term(&integral),
            Vector3::new(0.5, -0.5, 0.0),
            epsilon = 1e-12
        );
    }
}
