//! Controller stack: waypoint sequencing, position (or hybrid
//! force-position) control, attitude strategy, attitude control and
//! allocation, run once per simulation step.

pub mod allocation;
pub mod attitude;
pub mod hybrid;
pub mod pid;
pub mod trajectory;

use nalgebra::{Rotation3, Vector3, Vector6};

pub use allocation::{allocate, pseudo_inverse, Allocation, Allocator};
pub use attitude::{attitude_control, attitude_error, attitude_strategy, AttitudeStrategy, AttitudeTarget};
pub use hybrid::{hybrid_force_position, ForceSelection};
pub use pid::{position_control, PidGains, PositionSetpoint};
pub use trajectory::{trajectory_step, TrajectoryStatus, TrajectoryWaypoint, WaypointAttitude};

use crate::dynamics::{Commands, ContactOutput, Plant, RigidState};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerConfig {
    pub strategy: AttitudeStrategy,
    pub position: PidGains,
    pub attitude: PidGains,
    pub force: PidGains,
    pub selection: Option<ForceSelection>,
}

impl ControllerConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut v = self.position.validate("controller.position");
        v.extend(self.attitude.validate("controller.attitude"));
        v.extend(self.force.validate("controller.force"));
        if let Some(sel) = &self.selection {
            v.extend(sel.validate());
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ControllerState {
    pub position_integral: Vector3<f64>,
    pub attitude_integral: Vector3<f64>,
    pub force_integral: Vector3<f64>,
    pub waypoint: usize,
    pub hold_timer: f64,
    pub inside: bool,
    pub finished: bool,
    pub last_time: Option<f64>,
    /// Last valid desired attitude, held when a strategy degenerates.
    pub last_rotation: Option<Rotation3<f64>>,
}

/// Everything the controller computed in one update, for logging.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlOutput {
    pub commands: Commands,
    pub waypoint: usize,
    pub finished: bool,
    pub hybrid_active: bool,
    pub setpoint_position: Vector3<f64>,
    pub setpoint_rotation: Rotation3<f64>,
    /// Desired contact force for the active waypoint (contact frame).
    pub setpoint_force: Vector3<f64>,
    /// Inertial force command.
    pub force_command: Vector3<f64>,
    /// Body wrench handed to allocation.
    pub body_wrench: Vector6<f64>,
    pub saturated: bool,
}

#[derive(Debug, Clone)]
pub struct FlightController {
    pub config: ControllerConfig,
    pub waypoints: Vec<TrajectoryWaypoint>,
    pub state: ControllerState,
    allocator: Allocator,
}

impl FlightController {
    pub fn new(config: ControllerConfig, waypoints: Vec<TrajectoryWaypoint>) -> Self {
        assert!(!waypoints.is_empty(), "controller needs at least one waypoint");
        FlightController {
            config,
            waypoints,
            state: ControllerState::default(),
            allocator: Allocator::default(),
        }
    }

    /// One control update. `contact` is the contact evaluated at `state`.
    pub fn update(
        &mut self,
        plant: &Plant,
        state: &RigidState,
        contact: &ContactOutput,
        dt: f64,
    ) -> Result<ControlOutput> {
        let cfg = &self.config;
        let af = &plant.airframe;
        let gravity = plant.environment.gravity;

        let status = trajectory_step(
            &self.waypoints,
            &mut self.state,
            state,
            cfg.selection.as_ref(),
            state.time,
        );
        let wp = &self.waypoints[status.active];
        let setpoint = PositionSetpoint {
            position: wp.position,
            velocity: Vector3::zeros(),
        };

        let free_flight = position_control(
            &cfg.position,
            &setpoint,
            state,
            af.mass,
            gravity,
            &self.state.position_integral,
        );
        let desired_contact = wp.wrench.map(|w| w.0);
        let hybrid = match (&cfg.selection, desired_contact) {
            (Some(sel), Some(fd)) if sel.any() => Some((sel, fd)),
            _ => None,
        };
        // force applied to the environment = −(contact force on the vehicle)
        let measured = -contact.force_inertial;
        let force_command = match hybrid {
            Some((sel, fd)) => hybrid_force_position(
                sel,
                &cfg.force,
                &fd,
                &measured,
                &free_flight,
                &force_axis_bias(sel, &cfg.force, af.mass, gravity, &state.velocity),
                &self.state.force_integral,
            ),
            None => free_flight,
        };

        let pose = wp.attitude.rotation();
        let target = match attitude_strategy(cfg.strategy, &force_command, wp.attitude.yaw(), Some(&pose)) {
            Ok(t) => t,
            Err(_) => {
                let held = self
                    .state
                    .last_rotation
                    .unwrap_or_else(|| state.attitude.to_rotation_matrix());
                AttitudeTarget {
                    rotation: held,
                    body_force: held.inverse_transform_vector(&force_command),
                }
            }
        };
        self.state.last_rotation = Some(target.rotation);

        let moment = attitude_control(
            &cfg.attitude,
            &target.rotation,
            state,
            &af.inertia,
            &self.state.attitude_integral,
        );
        let body_wrench = Vector6::new(
            target.body_force.x,
            target.body_force.y,
            target.body_force.z,
            moment.x,
            moment.y,
            moment.z,
        );
        let b = plant.allocation(&state.servo_angles)?;
        let alloc = self.allocator.allocate(&b, &body_wrench, &af.thrust_limits());

        // integrators advance after the output is formed
        let e_p = setpoint.position - state.position;
        let e_p = match hybrid {
            Some((sel, _)) => sel.rotation.transpose() * sel.position_part(&e_p),
            None => e_p,
        };
        cfg.position.accumulate(&mut self.state.position_integral, &e_p, dt);
        let e_r = attitude_error(&target.rotation, &state.attitude.to_rotation_matrix());
        cfg.attitude.accumulate(&mut self.state.attitude_integral, &e_r, dt);
        if let Some((sel, fd)) = hybrid {
            let e_f = hybrid::force_error(sel, &fd, &measured);
            cfg.force.accumulate(&mut self.state.force_integral, &e_f, dt);
        }

        let n = af.rotor_count();
        let servo_angles = match &wp.servo_angles {
            Some(s) if s.len() == n => s.clone(),
            _ => vec![0.0; n],
        };
        Ok(ControlOutput {
            commands: Commands {
                thrusts: alloc.thrusts,
                servo_angles,
            },
            waypoint: status.active,
            finished: status.finished,
            hybrid_active: hybrid.is_some(),
            setpoint_position: wp.position,
            setpoint_rotation: pose,
            setpoint_force: desired_contact.unwrap_or_else(Vector3::zeros),
            force_command,
            body_wrench,
            saturated: alloc.saturated,
        })
    }
}

/// Weight compensation plus `−m·kd·v` damping, with `kd` taken from the
/// force gains and applied per contact axis.
fn force_axis_bias(
    sel: &ForceSelection,
    force: &PidGains,
    mass: f64,
    gravity: f64,
    velocity: &Vector3<f64>,
) -> Vector3<f64> {
    let damping_c = -mass * force.kd.component_mul(&(sel.rotation * velocity));
    Vector3::new(0.0, 0.0, -mass * gravity) + sel.rotation.transpose() * damping_c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::airframe::hover_feasible;
    use crate::airframe::presets::tilted_hexarotor;
    use crate::dynamics::{contact_wrench, Environment};
    use nalgebra::Matrix3;

    fn hex_config(selection: Option<ForceSelection>) -> ControllerConfig {
        ControllerConfig {
            strategy: AttitudeStrategy::FullPose,
            position: PidGains {
                kp: Vector3::repeat(4.0),
                ki: Vector3::repeat(0.5),
                kd: Vector3::repeat(4.0),
                integrator_limit: Vector3::repeat(1.0),
            },
            attitude: PidGains {
                kp: Vector3::new(2.0, 2.0, 0.6),
                ki: Vector3::zeros(),
                kd: Vector3::new(0.45, 0.45, 0.3),
                integrator_limit: Vector3::zeros(),
            },
            force: PidGains {
                kp: Vector3::repeat(0.5),
                ki: Vector3::repeat(2.0),
                kd: Vector3::zeros(),
                integrator_limit: Vector3::repeat(5.0),
            },
            selection,
        }
    }

    fn run(controller: &mut FlightController, plant: &Plant, mut s: RigidState, seconds: f64) -> Vec<RigidState> {
        let dt = 0.001;
        let mut out = vec![s.clone()];
        for _ in 0..(seconds / dt).round() as usize {
            let c = contact_wrench(&plant.airframe, &plant.environment, &s);
            let u = controller.update(plant, &s, &c, dt).unwrap();
            s = plant.step(&s, &u.commands, dt).unwrap();
            out.push(s.clone());
        }
        out
    }

    #[test]
    fn hexarotor_recovers_from_offset() {
        let hex = tilted_hexarotor();
        let plant = Plant::new(hex.clone(), Environment::default());
        let target = Vector3::new(0.0, 0.0, -1.0);
        let mut s = RigidState::at_rest(&hex, target + Vector3::new(0.3, -0.3, 0.2449));
        s.thrusts = hover_feasible(&hex, &hex.allocation()).hover_thrusts.unwrap();
        let mut ctrl = FlightController::new(hex_config(None), vec![TrajectoryWaypoint::at(target)]);
        let states = run(&mut ctrl, &plant, s, 30.0);

        let dt = 0.001;
        let within = |st: &RigidState| (st.position - target).norm() < 0.01;
        // first time after which the error stays small for at least 5 s
        let mut streak = 0usize;
        let mut ok = false;
        for st in &states {
            if within(st) {
                streak += 1;
                if streak as f64 * dt >= 5.0 {
                    ok = true;
                    break;
                }
            } else {
                streak = 0;
            }
        }
        assert!(ok, "final error {}", (states.last().unwrap().position - target).norm());
    }

    #[test]
    fn empty_mask_matches_free_flight() {
        let hex = tilted_hexarotor();
        let plant = Plant::new(hex.clone(), Environment::default());
        let wp = vec![TrajectoryWaypoint {
            wrench: Some((Vector3::new(5.0, 0.0, 0.0), Vector3::zeros())),
            ..TrajectoryWaypoint::at(Vector3::new(0.5, 0.0, -1.0))
        }];
        let empty = ForceSelection {
            rotation: Matrix3::identity(),
            mask: [false; 3],
        };
        let mut a = FlightController::new(hex_config(Some(empty)), wp.clone());
        let mut b = FlightController::new(hex_config(None), wp);
        let mut s = RigidState::at_rest(&hex, Vector3::new(0.0, 0.1, -0.8));
        s.thrusts.fill(3.0);
        let c = contact_wrench(&hex, &plant.environment, &s);
        for _ in 0..50 {
            let ua = a.update(&plant, &s, &c, 0.001).unwrap();
            let ub = b.update(&plant, &s, &c, 0.001).unwrap();
            assert_eq!(ua, ub);
            s = plant.step(&s, &ua.commands, 0.001).unwrap();
        }
    }
}
