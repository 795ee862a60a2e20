//! Waypoint sequencing.

use nalgebra::{Rotation3, Vector3};

use super::hybrid::ForceSelection;
use super::ControllerState;
use crate::dynamics::RigidState;
use crate::math::{rotation_from_euler_deg, yaw_rotation_deg};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WaypointAttitude {
    /// Level attitude with the given yaw, degrees.
    Yaw(f64),
    /// Roll, pitch, yaw in degrees.
    Euler([f64; 3]),
}

impl WaypointAttitude {
    pub fn yaw(&self) -> f64 {
        match self {
            WaypointAttitude::Yaw(y) => *y,
            WaypointAttitude::Euler(e) => e[2],
        }
    }

    pub fn euler(&self) -> [f64; 3] {
        match self {
            WaypointAttitude::Yaw(y) => [0.0, 0.0, *y],
            WaypointAttitude::Euler(e) => *e,
        }
    }

    pub fn rotation(&self) -> Rotation3<f64> {
        match self {
            WaypointAttitude::Yaw(y) => yaw_rotation_deg(*y),
            WaypointAttitude::Euler([r, p, y]) => rotation_from_euler_deg(*r, *p, *y),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryWaypoint {
    pub position: Vector3<f64>,
    pub attitude: WaypointAttitude,
    pub servo_angles: Option<Vec<f64>>,
    /// Force (and moment) to apply to the environment, contact frame.
    pub wrench: Option<(Vector3<f64>, Vector3<f64>)>,
    pub tolerance: f64,
    pub hold: f64,
}

impl TrajectoryWaypoint {
    pub fn at(position: Vector3<f64>) -> Self {
        TrajectoryWaypoint {
            position,
            attitude: WaypointAttitude::Yaw(0.0),
            servo_angles: None,
            wrench: None,
            tolerance: 0.05,
            hold: 0.0,
        }
    }

    pub fn validate(&self, index: usize) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.tolerance > 0.0) {
            v.push(format!(
                "waypoint {}: tolerance must be > 0, got {}",
                index + 1,
                self.tolerance
            ));
        }
        if !(self.hold >= 0.0) {
            v.push(format!("waypoint {}: hold must be >= 0, got {}", index + 1, self.hold));
        }
        v
    }

    /// Distance used for arrival. On a waypoint with a contact wrench the
    /// force-controlled axes are excluded.
    pub fn distance(&self, position: &Vector3<f64>, selection: Option<&ForceSelection>) -> f64 {
        let err = self.position - position;
        match (selection, self.wrench.is_some()) {
            (Some(sel), true) => sel.position_part(&err).norm(),
            _ => err.norm(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryStatus {
    pub active: usize,
    pub finished: bool,
}

/// Advances the waypoint state machine by one call at time `t`. The index
/// moves forward at most once per call, after the vehicle has stayed within
/// tolerance for the waypoint's hold time.
pub fn trajectory_step(
    waypoints: &[TrajectoryWaypoint],
    ctrl: &mut ControllerState,
    state: &RigidState,
    selection: Option<&ForceSelection>,
    t: f64,
) -> TrajectoryStatus {
    assert!(!waypoints.is_empty(), "trajectory needs at least one waypoint");
    let dt = ctrl.last_time.map_or(0.0, |last| (t - last).max(0.0));
    ctrl.last_time = Some(t);
    if ctrl.finished {
        return TrajectoryStatus {
            active: ctrl.waypoint,
            finished: true,
        };
    }
    let wp = &waypoints[ctrl.waypoint];
    if wp.distance(&state.position, selection) <= wp.tolerance {
        if ctrl.inside {
            ctrl.hold_timer += dt;
        } else {
            ctrl.inside = true;
            ctrl.hold_timer = 0.0;
        }
        if ctrl.hold_timer >= wp.hold - 1e-9 {
            if ctrl.waypoint + 1 == waypoints.len() {
                ctrl.finished = true;
            } else {
                ctrl.waypoint += 1;
            }
            ctrl.inside = false;
            ctrl.hold_timer = 0.0;
        }
    } else {
        ctrl.inside = false;
        ctrl.hold_timer = 0.0;
    }
    TrajectoryStatus {
        active: ctrl.waypoint,
        finished: ctrl.finished,
    }
}
