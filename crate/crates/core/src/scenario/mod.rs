//! Scenario files, the simulation loop and output generation.

mod config;
mod log;
mod output;

use std::path::PathBuf;

use nalgebra::{Vector3, Vector6};

pub use config::{
    load_airframe, load_scenario, parse_airframe, parse_airframe_unvalidated, parse_scenario, DEFAULT_DT,
    DEFAULT_TOLERANCE,
};
pub use log::{channel_catalogue, channel_group, setpoint_for, unknown_channel, SignalLog};
pub use output::{
    channel_metrics, csv_string, export_csv, export_polytope, export_section_svg, metrics_csv, metrics_table,
    off_string, read_csv, render_plots, render_plots_with_band, render_svg, section_svg, write_atomic, ChannelMetrics,
};

use crate::airframe::AirframeModel;
use crate::control::{ControlOutput, ControllerConfig, FlightController, TrajectoryWaypoint};
use crate::dynamics::{contact_wrench, end_effector_pose, Commands, ContactOutput, Environment, Plant, RigidState};
use crate::error::{Error, Result};
use crate::exec::{map_slice, Mode};
use crate::math::euler_deg;

/// A complete, validated experiment description.
#[derive(Debug, Clone)]
pub struct ScenarioSpec {
    pub name: Option<String>,
    pub airframe_path: PathBuf,
    pub airframe: AirframeModel,
    pub environment: Environment,
    /// `None` flies open loop with the initial thrusts held.
    pub controller: Option<ControllerConfig>,
    pub waypoints: Vec<TrajectoryWaypoint>,
    pub initial: RigidState,
    pub dt: f64,
    pub duration: f64,
    pub log_channels: Vec<String>,
    /// Reserved; the simulation itself has no random elements.
    pub seed: u64,
    pub settling_band: f64,
    /// Human-readable record of each default that was applied.
    pub provenance: Vec<String>,
}

impl ScenarioSpec {
    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }
}

#[derive(Clone, Copy)]
enum Channel {
    Position(usize),
    Velocity(usize),
    Euler(usize),
    Rate(usize),
    SetPosition(usize),
    SetEuler(usize),
    SetForce(usize),
    TipPosition(usize),
    TipForce(usize),
    TipMoment(usize),
    Generated(usize),
    ContactForce(usize),
    Thrust(usize),
    Command(usize),
    Servo(usize),
    ForceCommand(usize),
    Saturated,
    Waypoint,
    Hybrid,
}

fn parse_channel(name: &str, rotors: usize) -> Option<Channel> {
    use Channel::*;
    let (ns, ch) = name.split_once('.')?;
    let xyz = |s: &str| ["x", "y", "z"].iter().position(|a| *a == s);
    let rpy = |s: &str| ["roll", "pitch", "yaw"].iter().position(|a| *a == s);
    let pqr = |s: &str| ["p", "q", "r"].iter().position(|a| *a == s);
    let rotor_index = |s: &str, prefix: &str| {
        s.strip_prefix(prefix)
            .and_then(|i| i.parse::<usize>().ok())
            .filter(|k| *k >= 1 && *k <= rotors)
            .map(|k| k - 1)
    };
    Some(match ns {
        "state" => {
            if let Some(i) = xyz(ch) {
                Position(i)
            } else if let Some(i) = ch.strip_prefix('v').and_then(xyz) {
                Velocity(i)
            } else if let Some(i) = rpy(ch) {
                Euler(i)
            } else {
                Rate(pqr(ch)?)
            }
        }
        "setpoint" => {
            if let Some(i) = xyz(ch) {
                SetPosition(i)
            } else if let Some(i) = rpy(ch) {
                SetEuler(i)
            } else {
                SetForce(ch.strip_prefix('f').and_then(xyz)?)
            }
        }
        "ee" => {
            if let Some(i) = xyz(ch) {
                TipPosition(i)
            } else if let Some(i) = ch.strip_prefix('f').and_then(xyz) {
                TipForce(i)
            } else {
                TipMoment(ch.strip_prefix('m').and_then(xyz)?)
            }
        }
        "wrench" => {
            if let Some(i) = ch.strip_prefix('f').and_then(xyz) {
                Generated(i)
            } else if let Some(i) = ch.strip_prefix('m').and_then(xyz) {
                Generated(i + 3)
            } else {
                ContactForce(ch.strip_prefix('c').and_then(xyz)?)
            }
        }
        "rotor" => {
            if let Some(i) = rotor_index(ch, "servo") {
                Servo(i)
            } else if let Some(i) = rotor_index(ch, "cmd") {
                Command(i)
            } else {
                Thrust(rotor_index(ch, "u")?)
            }
        }
        "ctrl" => match ch {
            "saturated" => Saturated,
            "waypoint" => Waypoint,
            "hybrid" => Hybrid,
            _ => ForceCommand(ch.strip_prefix('f').and_then(xyz)?),
        },
        _ => return None,
    })
}

struct Sample<'a> {
    state: &'a RigidState,
    euler: Vector3<f64>,
    out: &'a ControlOutput,
    set_euler: Vector3<f64>,
    contact: &'a ContactOutput,
    tip: Vector3<f64>,
    generated: Vector6<f64>,
}

impl Sample<'_> {
    fn value(&self, c: Channel) -> f64 {
        use Channel::*;
        let s = self.state;
        match c {
            Position(i) => s.position[i],
            Velocity(i) => s.velocity[i],
            Euler(i) => self.euler[i],
            Rate(i) => s.omega[i],
            SetPosition(i) => self.out.setpoint_position[i],
            SetEuler(i) => self.set_euler[i],
            SetForce(i) => self.out.setpoint_force[i],
            TipPosition(i) => self.tip[i],
            TipForce(i) => self.contact.measured.force[i],
            TipMoment(i) => self.contact.measured.moment[i],
            Generated(i) => self.generated[i],
            ContactForce(i) => self.contact.force_inertial[i],
            Thrust(i) => s.thrusts[i],
            Command(i) => self.out.commands.thrusts[i],
            Servo(i) => s.servo_angles[i].to_degrees(),
            ForceCommand(i) => self.out.force_command[i],
            Saturated => f64::from(u8::from(self.out.saturated)),
            Waypoint => (self.out.waypoint + 1) as f64,
            Hybrid => f64::from(u8::from(self.out.hybrid_active)),
        }
    }
}

fn open_loop_output(spec: &ScenarioSpec) -> ControlOutput {
    let init = &spec.initial;
    ControlOutput {
        commands: Commands {
            thrusts: init.thrusts.clone(),
            servo_angles: init.servo_angles.clone(),
        },
        waypoint: 0,
        finished: false,
        hybrid_active: false,
        setpoint_position: init.position,
        setpoint_rotation: init.attitude.to_rotation_matrix(),
        setpoint_force: Vector3::zeros(),
        force_command: Vector3::zeros(),
        body_wrench: Vector6::zeros(),
        saturated: false,
    }
}

/// Runs the closed loop for `duration` and records the requested channels
/// at every step, from t = 0 to t = duration inclusive.
pub fn run_scenario(spec: &ScenarioSpec) -> Result<SignalLog> {
    let n = spec.airframe.rotor_count();
    let channels = spec
        .log_channels
        .iter()
        .map(|name| parse_channel(name, n).ok_or_else(|| unknown_channel(name, &channel_catalogue(n))))
        .collect::<Result<Vec<_>>>()?;
    let mut log = SignalLog::new(spec.dt, spec.log_channels.clone())?;

    let plant = Plant::new(spec.airframe.clone(), spec.environment.clone());
    let mut controller = spec
        .controller
        .clone()
        .map(|c| FlightController::new(c, spec.waypoints.clone()));
    let open_loop = open_loop_output(spec);
    let has_tip = spec.airframe.end_effector.is_some();

    let mut state = spec.initial.clone();
    state.time = 0.0;
    let steps = spec.steps();
    let mut row = vec![0.0; channels.len()];
    for k in 0..=steps {
        state.time = k as f64 * spec.dt;
        let contact = contact_wrench(&plant.airframe, &plant.environment, &state);
        let out = match controller.as_mut() {
            Some(c) => c.update(&plant, &state, &contact, spec.dt)?,
            None => open_loop.clone(),
        };
        let generated = plant.allocation(&state.servo_angles)?.apply(&state.thrusts)?;
        let tip = if has_tip {
            end_effector_pose(&plant.airframe, &state)?.position
        } else {
            Vector3::zeros()
        };
        let sample = Sample {
            state: &state,
            euler: euler_deg(&state.attitude),
            out: &out,
            set_euler: euler_deg(&nalgebra::UnitQuaternion::from_rotation_matrix(&out.setpoint_rotation)),
            contact: &contact,
            tip,
            generated,
        };
        for (slot, &c) in row.iter_mut().zip(&channels) {
            *slot = sample.value(c);
        }
        log.push_row(&row)?;
        if k < steps {
            state = plant.step(&state, &out.commands, spec.dt).map_err(|e| match e {
                Error::Divergence { channel, .. } => Error::Divergence {
                    channel,
                    time: (k + 1) as f64 * spec.dt,
                },
                other => other,
            })?;
        }
    }
    Ok(log)
}

/// Runs independent scenarios, in parallel when `mode` allows it. Results
/// come back in input order and match sequential runs exactly.
pub fn run_batch(specs: &[ScenarioSpec], mode: Mode) -> Vec<Result<SignalLog>> {
    map_slice(mode, specs, run_scenario)
}
