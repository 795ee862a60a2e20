//! Airframe and scenario file parsing.
//!
//! Both formats are TOML with a closed key set: unknown keys, wrong array
//! lengths and non-numeric values are errors carrying a line/column
//! location. The key reference is in the README.

use std::ops::Range;
use std::path::{Path, PathBuf};

use nalgebra::{DVector, Matrix3, Vector3};
use serde::Deserialize;
use toml::Spanned;

use super::log::channel_catalogue;
use super::ScenarioSpec;
use crate::airframe::{hover_feasible_with_gravity, validate_airframe, AirframeModel, EndEffectorSpec, RotorSpec};
use crate::control::{
    AttitudeStrategy, ControllerConfig, ForceSelection, PidGains, TrajectoryWaypoint, WaypointAttitude,
};
use crate::dynamics::{ContactParams, Environment, Obstacle, RigidState};
use crate::error::{Error, Result};
use crate::math::quaternion_from_euler_deg;
use crate::GRAVITY;

type Numbers = Spanned<Vec<f64>>;

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

fn location(text: &str, span: Option<Range<usize>>) -> String {
    match span {
        Some(s) => {
            let (l, c) = line_col(text, s.start);
            format!("line {l}, column {c}")
        }
        None => "document".into(),
    }
}

fn toml_error(text: &str, e: toml::de::Error) -> Error {
    let msg = e.message().trim().to_string();
    // "missing field `mass`" reads better as "mass missing"
    let msg = match msg.strip_prefix("missing field `").and_then(|m| m.strip_suffix('`')) {
        Some(field) => format!("{field} missing"),
        None => msg,
    };
    Error::parse(location(text, e.span()), msg)
}

struct Ctx<'a> {
    text: &'a str,
}

impl Ctx<'_> {
    fn arity(&self, v: &Numbers, key: &str, n: usize) -> Result<Vec<f64>> {
        if v.get_ref().len() != n {
            return Err(Error::parse(
                location(self.text, Some(v.span())),
                format!("`{key}` expects {n} numbers, found {}", v.get_ref().len()),
            ));
        }
        Ok(v.get_ref().clone())
    }

    fn vec3(&self, v: &Numbers, key: &str) -> Result<Vector3<f64>> {
        Ok(Vector3::from_vec(self.arity(v, key, 3)?))
    }

    fn opt_vec3(&self, v: &Option<Numbers>, key: &str, default: Vector3<f64>) -> Result<Vector3<f64>> {
        v.as_ref().map_or(Ok(default), |v| self.vec3(v, key))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRotor {
    placement_angle: f64,
    arm_length: f64,
    #[serde(default)]
    arm_z_offset: f64,
    spin_direction: f64,
    #[serde(default)]
    sideward_angle: f64,
    #[serde(default)]
    dihedral_angle: f64,
    #[serde(default)]
    inward_angle: f64,
    #[serde(default)]
    thrust_min: f64,
    thrust_max: f64,
    torque_to_thrust: f64,
    motor_time_constant: f64,
    #[serde(default)]
    tiltable: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEndEffector {
    mount_point: Numbers,
    direction: Numbers,
    length: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAirframe {
    mass: f64,
    inertia: Numbers,
    linear_drag: Option<Numbers>,
    #[serde(default)]
    rotor: Vec<RawRotor>,
    end_effector: Option<RawEndEffector>,
}

/// Parses an airframe without checking invariants.
pub fn parse_airframe_unvalidated(text: &str) -> Result<AirframeModel> {
    let raw: RawAirframe = toml::from_str(text).map_err(|e| toml_error(text, e))?;
    let ctx = Ctx { text };
    let inertia = Matrix3::from_row_slice(&ctx.arity(&raw.inertia, "inertia", 9)?);
    let linear_drag = ctx.opt_vec3(&raw.linear_drag, "linear_drag", Vector3::zeros())?;
    let rotors = raw
        .rotor
        .into_iter()
        .map(|r| RotorSpec {
            placement_angle: r.placement_angle,
            arm_length: r.arm_length,
            arm_z_offset: r.arm_z_offset,
            spin_direction: r.spin_direction,
            sideward_angle: r.sideward_angle,
            dihedral_angle: r.dihedral_angle,
            inward_angle: r.inward_angle,
            thrust_min: r.thrust_min,
            thrust_max: r.thrust_max,
            torque_to_thrust: r.torque_to_thrust,
            motor_time_constant: r.motor_time_constant,
            tiltable: r.tiltable,
        })
        .collect();
    let end_effector = match raw.end_effector {
        Some(e) => Some(EndEffectorSpec {
            mount_point: ctx.vec3(&e.mount_point, "end_effector.mount_point")?,
            direction: ctx.vec3(&e.direction, "end_effector.direction")?,
            length: e.length,
        }),
        None => None,
    };
    Ok(AirframeModel {
        mass: raw.mass,
        inertia,
        rotors,
        end_effector,
        linear_drag,
    })
}

/// Parses and validates an airframe.
pub fn parse_airframe(text: &str) -> Result<AirframeModel> {
    let model = parse_airframe_unvalidated(text)?;
    let violations = validate_airframe(&model);
    if violations.is_empty() {
        Ok(model)
    } else {
        Err(Error::Validation(violations))
    }
}

pub fn load_airframe(path: &Path) -> Result<AirframeModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    parse_airframe(&text).map_err(|e| with_file(e, path))
}

fn with_file(e: Error, path: &Path) -> Error {
    match e {
        Error::Parse { location, message } => Error::Parse {
            location: format!("{}: {location}", path.display()),
            message,
        },
        other => other,
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnvironment {
    gravity: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObstacle {
    kind: Spanned<String>,
    point: Option<Numbers>,
    normal: Option<Numbers>,
    min: Option<Numbers>,
    max: Option<Numbers>,
    stiffness: f64,
    #[serde(default)]
    damping: f64,
    #[serde(default)]
    tangential_viscous: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGains {
    kp: Numbers,
    kd: Numbers,
    ki: Option<Numbers>,
    integrator_limit: Option<Numbers>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSelection {
    rotation: Option<Numbers>,
    mask: Spanned<Vec<bool>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawController {
    strategy: Option<Spanned<String>>,
    position: RawGains,
    attitude: RawGains,
    force: Option<RawGains>,
    selection: Option<RawSelection>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    position: Option<Numbers>,
    velocity: Option<Numbers>,
    attitude: Option<Numbers>,
    omega: Option<Numbers>,
    thrusts: Option<Numbers>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWaypoint {
    position: Numbers,
    yaw: Option<f64>,
    attitude: Option<Numbers>,
    servo_angles: Option<Numbers>,
    force: Option<Numbers>,
    moment: Option<Numbers>,
    tolerance: Option<f64>,
    hold: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: Option<String>,
    airframe: String,
    duration: f64,
    dt: Option<f64>,
    seed: Option<u64>,
    log: Option<Spanned<Vec<String>>>,
    settling_band: Option<f64>,
    environment: Option<RawEnvironment>,
    #[serde(default)]
    obstacle: Vec<RawObstacle>,
    controller: Option<RawController>,
    initial: Option<RawInitial>,
    #[serde(default)]
    waypoint: Vec<RawWaypoint>,
}

pub const DEFAULT_DT: f64 = 0.001;
pub const DEFAULT_TOLERANCE: f64 = 0.05;

impl Ctx<'_> {
    fn gains(&self, g: &RawGains, prefix: &str) -> Result<PidGains> {
        Ok(PidGains {
            kp: self.vec3(&g.kp, &format!("{prefix}.kp"))?,
            kd: self.vec3(&g.kd, &format!("{prefix}.kd"))?,
            ki: self.opt_vec3(&g.ki, &format!("{prefix}.ki"), Vector3::zeros())?,
            integrator_limit: self.opt_vec3(
                &g.integrator_limit,
                &format!("{prefix}.integrator_limit"),
                Vector3::zeros(),
            )?,
        })
    }
}

/// Parses a scenario; the airframe path is resolved against `base_dir`.
/// Every default that gets applied is listed in `provenance`.
pub fn parse_scenario(text: &str, base_dir: &Path) -> Result<ScenarioSpec> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| toml_error(text, e))?;
    let ctx = Ctx { text };
    let mut provenance = Vec::new();
    let mut violations = Vec::new();

    let airframe_path: PathBuf = base_dir.join(&raw.airframe);
    let airframe = load_airframe(&airframe_path)?;
    let n = airframe.rotor_count();

    let dt = raw.dt.unwrap_or_else(|| {
        provenance.push(format!("dt = {DEFAULT_DT} s (default)"));
        DEFAULT_DT
    });
    let seed = raw.seed.unwrap_or_else(|| {
        provenance.push("seed = 0 (default)".into());
        0
    });
    let settling_band = raw.settling_band.unwrap_or_else(|| {
        provenance.push("settling_band = 0.02 (default)".into());
        0.02
    });
    if !(dt > 0.0) {
        violations.push(format!("dt: must be > 0, got {dt}"));
    }
    if !(raw.duration == 0.0 || raw.duration >= dt) {
        violations.push(format!("duration: must be 0 or >= dt, got {}", raw.duration));
    }
    if !(settling_band > 0.0 && settling_band < 1.0) {
        violations.push(format!("settling_band: must be in (0, 1), got {settling_band}"));
    }

    let gravity = match raw.environment.and_then(|e| e.gravity) {
        Some(g) => g,
        None => {
            provenance.push(format!("environment.gravity = {GRAVITY} m/s^2 (default)"));
            GRAVITY
        }
    };
    if !(gravity >= 0.0) {
        violations.push(format!("environment.gravity: must be >= 0, got {gravity}"));
    }
    let mut obstacles = Vec::new();
    for (i, o) in raw.obstacle.iter().enumerate() {
        let contact = ContactParams {
            stiffness: o.stiffness,
            damping: o.damping,
            tangential_viscous: o.tangential_viscous,
        };
        let need = |v: &Option<Numbers>, key: &str| -> Result<Vector3<f64>> {
            match v {
                Some(v) => ctx.vec3(v, &format!("obstacle.{key}")),
                None => Err(Error::parse(
                    location(text, Some(o.kind.span())),
                    format!("obstacle {}: `{key}` missing", i + 1),
                )),
            }
        };
        let obstacle = match o.kind.get_ref().as_str() {
            "plane" => Obstacle::Plane {
                point: need(&o.point, "point")?,
                normal: need(&o.normal, "normal")?,
                contact,
            },
            "box" => Obstacle::AxisAlignedBox {
                min: need(&o.min, "min")?,
                max: need(&o.max, "max")?,
                contact,
            },
            other => {
                return Err(Error::parse(
                    location(text, Some(o.kind.span())),
                    format!("unknown obstacle kind `{other}` (expected \"plane\" or \"box\")"),
                ))
            }
        };
        violations.extend(
            obstacle
                .validate()
                .into_iter()
                .map(|m| format!("obstacle {}: {m}", i + 1)),
        );
        obstacles.push(obstacle);
    }
    if raw.obstacle.is_empty() {
        provenance.push("obstacles = [] (default)".into());
    }
    let environment = Environment { gravity, obstacles };

    let controller = match &raw.controller {
        Some(c) => {
            let strategy = match &c.strategy {
                Some(s) => AttitudeStrategy::parse(s.get_ref()).ok_or_else(|| {
                    Error::parse(
                        location(text, Some(s.span())),
                        format!(
                            "unknown strategy `{}` (expected zero_tilt, thrust_aligned or full_pose)",
                            s.get_ref()
                        ),
                    )
                })?,
                None => {
                    provenance.push("controller.strategy = thrust_aligned (default)".into());
                    AttitudeStrategy::ThrustAligned
                }
            };
            let force = match &c.force {
                Some(g) => ctx.gains(g, "controller.force")?,
                None => {
                    provenance.push("controller.force = zero gains (default)".into());
                    PidGains::zero()
                }
            };
            let selection = match &c.selection {
                Some(s) => {
                    let rotation = match &s.rotation {
                        Some(r) => Matrix3::from_row_slice(&ctx.arity(r, "controller.selection.rotation", 9)?),
                        None => {
                            provenance.push("controller.selection.rotation = identity (default)".into());
                            Matrix3::identity()
                        }
                    };
                    let m = s.mask.get_ref();
                    if m.len() != 3 {
                        return Err(Error::parse(
                            location(text, Some(s.mask.span())),
                            format!("`controller.selection.mask` expects 3 booleans, found {}", m.len()),
                        ));
                    }
                    Some(ForceSelection {
                        rotation,
                        mask: [m[0], m[1], m[2]],
                    })
                }
                None => None,
            };
            let cfg = ControllerConfig {
                strategy,
                position: ctx.gains(&c.position, "controller.position")?,
                attitude: ctx.gains(&c.attitude, "controller.attitude")?,
                force,
                selection,
            };
            violations.extend(cfg.validate());
            Some(cfg)
        }
        None => {
            provenance.push("controller = none (open loop, initial thrusts held)".into());
            None
        }
    };

    let init = raw.initial.as_ref();
    let pick =
        |key: &str, get: fn(&RawInitial) -> &Option<Numbers>, provenance: &mut Vec<String>| -> Result<Vector3<f64>> {
            match init.and_then(|i| get(i).as_ref()) {
                Some(v) => ctx.vec3(v, &format!("initial.{key}")),
                None => {
                    provenance.push(format!("initial.{key} = [0, 0, 0] (default)"));
                    Ok(Vector3::zeros())
                }
            }
        };
    let position = pick("position", |i| &i.position, &mut provenance)?;
    let velocity = pick("velocity", |i| &i.velocity, &mut provenance)?;
    let euler = pick("attitude", |i| &i.attitude, &mut provenance)?;
    let omega = pick("omega", |i| &i.omega, &mut provenance)?;
    let thrusts = match init.and_then(|i| i.thrusts.as_ref()) {
        Some(t) => DVector::from_vec(ctx.arity(t, "initial.thrusts", n)?),
        None => {
            provenance.push("initial.thrusts = hover solution (default)".into());
            hover_feasible_with_gravity(&airframe, &airframe.allocation(), gravity)
                .hover_thrusts
                .unwrap_or_else(|| DVector::from_iterator(n, airframe.rotors.iter().map(|r| r.thrust_min)))
        }
    };
    let initial = RigidState {
        time: 0.0,
        position,
        velocity,
        attitude: quaternion_from_euler_deg(euler.x, euler.y, euler.z),
        omega,
        thrusts,
        servo_angles: airframe.neutral_servos(),
    };

    let mut waypoints = Vec::new();
    for (i, w) in raw.waypoint.iter().enumerate() {
        let attitude = match (&w.attitude, w.yaw) {
            (Some(a), None) => {
                let e = ctx.arity(a, "waypoint.attitude", 3)?;
                WaypointAttitude::Euler([e[0], e[1], e[2]])
            }
            (None, Some(y)) => WaypointAttitude::Yaw(y),
            (None, None) => {
                provenance.push(format!("waypoint {}: yaw = 0 (default)", i + 1));
                WaypointAttitude::Yaw(0.0)
            }
            (Some(a), Some(_)) => {
                return Err(Error::parse(
                    location(text, Some(a.span())),
                    format!("waypoint {}: give either `yaw` or `attitude`, not both", i + 1),
                ))
            }
        };
        let wrench = match (&w.force, &w.moment) {
            (None, None) => None,
            (f, m) => Some((
                ctx.opt_vec3(f, "waypoint.force", Vector3::zeros())?,
                ctx.opt_vec3(m, "waypoint.moment", Vector3::zeros())?,
            )),
        };
        let servo_angles = match &w.servo_angles {
            Some(s) => Some(ctx.arity(s, "waypoint.servo_angles", n)?),
            None => None,
        };
        let tolerance = w.tolerance.unwrap_or_else(|| {
            provenance.push(format!(
                "waypoint {}: tolerance = {DEFAULT_TOLERANCE} m (default)",
                i + 1
            ));
            DEFAULT_TOLERANCE
        });
        let hold = w.hold.unwrap_or_else(|| {
            provenance.push(format!("waypoint {}: hold = 0 s (default)", i + 1));
            0.0
        });
        let wp = TrajectoryWaypoint {
            position: ctx.vec3(&w.position, "waypoint.position")?,
            attitude,
            servo_angles,
            wrench,
            tolerance,
            hold,
        };
        violations.extend(wp.validate(i));
        waypoints.push(wp);
    }
    if waypoints.is_empty() {
        provenance.push("waypoints = hold initial position (default)".into());
        waypoints.push(TrajectoryWaypoint {
            position: initial.position,
            attitude: WaypointAttitude::Euler([euler.x, euler.y, euler.z]),
            servo_angles: None,
            wrench: None,
            tolerance: DEFAULT_TOLERANCE,
            hold: 0.0,
        });
    }

    let catalogue = channel_catalogue(n);
    let log_channels = match &raw.log {
        Some(list) => {
            for name in list.get_ref() {
                if !catalogue.contains(name) {
                    let err = super::log::unknown_channel(name, &catalogue);
                    return Err(Error::parse(location(text, Some(list.span())), err.to_string()));
                }
            }
            list.get_ref().clone()
        }
        None => {
            provenance.push("log = all channels (default)".into());
            catalogue
        }
    };

    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }
    Ok(ScenarioSpec {
        name: raw.name,
        airframe_path,
        airframe,
        environment,
        controller,
        waypoints,
        initial,
        dt,
        duration: raw.duration,
        log_channels,
        seed,
        settling_band,
        provenance,
    })
}

pub fn load_scenario(path: &Path) -> Result<ScenarioSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut spec = parse_scenario(&text, base).map_err(|e| with_file(e, path))?;
    if spec.name.is_none() {
        spec.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    }
    Ok(spec)
}
