//! Multirotor design, simulation and analysis toolkit.
//!
//! The crate is organised along the data flow of a simulation run:
//!
//! - [`airframe`]: declarative vehicle description, rotor geometry and the
//!   control allocation matrix.
//! - [`dynamics`]: 6-DOF rigid body integration with rotor lag and penalty
//!   contact at the end-effector tip.
//! - [`control`]: position, attitude, allocation, hybrid force-position and
//!   waypoint controllers.
//! - [`analysis`]: attainable force/moment polytopes, cross-sections,
//!   omnidirectional acceleration and step-response metrics.
//! - [`scenario`]: file formats, the simulation runner, signal logs and
//!   CSV/SVG/OFF output.
//!
//! Frames are front-right-down (body) and north-east-down (inertial); rotor
//! commands are thrusts in newtons.
//!
//! Data-parallel loops (corner mapping, batch membership checks, directional
//! sweeps, batch scenario runs) go through [`exec`], which uses rayon when
//! the `parallel` feature is enabled and plain iterators otherwise.

// `!(x > 0.0)` is how NaN gets rejected along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod airframe;
pub mod analysis;
pub mod control;
pub mod dynamics;
pub mod error;
pub mod exec;
pub mod lp;
pub mod math;
pub mod scenario;

pub use error::{Error, Result};
pub use nalgebra;

/// Standard gravity, m/s².
pub const GRAVITY: f64 = 9.81;
