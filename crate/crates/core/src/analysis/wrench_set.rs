//! Attainable force and moment sets and the metrics derived from them.

use nalgebra::{DMatrix, Vector2, Vector3};

use super::polytope::Polytope;
use super::section::cross_section;
use crate::airframe::AllocationMatrix;
use crate::error::{Error, Result};
use crate::exec::{self, Mode};

/// Vertex enumeration visits all 2ⁿ thrust-box corners.
pub const MAX_ROTORS: usize = 16;

/// Below this many rotors the corner loop is too small to be worth
/// spreading across threads.
const PARALLEL_CORNER_THRESHOLD: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WrenchComponent {
    Force,
    Moment,
}

/// Images of all thrust-box corners under the selected 3×n block.
pub fn box_corner_images(
    b: &AllocationMatrix,
    limits: &[(f64, f64)],
    component: WrenchComponent,
    mode: Mode,
) -> Result<Vec<Vector3<f64>>> {
    let n = b.rotor_count();
    if limits.len() != n {
        return Err(Error::Dimension {
            what: "thrust limits",
            expected: n,
            got: limits.len(),
        });
    }
    if n > MAX_ROTORS {
        return Err(Error::TooManyRotors {
            rotors: n,
            limit: MAX_ROTORS,
        });
    }
    let rows: DMatrix<f64> = match component {
        WrenchComponent::Force => b.force_rows(),
        WrenchComponent::Moment => b.moment_rows(),
    };
    let lo: Vec<Vector3<f64>> = (0..n)
        .map(|i| rows.column(i) * limits[i].0)
        .map(|c| Vector3::new(c[0], c[1], c[2]))
        .collect();
    let hi: Vec<Vector3<f64>> = (0..n)
        .map(|i| rows.column(i) * limits[i].1)
        .map(|c| Vector3::new(c[0], c[1], c[2]))
        .collect();
    let mode = if n >= PARALLEL_CORNER_THRESHOLD {
        mode
    } else {
        Mode::Sequential
    };
    Ok(exec::map_range(mode, 1usize << n, |mask| {
        (0..n).fold(Vector3::zeros(), |acc, i| {
            acc + if mask >> i & 1 == 1 { hi[i] } else { lo[i] }
        })
    }))
}

/// Convex hull of the thrust-box image (a zonotope). Flat sets come back
/// with their affine dimension rather than as an error.
pub fn wrench_set(b: &AllocationMatrix, limits: &[(f64, f64)], component: WrenchComponent) -> Result<Polytope> {
    wrench_set_with(b, limits, component, Mode::available())
}

pub fn wrench_set_with(
    b: &AllocationMatrix,
    limits: &[(f64, f64)],
    component: WrenchComponent,
    mode: Mode,
) -> Result<Polytope> {
    let corners = box_corner_images(b, limits, component, mode)?;
    Ok(Polytope::from_points_with(&corners, mode).expect("at least one corner"))
}

/// Body accelerations reachable at level attitude, gravity included:
/// `v ↦ v/m + (0, 0, g)`.
pub fn acceleration_set(force_set: &Polytope, mass: f64, gravity: f64) -> Polytope {
    force_set.scaled_translated(1.0 / mass, &Vector3::new(0.0, 0.0, gravity))
}

/// Radius of the largest origin-centred ball inside the set; zero for flat
/// sets or when the origin is outside.
pub fn omni_radius(accel_set: &Polytope) -> f64 {
    if accel_set.affine_dimension < 3 {
        return 0.0;
    }
    let r = accel_set.facets.iter().map(|h| h.offset).fold(f64::INFINITY, f64::min);
    r.max(0.0)
}

/// Radius of the largest disk centred on `(0, 0, −m g)` inside the force
/// set's cross-section at that height.
pub fn lateral_force_radius(force_set: &Polytope, mass: f64, gravity: f64) -> f64 {
    if force_set.affine_dimension < 3 {
        return 0.0;
    }
    let Ok(section) = cross_section(force_set, &Vector3::z(), -mass * gravity) else {
        return 0.0;
    };
    inscribed_radius(&section.vertices, &Vector2::zeros())
}

/// Distance from `center` to the nearest edge of a counter-clockwise convex
/// polygon, zero when `center` is outside.
pub fn inscribed_radius(polygon: &[Vector2<f64>], center: &Vector2<f64>) -> f64 {
    let k = polygon.len();
    if k < 3 {
        return 0.0;
    }
    let mut r = f64::INFINITY;
    for i in 0..k {
        let (a, b) = (polygon[i], polygon[(i + 1) % k]);
        let e = b - a;
        let d = e.perp(&(center - a)) / e.norm();
        if d < 0.0 {
            return 0.0;
        }
        r = r.min(d);
    }
    r
}
