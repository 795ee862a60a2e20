use nalgebra::{Vector2, Vector3};

use super::hull::convex_hull_2d;
use super::polytope::{tolerance_for, Polytope};
use crate::error::{Error, Result};

/// Planar slice of a polytope. Points are `origin + x·u + y·v`; the polygon
/// is counter-clockwise about `u × v` (the slicing axis).
#[derive(Debug, Clone, PartialEq)]
pub struct CrossSection {
    pub origin: Vector3<f64>,
    pub u: Vector3<f64>,
    pub v: Vector3<f64>,
    pub vertices: Vec<Vector2<f64>>,
}

impl CrossSection {
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn area(&self) -> f64 {
        let k = self.vertices.len();
        if k < 3 {
            return 0.0;
        }
        (0..k)
            .map(|i| self.vertices[i].perp(&self.vertices[(i + 1) % k]))
            .sum::<f64>()
            / 2.0
    }

    pub fn to_3d(&self, p: &Vector2<f64>) -> Vector3<f64> {
        self.origin + self.u * p.x + self.v * p.y
    }
}

/// Intersection with the plane `axis · x = offset` (`axis` normalised here).
pub fn cross_section(polytope: &Polytope, axis: &Vector3<f64>, offset: f64) -> Result<CrossSection> {
    if polytope.affine_dimension < 3 {
        return Err(Error::DegeneratePolytope(polytope.affine_dimension));
    }
    let axis = axis.normalize();
    let (u, v) = crate::math::plane_basis(&axis);
    let origin = axis * offset;
    let eps = tolerance_for(&polytope.vertices);

    let signed: Vec<f64> = polytope.vertices.iter().map(|p| axis.dot(p) - offset).collect();
    let mut hits = Vec::new();
    for (i, s) in signed.iter().enumerate() {
        if s.abs() <= eps {
            hits.push(polytope.vertices[i]);
        }
    }
    for face in &polytope.faces {
        for k in 0..face.len() {
            let (a, b) = (face[k], face[(k + 1) % face.len()]);
            if a > b {
                continue; // each edge is shared by two faces
            }
            let (sa, sb) = (signed[a], signed[b]);
            if sa.abs() > eps && sb.abs() > eps && (sa < 0.0) != (sb < 0.0) {
                let t = sa / (sa - sb);
                hits.push(polytope.vertices[a] + (polytope.vertices[b] - polytope.vertices[a]) * t);
            }
        }
    }
    let flat: Vec<Vector2<f64>> = hits
        .iter()
        .map(|p| {
            let d = p - origin;
            Vector2::new(d.dot(&u), d.dot(&v))
        })
        .collect();
    Ok(CrossSection {
        origin,
        u,
        v,
        vertices: convex_hull_2d(&flat, eps),
    })
}
