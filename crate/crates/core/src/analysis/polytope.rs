use std::collections::{BTreeSet, HashMap};

use nalgebra::{Matrix3, Vector3};

use super::hull::{convex_hull, merge_coplanar, HullShape};
use crate::exec::{self, Mode};

/// `normal · x ≤ offset`, with a unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Halfspace {
    pub normal: Vector3<f64>,
    pub offset: f64,
}

impl Halfspace {
    pub fn violation(&self, x: &Vector3<f64>) -> f64 {
        self.normal.dot(x) - self.offset
    }
}

/// Convex polytope in vertex and halfspace form.
///
/// For full-dimensional sets `facets[i]` is the plane of the polygon
/// `faces[i]` (vertex indices, counter-clockwise seen from outside). Flat
/// sets carry their affine hull as pairs of opposing halfspaces, so
/// membership tests work uniformly; a flat polygon has one face.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    pub vertices: Vec<Vector3<f64>>,
    pub facets: Vec<Halfspace>,
    pub faces: Vec<Vec<usize>>,
    pub affine_dimension: usize,
}

/// Coplanarity tolerance scaled to the point cloud's extent.
pub fn tolerance_for(points: &[Vector3<f64>]) -> f64 {
    let extent = points.iter().fold(0.0_f64, |m, p| m.max(p.amax()));
    1e-9 * extent.max(1.0)
}

fn orthonormal_complement(d: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    crate::math::plane_basis(&d.normalize())
}

fn opposing(normal: Vector3<f64>, at: &Vector3<f64>) -> [Halfspace; 2] {
    let b = normal.dot(at);
    [
        Halfspace { normal, offset: b },
        Halfspace {
            normal: -normal,
            offset: -b,
        },
    ]
}

impl Polytope {
    pub fn from_points(points: &[Vector3<f64>]) -> Option<Polytope> {
        Self::from_points_with(points, Mode::available())
    }

    /// Convex hull of `points`; `None` for an empty input. `mode` controls
    /// the tight-offset pass over the input cloud.
    pub fn from_points_with(points: &[Vector3<f64>], mode: Mode) -> Option<Polytope> {
        let eps = tolerance_for(points);
        match convex_hull(points, eps) {
            HullShape::Empty => None,
            HullShape::Point(p) => {
                let mut facets = Vec::new();
                for axis in [Vector3::x(), Vector3::y(), Vector3::z()] {
                    facets.extend(opposing(axis, &p));
                }
                Some(Polytope {
                    vertices: vec![p],
                    facets,
                    faces: Vec::new(),
                    affine_dimension: 0,
                })
            }
            HullShape::Segment(a, b) => {
                let d = (b - a).normalize();
                let (e1, e2) = orthonormal_complement(&d);
                let mut facets = vec![
                    Halfspace {
                        normal: d,
                        offset: d.dot(&b),
                    },
                    Halfspace {
                        normal: -d,
                        offset: -d.dot(&a),
                    },
                ];
                facets.extend(opposing(e1, &a));
                facets.extend(opposing(e2, &a));
                Some(Polytope {
                    vertices: vec![a, b],
                    facets,
                    faces: Vec::new(),
                    affine_dimension: 1,
                })
            }
            HullShape::Polygon { vertices, normal } => {
                let k = vertices.len();
                let mut facets: Vec<Halfspace> = (0..k)
                    .map(|i| {
                        let (a, b) = (vertices[i], vertices[(i + 1) % k]);
                        let out = (b - a).cross(&normal).normalize();
                        Halfspace {
                            normal: out,
                            offset: out.dot(&a),
                        }
                    })
                    .collect();
                facets.extend(opposing(normal, &vertices[0]));
                Some(Polytope {
                    vertices,
                    facets,
                    faces: vec![(0..k).collect()],
                    affine_dimension: 2,
                })
            }
            HullShape::Solid { triangles } => Some(Self::from_triangles(points, &triangles, eps, mode)),
        }
    }

    fn from_triangles(points: &[Vector3<f64>], triangles: &[[usize; 3]], eps: f64, mode: Mode) -> Polytope {
        let groups = merge_coplanar(points, triangles, eps);

        // facet normals from area-weighted triangle normals
        let mut planes: Vec<(Vector3<f64>, BTreeSet<usize>)> = groups
            .iter()
            .map(|g| {
                let mut n = Vector3::zeros();
                let mut verts = BTreeSet::new();
                for &k in g {
                    let [a, b, c] = triangles[k];
                    n += (points[b] - points[a]).cross(&(points[c] - points[a]));
                    verts.extend([a, b, c]);
                }
                (n.normalize(), verts)
            })
            .collect();

        // a facet split by numerical noise shows up as two groups on one plane
        let mut merged: Vec<(Vector3<f64>, BTreeSet<usize>)> = Vec::new();
        for (n, verts) in planes.drain(..) {
            let d = n.dot(&points[*verts.iter().next().unwrap()]);
            if let Some(existing) = merged.iter_mut().find(|(m, vs)| {
                (m - n).norm() < 1e-9 && (m.dot(&points[*vs.iter().next().unwrap()]) - d).abs() <= 10.0 * eps
            }) {
                existing.1.extend(verts);
            } else {
                merged.push((n, verts));
            }
        }

        // extreme vertices lie on at least three facets with independent normals
        let mut incident: HashMap<usize, Vec<usize>> = HashMap::new();
        for (f, (_, verts)) in merged.iter().enumerate() {
            for &v in verts {
                incident.entry(v).or_default().push(f);
            }
        }
        let spans_space = |fs: &[usize]| {
            let normals: Vec<Vector3<f64>> = fs.iter().map(|&f| merged[f].0).collect();
            normals.iter().enumerate().any(|(i, a)| {
                normals.iter().enumerate().skip(i + 1).any(|(j, b)| {
                    let ab = a.cross(b);
                    ab.norm() > 1e-9 && normals.iter().skip(j + 1).any(|c| ab.dot(c).abs() > 1e-9)
                })
            })
        };
        let mut extreme: Vec<usize> = incident
            .iter()
            .filter(|(_, fs)| fs.len() >= 3 && spans_space(fs))
            .map(|(&v, _)| v)
            .collect();
        extreme.sort_unstable();
        let index_of: HashMap<usize, usize> = extreme.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let vertices: Vec<Vector3<f64>> = extreme.iter().map(|&v| points[v]).collect();

        // tight offsets over the whole input cloud
        let offsets = exec::map_slice(mode, &merged, |(n, _)| {
            points.iter().fold(f64::NEG_INFINITY, |m, p| m.max(n.dot(p)))
        });

        let mut facets = Vec::new();
        let mut faces = Vec::new();
        for ((n, verts), offset) in merged.iter().zip(offsets) {
            let mut poly: Vec<usize> = verts.iter().filter_map(|v| index_of.get(v).copied()).collect();
            if poly.len() < 3 {
                continue;
            }
            let centroid = poly.iter().map(|&i| vertices[i]).sum::<Vector3<f64>>() / poly.len() as f64;
            let (u, v) = crate::math::plane_basis(n);
            poly.sort_by(|&a, &b| {
                let da = vertices[a] - centroid;
                let db = vertices[b] - centroid;
                let aa = da.dot(&v).atan2(da.dot(&u));
                let ab = db.dot(&v).atan2(db.dot(&u));
                aa.partial_cmp(&ab).unwrap()
            });
            facets.push(Halfspace { normal: *n, offset });
            faces.push(poly);
        }
        Polytope {
            vertices,
            facets,
            faces,
            affine_dimension: 3,
        }
    }

    /// Axis-aligned box, handy as a reference shape.
    pub fn cuboid(min: Vector3<f64>, max: Vector3<f64>) -> Polytope {
        let corners: Vec<Vector3<f64>> = (0..8)
            .map(|m| Vector3::from_fn(|k, _| if m >> k & 1 == 1 { max[k] } else { min[k] }))
            .collect();
        Polytope::from_points(&corners).expect("non-empty")
    }

    pub fn contains(&self, x: &Vector3<f64>, tol: f64) -> bool {
        self.facets.iter().all(|h| h.violation(x) <= tol)
    }

    /// Number of `points` outside the polytope by more than `tol`.
    pub fn count_outside(&self, points: &[Vector3<f64>], tol: f64, mode: Mode) -> usize {
        exec::count_range(mode, points.len(), |i| !self.contains(&points[i], tol))
    }

    /// Fan triangulation of every face, outward oriented.
    pub fn triangles(&self) -> Vec<[usize; 3]> {
        self.faces
            .iter()
            .flat_map(|f| (1..f.len().saturating_sub(1)).map(move |i| [f[0], f[i], f[i + 1]]))
            .collect()
    }

    pub fn volume(&self) -> f64 {
        if self.affine_dimension < 3 {
            return 0.0;
        }
        let c = self.vertices.iter().sum::<Vector3<f64>>() / self.vertices.len() as f64;
        self.triangles()
            .iter()
            .map(|t| {
                let m = Matrix3::from_columns(&[
                    self.vertices[t[0]] - c,
                    self.vertices[t[1]] - c,
                    self.vertices[t[2]] - c,
                ]);
                m.determinant() / 6.0
            })
            .sum()
    }

    /// Image under `x ↦ scale·x + shift` (`scale > 0`).
    pub fn scaled_translated(&self, scale: f64, shift: &Vector3<f64>) -> Polytope {
        assert!(scale > 0.0, "scale must be positive");
        Polytope {
            vertices: self.vertices.iter().map(|v| v * scale + shift).collect(),
            facets: self
                .facets
                .iter()
                .map(|h| Halfspace {
                    normal: h.normal,
                    offset: scale * h.offset + h.normal.dot(shift),
                })
                .collect(),
            faces: self.faces.clone(),
            affine_dimension: self.affine_dimension,
        }
    }

    /// Largest `|v|` over the vertices.
    pub fn extent(&self) -> f64 {
        self.vertices.iter().fold(0.0, |m, v| m.max(v.norm()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_structure() {
        let cube = Polytope::cuboid(Vector3::repeat(-1.0), Vector3::repeat(1.0));
        assert_eq!(cube.affine_dimension, 3);
        assert_eq!(cube.vertices.len(), 8);
        assert_eq!(cube.facets.len(), 6);
        assert!(cube.faces.iter().all(|f| f.len() == 4));
        assert!((cube.volume() - 8.0).abs() < 1e-12);
        for h in &cube.facets {
            assert!((h.offset - 1.0).abs() < 1e-12);
        }
        assert!(cube.contains(&Vector3::new(0.99, -0.99, 0.5), 0.0));
        assert!(!cube.contains(&Vector3::new(1.01, 0.0, 0.0), 1e-9));
    }

    #[test]
    fn faces_are_outward() {
        let cube = Polytope::cuboid(Vector3::new(0.0, 0.0, 0.0), Vector3::new(1.0, 2.0, 3.0));
        for (face, h) in cube.faces.iter().zip(&cube.facets) {
            let (a, b, c) = (cube.vertices[face[0]], cube.vertices[face[1]], cube.vertices[face[2]]);
            assert!((b - a).cross(&(c - a)).dot(&h.normal) > 0.0);
        }
        assert!((cube.volume() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn grid_points_are_not_vertices() {
        let mut pts = Vec::new();
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    pts.push(Vector3::new(i as f64, j as f64, k as f64) * 0.5);
                }
            }
        }
        let p = Polytope::from_points(&pts).unwrap();
        assert_eq!(p.vertices.len(), 8);
        assert_eq!(p.facets.len(), 6);
        assert!((p.volume() - 3.375).abs() < 1e-12);
    }

    #[test]
    fn flat_sets_keep_their_dimension() {
        let seg = Polytope::from_points(&[
            Vector3::zeros(),
            Vector3::new(0.0, 0.0, -3.0),
            Vector3::new(0.0, 0.0, -1.0),
        ])
        .unwrap();
        assert_eq!(seg.affine_dimension, 1);
        assert_eq!(seg.vertices.len(), 2);
        assert!(seg.contains(&Vector3::new(0.0, 0.0, -2.0), 1e-12));
        assert!(!seg.contains(&Vector3::new(1e-6, 0.0, -2.0), 1e-9));
        assert!(!seg.contains(&Vector3::new(0.0, 0.0, 0.1), 1e-9));
        assert_eq!(seg.volume(), 0.0);

        let pt = Polytope::from_points(&[Vector3::new(1.0, 1.0, 1.0)]).unwrap();
        assert_eq!(pt.affine_dimension, 0);
        assert!(pt.contains(&Vector3::new(1.0, 1.0, 1.0), 0.0));

        let square: Vec<_> = (0..4)
            .map(|m| Vector3::new((m & 1) as f64, (m >> 1) as f64, 0.0))
            .collect();
        let sq = Polytope::from_points(&square).unwrap();
        assert_eq!(sq.affine_dimension, 2);
        assert_eq!(sq.faces.len(), 1);
        assert!(sq.contains(&Vector3::new(0.5, 0.5, 0.0), 1e-12));
        assert!(!sq.contains(&Vector3::new(0.5, 0.5, 0.1), 1e-9));
    }

    #[test]
    fn affine_image() {
        let cube = Polytope::cuboid(Vector3::repeat(-1.0), Vector3::repeat(1.0));
        let img = cube.scaled_translated(0.5, &Vector3::new(0.0, 0.0, 9.81));
        assert!(img.contains(&Vector3::new(0.5, 0.5, 10.31), 1e-12));
        assert!(!img.contains(&Vector3::new(0.0, 0.0, 10.4), 1e-9));
        assert!((img.volume() - 1.0).abs() < 1e-12);
    }
}
