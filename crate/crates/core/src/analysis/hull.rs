//! Incremental (beneath-beyond) 3-D convex hull with an absolute
//! coplanarity tolerance, plus the 2-D monotone chain used for flat sets.

use std::collections::{HashMap, HashSet};

use nalgebra::{Vector2, Vector3};

#[derive(Debug, Clone)]
struct Tri {
    v: [usize; 3],
    normal: Vector3<f64>,
    offset: f64,
    alive: bool,
}

fn make_tri(points: &[Vector3<f64>], v: [usize; 3]) -> Tri {
    let [a, b, c] = v.map(|i| points[i]);
    let normal = (b - a).cross(&(c - a)).normalize();
    Tri {
        v,
        offset: normal.dot(&a),
        normal,
        alive: true,
    }
}

/// Affine hull classification of a point set.
#[derive(Debug, Clone)]
pub(crate) enum HullShape {
    Empty,
    Point(Vector3<f64>),
    Segment(Vector3<f64>, Vector3<f64>),
    /// Polygon vertices ordered counter-clockwise about `normal`.
    Polygon {
        vertices: Vec<Vector3<f64>>,
        normal: Vector3<f64>,
    },
    /// Outward-oriented triangles indexing the input points.
    Solid {
        triangles: Vec<[usize; 3]>,
    },
}

fn farthest_by<F: Fn(&Vector3<f64>) -> f64>(points: &[Vector3<f64>], f: F) -> (usize, f64) {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| (i, f(p)))
        .fold(
            (0, f64::NEG_INFINITY),
            |best, cur| if cur.1 > best.1 { cur } else { best },
        )
}

pub(crate) fn convex_hull(points: &[Vector3<f64>], eps: f64) -> HullShape {
    if points.is_empty() {
        return HullShape::Empty;
    }
    let i0 = (0..points.len())
        .min_by(|&a, &b| {
            let (pa, pb) = (points[a], points[b]);
            (pa.x, pa.y, pa.z).partial_cmp(&(pb.x, pb.y, pb.z)).unwrap()
        })
        .unwrap();
    let p0 = points[i0];
    let (i1, d1) = farthest_by(points, |p| (p - p0).norm());
    if d1 <= eps {
        return HullShape::Point(p0);
    }
    let dir = (points[i1] - p0) / d1;
    let (i2, d2) = farthest_by(points, |p| (p - p0 - dir * (p - p0).dot(&dir)).norm());
    if d2 <= eps {
        let (lo, _) = farthest_by(points, |p| -(p - p0).dot(&dir));
        let (hi, _) = farthest_by(points, |p| (p - p0).dot(&dir));
        return HullShape::Segment(points[lo], points[hi]);
    }
    let normal = dir.cross(&(points[i2] - p0)).normalize();
    let (i3, d3) = farthest_by(points, |p| (p - p0).dot(&normal).abs());
    if d3 <= eps {
        return HullShape::Polygon {
            vertices: planar_hull(points, &p0, &normal, eps),
            normal,
        };
    }

    let mut tris = Vec::new();
    let simplex = [i0, i1, i2, i3];
    let centroid = simplex.iter().map(|&i| points[i]).sum::<Vector3<f64>>() / 4.0;
    for f in [[i0, i1, i2], [i0, i1, i3], [i0, i2, i3], [i1, i2, i3]] {
        let mut t = make_tri(points, f);
        if t.normal.dot(&centroid) - t.offset > 0.0 {
            t = make_tri(points, [f[0], f[2], f[1]]);
        }
        tris.push(t);
    }

    // far points first: they are likely hull vertices and shrink later work
    let mut order: Vec<usize> = (0..points.len()).filter(|i| !simplex.contains(i)).collect();
    order.sort_by(|&a, &b| {
        let da = (points[a] - centroid).norm_squared();
        let db = (points[b] - centroid).norm_squared();
        db.partial_cmp(&da).unwrap().then(a.cmp(&b))
    });

    let mut dead = 0usize;
    let mut visible = Vec::new();
    let mut edges = HashSet::new();
    for &pi in &order {
        let p = points[pi];
        visible.clear();
        for (k, t) in tris.iter().enumerate() {
            if t.alive && t.normal.dot(&p) - t.offset > eps {
                visible.push(k);
            }
        }
        if visible.is_empty() {
            continue;
        }
        edges.clear();
        for &k in &visible {
            let [a, b, c] = tris[k].v;
            edges.insert((a, b));
            edges.insert((b, c));
            edges.insert((c, a));
        }
        let horizon: Vec<(usize, usize)> = visible
            .iter()
            .flat_map(|&k| {
                let [a, b, c] = tris[k].v;
                [(a, b), (b, c), (c, a)]
            })
            .filter(|&(a, b)| !edges.contains(&(b, a)))
            .collect();
        for &k in &visible {
            tris[k].alive = false;
        }
        dead += visible.len();
        for (a, b) in horizon {
            tris.push(make_tri(points, [a, b, pi]));
        }
        if dead > tris.len() / 2 {
            tris.retain(|t| t.alive);
            dead = 0;
        }
    }
    HullShape::Solid {
        triangles: tris.into_iter().filter(|t| t.alive).map(|t| t.v).collect(),
    }
}

/// Convex polygon of coplanar points, counter-clockwise about `normal`.
fn planar_hull(points: &[Vector3<f64>], origin: &Vector3<f64>, normal: &Vector3<f64>, eps: f64) -> Vec<Vector3<f64>> {
    let (u, v) = crate::math::plane_basis(normal);
    let flat: Vec<Vector2<f64>> = points
        .iter()
        .map(|p| {
            let d = p - origin;
            Vector2::new(d.dot(&u), d.dot(&v))
        })
        .collect();
    convex_hull_2d_indices(&flat, eps)
        .into_iter()
        .map(|i| points[i])
        .collect()
}

/// Andrew's monotone chain; drops collinear points. Counter-clockwise.
pub(crate) fn convex_hull_2d(points: &[Vector2<f64>], eps: f64) -> Vec<Vector2<f64>> {
    convex_hull_2d_indices(points, eps)
        .into_iter()
        .map(|i| points[i])
        .collect()
}

pub(crate) fn convex_hull_2d_indices(points: &[Vector2<f64>], eps: f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| {
        let (pa, pb) = (points[a], points[b]);
        (pa.x, pa.y).partial_cmp(&(pb.x, pb.y)).unwrap()
    });
    idx.dedup_by(|a, b| (points[*a] - points[*b]).norm() <= eps);
    if idx.len() < 3 {
        return idx;
    }
    let keep_turn = |chain: &[usize], p: usize| {
        let (o, a, b) = (
            points[chain[chain.len() - 2]],
            points[chain[chain.len() - 1]],
            points[p],
        );
        (a - o).perp(&(b - o)) > eps * (b - o).norm()
    };
    let mut lower: Vec<usize> = Vec::new();
    for &p in &idx {
        while lower.len() >= 2 && !keep_turn(&lower, p) {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &p in idx.iter().rev() {
        while upper.len() >= 2 && !keep_turn(&upper, p) {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Groups outward triangles into coplanar facets through shared edges.
pub(crate) fn merge_coplanar(points: &[Vector3<f64>], triangles: &[[usize; 3]], eps: f64) -> Vec<Vec<usize>> {
    let mut edge_owner = HashMap::with_capacity(triangles.len() * 3);
    for (k, t) in triangles.iter().enumerate() {
        for e in 0..3 {
            edge_owner.insert((t[e], t[(e + 1) % 3]), k);
        }
    }
    let planes: Vec<(Vector3<f64>, f64)> = triangles
        .iter()
        .map(|t| {
            let tri = make_tri(points, *t);
            (tri.normal, tri.offset)
        })
        .collect();
    let mut parent: Vec<usize> = (0..triangles.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (k, t) in triangles.iter().enumerate() {
        for e in 0..3 {
            let (a, b) = (t[e], t[(e + 1) % 3]);
            let Some(&j) = edge_owner.get(&(b, a)) else { continue };
            // coplanar when each triangle's far vertex lies on the other's plane
            let far_j = triangles[j].iter().copied().find(|&v| v != a && v != b).unwrap();
            let far_k = t[(e + 2) % 3];
            let dj = (planes[k].0.dot(&points[far_j]) - planes[k].1).abs();
            let dk = (planes[j].0.dot(&points[far_k]) - planes[j].1).abs();
            if dj <= 10.0 * eps && dk <= 10.0 * eps {
                let (rk, rj) = (find(&mut parent, k), find(&mut parent, j));
                if rk != rj {
                    parent[rk] = rj;
                }
            }
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for k in 0..triangles.len() {
        let r = find(&mut parent, k);
        groups.entry(r).or_default().push(k);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort();
    out
}
