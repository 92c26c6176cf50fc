//! Axis-aligned bounding volume hierarchy and triangle proximity primitives.
//!
//! The tree is built once per mesh (median split on the longest axis, small
//! leaves) and supports three queries: boolean collision between two posed
//! meshes, enumeration of all close triangle pairs with witness points, and
//! closest point on a mesh to a query point. Distances are Euclidean and a
//! pair of meshes "collides" when any triangle pair intersects or comes
//! closer than the contact tolerance.

use nalgebra::Point3;

use crate::geometry::RigidPose;
use crate::mesh::{Mesh, CONTACT_TOLERANCE_MM};

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Aabb {
    min: Point3<f64>,
    max: Point3<f64>,
}

impl Aabb {
    fn empty() -> Self {
        Aabb {
            min: Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
            max: Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    fn grow(&mut self, p: &Point3<f64>) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    fn merge(&mut self, other: &Aabb) {
        self.min = self.min.inf(&other.min);
        self.max = self.max.sup(&other.max);
    }

    fn longest_axis(&self) -> usize {
        let d = self.max - self.min;
        if d.x >= d.y && d.x >= d.z {
            0
        } else if d.y >= d.z {
            1
        } else {
            2
        }
    }

    /// Squared distance from `p` to the box (0 inside).
    fn dist2_to_point(&self, p: &Point3<f64>) -> f64 {
        let mut d2 = 0.0;
        for i in 0..3 {
            let v = p[i].clamp(self.min[i], self.max[i]) - p[i];
            d2 += v * v;
        }
        d2
    }

    /// Squared distance between two boxes (0 when overlapping).
    fn dist2_to_aabb(&self, other: &Aabb) -> f64 {
        let mut d2 = 0.0;
        for i in 0..3 {
            let gap = (self.min[i] - other.max[i]).max(other.min[i] - self.max[i]).max(0.0);
            d2 += gap * gap;
        }
        d2
    }

    /// Box containing this box transformed by `pose`.
    fn transformed(&self, pose: &RigidPose) -> Aabb {
        let mut out = Aabb::empty();
        for ix in 0..2 {
            for iy in 0..2 {
                for iz in 0..2 {
                    let corner = Point3::new(
                        if ix == 0 { self.min.x } else { self.max.x },
                        if iy == 0 { self.min.y } else { self.max.y },
                        if iz == 0 { self.min.z } else { self.max.z },
                    );
                    out.grow(&(pose * corner));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
struct Node {
    aabb: Aabb,
    /// Left child index, or `u32::MAX` for a leaf.
    left: u32,
    right: u32,
    /// Leaf payload: range into `tri_order`.
    start: u32,
    len: u32,
}

impl Node {
    fn is_leaf(&self) -> bool {
        self.left == u32::MAX
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Bvh {
    nodes: Vec<Node>,
    tri_order: Vec<u32>,
}

impl Bvh {
    pub(crate) fn build(vertices: &[Point3<f64>], triangles: &[[u32; 3]]) -> Bvh {
        let centroids: Vec<Point3<f64>> = triangles
            .iter()
            .map(|t| {
                Point3::from(
                    (vertices[t[0] as usize].coords
                        + vertices[t[1] as usize].coords
                        + vertices[t[2] as usize].coords)
                        / 3.0,
                )
            })
            .collect();
        let tri_boxes: Vec<Aabb> = triangles
            .iter()
            .map(|t| {
                let mut b = Aabb::empty();
                for &i in t {
                    b.grow(&vertices[i as usize]);
                }
                b
            })
            .collect();
        let mut tri_order: Vec<u32> = (0..triangles.len() as u32).collect();
        let mut nodes = Vec::new();
        build_node(&mut nodes, &mut tri_order, 0, triangles.len(), &centroids, &tri_boxes);
        Bvh { nodes, tri_order }
    }

    pub(crate) fn closest_point(&self, mesh: &Mesh, p: &Point3<f64>) -> (Point3<f64>, usize, f64) {
        let mut best = (Point3::origin(), usize::MAX, f64::INFINITY);
        let mut stack = vec![0u32];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id as usize];
            if node.aabb.dist2_to_point(p) >= best.2 * best.2 {
                continue;
            }
            if node.is_leaf() {
                for k in node.start..node.start + node.len {
                    let t = self.tri_order[k as usize] as usize;
                    let [a, b, c] = mesh.triangle_points(t);
                    let q = closest_point_on_triangle(p, &a, &b, &c);
                    let d = (q - p).norm();
                    if d < best.2 {
                        best = (q, t, d);
                    }
                }
            } else {
                // Descend into the nearer child first for tighter pruning.
                let l = node.left;
                let r = node.right;
                let dl = self.nodes[l as usize].aabb.dist2_to_point(p);
                let dr = self.nodes[r as usize].aabb.dist2_to_point(p);
                if dl <= dr {
                    stack.push(r);
                    stack.push(l);
                } else {
                    stack.push(l);
                    stack.push(r);
                }
            }
        }
        best
    }
}

fn build_node(
    nodes: &mut Vec<Node>,
    tri_order: &mut [u32],
    start: usize,
    len: usize,
    centroids: &[Point3<f64>],
    tri_boxes: &[Aabb],
) -> u32 {
    let mut aabb = Aabb::empty();
    for &t in &tri_order[start..start + len] {
        aabb.merge(&tri_boxes[t as usize]);
    }
    let id = nodes.len() as u32;
    nodes.push(Node {
        aabb,
        left: u32::MAX,
        right: u32::MAX,
        start: start as u32,
        len: len as u32,
    });
    if len <= LEAF_SIZE {
        return id;
    }
    let axis = aabb.longest_axis();
    // Median split; ties broken by triangle index for determinism.
    tri_order[start..start + len].sort_unstable_by(|&a, &b| {
        centroids[a as usize][axis]
            .partial_cmp(&centroids[b as usize][axis])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let half = len / 2;
    let left = build_node(nodes, tri_order, start, half, centroids, tri_boxes);
    let right = build_node(nodes, tri_order, start + half, len - half, centroids, tri_boxes);
    nodes[id as usize].left = left;
    nodes[id as usize].right = right;
    nodes[id as usize].len = 0;
    id
}

/// A triangle pair within tolerance, with closest witness points (world frame
/// of mesh `a`'s pose argument).
#[derive(Debug, Clone)]
pub struct ClosePair {
    pub tri_a: usize,
    pub tri_b: usize,
    pub point_a: Point3<f64>,
    pub point_b: Point3<f64>,
    pub distance: f64,
}

/// True when any triangle of `a` (posed by `pose_a`) intersects or comes
/// within [`CONTACT_TOLERANCE_MM`] of any triangle of `b` (posed by
/// `pose_b`).
#[must_use]
pub fn collide(a: &Mesh, pose_a: &RigidPose, b: &Mesh, pose_b: &RigidPose) -> bool {
    collide_with_tolerance(a, pose_a, b, pose_b, CONTACT_TOLERANCE_MM)
}

/// [`collide`] with an explicit tolerance in mm.
#[must_use]
pub fn collide_with_tolerance(
    a: &Mesh,
    pose_a: &RigidPose,
    b: &Mesh,
    pose_b: &RigidPose,
    tolerance: f64,
) -> bool {
    // Work in a's local frame: only the relative pose matters, which also
    // makes the predicate invariant under a common rigid transform.
    let rel = pose_a.inv_mul(pose_b);
    let bvh_a = a.bvh();
    let bvh_b = b.bvh();
    let mut stack = vec![(0u32, 0u32)];
    while let Some((ia, ib)) = stack.pop() {
        let na = &bvh_a.nodes[ia as usize];
        let nb = &bvh_b.nodes[ib as usize];
        let nb_box = nb.aabb.transformed(&rel);
        if na.aabb.dist2_to_aabb(&nb_box) > tolerance * tolerance {
            continue;
        }
        match (na.is_leaf(), nb.is_leaf()) {
            (true, true) => {
                for ka in na.start..na.start + na.len {
                    let ta = bvh_a.tri_order[ka as usize] as usize;
                    let pa = a.triangle_points(ta);
                    for kb in nb.start..nb.start + nb.len {
                        let tb = bvh_b.tri_order[kb as usize] as usize;
                        let [b0, b1, b2] = b.triangle_points(tb);
                        let pb = [rel * b0, rel * b1, rel * b2];
                        let (d, _, _) = triangle_triangle_distance(&pa, &pb);
                        if d <= tolerance {
                            return true;
                        }
                    }
                }
            }
            (false, true) => {
                stack.push((na.left, ib));
                stack.push((na.right, ib));
            }
            (true, false) => {
                stack.push((ia, nb.left));
                stack.push((ia, nb.right));
            }
            (false, false) => {
                stack.push((na.left, nb.left));
                stack.push((na.left, nb.right));
                stack.push((na.right, nb.left));
                stack.push((na.right, nb.right));
            }
        }
    }
    false
}

/// All triangle pairs of the posed meshes within `tolerance`, with witness
/// points expressed in the common world frame. Order is deterministic
/// (sorted by `(tri_a, tri_b)`).
#[must_use]
pub(crate) fn close_pairs(
    a: &Mesh,
    pose_a: &RigidPose,
    b: &Mesh,
    pose_b: &RigidPose,
    tolerance: f64,
) -> Vec<ClosePair> {
    let rel = pose_a.inv_mul(pose_b);
    let bvh_a = a.bvh();
    let bvh_b = b.bvh();
    let mut out = Vec::new();
    let mut stack = vec![(0u32, 0u32)];
    while let Some((ia, ib)) = stack.pop() {
        let na = &bvh_a.nodes[ia as usize];
        let nb = &bvh_b.nodes[ib as usize];
        let nb_box = nb.aabb.transformed(&rel);
        if na.aabb.dist2_to_aabb(&nb_box) > tolerance * tolerance {
            continue;
        }
        match (na.is_leaf(), nb.is_leaf()) {
            (true, true) => {
                for ka in na.start..na.start + na.len {
                    let ta = bvh_a.tri_order[ka as usize] as usize;
                    let pa = a.triangle_points(ta);
                    for kb in nb.start..nb.start + nb.len {
                        let tb = bvh_b.tri_order[kb as usize] as usize;
                        let [b0, b1, b2] = b.triangle_points(tb);
                        let pb = [rel * b0, rel * b1, rel * b2];
                        let (d, wa, wb) = triangle_triangle_distance(&pa, &pb);
                        if d <= tolerance {
                            out.push(ClosePair {
                                tri_a: ta,
                                tri_b: tb,
                                point_a: pose_a * wa,
                                point_b: pose_a * wb,
                                distance: d,
                            });
                        }
                    }
                }
            }
            (false, true) => {
                stack.push((na.left, ib));
                stack.push((na.right, ib));
            }
            (true, false) => {
                stack.push((ia, nb.left));
                stack.push((ia, nb.right));
            }
            (false, false) => {
                stack.push((na.left, nb.left));
                stack.push((na.left, nb.right));
                stack.push((na.right, nb.left));
                stack.push((na.right, nb.right));
            }
        }
    }
    out.sort_by_key(|x| (x.tri_a, x.tri_b));
    out
}

/// Closest point on triangle `abc` to `p` (Ericson, Real-Time Collision
/// Detection, 5.1.5).
#[must_use]
pub fn closest_point_on_triangle(
    p: &Point3<f64>,
    a: &Point3<f64>,
    b: &Point3<f64>,
    c: &Point3<f64>,
) -> Point3<f64> {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}

/// Closest points between segments `p1q1` and `p2q2` (Ericson 5.1.9).
fn segment_segment_closest(
    p1: &Point3<f64>,
    q1: &Point3<f64>,
    p2: &Point3<f64>,
    q2: &Point3<f64>,
) -> (Point3<f64>, Point3<f64>) {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(&r);
    let (s, t);
    if a <= f64::EPSILON && e <= f64::EPSILON {
        return (*p1, *p2);
    }
    if a <= f64::EPSILON {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= f64::EPSILON {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s_ = if denom.abs() > f64::EPSILON {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let mut t_ = (b * s_ + f) / e;
            if t_ < 0.0 {
                t_ = 0.0;
                s_ = (-c / a).clamp(0.0, 1.0);
            } else if t_ > 1.0 {
                t_ = 1.0;
                s_ = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s_;
            t = t_;
        }
    }
    (p1 + d1 * s, p2 + d2 * t)
}

/// Crossing point of segment `p..q` with triangle `abc`, if any (parametric
/// plane crossing plus barycentric containment). Segments lying in the
/// triangle plane are reported as non-crossing; the coplanar case is covered
/// by the edge-edge and vertex-face distance terms of
/// [`triangle_triangle_distance`].
fn segment_crosses_triangle(
    p: &Point3<f64>,
    q: &Point3<f64>,
    a: &Point3<f64>,
    b: &Point3<f64>,
    c: &Point3<f64>,
) -> Option<Point3<f64>> {
    let n = (b - a).cross(&(c - a));
    let d = q - p;
    let denom = n.dot(&d);
    if denom.abs() < 1e-30 {
        return None;
    }
    let t = n.dot(&(a - p)) / denom;
    if !(0.0..=1.0).contains(&t) {
        return None;
    }
    let x = p + d * t;
    // Barycentric containment of x in abc.
    let v0 = b - a;
    let v1 = c - a;
    let v2 = x - a;
    let d00 = v0.norm_squared();
    let d01 = v0.dot(&v1);
    let d11 = v1.norm_squared();
    let d20 = v2.dot(&v0);
    let d21 = v2.dot(&v1);
    let denom2 = d00 * d11 - d01 * d01;
    if denom2.abs() < 1e-30 {
        return None;
    }
    let v = (d11 * d20 - d01 * d21) / denom2;
    let w = (d00 * d21 - d01 * d20) / denom2;
    (v >= 0.0 && w >= 0.0 && v + w <= 1.0).then_some(x)
}

/// Distance between two triangles with witness points. Returns 0 with the
/// piercing point when the triangles properly intersect; otherwise the
/// minimum over the 9 edge-edge and 6 vertex-face candidates.
#[must_use]
pub(crate) fn triangle_triangle_distance(
    t1: &[Point3<f64>; 3],
    t2: &[Point3<f64>; 3],
) -> (f64, Point3<f64>, Point3<f64>) {
    // Proper crossings make the distance exactly zero; the crossing point is
    // the witness on both triangles.
    for i in 0..3 {
        let (p, q) = (t1[i], t1[(i + 1) % 3]);
        if let Some(x) = segment_crosses_triangle(&p, &q, &t2[0], &t2[1], &t2[2]) {
            return (0.0, x, x);
        }
        let (p, q) = (t2[i], t2[(i + 1) % 3]);
        if let Some(x) = segment_crosses_triangle(&p, &q, &t1[0], &t1[1], &t1[2]) {
            return (0.0, x, x);
        }
    }
    let mut best = (f64::INFINITY, Point3::origin(), Point3::origin());
    for i in 0..3 {
        let (p1, q1) = (t1[i], t1[(i + 1) % 3]);
        for j in 0..3 {
            let (p2, q2) = (t2[j], t2[(j + 1) % 3]);
            let (w1, w2) = segment_segment_closest(&p1, &q1, &p2, &q2);
            let d = (w1 - w2).norm();
            if d < best.0 {
                best = (d, w1, w2);
            }
        }
    }
    for i in 0..3 {
        let q = closest_point_on_triangle(&t1[i], &t2[0], &t2[1], &t2[2]);
        let d = (q - t1[i]).norm();
        if d < best.0 {
            best = (d, t1[i], q);
        }
        let q = closest_point_on_triangle(&t2[i], &t1[0], &t1[1], &t1[2]);
        let d = (q - t2[i]).norm();
        if d < best.0 {
            best = (d, q, t2[i]);
        }
    }
    best
}
