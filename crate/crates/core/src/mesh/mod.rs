//! Triangle meshes: loading, cleanup, validation and proximity queries.
//!
//! A [`Mesh`] is an indexed triangle set in millimetres. Construction always
//! runs the cleanup pipeline (vertex welding, degenerate triangle removal,
//! orientation repair) and precomputes per-triangle unit normals, the
//! watertightness flag and an axis-aligned bounding volume hierarchy, so any
//! mesh you can hold is ready for collision and closest-point queries.

mod bvh;
mod contact;
mod io;

pub use bvh::{closest_point_on_triangle, collide, collide_with_tolerance, ClosePair};
pub use contact::{extract_contacts, extract_contacts_with, Contact};
pub use io::{load_mesh, load_mesh_scaled, write_ply_colored, write_ply_edges};

use nalgebra::{Point3, Vector3};

use crate::error::{Error, Result};
use crate::geometry::RigidPose;

/// Two surfaces closer than this are considered in contact (mm).
pub const CONTACT_TOLERANCE_MM: f64 = 0.5;
/// Contacts on one link closer than this are merged into one cluster (mm).
pub const CONTACT_CLUSTER_RADIUS_MM: f64 = 5.0;
/// Vertices closer than this are welded during cleanup (mm).
pub const WELD_TOLERANCE_MM: f64 = 1e-6;
/// Triangles with area below this are dropped during cleanup (mm^2).
pub const DEGENERATE_AREA_MM2: f64 = 1e-9;

/// What the cleanup pipeline changed and found while building a mesh.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CleanupReport {
    /// Vertices removed by welding duplicates within [`WELD_TOLERANCE_MM`].
    pub merged_vertices: usize,
    /// Triangles dropped: degenerate area, repeated indices or duplicates.
    pub removed_triangles: usize,
    /// Undirected edges referenced by exactly one triangle.
    pub open_edges: Vec<(u32, u32)>,
    /// Undirected edges referenced by more than two triangles.
    pub nonmanifold_edges: Vec<(u32, u32)>,
    /// Triangles whose winding was flipped by orientation repair.
    pub flipped_triangles: usize,
}

/// An indexed triangle mesh in millimetres.
#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Point3<f64>>,
    triangles: Vec<[u32; 3]>,
    /// Per-triangle unit normals following the (repaired) winding.
    normals: Vec<Vector3<f64>>,
    watertight: bool,
    report: CleanupReport,
    bvh: bvh::Bvh,
}

impl Mesh {
    /// Builds a mesh from raw vertices and triangles, running the cleanup
    /// pipeline. Fails with [`Error::EmptyMesh`] if nothing survives cleanup
    /// and with an index error if a triangle references a missing vertex.
    pub fn new(vertices: Vec<Point3<f64>>, triangles: Vec<[u32; 3]>) -> Result<Self> {
        for t in &triangles {
            for &i in t {
                if i as usize >= vertices.len() {
                    return Err(Error::Internal(format!(
                        "triangle references vertex {i} but the mesh has {} vertices",
                        vertices.len()
                    )));
                }
            }
        }
        let (mut vertices, mut triangles, merged, removed) = cleanup(vertices, triangles);
        if triangles.is_empty() {
            return Err(Error::EmptyMesh);
        }
        drop_unreferenced(&mut vertices, &mut triangles);

        let (open_edges, nonmanifold_edges) = edge_defects(&triangles);
        let watertight = open_edges.is_empty() && nonmanifold_edges.is_empty();
        let flipped = if watertight {
            repair_orientation(&vertices, &mut triangles)
        } else {
            0
        };

        let normals = triangles
            .iter()
            .map(|t| triangle_normal(&vertices, t))
            .collect();
        let bvh = bvh::Bvh::build(&vertices, &triangles);
        Ok(Mesh {
            vertices,
            triangles,
            normals,
            watertight,
            report: CleanupReport {
                merged_vertices: merged,
                removed_triangles: removed,
                open_edges,
                nonmanifold_edges,
                flipped_triangles: flipped,
            },
            bvh,
        })
    }

    #[must_use]
    pub fn vertices(&self) -> &[Point3<f64>] {
        &self.vertices
    }

    #[must_use]
    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    /// Unit normal of triangle `t` (outward for a repaired watertight mesh).
    #[must_use]
    pub fn triangle_normal(&self, t: usize) -> Vector3<f64> {
        self.normals[t]
    }

    /// Corner points of triangle `t`.
    #[must_use]
    pub fn triangle_points(&self, t: usize) -> [Point3<f64>; 3] {
        let [a, b, c] = self.triangles[t];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    /// True when every edge is shared by exactly two triangles.
    #[must_use]
    pub fn is_watertight(&self) -> bool {
        self.watertight
    }

    #[must_use]
    pub fn cleanup_report(&self) -> &CleanupReport {
        &self.report
    }

    /// Total surface area in mm^2.
    #[must_use]
    pub fn surface_area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| triangle_area(&self.vertices, t))
            .sum()
    }

    /// Axis-aligned bounding box `(min, max)`.
    #[must_use]
    pub fn bbox(&self) -> (Point3<f64>, Point3<f64>) {
        let mut min = self.vertices[0];
        let mut max = self.vertices[0];
        for v in &self.vertices {
            min = min.inf(v);
            max = max.sup(v);
        }
        (min, max)
    }

    /// Length of the bounding-box diagonal in mm.
    #[must_use]
    pub fn bbox_diagonal(&self) -> f64 {
        let (min, max) = self.bbox();
        (max - min).norm()
    }

    /// Area-weighted centroid of the surface.
    #[must_use]
    pub fn surface_centroid(&self) -> Point3<f64> {
        let mut acc = Vector3::zeros();
        let mut total = 0.0;
        for t in &self.triangles {
            let area = triangle_area(&self.vertices, t);
            let c = (self.vertices[t[0] as usize].coords
                + self.vertices[t[1] as usize].coords
                + self.vertices[t[2] as usize].coords)
                / 3.0;
            acc += c * area;
            total += area;
        }
        Point3::from(acc / total)
    }

    /// Signed volume via the divergence theorem (mm^3). Positive for a
    /// consistently outward-oriented closed surface.
    #[must_use]
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let a = self.vertices[t[0] as usize].coords;
                let b = self.vertices[t[1] as usize].coords;
                let c = self.vertices[t[2] as usize].coords;
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum()
    }

    /// Number of connected components of the triangle graph.
    #[must_use]
    pub fn connected_components(&self) -> usize {
        let n = self.vertices.len();
        let mut parent: Vec<u32> = (0..n as u32).collect();
        fn find(parent: &mut [u32], mut x: u32) -> u32 {
            while parent[x as usize] != x {
                parent[x as usize] = parent[parent[x as usize] as usize];
                x = parent[x as usize];
            }
            x
        }
        for t in &self.triangles {
            let r = find(&mut parent, t[0]);
            for &v in &t[1..] {
                let rv = find(&mut parent, v);
                parent[rv as usize] = r;
            }
        }
        let mut roots = std::collections::BTreeSet::new();
        for v in 0..n as u32 {
            roots.insert(find(&mut parent, v));
        }
        roots.len()
    }

    /// Mesh with every vertex transformed by `pose`. Connectivity, cleanup
    /// results and orientation carry over; the BVH is rebuilt.
    #[must_use]
    pub fn transformed(&self, pose: &RigidPose) -> Mesh {
        let vertices: Vec<Point3<f64>> = self.vertices.iter().map(|v| pose * v).collect();
        let normals = self
            .triangles
            .iter()
            .map(|t| triangle_normal(&vertices, t))
            .collect();
        let bvh = bvh::Bvh::build(&vertices, &self.triangles);
        Mesh {
            vertices,
            triangles: self.triangles.clone(),
            normals,
            watertight: self.watertight,
            report: self.report.clone(),
            bvh,
        }
    }

    /// Closest point on the surface to `p`: `(point, triangle, distance)`.
    #[must_use]
    pub fn closest_point(&self, p: &Point3<f64>) -> (Point3<f64>, usize, f64) {
        self.bvh.closest_point(self, p)
    }

    /// `n` surface points sampled uniformly by area, with outward normals.
    pub fn sample_surface<R: rand::Rng>(
        &self,
        n: usize,
        rng: &mut R,
    ) -> Vec<(Point3<f64>, Vector3<f64>)> {
        let mut cumulative = Vec::with_capacity(self.triangles.len());
        let mut total = 0.0;
        for t in &self.triangles {
            total += triangle_area(&self.vertices, t);
            cumulative.push(total);
        }
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let x = rng.gen_range(0.0..total);
            let t = cumulative.partition_point(|&c| c <= x).min(self.triangles.len() - 1);
            let [a, b, c] = self.triangle_points(t);
            // Square-root trick for a uniform barycentric sample.
            let r1: f64 = rng.gen::<f64>().sqrt();
            let r2: f64 = rng.gen();
            let p = Point3::from(
                a.coords * (1.0 - r1) + b.coords * (r1 * (1.0 - r2)) + c.coords * (r1 * r2),
            );
            out.push((p, self.normals[t]));
        }
        out
    }

    pub(crate) fn bvh(&self) -> &bvh::Bvh {
        &self.bvh
    }

    /// Errors unless the mesh is watertight; the error lists sample edges.
    pub fn require_watertight(&self) -> Result<()> {
        if self.watertight {
            return Ok(());
        }
        let mut sample: Vec<(u32, u32)> = self
            .report
            .open_edges
            .iter()
            .chain(self.report.nonmanifold_edges.iter())
            .copied()
            .take(8)
            .collect();
        sample.sort_unstable();
        Err(Error::NotWatertight {
            open_edges: self.report.open_edges.len(),
            nonmanifold_edges: self.report.nonmanifold_edges.len(),
            sample,
        })
    }
}

fn triangle_area(vertices: &[Point3<f64>], t: &[u32; 3]) -> f64 {
    let a = vertices[t[0] as usize];
    let b = vertices[t[1] as usize];
    let c = vertices[t[2] as usize];
    (b - a).cross(&(c - a)).norm() * 0.5
}

fn triangle_normal(vertices: &[Point3<f64>], t: &[u32; 3]) -> Vector3<f64> {
    let a = vertices[t[0] as usize];
    let b = vertices[t[1] as usize];
    let c = vertices[t[2] as usize];
    (b - a).cross(&(c - a)).normalize()
}

/// Welds duplicate vertices and drops degenerate/duplicate triangles.
/// Returns `(vertices, triangles, merged_vertex_count, removed_tri_count)`.
fn cleanup(
    vertices: Vec<Point3<f64>>,
    triangles: Vec<[u32; 3]>,
) -> (Vec<Point3<f64>>, Vec<[u32; 3]>, usize, usize) {
    use std::collections::HashMap;

    // Spatial hash on cells of the weld tolerance; a vertex is merged into
    // the first earlier vertex within tolerance in its 27-cell neighbourhood.
    let cell = WELD_TOLERANCE_MM;
    let key = |p: &Point3<f64>| -> (i64, i64, i64) {
        (
            (p.x / cell).floor() as i64,
            (p.y / cell).floor() as i64,
            (p.z / cell).floor() as i64,
        )
    };
    let mut grid: HashMap<(i64, i64, i64), Vec<u32>> = HashMap::new();
    let mut remap = vec![0u32; vertices.len()];
    let mut kept: Vec<Point3<f64>> = Vec::with_capacity(vertices.len());
    let tol2 = WELD_TOLERANCE_MM * WELD_TOLERANCE_MM;
    let mut merged = 0usize;
    for (i, p) in vertices.iter().enumerate() {
        let (kx, ky, kz) = key(p);
        let mut target = None;
        'search: for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(ids) = grid.get(&(kx + dx, ky + dy, kz + dz)) {
                        for &j in ids {
                            if (kept[j as usize] - p).norm_squared() <= tol2 {
                                target = Some(j);
                                break 'search;
                            }
                        }
                    }
                }
            }
        }
        match target {
            Some(j) => {
                remap[i] = j;
                merged += 1;
            }
            None => {
                let j = kept.len() as u32;
                kept.push(*p);
                grid.entry((kx, ky, kz)).or_default().push(j);
                remap[i] = j;
            }
        }
    }

    let mut seen = std::collections::HashSet::new();
    let mut out_tris = Vec::with_capacity(triangles.len());
    let mut removed = 0usize;
    for t in &triangles {
        let t = [remap[t[0] as usize], remap[t[1] as usize], remap[t[2] as usize]];
        if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
            removed += 1;
            continue;
        }
        if triangle_area(&kept, &t) < DEGENERATE_AREA_MM2 {
            removed += 1;
            continue;
        }
        let mut k = t;
        k.sort_unstable();
        if !seen.insert(k) {
            removed += 1;
            continue;
        }
        out_tris.push(t);
    }
    (kept, out_tris, merged, removed)
}

/// Removes vertices not referenced by any triangle, compacting indices.
fn drop_unreferenced(vertices: &mut Vec<Point3<f64>>, triangles: &mut [[u32; 3]]) {
    let mut used = vec![false; vertices.len()];
    for t in triangles.iter() {
        for &i in t {
            used[i as usize] = true;
        }
    }
    if used.iter().all(|&u| u) {
        return;
    }
    let mut remap = vec![u32::MAX; vertices.len()];
    let mut kept = Vec::with_capacity(vertices.len());
    for (i, v) in vertices.iter().enumerate() {
        if used[i] {
            remap[i] = kept.len() as u32;
            kept.push(*v);
        }
    }
    for t in triangles.iter_mut() {
        for i in t.iter_mut() {
            *i = remap[*i as usize];
        }
    }
    *vertices = kept;
}

/// Undirected edges as `(min_vertex, max_vertex)` pairs.
type EdgeList = Vec<(u32, u32)>;

/// Classifies undirected edges: `(open, nonmanifold)` where open edges have
/// one incident triangle and non-manifold edges more than two.
fn edge_defects(triangles: &[[u32; 3]]) -> (EdgeList, EdgeList) {
    let mut counts: std::collections::BTreeMap<(u32, u32), u32> = std::collections::BTreeMap::new();
    for t in triangles {
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            let e = (a.min(b), a.max(b));
            *counts.entry(e).or_insert(0) += 1;
        }
    }
    let mut open = Vec::new();
    let mut nonmanifold = Vec::new();
    for (e, c) in counts {
        match c {
            1 => open.push(e),
            2 => {}
            _ => nonmanifold.push(e),
        }
    }
    (open, nonmanifold)
}

/// Makes triangle windings consistent per connected component and outward
/// (positive component volume). Requires every edge to have exactly two
/// incident triangles. Returns how many triangles were flipped.
fn repair_orientation(vertices: &[Point3<f64>], triangles: &mut [[u32; 3]]) -> usize {
    use std::collections::HashMap;

    let mut edge_tris: HashMap<(u32, u32), Vec<u32>> = HashMap::new();
    for (i, t) in triangles.iter().enumerate() {
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            edge_tris
                .entry((a.min(b), a.max(b)))
                .or_default()
                .push(i as u32);
        }
    }

    let has_directed = |t: &[u32; 3], a: u32, b: u32| -> bool {
        (t[0] == a && t[1] == b) || (t[1] == a && t[2] == b) || (t[2] == a && t[0] == b)
    };

    let mut flipped = 0usize;
    let mut visited = vec![false; triangles.len()];
    for seed in 0..triangles.len() {
        if visited[seed] {
            continue;
        }
        // BFS one component, flipping neighbours to traverse shared edges in
        // opposite directions.
        let mut component = Vec::new();
        let mut queue = std::collections::VecDeque::from([seed as u32]);
        visited[seed] = true;
        while let Some(i) = queue.pop_front() {
            component.push(i);
            let t = triangles[i as usize];
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                let key = (a.min(b), a.max(b));
                for &j in &edge_tris[&key] {
                    if j == i || visited[j as usize] {
                        continue;
                    }
                    if has_directed(&triangles[j as usize], a, b) {
                        triangles[j as usize].swap(1, 2);
                        flipped += 1;
                    }
                    visited[j as usize] = true;
                    queue.push_back(j);
                }
            }
        }
        // Orient the whole component outward.
        let volume: f64 = component
            .iter()
            .map(|&i| {
                let t = triangles[i as usize];
                let a = vertices[t[0] as usize].coords;
                let b = vertices[t[1] as usize].coords;
                let c = vertices[t[2] as usize].coords;
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum();
        if volume < 0.0 {
            for &i in &component {
                triangles[i as usize].swap(1, 2);
                flipped += 1;
            }
        }
    }
    flipped
}
