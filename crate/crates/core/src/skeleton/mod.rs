//! Curve-skeleton extraction and topological segmentation.
//!
//! [`skeletonize`] contracts a watertight mesh onto its medial curve
//! ([`contract`]), collapses the contracted mesh into a graph while carrying
//! every surface vertex's association along ([`collapse`]), and returns a
//! validated [`Skeleton`]. Vertices are classified by degree into branching,
//! endpoint, and connecting kinds; maximal chains of connecting vertices
//! between delimiters form [`Segment`]s, the unit the grasp planner works
//! on.

mod collapse;
mod contract;
mod solve;

use std::io::Write;
use std::path::Path;

use nalgebra::Point3;

use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Controls for the contraction stage of [`skeletonize`].
#[derive(Debug, Clone)]
pub struct ContractionParams {
    /// Maximum smoothing iterations before giving up.
    pub max_iterations: usize,
    /// Convergence: stop once total area falls below this fraction of the
    /// input area.
    pub area_threshold: f64,
    /// Resolution bound on consecutive skeleton points (mm); `None` uses
    /// 2% of the mesh bounding-box diagonal.
    pub max_edge_length: Option<f64>,
    /// Initial smoothing weight; doubles every iteration.
    pub contraction_weight: f64,
    /// Fixed anchor weight resisting the shrink.
    pub attraction_weight: f64,
}

impl Default for ContractionParams {
    fn default() -> Self {
        ContractionParams {
            max_iterations: 20,
            area_threshold: 1e-4,
            max_edge_length: None,
            contraction_weight: 1.0,
            attraction_weight: 1.0,
        }
    }
}

impl ContractionParams {
    /// The effective resolution bound for `mesh`.
    #[must_use]
    pub fn resolved_max_edge(&self, mesh: &Mesh) -> f64 {
        self.max_edge_length
            .unwrap_or(0.02 * mesh.bbox_diagonal())
    }
}

/// Topological role of a skeleton vertex, determined by its degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexKind {
    /// Degree > 2: a crossing of skeleton branches.
    Branching,
    /// Degree 1: a free end of the skeleton.
    Endpoint,
    /// Degree 2: interior of a chain.
    Connecting,
}

impl VertexKind {
    /// Visualization color (endpoints red, branchings blue, connecting
    /// chains yellow).
    #[must_use]
    pub fn color(self) -> [u8; 3] {
        match self {
            VertexKind::Branching => [60, 90, 220],
            VertexKind::Endpoint => [220, 50, 50],
            VertexKind::Connecting => [235, 200, 40],
        }
    }

    fn name(self) -> &'static str {
        match self {
            VertexKind::Branching => "branching",
            VertexKind::Endpoint => "endpoint",
            VertexKind::Connecting => "connecting",
        }
    }
}

/// One skeleton vertex: its 3-D point, the surface vertices it owns, and
/// its topological kind.
#[derive(Debug, Clone)]
pub struct SkeletonVertex {
    /// Skeleton point (mm).
    pub position: Point3<f64>,
    /// Sorted indices into the source mesh's vertex list; the sets of all
    /// vertices partition the surface.
    pub surface_points: Vec<u32>,
    /// Degree-derived classification.
    pub kind: VertexKind,
}

/// A maximal chain of connecting vertices between two delimiting
/// (endpoint or branching) vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    /// Delimiting vertex at the walk start.
    pub start: u32,
    /// Delimiting vertex at the walk end.
    pub end: u32,
    /// Connecting vertices strictly between the delimiters, in walk order;
    /// empty when the delimiters share an edge.
    pub interior: Vec<u32>,
}

/// Curve skeleton of a mesh: a connected graph of classified vertices whose
/// surface associations partition the source mesh's vertices.
#[derive(Debug, Clone)]
pub struct Skeleton {
    vertices: Vec<SkeletonVertex>,
    edges: Vec<(u32, u32)>,
    adjacency: Vec<Vec<u32>>,
    surface_count: usize,
}

impl Skeleton {
    /// Builds and validates a skeleton from raw parts: rejects out-of-range
    /// or self-loop edges, isolated vertices, and association maps that are
    /// not a partition of `0..surface_count`. Duplicate edges are merged.
    /// Vertex kinds are derived from the final edge list.
    pub fn from_parts(
        positions: Vec<Point3<f64>>,
        associations: Vec<Vec<u32>>,
        edges: Vec<(u32, u32)>,
        surface_count: usize,
    ) -> Result<Skeleton> {
        let n = positions.len();
        if n == 0 {
            return Err(Error::MalformedSkeleton("no vertices".into()));
        }
        if associations.len() != n {
            return Err(Error::MalformedSkeleton(format!(
                "{} association sets for {} vertices",
                associations.len(),
                n
            )));
        }
        let mut unique = std::collections::BTreeSet::new();
        for &(a, b) in &edges {
            if a as usize >= n || b as usize >= n {
                return Err(Error::MalformedSkeleton(format!(
                    "edge ({a},{b}) out of range for {n} vertices"
                )));
            }
            if a == b {
                return Err(Error::MalformedSkeleton(format!("self-loop at vertex {a}")));
            }
            unique.insert((a.min(b), a.max(b)));
        }
        let edges: Vec<(u32, u32)> = unique.into_iter().collect();
        let kinds = classify_kinds(n, &edges)?;
        let mut seen = vec![false; surface_count];
        let mut total = 0usize;
        for set in &associations {
            for &p in set {
                if p as usize >= surface_count || seen[p as usize] {
                    return Err(Error::MalformedSkeleton(format!(
                        "surface point {p} missing from or repeated in the association map"
                    )));
                }
                seen[p as usize] = true;
                total += 1;
            }
        }
        if total != surface_count {
            return Err(Error::MalformedSkeleton(format!(
                "association covers {total} of {surface_count} surface points"
            )));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &edges {
            adjacency[a as usize].push(b);
            adjacency[b as usize].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let vertices = positions
            .into_iter()
            .zip(associations)
            .zip(kinds)
            .map(|((position, mut surface_points), kind)| {
                surface_points.sort_unstable();
                SkeletonVertex {
                    position,
                    surface_points,
                    kind,
                }
            })
            .collect();
        Ok(Skeleton {
            vertices,
            edges,
            adjacency,
            surface_count,
        })
    }

    #[must_use]
    pub fn vertices(&self) -> &[SkeletonVertex] {
        &self.vertices
    }

    #[must_use]
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    /// Neighbor vertex indices of `v`, ascending.
    #[must_use]
    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adjacency[v as usize]
    }

    #[must_use]
    pub fn degree(&self, v: u32) -> usize {
        self.adjacency[v as usize].len()
    }

    /// Number of surface points of the source mesh (the association map
    /// partitions `0..surface_count`).
    #[must_use]
    pub fn surface_count(&self) -> usize {
        self.surface_count
    }

    /// `(branching, endpoint, connecting)` vertex counts.
    #[must_use]
    pub fn kind_counts(&self) -> (usize, usize, usize) {
        let mut counts = (0, 0, 0);
        for v in &self.vertices {
            match v.kind {
                VertexKind::Branching => counts.0 += 1,
                VertexKind::Endpoint => counts.1 += 1,
                VertexKind::Connecting => counts.2 += 1,
            }
        }
        counts
    }

    /// Sum of edge lengths (mm).
    #[must_use]
    pub fn total_length(&self) -> f64 {
        self.edges
            .iter()
            .map(|&(a, b)| (self.vertices[a as usize].position - self.vertices[b as usize].position).norm())
            .sum()
    }

    /// Splits the skeleton into maximal chains of connecting vertices
    /// delimited by endpoint/branching vertices. Every connecting vertex
    /// lands in exactly one segment interior. A component that is a pure
    /// cycle (no delimiters — outside the planner's normal diet) is emitted
    /// as one segment whose lowest-index vertex serves as both delimiters
    /// and also appears in the interior, preserving the partition property.
    #[must_use]
    pub fn segments(&self) -> Vec<Segment> {
        let n = self.vertices.len();
        let mut consumed: std::collections::BTreeSet<(u32, u32)> = std::collections::BTreeSet::new();
        let mut covered = vec![false; n];
        let mut segments = Vec::new();
        for d in 0..n as u32 {
            if self.vertices[d as usize].kind == VertexKind::Connecting {
                continue;
            }
            for &first in self.neighbors(d) {
                if consumed.contains(&(d, first)) {
                    continue;
                }
                consumed.insert((d, first));
                let mut interior = Vec::new();
                let mut prev = d;
                let mut cur = first;
                while self.vertices[cur as usize].kind == VertexKind::Connecting {
                    interior.push(cur);
                    covered[cur as usize] = true;
                    let next = *self
                        .neighbors(cur)
                        .iter()
                        .find(|&&v| v != prev)
                        .expect("connecting vertex has two distinct neighbors");
                    prev = cur;
                    cur = next;
                }
                consumed.insert((cur, prev));
                segments.push(Segment {
                    start: d,
                    end: cur,
                    interior,
                });
            }
        }
        // Leftover pure cycles of connecting vertices.
        for v in 0..n as u32 {
            if self.vertices[v as usize].kind != VertexKind::Connecting || covered[v as usize] {
                continue;
            }
            let mut interior = vec![v];
            covered[v as usize] = true;
            let mut prev = v;
            let mut cur = self.neighbors(v)[0];
            while cur != v {
                interior.push(cur);
                covered[cur as usize] = true;
                let next = *self
                    .neighbors(cur)
                    .iter()
                    .find(|&&u| u != prev)
                    .expect("cycle vertex has two distinct neighbors");
                prev = cur;
                cur = next;
            }
            segments.push(Segment {
                start: v,
                end: v,
                interior,
            });
        }
        segments
    }

    /// Per-surface-point label: the kind of the owning skeleton vertex.
    /// Total by the association invariant checked at construction.
    #[must_use]
    pub fn surface_labels(&self) -> Vec<VertexKind> {
        let mut labels = vec![VertexKind::Connecting; self.surface_count];
        for v in &self.vertices {
            for &p in &v.surface_points {
                labels[p as usize] = v.kind;
            }
        }
        labels
    }

    /// Writes the structured-text skeleton format:
    /// a vertex table (id, position, kind, owned surface points) and an
    /// edge list. Floats print in shortest round-trip form.
    pub fn write_skel<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "skel 1")?;
        writeln!(out, "vertices {}", self.vertices.len())?;
        for (i, v) in self.vertices.iter().enumerate() {
            write!(
                out,
                "{i} {} {} {} {} {}",
                v.position.x,
                v.position.y,
                v.position.z,
                v.kind.name(),
                v.surface_points.len()
            )?;
            for p in &v.surface_points {
                write!(out, " {p}")?;
            }
            writeln!(out)?;
        }
        writeln!(out, "edges {}", self.edges.len())?;
        for &(a, b) in &self.edges {
            writeln!(out, "{a} {b}")?;
        }
        Ok(())
    }

    /// [`write_skel`](Self::write_skel) to a file path.
    pub fn save_skel(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut buf = Vec::new();
        self.write_skel(&mut buf).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        std::fs::write(path, buf).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Degree-based classification: degree 1 is an endpoint, 2 connecting,
/// more branching; degree 0 is malformed.
pub fn classify_kinds(vertex_count: usize, edges: &[(u32, u32)]) -> Result<Vec<VertexKind>> {
    let mut degree = vec![0usize; vertex_count];
    for &(a, b) in edges {
        degree[a as usize] += 1;
        degree[b as usize] += 1;
    }
    degree
        .iter()
        .enumerate()
        .map(|(i, &d)| match d {
            0 => Err(Error::MalformedSkeleton(format!("isolated vertex {i}"))),
            1 => Ok(VertexKind::Endpoint),
            2 => Ok(VertexKind::Connecting),
            _ => Ok(VertexKind::Branching),
        })
        .collect()
}

/// Extracts the curve skeleton of a watertight, connected mesh: iterative
/// Laplacian contraction, edge collapse to a curve graph with carried
/// surface associations, spur removal, and resolution-bounded subdivision.
/// Deterministic for identical input and parameters.
pub fn skeletonize(mesh: &Mesh, params: &ContractionParams) -> Result<Skeleton> {
    mesh.require_watertight()?;
    let components = mesh.connected_components();
    if components != 1 {
        return Err(Error::DisconnectedMesh { components });
    }
    let max_edge = params.resolved_max_edge(mesh);
    if max_edge <= 0.0 {
        return Err(Error::MalformedSkeleton(format!(
            "non-positive skeleton resolution {max_edge}"
        )));
    }
    let outcome = contract::contract(mesh, params)?;
    let graph = collapse::build_curve(mesh, &outcome.positions, max_edge);
    Skeleton::from_parts(
        graph.positions,
        graph.associations,
        graph.edges,
        mesh.vertices().len(),
    )
}
