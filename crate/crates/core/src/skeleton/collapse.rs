//! Reduction of a contracted mesh to a curve graph.
//!
//! Shortest-edge-first collapses remove every edge that still borders a
//! triangle, merging the surface associations of the collapsed endpoints;
//! edges whose triangles have all degenerated survive as curve edges. The
//! raw curve is then cleaned: short leaf branches fold into their junction,
//! a cluster that contracted to a single blob becomes a minimal two-vertex
//! skeleton along the object's principal axis, and long edges are split so
//! consecutive skeleton points respect the resolution bound.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use nalgebra::{Matrix3, Point3, Vector3};

use crate::mesh::Mesh;

/// Curve graph produced from the contracted mesh, in compact indexing.
pub(super) struct CurveGraph {
    pub positions: Vec<Point3<f64>>,
    /// Sorted original-vertex ids associated with each curve vertex.
    pub associations: Vec<Vec<u32>>,
    /// Undirected edges `(a < b)`, sorted and unique.
    pub edges: Vec<(u32, u32)>,
}

pub(super) fn build_curve(mesh: &Mesh, contracted: &[Point3<f64>], max_edge: f64) -> CurveGraph {
    let mut state = CollapseState::new(contracted, mesh.triangles());
    state.run();
    let mut graph = state.into_graph();
    prune_spurs(&mut graph, max_edge);
    recenter_junctions(&mut graph, mesh.vertices());
    if is_single_cluster(&graph, max_edge) {
        graph = principal_axis_fallback(mesh, &graph, max_edge);
    }
    subdivide(&mut graph, mesh.vertices(), max_edge);
    graph
}

/// Moves each junction (degree > 2) vertex to the centroid of its owned
/// surface points. Junction clusters absorb the whole blob a branch region
/// contracts into, and the blob's final flow position inherits whatever
/// asymmetric drift the last contraction steps had; the surface patch the
/// cluster owns is the stable witness of where the junction actually is.
/// Chain and endpoint clusters keep their contracted positions, which track
/// the medial axis to well under a millimetre on tubular regions.
fn recenter_junctions(graph: &mut CurveGraph, surface: &[Point3<f64>]) {
    let mut degree = vec![0u32; graph.positions.len()];
    for &(a, b) in &graph.edges {
        degree[a as usize] += 1;
        degree[b as usize] += 1;
    }
    for (v, &d) in degree.iter().enumerate() {
        if d <= 2 || graph.associations[v].is_empty() {
            continue;
        }
        let mut sum = Vector3::zeros();
        for &p in &graph.associations[v] {
            sum += surface[p as usize].coords;
        }
        graph.positions[v] = Point3::from(sum / graph.associations[v].len() as f64);
    }
}

/// Heap key: `(length bits, a, b)` with `a < b` current cluster roots.
/// Nonnegative f64 lengths order correctly through their bit patterns, and
/// the root pair breaks ties deterministically.
type EdgeKey = (u64, u32, u32);

struct CollapseState {
    parent: Vec<u32>,
    position: Vec<Point3<f64>>,
    weight: Vec<f64>,
    adjacency: Vec<BTreeSet<u32>>,
    faces: Vec<Option<[u32; 3]>>,
    faces_of: Vec<BTreeSet<u32>>,
    heap: BinaryHeap<Reverse<EdgeKey>>,
}

impl CollapseState {
    fn new(contracted: &[Point3<f64>], triangles: &[[u32; 3]]) -> CollapseState {
        let n = contracted.len();
        let mut adjacency = vec![BTreeSet::new(); n];
        let mut faces_of = vec![BTreeSet::new(); n];
        let mut faces = Vec::with_capacity(triangles.len());
        for (f, t) in triangles.iter().enumerate() {
            faces.push(Some(*t));
            for &v in t {
                faces_of[v as usize].insert(f as u32);
            }
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                adjacency[a as usize].insert(b);
                adjacency[b as usize].insert(a);
            }
        }
        let mut state = CollapseState {
            parent: (0..n as u32).collect(),
            position: contracted.to_vec(),
            weight: vec![1.0; n],
            adjacency,
            faces,
            faces_of,
            heap: BinaryHeap::new(),
        };
        for a in 0..n as u32 {
            let above: Vec<u32> = state.adjacency[a as usize].range(a + 1..).copied().collect();
            for b in above {
                state.push_edge(a, b);
            }
        }
        state
    }

    fn find(&mut self, mut v: u32) -> u32 {
        while self.parent[v as usize] != v {
            let grand = self.parent[self.parent[v as usize] as usize];
            self.parent[v as usize] = grand;
            v = grand;
        }
        v
    }

    fn edge_key(&self, a: u32, b: u32) -> EdgeKey {
        let (lo, hi) = (a.min(b), a.max(b));
        let len = (self.position[lo as usize] - self.position[hi as usize]).norm();
        (len.to_bits(), lo, hi)
    }

    fn push_edge(&mut self, a: u32, b: u32) {
        let key = self.edge_key(a, b);
        self.heap.push(Reverse(key));
    }

    fn shares_face(&self, a: u32, b: u32) -> bool {
        let (small, large) = if self.faces_of[a as usize].len() <= self.faces_of[b as usize].len()
        {
            (a, b)
        } else {
            (b, a)
        };
        self.faces_of[small as usize]
            .iter()
            .any(|f| self.faces_of[large as usize].contains(f))
    }

    fn run(&mut self) {
        while let Some(Reverse((len_bits, a, b))) = self.heap.pop() {
            // Stale entries: endpoints merged away, edge removed, or the
            // length changed (a fresher entry exists in the heap).
            if self.parent[a as usize] != a || self.parent[b as usize] != b {
                continue;
            }
            if !self.adjacency[a as usize].contains(&b) {
                continue;
            }
            if self.edge_key(a, b).0 != len_bits {
                continue;
            }
            // An edge with no incident triangle is part of the final curve;
            // it only becomes collapsible again via a face rewrite, which
            // re-pushes it.
            if !self.shares_face(a, b) {
                continue;
            }
            self.collapse(a, b);
        }
        debug_assert!(
            self.faces.iter().all(Option::is_none),
            "collapse left live faces"
        );
    }

    /// Merges cluster `s = max(a,b)` into `r = min(a,b)`: weighted-centroid
    /// position, rewired adjacency, rewritten faces, refreshed heap entries.
    fn collapse(&mut self, a: u32, b: u32) {
        let (r, s) = (a.min(b), a.max(b));
        self.parent[s as usize] = r;
        let (wr, ws) = (self.weight[r as usize], self.weight[s as usize]);
        let merged =
            (self.position[r as usize].coords * wr + self.position[s as usize].coords * ws)
                / (wr + ws);
        self.position[r as usize] = Point3::from(merged);
        self.weight[r as usize] = wr + ws;

        let neighbors = std::mem::take(&mut self.adjacency[s as usize]);
        self.adjacency[r as usize].remove(&s);
        for t in neighbors {
            if t == r {
                continue;
            }
            self.adjacency[t as usize].remove(&s);
            self.adjacency[t as usize].insert(r);
            self.adjacency[r as usize].insert(t);
        }

        for f in std::mem::take(&mut self.faces_of[s as usize]) {
            let Some(tri) = self.faces[f as usize] else {
                continue;
            };
            let tri = tri.map(|v| if v == s { r } else { v });
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[2] == tri[0] {
                // Degenerated: the face contained the collapsed edge.
                self.faces[f as usize] = None;
                for v in tri {
                    self.faces_of[v as usize].remove(&f);
                }
            } else {
                self.faces[f as usize] = Some(tri);
                self.faces_of[r as usize].insert(f);
                // The third edge kept its length but may have regained a
                // popped-and-skipped entry's collapsibility.
                let (x, y) = other_edge(tri, r);
                self.push_edge(x, y);
            }
        }

        // The merged vertex moved: refresh every incident edge length.
        for t in self.adjacency[r as usize].clone() {
            self.push_edge(r, t);
        }
    }

    /// Compacts surviving clusters into `CurveGraph` indexing; cluster
    /// membership becomes the surface association.
    fn into_graph(mut self) -> CurveGraph {
        let n = self.parent.len();
        let roots: Vec<u32> = (0..n as u32)
            .filter(|&v| self.parent[v as usize] == v)
            .collect();
        let mut compact = vec![u32::MAX; n];
        for (i, &r) in roots.iter().enumerate() {
            compact[r as usize] = i as u32;
        }
        let mut associations = vec![Vec::new(); roots.len()];
        for v in 0..n as u32 {
            let r = self.find(v);
            associations[compact[r as usize] as usize].push(v);
        }
        let mut edges = Vec::new();
        for &r in &roots {
            for &t in self.adjacency[r as usize].range(r + 1..) {
                edges.push((compact[r as usize], compact[t as usize]));
            }
        }
        edges.sort_unstable();
        CurveGraph {
            positions: roots
                .iter()
                .map(|&r| self.position[r as usize])
                .collect(),
            associations,
            edges,
        }
    }
}

/// The edge of rewritten face `tri` that does not touch `r`.
fn other_edge(tri: [u32; 3], r: u32) -> (u32, u32) {
    let rest: Vec<u32> = tri.iter().copied().filter(|&v| v != r).collect();
    debug_assert_eq!(rest.len(), 2);
    (rest[0], rest[1])
}

/// Folds leaf chains shorter than `max_edge` into their branching junction,
/// merging their associations into the junction vertex. Chains ending at
/// another leaf (the whole graph is a path) are left alone. Repeats until
/// stable, since pruning can lower a junction's degree.
fn prune_spurs(graph: &mut CurveGraph, max_edge: f64) {
    loop {
        let n = graph.positions.len();
        let mut adjacency = vec![BTreeSet::new(); n];
        for &(a, b) in &graph.edges {
            adjacency[a as usize].insert(b);
            adjacency[b as usize].insert(a);
        }
        let mut removed: Option<(Vec<u32>, u32)> = None;
        'leaves: for leaf in 0..n as u32 {
            if adjacency[leaf as usize].len() != 1 {
                continue;
            }
            let mut chain = vec![leaf];
            let mut prev = leaf;
            let mut cur = *adjacency[leaf as usize].first().expect("degree 1");
            let mut length =
                (graph.positions[leaf as usize] - graph.positions[cur as usize]).norm();
            while adjacency[cur as usize].len() == 2 {
                if length >= max_edge {
                    continue 'leaves;
                }
                chain.push(cur);
                let next = *adjacency[cur as usize]
                    .iter()
                    .find(|&&v| v != prev)
                    .expect("degree-2 vertex has a second neighbor");
                length += (graph.positions[cur as usize] - graph.positions[next as usize]).norm();
                prev = cur;
                cur = next;
            }
            if adjacency[cur as usize].len() >= 3 && length < max_edge {
                removed = Some((chain, cur));
                break;
            }
        }
        let Some((chain, junction)) = removed else {
            return;
        };
        // Merge associations into the junction, then drop the chain
        // vertices and every edge touching them.
        let doomed: BTreeSet<u32> = chain.iter().copied().collect();
        let mut moved = Vec::new();
        for &c in &chain {
            moved.append(&mut graph.associations[c as usize]);
        }
        graph.associations[junction as usize].append(&mut moved);
        graph.associations[junction as usize].sort_unstable();

        let mut remap = vec![u32::MAX; graph.positions.len()];
        let mut kept = 0u32;
        for v in 0..graph.positions.len() as u32 {
            if !doomed.contains(&v) {
                remap[v as usize] = kept;
                kept += 1;
            }
        }
        let mut positions = Vec::with_capacity(kept as usize);
        let mut associations = Vec::with_capacity(kept as usize);
        for v in 0..graph.positions.len() {
            if remap[v] != u32::MAX {
                positions.push(graph.positions[v]);
                associations.push(std::mem::take(&mut graph.associations[v]));
            }
        }
        graph.positions = positions;
        graph.associations = associations;
        graph.edges = graph
            .edges
            .iter()
            .filter(|(a, b)| !doomed.contains(a) && !doomed.contains(b))
            .map(|&(a, b)| (remap[a as usize], remap[b as usize]))
            .collect();
        graph.edges.sort_unstable();
    }
}

/// True when every curve vertex sits inside one `max_edge`-sized blob (or
/// the graph has no edges at all): the object contracted to a point.
fn is_single_cluster(graph: &CurveGraph, max_edge: f64) -> bool {
    if graph.positions.len() < 2 || graph.edges.is_empty() {
        return true;
    }
    let mut lo = graph.positions[0];
    let mut hi = graph.positions[0];
    for p in &graph.positions {
        lo = Point3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z));
        hi = Point3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z));
    }
    (hi - lo).norm() < max_edge
}

/// Minimal two-vertex skeleton for blob-like objects: a short edge through
/// the cluster centroid along the largest principal axis of the original
/// surface, with surface points split by the perpendicular plane.
fn principal_axis_fallback(mesh: &Mesh, graph: &CurveGraph, max_edge: f64) -> CurveGraph {
    let centroid = {
        let mut acc = Vector3::zeros();
        let mut wsum = 0.0;
        for (p, assoc) in graph.positions.iter().zip(&graph.associations) {
            let w = assoc.len().max(1) as f64;
            acc += p.coords * w;
            wsum += w;
        }
        Point3::from(acc / wsum.max(1.0))
    };
    let mut cov = Matrix3::zeros();
    let surface_mean = {
        let mut acc = Vector3::zeros();
        for v in mesh.vertices() {
            acc += v.coords;
        }
        acc / mesh.vertices().len() as f64
    };
    for v in mesh.vertices() {
        let d = v.coords - surface_mean;
        cov += d * d.transpose();
    }
    let eig = cov.symmetric_eigen();
    let axis_idx = eig.eigenvalues.imax();
    let axis = eig.eigenvectors.column(axis_idx).normalize();
    // Canonical sign so the fallback is orientation-stable.
    let axis = if axis.sum() < 0.0 { -axis } else { axis };

    let offset = 0.25 * max_edge;
    let a = centroid - axis * offset;
    let b = centroid + axis * offset;
    let mut assoc_a = Vec::new();
    let mut assoc_b = Vec::new();
    for (i, v) in mesh.vertices().iter().enumerate() {
        if (v.coords - centroid.coords).dot(&axis) <= 0.0 {
            assoc_a.push(i as u32);
        } else {
            assoc_b.push(i as u32);
        }
    }
    CurveGraph {
        positions: vec![a, b],
        associations: vec![assoc_a, assoc_b],
        edges: vec![(0, 1)],
    }
}

/// Splits every edge longer than `max_edge` into equal pieces and
/// redistributes the two endpoints' surface associations across the new
/// chain by proximity, preserving totality and disjointness.
fn subdivide(graph: &mut CurveGraph, surface: &[Point3<f64>], max_edge: f64) {
    let old_edges = std::mem::take(&mut graph.edges);
    let mut new_edges = Vec::with_capacity(old_edges.len());
    for (a, b) in old_edges {
        let pa = graph.positions[a as usize];
        let pb = graph.positions[b as usize];
        let len = (pb - pa).norm();
        let pieces = (len / max_edge).ceil().max(1.0) as usize;
        if pieces == 1 {
            new_edges.push((a, b));
            continue;
        }
        let mut chain = vec![a];
        for i in 1..pieces {
            let t = i as f64 / pieces as f64;
            let idx = graph.positions.len() as u32;
            graph.positions.push(pa + (pb - pa) * t);
            graph.associations.push(Vec::new());
            chain.push(idx);
        }
        chain.push(b);
        for pair in chain.windows(2) {
            let (x, y) = (pair[0], pair[1]);
            new_edges.push((x.min(y), x.max(y)));
        }
        // Reassign the endpoint associations to the nearest chain vertex.
        let mut pool = std::mem::take(&mut graph.associations[a as usize]);
        pool.append(&mut graph.associations[b as usize]);
        for surf in pool {
            let sp = surface[surf as usize];
            let target = *chain
                .iter()
                .min_by(|&&x, &&y| {
                    // Positions are finite; compare by distance then index.
                    let dx = (graph.positions[x as usize] - sp).norm_squared();
                    let dy = (graph.positions[y as usize] - sp).norm_squared();
                    dx.partial_cmp(&dy).expect("finite distances").then(x.cmp(&y))
                })
                .expect("chain is non-empty");
            graph.associations[target as usize].push(surf);
        }
    }
    new_edges.sort_unstable();
    new_edges.dedup();
    graph.edges = new_edges;
    for assoc in &mut graph.associations {
        assoc.sort_unstable();
    }
}
