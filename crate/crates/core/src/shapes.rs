//! Watertight synthetic test meshes.
//!
//! Rotationally symmetric shapes (cylinder, capsule, dumbbell) are lathed
//! from a radial profile; the Y-tube is extracted from an implicit distance
//! field with marching tetrahedra. All generators produce consistently
//! oriented, watertight meshes in millimetres, centred as documented per
//! shape.

use nalgebra::{Point3, Vector3};

use crate::mesh::Mesh;

/// Axis-aligned box centred at the origin, 12 triangles.
#[must_use]
pub fn cuboid(sx: f64, sy: f64, sz: f64) -> Mesh {
    let (hx, hy, hz) = (sx / 2.0, sy / 2.0, sz / 2.0);
    let v = |x: f64, y: f64, z: f64| Point3::new(x, y, z);
    let vertices = vec![
        v(-hx, -hy, -hz),
        v(hx, -hy, -hz),
        v(hx, hy, -hz),
        v(-hx, hy, -hz),
        v(-hx, -hy, hz),
        v(hx, -hy, hz),
        v(hx, hy, hz),
        v(-hx, hy, hz),
    ];
    let triangles = vec![
        [0, 2, 1],
        [0, 3, 2],
        [4, 5, 6],
        [4, 6, 7],
        [0, 1, 5],
        [0, 5, 4],
        [1, 2, 6],
        [1, 6, 5],
        [2, 3, 7],
        [2, 7, 6],
        [3, 0, 4],
        [3, 4, 7],
    ];
    Mesh::new(vertices, triangles).expect("cuboid generator yields a valid mesh")
}

/// Axis-aligned box centred at the origin with each face subdivided into a
/// grid of cells no larger than `cell` mm (finer geometry for contraction).
#[must_use]
pub fn cuboid_grid(sx: f64, sy: f64, sz: f64, cell: f64) -> Mesh {
    let h = Vector3::new(sx / 2.0, sy / 2.0, sz / 2.0);
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    // One subdivided quad per face; shared borders weld by coordinate.
    for (axis, sign) in [(0, -1.0), (0, 1.0), (1, -1.0), (1, 1.0), (2, -1.0), (2, 1.0)] {
        let (u_axis, v_axis) = match axis {
            0 => (1, 2),
            1 => (2, 0),
            _ => (0, 1),
        };
        let nu = ((2.0 * h[u_axis] / cell).ceil() as usize).max(1);
        let nv = ((2.0 * h[v_axis] / cell).ceil() as usize).max(1);
        let base = vertices.len() as u32;
        for j in 0..=nv {
            for i in 0..=nu {
                let mut p = Point3::origin();
                p[axis] = sign * h[axis];
                p[u_axis] = -h[u_axis] + 2.0 * h[u_axis] * i as f64 / nu as f64;
                p[v_axis] = -h[v_axis] + 2.0 * h[v_axis] * j as f64 / nv as f64;
                vertices.push(p);
            }
        }
        let id = |i: usize, j: usize| base + (j * (nu + 1) + i) as u32;
        for j in 0..nv {
            for i in 0..nu {
                let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
                if sign > 0.0 {
                    triangles.push([a, b, c]);
                    triangles.push([a, c, d]);
                } else {
                    triangles.push([a, c, b]);
                    triangles.push([a, d, c]);
                }
            }
        }
    }
    Mesh::new(vertices, triangles).expect("cuboid_grid generator yields a valid mesh")
}

/// Surface of revolution around the Z axis.
///
/// `profile` is a polyline of `(radius, z)` points with non-negative radii;
/// zero-radius entries become pole vertices. Consecutive points with both
/// radii zero are invalid. `segments` is the number of angular steps.
#[must_use]
pub fn lathe(profile: &[(f64, f64)], segments: usize) -> Mesh {
    assert!(segments >= 3 && profile.len() >= 2);
    let mut vertices: Vec<Point3<f64>> = Vec::new();
    // Ring start index per profile point, or pole vertex index.
    enum Row {
        Pole(u32),
        Ring(u32),
    }
    let mut rows = Vec::with_capacity(profile.len());
    for &(r, z) in profile {
        assert!(r >= 0.0, "lathe profile radius must be non-negative");
        if r == 0.0 {
            rows.push(Row::Pole(vertices.len() as u32));
            vertices.push(Point3::new(0.0, 0.0, z));
        } else {
            rows.push(Row::Ring(vertices.len() as u32));
            for s in 0..segments {
                let a = std::f64::consts::TAU * s as f64 / segments as f64;
                vertices.push(Point3::new(r * a.cos(), r * a.sin(), z));
            }
        }
    }
    let mut triangles: Vec<[u32; 3]> = Vec::new();
    for w in rows.windows(2) {
        match (&w[0], &w[1]) {
            (Row::Ring(a), Row::Ring(b)) => {
                for s in 0..segments as u32 {
                    let sn = (s + 1) % segments as u32;
                    triangles.push([a + s, a + sn, b + s]);
                    triangles.push([a + sn, b + sn, b + s]);
                }
            }
            (Row::Pole(p), Row::Ring(b)) => {
                for s in 0..segments as u32 {
                    let sn = (s + 1) % segments as u32;
                    triangles.push([*p, b + sn, b + s]);
                }
            }
            (Row::Ring(a), Row::Pole(p)) => {
                for s in 0..segments as u32 {
                    let sn = (s + 1) % segments as u32;
                    triangles.push([a + s, a + sn, *p]);
                }
            }
            (Row::Pole(_), Row::Pole(_)) => panic!("lathe profile has two adjacent poles"),
        }
    }
    Mesh::new(vertices, triangles).expect("lathe generator yields a valid mesh")
}

/// Capped cylinder of radius `r` and length `l`, axis along Z, centred at
/// the origin.
#[must_use]
pub fn cylinder(r: f64, l: f64, segments: usize, side_rings: usize) -> Mesh {
    let h = l / 2.0;
    let mut profile = vec![(0.0, -h), (0.5 * r, -h), (r, -h)];
    for i in 1..side_rings {
        profile.push((r, -h + l * i as f64 / side_rings as f64));
    }
    profile.extend_from_slice(&[(r, h), (0.5 * r, h), (0.0, h)]);
    lathe(&profile, segments)
}

/// Capsule: cylinder of length `cyl_len` with hemispherical end caps of
/// radius `r`, axis along Z, centred at the origin.
#[must_use]
pub fn capsule(r: f64, cyl_len: f64, segments: usize, cap_rings: usize, side_rings: usize) -> Mesh {
    let h = cyl_len / 2.0;
    let mut profile = vec![(0.0, -h - r)];
    for i in 1..=cap_rings {
        let phi = std::f64::consts::FRAC_PI_2 * i as f64 / cap_rings as f64;
        profile.push((r * phi.sin(), -h - r * phi.cos()));
    }
    for i in 1..side_rings {
        profile.push((r, -h + cyl_len * i as f64 / side_rings as f64));
    }
    for i in 0..=cap_rings {
        let phi = std::f64::consts::FRAC_PI_2 * (1.0 - i as f64 / cap_rings as f64);
        profile.push((r * phi.sin(), h + r * phi.cos()));
    }
    lathe(&profile, segments)
}

/// Two spheres of radius `end_r` joined by a bar of radius `bar_r`; the
/// sphere centres sit at `z = ±(bar_len/2)`, axis along Z.
#[must_use]
pub fn dumbbell(end_r: f64, bar_r: f64, bar_len: f64, segments: usize) -> Mesh {
    assert!(bar_r < end_r, "bar must be thinner than the end spheres");
    let d = bar_len / 2.0;
    let zmin = -d - end_r;
    let zmax = d + end_r;
    // Radial envelope of the union: max of the three component radii.
    let radius_at = |z: f64| -> f64 {
        let sphere = |zc: f64| -> f64 {
            let dz = z - zc;
            if dz.abs() <= end_r {
                (end_r * end_r - dz * dz).sqrt()
            } else {
                f64::NEG_INFINITY
            }
        };
        let bar = if z.abs() <= d { bar_r } else { f64::NEG_INFINITY };
        sphere(-d).max(sphere(d)).max(bar).max(0.0)
    };
    let steps = 80usize;
    let mut profile = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let z = zmin + (zmax - zmin) * i as f64 / steps as f64;
        let r = if i == 0 || i == steps { 0.0 } else { radius_at(z) };
        profile.push((r, z));
    }
    lathe(&profile, segments)
}

/// Icosphere of radius `r` with `subdivisions` rounds of 4-way face splits
/// (20 * 4^subdivisions triangles), centred at the origin.
#[must_use]
pub fn icosphere(r: f64, subdivisions: u32) -> Mesh {
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vector3<f64>> = vec![
        Vector3::new(-1.0, phi, 0.0),
        Vector3::new(1.0, phi, 0.0),
        Vector3::new(-1.0, -phi, 0.0),
        Vector3::new(1.0, -phi, 0.0),
        Vector3::new(0.0, -1.0, phi),
        Vector3::new(0.0, 1.0, phi),
        Vector3::new(0.0, -1.0, -phi),
        Vector3::new(0.0, 1.0, -phi),
        Vector3::new(phi, 0.0, -1.0),
        Vector3::new(phi, 0.0, 1.0),
        Vector3::new(-phi, 0.0, -1.0),
        Vector3::new(-phi, 0.0, 1.0),
    ];
    let mut triangles: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for v in &mut vertices {
        *v = v.normalize();
    }
    for _ in 0..subdivisions {
        let mut midpoint: std::collections::HashMap<(u32, u32), u32> = std::collections::HashMap::new();
        let mut next = Vec::with_capacity(triangles.len() * 4);
        for t in &triangles {
            let mut mid = [0u32; 3];
            for (k, (a, b)) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])].into_iter().enumerate() {
                let key = (a.min(b), a.max(b));
                mid[k] = *midpoint.entry(key).or_insert_with(|| {
                    let m = (vertices[a as usize] + vertices[b as usize]).normalize();
                    vertices.push(m);
                    (vertices.len() - 1) as u32
                });
            }
            next.push([t[0], mid[0], mid[2]]);
            next.push([t[1], mid[1], mid[0]]);
            next.push([t[2], mid[2], mid[1]]);
            next.push([mid[0], mid[1], mid[2]]);
        }
        triangles = next;
    }
    let points = vertices.into_iter().map(|v| Point3::from(v * r)).collect();
    Mesh::new(points, triangles).expect("icosphere generator yields a valid mesh")
}

/// Extracts the zero level set of `field` (negative inside) over the box
/// `[min, max]` with marching tetrahedra on a grid of spacing `cell`.
/// The result is watertight as long as the surface stays inside the box.
pub fn implicit_surface<F: Fn(&Point3<f64>) -> f64>(
    field: F,
    min: Point3<f64>,
    max: Point3<f64>,
    cell: f64,
) -> Mesh {
    let n = |lo: f64, hi: f64| (((hi - lo) / cell).ceil() as usize).max(1);
    let (nx, ny, nz) = (n(min.x, max.x), n(min.y, max.y), n(min.z, max.z));
    let grid_point = |i: usize, j: usize, k: usize| -> Point3<f64> {
        Point3::new(
            min.x + (max.x - min.x) * i as f64 / nx as f64,
            min.y + (max.y - min.y) * j as f64 / ny as f64,
            min.z + (max.z - min.z) * k as f64 / nz as f64,
        )
    };
    let gid = |i: usize, j: usize, k: usize| -> u64 {
        ((i * (ny + 1) + j) * (nz + 1) + k) as u64
    };
    let mut values = vec![0.0f64; (nx + 1) * (ny + 1) * (nz + 1)];
    for i in 0..=nx {
        for j in 0..=ny {
            for k in 0..=nz {
                let mut f = field(&grid_point(i, j, k));
                // Exact zeros would put vertices on grid points and break the
                // sign-based case analysis; nudge them outside.
                if f == 0.0 {
                    f = 1e-12;
                }
                values[gid(i, j, k) as usize] = f;
            }
        }
    }

    // Cube corners indexed by (dx, dy, dz) bits; 6 tetrahedra around the
    // 0-7 main diagonal give face-consistent splits between cubes.
    const TETS: [[usize; 4]; 6] = [
        [0, 1, 3, 7],
        [0, 3, 2, 7],
        [0, 2, 6, 7],
        [0, 6, 4, 7],
        [0, 4, 5, 7],
        [0, 5, 1, 7],
    ];

    let mut edge_vertex: std::collections::HashMap<(u64, u64), u32> = std::collections::HashMap::new();
    let mut vertices: Vec<Point3<f64>> = Vec::new();
    let mut triangles: Vec<[u32; 3]> = Vec::new();

    for i in 0..nx {
        for j in 0..ny {
            for k in 0..nz {
                let corner = |bit: usize| -> (u64, Point3<f64>, f64) {
                    let (di, dj, dk) = (bit & 1, (bit >> 1) & 1, (bit >> 2) & 1);
                    let (ci, cj, ck) = (i + di, j + dj, k + dk);
                    (gid(ci, cj, ck), grid_point(ci, cj, ck), values[gid(ci, cj, ck) as usize])
                };
                let corners: Vec<(u64, Point3<f64>, f64)> = (0..8).map(corner).collect();
                for tet in &TETS {
                    let c: Vec<&(u64, Point3<f64>, f64)> = tet.iter().map(|&b| &corners[b]).collect();
                    let inside: Vec<usize> = (0..4).filter(|&q| c[q].2 < 0.0).collect();
                    if inside.is_empty() || inside.len() == 4 {
                        continue;
                    }
                    let mut cut = |a: usize, b: usize| -> u32 {
                        let (ga, pa, fa) = c[a];
                        let (gb, pb, fb) = c[b];
                        let key = (*ga.min(gb), *ga.max(gb));
                        *edge_vertex.entry(key).or_insert_with(|| {
                            let t = fa / (fa - fb);
                            let p = pa + (pb - pa) * t;
                            vertices.push(p);
                            (vertices.len() - 1) as u32
                        })
                    };
                    match inside.len() {
                        1 => {
                            let v = inside[0];
                            let others: Vec<usize> = (0..4).filter(|&q| q != v).collect();
                            let (a, b, d) = (cut(v, others[0]), cut(v, others[1]), cut(v, others[2]));
                            triangles.push([a, b, d]);
                        }
                        3 => {
                            let v = (0..4).find(|q| !inside.contains(q)).unwrap();
                            let (a, b, d) = (cut(inside[0], v), cut(inside[1], v), cut(inside[2], v));
                            triangles.push([a, b, d]);
                        }
                        2 => {
                            let (p, q) = (inside[0], inside[1]);
                            let outs: Vec<usize> = (0..4).filter(|x| !inside.contains(x)).collect();
                            let (r, s) = (outs[0], outs[1]);
                            // Quad across the four cut edges, split into two
                            // triangles sharing the pr-qs diagonal.
                            let (pr, ps, qr, qs) = (cut(p, r), cut(p, s), cut(q, r), cut(q, s));
                            triangles.push([pr, qr, qs]);
                            triangles.push([pr, qs, ps]);
                        }
                        _ => unreachable!(),
                    }
                }
            }
        }
    }
    // Winding from the case analysis is arbitrary; Mesh::new repairs
    // orientation on the welded watertight surface.
    Mesh::new(vertices, triangles).expect("implicit surface yields a valid mesh")
}

/// Distance field of a capsule (segment `a..b` inflated by `r`).
pub fn capsule_field(a: Point3<f64>, b: Point3<f64>, r: f64) -> impl Fn(&Point3<f64>) -> f64 {
    move |p: &Point3<f64>| {
        let ab = b - a;
        let t = ((p - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
        (p - (a + ab * t)).norm() - r
    }
}

/// Y-shaped tube: a stem capsule down the -Z axis and two branch capsules
/// fanning out symmetrically in the XZ plane, all of radius `arm_r`, joined
/// at the origin with rounded free ends.
#[must_use]
pub fn y_tube(arm_r: f64, stem_len: f64, branch_len: f64, branch_angle_deg: f64, cell: f64) -> Mesh {
    let origin = Point3::origin();
    let ang = branch_angle_deg.to_radians();
    let stem_end = Point3::new(0.0, 0.0, -stem_len);
    let b1_end = Point3::new(branch_len * ang.sin(), 0.0, branch_len * ang.cos());
    let b2_end = Point3::new(-branch_len * ang.sin(), 0.0, branch_len * ang.cos());
    let stem = capsule_field(origin, stem_end, arm_r);
    let b1 = capsule_field(origin, b1_end, arm_r);
    let b2 = capsule_field(origin, b2_end, arm_r);
    let field = move |p: &Point3<f64>| stem(p).min(b1(p)).min(b2(p));
    let margin = arm_r + 2.0 * cell;
    let min = Point3::new(
        b2_end.x - margin,
        -margin,
        stem_end.z - margin,
    );
    let max = Point3::new(b1_end.x + margin, margin, b1_end.z.max(b2_end.z) + margin);
    implicit_surface(field, min, max, cell)
}

/// The five-shape benchmark corpus: `(name, mesh)` pairs sized for the
/// built-in grippers. Deterministic.
#[must_use]
pub fn fixture_corpus() -> Vec<(String, Mesh)> {
    vec![
        ("cylinder".to_string(), cylinder(10.0, 100.0, 40, 24)),
        ("box".to_string(), cuboid_grid(30.0, 30.0, 120.0, 6.0)),
        ("ytube".to_string(), y_tube(8.0, 55.0, 50.0, 35.0, 2.5)),
        ("dumbbell".to_string(), dumbbell(16.0, 7.0, 80.0, 40)),
        ("capsule".to_string(), capsule(12.0, 80.0, 40, 8, 20)),
    ]
}
