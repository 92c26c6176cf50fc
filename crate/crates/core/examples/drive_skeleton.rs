//! Drives the skeletonizer over the built-in fixture corpus and prints
//! per-shape diagnostics: vertex-kind counts, segment counts, axis fits,
//! and timing. Useful for eyeballing parameter calibration.

use std::time::Instant;

use skelgrasp_core::shapes;
use skelgrasp_core::{skeletonize, ContractionParams, VertexKind};

fn main() {
    let params = ContractionParams::default();
    for (name, mesh) in shapes::fixture_corpus() {
        let t0 = Instant::now();
        let skel = match skeletonize(&mesh, &params) {
            Ok(s) => s,
            Err(e) => {
                println!("{name:10} FAILED: {e}");
                continue;
            }
        };
        let ms = t0.elapsed().as_secs_f64() * 1e3;
        let (branching, endpoint, connecting) = skel.kind_counts();
        let segments = skel.segments();
        println!(
            "{name:10} verts={v:4} tris={t:5} | skel: {n:3} vertices ({branching} branching, \
             {endpoint} endpoint, {connecting} connecting), {e:3} edges, {s:2} segments, \
             total len {len:7.2} | {ms:8.1} ms",
            v = mesh.vertices().len(),
            t = mesh.triangles().len(),
            n = skel.vertices().len(),
            e = skel.edges().len(),
            s = segments.len(),
            len = skel.total_length(),
        );

        // Shape-specific geometric diagnostics.
        match name.as_str() {
            "cylinder" => {
                // Axis = Z. Report radial distance of every skeleton vertex.
                let mut dists: Vec<f64> = skel
                    .vertices()
                    .iter()
                    .map(|v| (v.position.x.powi(2) + v.position.y.powi(2)).sqrt())
                    .collect();
                dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let mean = dists.iter().sum::<f64>() / dists.len() as f64;
                let zmin = skel
                    .vertices()
                    .iter()
                    .map(|v| v.position.z)
                    .fold(f64::INFINITY, f64::min);
                let zmax = skel
                    .vertices()
                    .iter()
                    .map(|v| v.position.z)
                    .fold(f64::NEG_INFINITY, f64::max);
                println!(
                    "           axis dist: mean={mean:.4} max={:.4} | z span [{zmin:.2}, {zmax:.2}]",
                    dists.last().unwrap()
                );
            }
            "sphere" => {
                let c = shapes::icosphere(20.0, 3);
                let _ = c;
                let mut dmax: f64 = 0.0;
                for v in skel.vertices() {
                    dmax = dmax.max(v.position.coords.norm());
                }
                let all_red = skel
                    .vertices()
                    .iter()
                    .all(|v| v.kind == VertexKind::Endpoint);
                println!("           max |p| = {dmax:.4}, all endpoints: {all_red}");
            }
            "ytube" => {
                for (i, v) in skel.vertices().iter().enumerate() {
                    if v.kind == VertexKind::Branching {
                        println!(
                            "           branching vertex {i} at ({:.3}, {:.3}, {:.3})",
                            v.position.x, v.position.y, v.position.z
                        );
                    }
                }
                // Distance of every skeleton vertex to the nearest of the
                // three ideal arm axes (stem down -Z, branches at +/-35 deg
                // in XZ), split by distance from the junction: points more
                // than two radii out should be sub-millimetre medial.
                let a = 35.0_f64.to_radians();
                let axes = [
                    (nalgebra::Vector3::new(0.0, 0.0, -1.0), 55.0),
                    (nalgebra::Vector3::new(a.sin(), 0.0, a.cos()), 50.0),
                    (nalgebra::Vector3::new(-a.sin(), 0.0, a.cos()), 50.0),
                ];
                let seg_dist = |p: nalgebra::Vector3<f64>| -> f64 {
                    axes.iter()
                        .map(|&(d, len)| (p - d * p.dot(&d).clamp(0.0, len)).norm())
                        .fold(f64::INFINITY, f64::min)
                };
                let (mut far_max, mut near_max) = (0.0_f64, 0.0_f64);
                for v in skel.vertices() {
                    let d = seg_dist(v.position.coords);
                    if v.position.coords.norm() > 16.0 {
                        far_max = far_max.max(d);
                    } else {
                        near_max = near_max.max(d);
                    }
                }
                println!(
                    "           off-axis: max {far_max:.3} beyond 2r of origin, \
                     max {near_max:.3} within (radius 8)"
                );
            }
            _ => {}
        }
    }

    // Sphere fixture on its own (not in the corpus): the all-red degenerate case.
    let sphere = shapes::icosphere(20.0, 3);
    let t0 = Instant::now();
    match skeletonize(&sphere, &ContractionParams::default()) {
        Ok(skel) => {
            let ms = t0.elapsed().as_secs_f64() * 1e3;
            let (b, e, c) = skel.kind_counts();
            let mut dmax: f64 = 0.0;
            for v in skel.vertices() {
                dmax = dmax.max(v.position.coords.norm());
            }
            println!(
                "{:10} verts={:4} tris={:5} | skel: {:3} vertices ({b} branching, {e} endpoint, \
                 {c} connecting) | max |p| = {dmax:.4} | {ms:8.1} ms",
                "sphere",
                sphere.vertices().len(),
                sphere.triangles().len(),
                skel.vertices().len(),
            );
        }
        Err(e) => println!("sphere     FAILED: {e}"),
    }
}
