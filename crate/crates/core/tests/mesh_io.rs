//! File-format round trips and cleanup behaviour of the mesh loaders.

use std::io::Write;
use std::path::Path;

use nalgebra::Point3;
use skelgrasp_core::mesh::{load_mesh, load_mesh_scaled};
use skelgrasp_core::Error;

fn write_file(dir: &Path, name: &str, contents: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

const CUBE_OFF: &str = "OFF
# unit cube, mm
8 6 12
0 0 0
1 0 0
1 1 0
0 1 0
0 0 1
1 0 1
1 1 1
0 1 1
4 0 3 2 1
4 4 5 6 7
4 0 1 5 4
4 1 2 6 5
4 2 3 7 6
4 3 0 4 7
";

#[test]
fn off_cube_loads_watertight() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_file(dir.path(), "cube.off", CUBE_OFF);
    let mesh = load_mesh(&path).unwrap();
    assert_eq!(mesh.vertices().len(), 8);
    assert_eq!(mesh.triangles().len(), 12, "quads fan-triangulate");
    assert!(mesh.is_watertight());
    assert!((mesh.signed_volume() - 1.0).abs() < 1e-12);
    assert!((mesh.surface_area() - 6.0).abs() < 1e-12);
}

#[test]
fn off_scale_factor_converts_units() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_file(dir.path(), "cube.off", CUBE_OFF);
    let mesh = load_mesh_scaled(&path, 1000.0).unwrap();
    assert!((mesh.signed_volume() - 1e9).abs() / 1e9 < 1e-12);
}

#[test]
fn obj_cube_negative_and_slash_indices() {
    let obj = "\
# cube via negative and v/vt/vn indices
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
v 0 0 1
v 1 0 1
v 1 1 1
v 0 1 1
f 1/1 4/2 3/3 2/4
f 5//1 6//2 7//3 8//4
f 1 2 6 5
f 2 3 7 6
f 3 4 8 7
f -5 -8 -4 -1
";
    let dir = tempfile::tempdir().unwrap();
    let path = write_file(dir.path(), "cube.obj", obj);
    let mesh = load_mesh(&path).unwrap();
    assert_eq!(mesh.vertices().len(), 8);
    assert_eq!(mesh.triangles().len(), 12);
    assert!(mesh.is_watertight());
    assert!((mesh.signed_volume() - 1.0).abs() < 1e-12);
}

#[test]
fn ascii_stl_welds_duplicate_vertices() {
    // Tetrahedron: 4 facets, 12 stored vertices, 4 after welding.
    let stl = "\
solid tet
facet normal 0 0 -1
 outer loop
  vertex 0 0 0
  vertex 0 1 0
  vertex 1 0 0
 endloop
endfacet
facet normal 0 -1 0
 outer loop
  vertex 0 0 0
  vertex 1 0 0
  vertex 0 0 1
 endloop
endfacet
facet normal -1 0 0
 outer loop
  vertex 0 0 0
  vertex 0 0 1
  vertex 0 1 0
 endloop
endfacet
facet normal 1 1 1
 outer loop
  vertex 1 0 0
  vertex 0 1 0
  vertex 0 0 1
 endloop
endfacet
endsolid tet
";
    let dir = tempfile::tempdir().unwrap();
    let path = write_file(dir.path(), "tet.stl", stl);
    let mesh = load_mesh(&path).unwrap();
    assert_eq!(mesh.vertices().len(), 4);
    assert_eq!(mesh.triangles().len(), 4);
    assert_eq!(mesh.cleanup_report().merged_vertices, 8);
    assert!(mesh.is_watertight());
    assert!(mesh.signed_volume() > 0.0);
}

#[test]
fn binary_stl_round_trip() {
    // Hand-build a binary STL of the same tetrahedron.
    let tris: [[[f32; 3]; 3]; 4] = [
        [[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]],
        [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]],
        [[0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]],
        [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    ];
    let mut bytes: Vec<u8> = vec![0; 80];
    bytes.extend_from_slice(&(tris.len() as u32).to_le_bytes());
    for t in &tris {
        for _ in 0..3 {
            bytes.extend_from_slice(&0f32.to_le_bytes());
        }
        for v in t {
            for c in v {
                bytes.extend_from_slice(&c.to_le_bytes());
            }
        }
        bytes.extend_from_slice(&0u16.to_le_bytes());
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tet_bin.stl");
    let mut f = std::fs::File::create(&path).unwrap();
    f.write_all(&bytes).unwrap();
    drop(f);

    let mesh = load_mesh(&path).unwrap();
    assert_eq!(mesh.vertices().len(), 4);
    assert_eq!(mesh.triangles().len(), 4);
    assert!(mesh.is_watertight());
}

#[test]
fn degenerate_triangles_are_dropped() {
    let off = "\
OFF
5 3 0
0 0 0
1 0 0
1 1 0
0 1 0
0.5 0.5 0
3 0 1 2
3 0 2 3
3 0 1 1
";
    let dir = tempfile::tempdir().unwrap();
    let path = write_file(dir.path(), "deg.off", off);
    let mesh = load_mesh(&path).unwrap();
    assert_eq!(mesh.triangles().len(), 2);
    assert_eq!(mesh.cleanup_report().removed_triangles, 1);
    // Vertex 4 was referenced by nothing and is dropped.
    assert_eq!(mesh.vertices().len(), 4);
    assert!(!mesh.is_watertight());
    assert_eq!(mesh.cleanup_report().open_edges.len(), 4);
}

#[test]
fn missing_file_is_io_error() {
    let err = load_mesh(Path::new("/nonexistent/nope.off")).unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
    assert!(err.is_input_error());
}

#[test]
fn unknown_extension_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_file(dir.path(), "mesh.ply", "ply\n");
    let err = load_mesh(&path).unwrap_err();
    assert!(matches!(err, Error::UnsupportedFormat { .. }));
}

#[test]
fn truncated_off_is_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_file(dir.path(), "trunc.off", "OFF\n8 6 12\n0 0 0\n1 0\n");
    let err = load_mesh(&path).unwrap_err();
    assert!(matches!(err, Error::Parse { .. }), "got {err:?}");
}

#[test]
fn inside_out_cube_is_flipped_outward() {
    // Same cube with every face reversed: signed volume would be -1.
    let mut flipped = String::from("OFF\n8 6 12\n");
    for line in CUBE_OFF.lines().skip(3) {
        if let Some(rest) = line.strip_prefix("4 ") {
            let idx: Vec<&str> = rest.split_whitespace().collect();
            flipped.push_str(&format!("4 {} {} {} {}\n", idx[3], idx[2], idx[1], idx[0]));
        } else if !line.starts_with('#') {
            flipped.push_str(line);
            flipped.push('\n');
        }
    }
    let dir = tempfile::tempdir().unwrap();
    let path = write_file(dir.path(), "inout.off", &flipped);
    let mesh = load_mesh(&path).unwrap();
    assert!(mesh.signed_volume() > 0.0, "orientation repair must flip inside-out input");
    assert_eq!(mesh.cleanup_report().flipped_triangles, 12);
}

#[test]
fn watertightness_flag_matches_edge_counts() {
    // Removing one triangle from the cube opens exactly three edges.
    let dir = tempfile::tempdir().unwrap();
    let path = write_file(dir.path(), "cube.off", CUBE_OFF);
    let full = load_mesh(&path).unwrap();
    let tris: Vec<[u32; 3]> = full.triangles()[1..].to_vec();
    let holed = skelgrasp_core::Mesh::new(full.vertices().to_vec(), tris).unwrap();
    assert!(!holed.is_watertight());
    assert_eq!(holed.cleanup_report().open_edges.len(), 3);
    let err = holed.require_watertight().unwrap_err();
    match err {
        Error::NotWatertight { open_edges, sample, .. } => {
            assert_eq!(open_edges, 3);
            assert_eq!(sample.len(), 3, "diagnostic names the open edges");
        }
        other => panic!("unexpected error {other:?}"),
    }
}

#[test]
fn closest_point_matches_analytic_cube() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_file(dir.path(), "cube.off", CUBE_OFF);
    let mesh = load_mesh(&path).unwrap();
    // Outside, above the top face.
    let (q, _, d) = mesh.closest_point(&Point3::new(0.5, 0.5, 3.0));
    assert!((q - Point3::new(0.5, 0.5, 1.0)).norm() < 1e-12);
    assert!((d - 2.0).abs() < 1e-12);
    // Nearest to an edge.
    let (q, _, d) = mesh.closest_point(&Point3::new(2.0, -1.0, 0.5));
    assert!((q - Point3::new(1.0, 0.0, 0.5)).norm() < 1e-12);
    assert!((d - 2f64.sqrt()).abs() < 1e-12);
}
