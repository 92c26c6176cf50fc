//! Mesh file I/O.
//!
//! Readers: OFF, OBJ (vertex/face subset) and STL (binary and ASCII, with
//! duplicate vertices welded by the cleanup pipeline). Polygonal faces are
//! fan-triangulated. Writers: ASCII PLY, either coloured vertices with the
//! original faces or a bare edge set for line overlays.
//!
//! All coordinates are interpreted as millimetres; [`load_mesh_scaled`]
//! applies a unit conversion factor while reading.

use std::io::Write as _;
use std::path::Path;

use nalgebra::Point3;

use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Unwelded parser output: vertex positions and triangle index triples.
type RawMesh = (Vec<Point3<f64>>, Vec<[u32; 3]>);

/// Loads a mesh from `path`, dispatching on the file extension
/// (`.off`, `.obj`, `.stl`, case-insensitive).
pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    load_mesh_scaled(path, 1.0)
}

/// [`load_mesh`] with every coordinate multiplied by `scale` (use e.g.
/// `1000.0` for meshes authored in metres).
pub fn load_mesh_scaled(path: impl AsRef<Path>, scale: f64) -> Result<Mesh> {
    let path = path.as_ref();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase();
    let (mut vertices, triangles) = match ext.as_str() {
        "off" => parse_off(path)?,
        "obj" => parse_obj(path)?,
        "stl" => parse_stl(path)?,
        other => {
            return Err(Error::UnsupportedFormat {
                extension: other.to_string(),
            })
        }
    };
    if scale != 1.0 {
        for v in &mut vertices {
            v.coords *= scale;
        }
    }
    Mesh::new(vertices, triangles)
}

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_err(path: &Path, detail: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        detail: detail.into(),
    }
}

fn fan_triangulate(face: &[u32], out: &mut Vec<[u32; 3]>) {
    for i in 1..face.len() - 1 {
        out.push([face[0], face[i], face[i + 1]]);
    }
}

fn parse_off(path: &Path) -> Result<RawMesh> {
    let text = read_to_string(path)?;
    let mut tokens = text
        .lines()
        .map(|l| match l.find('#') {
            Some(i) => &l[..i],
            None => l,
        })
        .flat_map(|l| l.split_whitespace());
    let magic = tokens.next().ok_or_else(|| parse_err(path, "empty file"))?;
    if magic != "OFF" {
        return Err(parse_err(path, format!("expected OFF header, found {magic:?}")));
    }
    let mut next_usize = |what: &str| -> Result<usize> {
        tokens
            .next()
            .ok_or_else(|| parse_err(path, format!("missing {what}")))?
            .parse::<usize>()
            .map_err(|_| parse_err(path, format!("invalid {what}")))
    };
    let nv = next_usize("vertex count")?;
    let nf = next_usize("face count")?;
    let _ne = next_usize("edge count")?;

    let mut rest = tokens;
    let mut next_f64 = |what: &str| -> Result<f64> {
        rest.next()
            .ok_or_else(|| parse_err(path, format!("missing {what}")))?
            .parse::<f64>()
            .map_err(|_| parse_err(path, format!("invalid {what}")))
    };
    let mut vertices = Vec::with_capacity(nv);
    for i in 0..nv {
        let x = next_f64(&format!("vertex {i} x"))?;
        let y = next_f64(&format!("vertex {i} y"))?;
        let z = next_f64(&format!("vertex {i} z"))?;
        vertices.push(Point3::new(x, y, z));
    }
    let mut triangles = Vec::with_capacity(nf);
    for i in 0..nf {
        let k = next_f64(&format!("face {i} arity"))? as usize;
        if k < 3 {
            return Err(parse_err(path, format!("face {i} has {k} vertices")));
        }
        let mut face = Vec::with_capacity(k);
        for j in 0..k {
            let idx = next_f64(&format!("face {i} index {j}"))? as i64;
            if idx < 0 || idx as usize >= nv {
                return Err(parse_err(path, format!("face {i} index {idx} out of range")));
            }
            face.push(idx as u32);
        }
        fan_triangulate(&face, &mut triangles);
    }
    Ok((vertices, triangles))
}

fn parse_obj(path: &Path) -> Result<RawMesh> {
    let text = read_to_string(path)?;
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => {
                let mut coord = |what: &str| -> Result<f64> {
                    parts
                        .next()
                        .ok_or_else(|| parse_err(path, format!("line {}: missing {what}", ln + 1)))?
                        .parse::<f64>()
                        .map_err(|_| parse_err(path, format!("line {}: invalid {what}", ln + 1)))
                };
                let x = coord("x")?;
                let y = coord("y")?;
                let z = coord("z")?;
                vertices.push(Point3::new(x, y, z));
            }
            Some("f") => {
                let mut face = Vec::new();
                for spec in parts {
                    // "i", "i/t", "i//n" or "i/t/n"; indices are 1-based,
                    // negative counts from the end.
                    let first = spec.split('/').next().unwrap_or("");
                    let idx: i64 = first.parse().map_err(|_| {
                        parse_err(path, format!("line {}: invalid face index {spec:?}", ln + 1))
                    })?;
                    let resolved = if idx > 0 {
                        idx - 1
                    } else if idx < 0 {
                        vertices.len() as i64 + idx
                    } else {
                        return Err(parse_err(path, format!("line {}: face index 0", ln + 1)));
                    };
                    if resolved < 0 || resolved as usize >= vertices.len() {
                        return Err(parse_err(
                            path,
                            format!("line {}: face index {idx} out of range", ln + 1),
                        ));
                    }
                    face.push(resolved as u32);
                }
                if face.len() < 3 {
                    return Err(parse_err(
                        path,
                        format!("line {}: face has {} vertices", ln + 1, face.len()),
                    ));
                }
                fan_triangulate(&face, &mut triangles);
            }
            _ => {}
        }
    }
    Ok((vertices, triangles))
}

fn parse_stl(path: &Path) -> Result<RawMesh> {
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    // Binary layout: 80-byte header, u32 triangle count, 50 bytes each.
    let is_binary = if bytes.len() >= 84 {
        let count = u32::from_le_bytes([bytes[80], bytes[81], bytes[82], bytes[83]]) as usize;
        bytes.len() == 84 + count * 50
    } else {
        false
    };
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let mut push_tri = |corners: [[f64; 3]; 3]| {
        let base = vertices.len() as u32;
        for c in corners {
            vertices.push(Point3::new(c[0], c[1], c[2]));
        }
        triangles.push([base, base + 1, base + 2]);
    };
    if is_binary {
        let count = u32::from_le_bytes([bytes[80], bytes[81], bytes[82], bytes[83]]) as usize;
        for t in 0..count {
            let rec = &bytes[84 + t * 50..84 + (t + 1) * 50];
            let f = |off: usize| -> f64 {
                f32::from_le_bytes([rec[off], rec[off + 1], rec[off + 2], rec[off + 3]]) as f64
            };
            // Skip the 12-byte stored normal; recomputed from the winding.
            push_tri([
                [f(12), f(16), f(20)],
                [f(24), f(28), f(32)],
                [f(36), f(40), f(44)],
            ]);
        }
    } else {
        let text = String::from_utf8_lossy(&bytes);
        if !text.trim_start().starts_with("solid") {
            return Err(parse_err(path, "neither valid binary nor ASCII STL"));
        }
        let mut corners: Vec<[f64; 3]> = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let mut parts = line.split_whitespace();
            if parts.next() == Some("vertex") {
                let mut coord = || -> Result<f64> {
                    parts
                        .next()
                        .ok_or_else(|| parse_err(path, format!("line {}: short vertex", ln + 1)))?
                        .parse::<f64>()
                        .map_err(|_| parse_err(path, format!("line {}: invalid vertex", ln + 1)))
                };
                corners.push([coord()?, coord()?, coord()?]);
                if corners.len() == 3 {
                    push_tri([corners[0], corners[1], corners[2]]);
                    corners.clear();
                }
            }
        }
        if !corners.is_empty() {
            return Err(parse_err(path, "dangling vertices at end of ASCII STL"));
        }
    }
    Ok((vertices, triangles))
}

/// Writes the mesh as ASCII PLY with one RGB colour per vertex.
/// `colors.len()` must equal the vertex count.
pub fn write_ply_colored(path: impl AsRef<Path>, mesh: &Mesh, colors: &[[u8; 3]]) -> Result<()> {
    let path = path.as_ref();
    if colors.len() != mesh.vertices().len() {
        return Err(Error::Internal(format!(
            "colour count {} does not match vertex count {}",
            colors.len(),
            mesh.vertices().len()
        )));
    }
    let mut buf = Vec::new();
    let header = format!(
        "ply\nformat ascii 1.0\nelement vertex {}\nproperty float x\nproperty float y\nproperty float z\nproperty uchar red\nproperty uchar green\nproperty uchar blue\nelement face {}\nproperty list uchar int vertex_indices\nend_header\n",
        mesh.vertices().len(),
        mesh.triangles().len()
    );
    buf.extend_from_slice(header.as_bytes());
    for (v, c) in mesh.vertices().iter().zip(colors) {
        writeln!(buf, "{} {} {} {} {} {}", v.x, v.y, v.z, c[0], c[1], c[2]).unwrap();
    }
    for t in mesh.triangles() {
        writeln!(buf, "3 {} {} {}", t[0], t[1], t[2]).unwrap();
    }
    crate::write_atomic(path, &buf)
}

/// Writes a bare edge set (line overlay) as ASCII PLY with one colour for
/// all vertices.
pub fn write_ply_edges(
    path: impl AsRef<Path>,
    points: &[Point3<f64>],
    edges: &[(u32, u32)],
    color: [u8; 3],
) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    let header = format!(
        "ply\nformat ascii 1.0\nelement vertex {}\nproperty float x\nproperty float y\nproperty float z\nproperty uchar red\nproperty uchar green\nproperty uchar blue\nelement edge {}\nproperty int vertex1\nproperty int vertex2\nend_header\n",
        points.len(),
        edges.len()
    );
    buf.extend_from_slice(header.as_bytes());
    for p in points {
        writeln!(buf, "{} {} {} {} {} {}", p.x, p.y, p.z, color[0], color[1], color[2]).unwrap();
    }
    for (a, b) in edges {
        writeln!(buf, "{a} {b}").unwrap();
    }
    crate::write_atomic(path, &buf)
}
