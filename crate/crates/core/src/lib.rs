//! Part-based grasp planning on curve skeletons.
//!
//! The pipeline turns a watertight triangle mesh into grasp candidates for a
//! configurable robot hand:
//!
//! 1. [`mesh`] loads and validates triangle meshes and answers collision,
//!    contact and closest-point queries through a bounding volume hierarchy.
//! 2. [`skeleton`] contracts the mesh onto a 1-D curve skeleton, classifies
//!    its vertices (endpoint / connecting / branching) and splits it into
//!    segments, keeping a surjective surface-point association throughout.
//! 3. [`shape`] measures local geometry along the skeleton: curvature,
//!    grasping intervals and the PCA shape of the surface cross-section.
//! 4. [`hand`] models the robot hand (links, revolute joints, preshapes,
//!    grasp centre point) and closes its fingers around objects.
//! 5. [`quality`] scores contact sets in 6-D wrench space: force closure and
//!    the largest-inscribed-ball epsilon quality.
//! 6. [`planner`] walks the skeleton, matches part shapes against grasp
//!    strategies, generates hand pose hypotheses and validates them end to
//!    end; a random-surface-point baseline planner shares the validation
//!    path.
//! 7. [`eval`] perturbs grasps to measure robustness and runs planner
//!    benchmarks with CSV/histogram reports.
//!
//! All lengths are millimetres, all angles radians. Every randomised step
//! takes an explicit seed and the whole pipeline is deterministic for a
//! fixed seed, independent of thread count.

pub mod error;
pub mod geometry;
pub mod mesh;
pub mod quality;
pub mod shapes;
pub mod skeleton;

pub use error::{Error, Result};
pub use geometry::RigidPose;
pub use mesh::{collide, extract_contacts, load_mesh, Contact, Mesh};
pub use quality::{build_wrenches, evaluate, evaluate_wrenches, QualityResult, WrenchSet};
pub use skeleton::{skeletonize, ContractionParams, Segment, Skeleton, SkeletonVertex, VertexKind};

use std::path::Path;

/// Writes `bytes` to `path` atomically: the data goes to a temporary file in
/// the same directory which is then renamed over the target, so a failed or
/// interrupted write never leaves a partial output file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io_err = |source: std::io::Error| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::Internal(format!("output path {} has no file name", path.display())))?;
    let tmp = match dir {
        Some(d) => d.join(format!(".{}.tmp-{}", file_name.to_string_lossy(), std::process::id())),
        None => std::path::PathBuf::from(format!(
            ".{}.tmp-{}",
            file_name.to_string_lossy(),
            std::process::id()
        )),
    };
    std::fs::write(&tmp, bytes).map_err(io_err)?;
    std::fs::rename(&tmp, path).map_err(|source| {
        let _ = std::fs::remove_file(&tmp);
        io_err(source)
    })
}
