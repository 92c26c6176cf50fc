use std::path::PathBuf;

/// Errors produced by the toolkit. Variants are grouped by what the caller
/// can do about them: `Io`/`Parse`/`UnsupportedFormat` and the mesh/config
/// validation variants indicate bad input, the remaining variants indicate a
/// pipeline stage that could not complete.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("failed to parse {path}: {detail}")]
    Parse { path: PathBuf, detail: String },

    #[error("unsupported mesh format {extension:?} (supported: off, obj, stl)")]
    UnsupportedFormat { extension: String },

    #[error("mesh has no triangles after cleanup")]
    EmptyMesh,

    #[error(
        "mesh is not watertight: {open_edges} open edge(s), {nonmanifold_edges} non-manifold edge(s){}",
        format_edge_sample(.sample)
    )]
    NotWatertight {
        open_edges: usize,
        nonmanifold_edges: usize,
        /// Up to eight offending edges (vertex index pairs) for diagnostics.
        sample: Vec<(u32, u32)>,
    },

    #[error("mesh has {components} connected components, expected 1")]
    DisconnectedMesh { components: usize },

    #[error(
        "contraction did not converge after {iterations} iteration(s): area ratio {area_ratio:.3e} above threshold {threshold:.3e}"
    )]
    ContractionNotConverged {
        iterations: usize,
        area_ratio: f64,
        threshold: f64,
    },

    #[error("malformed skeleton: {0}")]
    MalformedSkeleton(String),

    #[error("degenerate local shape: {points} projected surface point(s), need at least 3")]
    DegenerateShape { points: usize },

    #[error("invalid hand config: {0}")]
    HandConfig(String),

    #[error("invalid grasp-quality input: {0}")]
    QualityInput(String),

    #[error("hand collides with the object in its initial pose")]
    InitialCollision,

    #[error("grasp record has no stored contacts")]
    NoStoredContacts,

    #[error("grasp file has schema version {found}, this build reads version {supported}")]
    SchemaVersion { found: u32, supported: u32 },

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

fn format_edge_sample(sample: &[(u32, u32)]) -> String {
    if sample.is_empty() {
        return String::new();
    }
    let list: Vec<String> = sample.iter().map(|(a, b)| format!("{a}-{b}")).collect();
    format!(" (e.g. {})", list.join(", "))
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by the input files or configuration rather
    /// than by a defect in the library. The CLI maps these to exit code 2.
    #[must_use]
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Internal(_))
    }
}
