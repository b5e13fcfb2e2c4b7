use thiserror::Error;

/// Errors raised across scene construction, beam design and experiment runs.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// Designs whose curvature would make the trajectory formula divide by zero.
    #[error("singular curvature: |B| = {b:e} m^-1")]
    Singular { b: f64 },

    #[error("near-singular curvature: |B| = {b:e} m^-1 below threshold")]
    NearSingular { b: f64 },

    #[error("degenerate geometry: waypoint depth {z_b} equals receiver depth {z_r}")]
    DegenerateGeometry { z_b: f64, z_r: f64 },

    /// The steering angle would need `asin` of a value outside [-1, 1].
    #[error("infeasible design: steering sine {arg} outside [-1, 1]")]
    InfeasibleDesign { arg: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("solver error: {0}")]
    Solver(String),

    #[error("codebook generation failed: {0}")]
    Generation(String),

    #[error("empty codebook")]
    EmptyCodebook,

    #[error("invalid config: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable tag, used by the CLI on stderr.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidScene(_) => "invalid_scene",
            Error::Domain(_) => "domain",
            Error::Singular { .. } => "singular",
            Error::NearSingular { .. } => "near_singular",
            Error::DegenerateGeometry { .. } => "degenerate_geometry",
            Error::InfeasibleDesign { .. } => "infeasible_design",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::Solver(_) => "solver",
            Error::Generation(_) => "generation",
            Error::EmptyCodebook => "empty_codebook",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
