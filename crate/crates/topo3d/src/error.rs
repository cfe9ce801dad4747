use thiserror::Error;

/// Errors produced by mesh construction, analysis, geometry processing and
/// the optimization loop.
#[derive(Debug, Error)]
pub enum TopoError {
    #[error("mesh dimensions must be positive, got {nelx}x{nely}x{nelz}")]
    InvalidDimensions { nelx: i64, nely: i64, nelz: i64 },

    #[error("Poisson ratio must lie in [0, 0.5), got {0}")]
    InvalidPoissonRatio(f64),

    #[error("density field has {got} entries, mesh has {expected} elements")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("linear system did not converge after {iterations} iterations (residual {residual:.3e}); the system may be singular or indefinite")]
    SingularSystem { iterations: usize, residual: f64 },

    #[error("fixed DOFs leave rigid-body modes unconstrained; fix at least three non-collinear nodes (solver reported: {0})")]
    InsufficientConstraints(String),

    #[error("bisection cannot reach volume fraction {target}: achievable range is [{lo:.6}, {hi:.6}]")]
    BisectionFailure { target: f64, lo: f64, hi: f64 },

    #[error("malformed STL: {0}")]
    MalformedStl(String),

    #[error("STL contains no triangles")]
    EmptyMesh,

    #[error("triangle mesh bounding box has zero extent along axis {axis}")]
    DegenerateBounds { axis: usize },

    #[error("no designable elements remain after applying domain and obstacle masks")]
    AllPassive,

    #[error("no element density exceeds the export threshold {0}")]
    EmptyDesign(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, TopoError>;
