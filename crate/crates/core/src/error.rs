use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("sampled curvature bound {sampled:.6} exceeds nu = {nu}")]
    CurvatureExceeded { sampled: f64, nu: f64 },

    #[error("boundary set leaves the unit square (bounding box {min:?}..{max:?})")]
    OutOfUnitSquare { min: [f64; 2], max: [f64; 2] },

    #[error("invalid radius profile: {0}")]
    InvalidProfile(String),

    #[error("tangent vector vanishes at theta = {theta}")]
    DegenerateTangent { theta: f64 },

    #[error("psi1 has {found} vanishing moments, at least {required} required")]
    InsufficientMoments { found: usize, required: usize },

    #[error("generator violates decay condition {condition} in region {region}")]
    ConditionViolated { condition: String, region: String },

    #[error("grid of size {n} is coarser than the atom resolution {required}")]
    ResolutionTooCoarse { n: usize, required: usize },

    #[error("frame operator is numerically singular: lower bound {lower:e}, upper bound {upper:e}")]
    NotAFrame { lower: f64, upper: f64 },

    #[error("iterative solve did not reach tolerance after {iterations} iterations (residual {residual:e}){}", context.as_ref().map(|c| format!(" [{c}]")).unwrap_or_default())]
    MaxIterExceeded {
        iterations: usize,
        residual: f64,
        context: Option<String>,
    },

    #[error("degenerate rate fit: {0}")]
    DegenerateFit(String),

    #[error("no shearlets intersect the probe: {0}")]
    NoIntersectingShearlets(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
