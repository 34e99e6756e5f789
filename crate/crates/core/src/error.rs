use thiserror::Error;

/// Every failure the pipeline can report.
///
/// Variants split into two families: input validation problems (bad files,
/// bad arguments, malformed images) and numerical failures (degenerate
/// geometry, singular systems). [`Error::is_numerical`] tells them apart.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("least-squares system is rank deficient (condition {condition:.3e})")]
    RankDeficient { condition: f64 },
    #[error("normal equations are singular even with damping")]
    SingularNormalEquations,
    #[error("ray is parallel to the plane")]
    Parallel,
    #[error("intersection lies behind the ray origin (t = {0})")]
    BehindOrigin(f64),
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
    #[error("need at least 3 views, got {0}")]
    InsufficientViews(usize),
    #[error("board orientations are degenerate (all parallel)")]
    DegenerateMotion,
    #[error("matrix is singular")]
    Singular,
    #[error("undistortion diverged")]
    Diverged,
    #[error("point is behind the camera (z = {0})")]
    BehindCamera(f64),
    #[error("point out of frame (view {view}, index {index})")]
    OutOfFrame { view: usize, index: usize },
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("bad magic number: expected {0}")]
    BadMagic(&'static str),
    #[error("bad image dimensions")]
    BadDimensions,
    #[error("file is truncated")]
    Truncated,
    #[error("unsupported maxval {0}, only 255 is supported")]
    UnsupportedMaxval(u32),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("missing field `{0}`")]
    MissingField(String),
    #[error("frame angles must be strictly increasing")]
    BadAngles,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for failures caused by the numbers rather than by malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFinite(_)
                | Error::RankDeficient { .. }
                | Error::SingularNormalEquations
                | Error::Parallel
                | Error::BehindOrigin(_)
                | Error::Degenerate(_)
                | Error::DegenerateMotion
                | Error::Singular
                | Error::Diverged
                | Error::BehindCamera(_)
                | Error::OutOfFrame { .. }
                | Error::EmptyCloud
        )
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
