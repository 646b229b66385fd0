use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid geometry: {0}")]
    InvalidGeometry(String),
    #[error("grid geometries do not match")]
    GeometryMismatch,
    #[error("level {0} outside the admissible range")]
    InvalidLevel(f64),
    #[error("shape {0:?} is not a power of two along every axis")]
    NotPowerOfTwo(Vec<usize>),
    #[error("radius schedule is empty or malformed: {0}")]
    InvalidSchedule(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{count} set cells lie inside the {margin}-cell free-space margin")]
    MarginViolation { margin: usize, count: usize },
    #[error("perimeter of the input set is zero")]
    ZeroPerimeter,
    #[error("no starting ball of density at least 1/2 around the point")]
    NoStartingBall,
    #[error("premise not satisfied: {0}")]
    Premise(String),
    #[error("malformed grid file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
