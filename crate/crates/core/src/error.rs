use thiserror::Error;

/// Errors raised by geometry queries, tracing, region construction and the CLI.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("curve is not strictly convex: curvature {curvature:e} at s = {s}")]
    NonConvex { s: f64, curvature: f64 },

    #[error("point ({x}, {y}) is inside or on the curve")]
    InsidePoint { x: f64, y: f64 },

    #[error("wave speeds must be positive (got {c_in}, {c_out})")]
    NonPositiveSpeed { c_in: f64, c_out: f64 },

    #[error("critical angle requires c_slow <= c_fast (got {c_slow} > {c_fast})")]
    SpeedOrder { c_slow: f64, c_fast: f64 },

    #[error("interior ray grazes the outer boundary at ({x}, {y})")]
    GrazingOuter { x: f64, y: f64 },

    #[error("ray from ({x}, {y}) travels less than the geometric tolerance")]
    StuckRay { x: f64, y: f64 },

    #[error("event budget of {0} exceeded")]
    EventBudget(usize),

    #[error("no root of the localisation function within a half-perimeter sweep from s = {s}")]
    NoTangencyRoot { s: f64 },

    #[error("inner observation arc is empty (s1 = {s1}, s2 = {s2})")]
    EmptyGamma2 { s1: f64, s2: f64 },

    #[error("construction did not reach a fixpoint within {0} iterations")]
    IterationBudget(usize),

    #[error("witness point does not reproduce the inner arc (Hausdorff distance {hausdorff:e})")]
    WitnessMismatch { hausdorff: f64 },

    #[error("point ({x}, {y}) is not in the third quadrant of the ellipse")]
    BadQuadrant { x: f64, y: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid scenario: {0}")]
    Validation(String),

    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
