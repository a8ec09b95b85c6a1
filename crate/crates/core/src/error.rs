use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point is off the unit sphere (|p| - 1 = {deviation:e})")]
    OffSphere { deviation: f64 },

    #[error("vector is not tangent to the sphere (<v, p> = {inner:e})")]
    NotTangent { inner: f64 },

    #[error("unknown surface `{0}`")]
    UnknownSurface(String),

    #[error("parameter point ({u}, {v}) is outside the chart of {surface}")]
    OutOfDomain { surface: String, u: f64, v: f64 },

    #[error("degenerate induced metric (Gram determinant {det:e})")]
    DegenerateMetric { det: f64 },

    #[error("surface {0} is not doubly periodic; grid operators need a periodic torus")]
    NotPeriodic(String),

    #[error("invalid grid size {0}: must be even and at least 8")]
    InvalidGridSize(usize),

    #[error("grid size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("field is not normal to the surface (defect {defect:e} at node {node})")]
    NotNormal { defect: f64, node: usize },

    #[error("field is not in the contact kernel (alpha = {alpha:e} at node {node})")]
    NotInContactKernel { alpha: f64, node: usize },

    #[error("surface is not Legendrian within {tolerance:e} (residual {residual:e})")]
    NotLegendrian { residual: f64, tolerance: f64 },

    #[error("J H is not tangent within {tolerance:e} (normal defect {defect:e})")]
    JHNotTangent { defect: f64, tolerance: f64 },

    #[error("Legendrian residual {residual:e} exceeds the abort threshold {threshold:e}")]
    LegendrianDrift { residual: f64, threshold: f64 },

    #[error("step size underflow: tau = {tau:e} after {halvings} halvings")]
    StepUnderflow { tau: f64, halvings: usize },

    #[error("malformed grid file: {0}")]
    Parse(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
