//! Surface charts, induced metric and extrinsic curvature on a structured
//! grid, and conservative differential operators built from them.

mod chart;
mod fields;
mod grid;
mod ops;
mod tensor;

pub use chart::{build_chart, ChartKind, ChartSpec, Embedding, FourierMode, SurfaceChart, DEFAULT_POLAR_CAP};
pub use fields::{compute_geometry, GeometryFields, NodeGeometry};
pub use grid::{Ghost, Grid2D, MIN_NODES};
pub use ops::{
    centered_drift_operator, covariant_divergence, covariant_divergence_faces, divergence_form_operator,
    face_gradient, gradient, gradient_complex, laplace_beltrami, FaceField, StencilOperator, OFFSETS,
};
pub(crate) use ops::{gradient_with, laplace_beltrami_coefficient};
pub use tensor::{cross3, dot3, mat_det, mat_mul, mat_trace, norm3, Mat2, Sym2};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("unknown chart kind `{0}` (expected plane, cylinder, sphere, torus or graph)")]
    UnknownChartKind(String),
    #[error("missing chart parameter `{0}`")]
    MissingParameter(&'static str),
    #[error("{name} must be strictly positive, got {value}")]
    NonPositiveRadius { name: &'static str, value: f64 },
    #[error("torus needs major radius > minor radius (got {major} <= {minor})")]
    TorusRadii { major: f64, minor: f64 },
    #[error("axis {axis} is periodic but its length {found} differs from the period {expected}")]
    PeriodMismatch { axis: usize, expected: f64, found: f64 },
    #[error("axis {axis} of this chart cannot be periodic")]
    NotPeriodic { axis: usize },
    #[error("invalid domain on axis {axis}: {reason}")]
    InvalidDomain { axis: usize, reason: String },
    #[error("invalid chart parameter: {0}")]
    InvalidParameter(String),
    #[error("grid axis {axis} has {nodes} nodes, need at least 8")]
    GridTooSmall { axis: usize, nodes: usize },
    #[error("grid does not match the chart domain or periodicity")]
    ChartGridMismatch,
    #[error("field has {found} entries, grid has {expected} nodes")]
    GridMismatch { expected: usize, found: usize },
    #[error("degenerate metric at q = {q:?} (det g = {det})")]
    DegenerateMetric { q: [f64; 2], det: f64 },
}
