//! The thin-shell expansion: offset metric, curvature potentials and the
//! conjugated Laplacian to second order in the normal offset `q⁰`.

mod expansion;
mod metric;
mod potentials;

pub use expansion::{verify_laplacian_expansion, ExpansionResidual, LocalSurface};
pub use metric::{check_shell, metric_at_offset, OffsetMetric};
pub use potentials::{curvature_potentials, CurvaturePotentials};

use thiserror::Error;

use crate::geometry::GeometryError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThinLayerError {
    #[error("thickness must be positive and finite, got {0}")]
    InvalidThickness(f64),
    #[error("offset q0 = {q0} lies outside the shell |q0| <= eps/2 = {half}")]
    OutsideShell { q0: f64, half: f64 },
    #[error("shell self-intersects: thickness {eps} times max principal curvature {kappa_max} is {product} >= 1")]
    SelfIntersection { eps: f64, kappa_max: f64, product: f64 },
    #[error("expansion residual is not finite near q = {q:?}")]
    NonFinite { q: [f64; 2] },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
