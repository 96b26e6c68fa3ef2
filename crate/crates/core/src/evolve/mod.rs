//! Effective surface dynamics: the classical diffusion generator with its
//! geometric correction and the effective Schrödinger Hamiltonian, time
//! stepping, the flows `J` and `J_G`, and continuity diagnostics.
//!
//! Sign convention throughout: `∂ₜρ + ∇ᵢ(Jⁱ + J_Gⁱ) = 0`.

mod flux;
mod model;
mod solver;
mod state;
mod step;
#[cfg(test)]
mod tests;

pub use flux::{continuity_residual, fluxes, ContinuityResidual, Flows, FluxPair, TimeDerivative};
pub use model::{build_model, ClassicalScheme, EffectiveModel, ModelKind, Physics, SolverOptions};
pub use solver::{bicgstab, conjugate_gradient, SolveStats};
pub use state::{normalize, total_charge, FieldState, FieldValues};
pub use step::{step, step_with_stats};

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::thin_layer::ThinLayerError;
use crate::transverse::TransverseError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvolveError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("time step {dt} exceeds the explicit stability limit {limit}")]
    CflViolation { dt: f64, limit: f64 },
    #[error("linear solver did not converge: relative residual {residual:e} after {iterations} iterations")]
    SolverDivergence { iterations: usize, residual: f64 },
    #[error("state kind does not match the model ({0})")]
    KindMismatch(&'static str),
    #[error("state values must be finite and, for densities, nonnegative")]
    InvalidState,
    #[error("state has zero norm")]
    ZeroNorm,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    ThinLayer(#[from] ThinLayerError),
    #[error(transparent)]
    Transverse(#[from] TransverseError),
}
