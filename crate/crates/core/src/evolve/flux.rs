use crate::geometry::{covariant_divergence, gradient, gradient_complex};

use super::model::EffectiveModel;
use super::state::{FieldState, FieldValues};
use super::step::advance;
use super::EvolveError;

/// Contravariant nodal flows `Jⁱ` and `J_Gⁱ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxPair {
    pub j: Vec<[f64; 2]>,
    pub j_geometric: Vec<[f64; 2]>,
}

impl FluxPair {
    pub fn total(&self) -> Vec<[f64; 2]> {
        self.j
            .iter()
            .zip(&self.j_geometric)
            .map(|(a, b)| [a[0] + b[0], a[1] + b[1]])
            .collect()
    }

    pub fn max_geometric(&self) -> f64 {
        self.j_geometric
            .iter()
            .flat_map(|v| v.iter())
            .fold(0.0, |m: f64, x| m.max(x.abs()))
    }
}

/// Flows from centred nodal gradients.
///
/// Classical: `Jⁱ = −D gⁱʲ∂ⱼφ`,
/// `J_Gⁱ = −D̃[(3κⁱᵐκ_mʲ − 2κκⁱʲ)∂ⱼφ − ½gⁱʲ(∂ⱼR)φ]`.
///
/// Quantum: `Jⁱ = (ħ/m) gⁱʲ Im(φ*∂ⱼφ)`, `J_Gⁱ = (ħ/m) ε̃² 3κⁱᵏκ_kʲ Im(φ*∂ⱼφ)`.
pub fn fluxes(model: &EffectiveModel, state: &FieldState) -> Result<FluxPair, EvolveError> {
    let geo = model.geometry();
    geo.grid().check_len(state.len())?;
    let tensor = model.geometric_tensor();
    let c = model.correction();
    let mut j = Vec::with_capacity(geo.len());
    let mut jg = Vec::with_capacity(geo.len());
    match &state.values {
        FieldValues::Density(phi) => {
            if model.kind() != super::ModelKind::Classical {
                return Err(EvolveError::KindMismatch("quantum model, density state"));
            }
            let d = model.diffusion();
            let grad = gradient(geo, phi)?;
            for (k, node) in geo.nodes().iter().enumerate() {
                let flat = node.inv_metric.apply(grad[k]);
                j.push([-d * flat[0], -d * flat[1]]);
                let t = tensor[k].apply(grad[k]);
                let r = node.inv_metric.apply(model.grad_gauss()[k]);
                jg.push([0, 1].map(|i| -c * (t[i] - 0.5 * r[i] * phi[k])));
            }
        }
        FieldValues::Amplitude(phi) => {
            if model.kind() != super::ModelKind::Quantum {
                return Err(EvolveError::KindMismatch("classical model, amplitude state"));
            }
            let hm = model.hbar_over_mass();
            let grad = gradient_complex(geo.grid(), phi)?;
            for (k, node) in geo.nodes().iter().enumerate() {
                let cur = [0, 1].map(|i| (phi[k].conj() * grad[k][i]).im);
                let flat = node.inv_metric.apply(cur);
                j.push([hm * flat[0], hm * flat[1]]);
                let t = tensor[k].apply(cur);
                jg.push([hm * c * t[0], hm * c * t[1]]);
            }
        }
    }
    Ok(FluxPair { j, j_geometric: jg })
}

/// Source of `∂ₜρ` in the continuity residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeDerivative {
    /// From the generator at the current state.
    Instantaneous,
    /// `(ρ(t+dt) − ρ(t−dt)) / 2dt` with the model's own time stepper.
    Central { dt: f64 },
}

/// Which flows enter the divergence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flows {
    Full,
    WithoutGeometric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityResidual {
    /// `∂ₜρ + ∇ᵢ(Jⁱ + J_Gⁱ)` per node.
    pub field: Vec<f64>,
    pub max: f64,
    /// `(Σ √g r² h₁h₂)^{1/2}`.
    pub l2: f64,
}

pub fn continuity_residual(
    model: &EffectiveModel,
    state: &FieldState,
    derivative: TimeDerivative,
    flows: Flows,
) -> Result<ContinuityResidual, EvolveError> {
    let geo = model.geometry();
    let drho = match derivative {
        TimeDerivative::Instantaneous => match &state.values {
            FieldValues::Density(phi) => {
                geo.grid().check_len(phi.len())?;
                model.generator().apply(phi)
            }
            FieldValues::Amplitude(phi) => {
                geo.grid().check_len(phi.len())?;
                let hphi = model.generator().apply(phi);
                let s = 2.0 / model.hbar();
                phi.iter().zip(&hphi).map(|(p, h)| s * (p.conj() * h).im).collect()
            }
        },
        TimeDerivative::Central { dt } => {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(EvolveError::InvalidParameter(format!("time step must be positive, got {dt}")));
            }
            let fwd = advance(model, state, dt)?.0.rho();
            let bwd = advance(model, state, -dt)?.0.rho();
            fwd.iter().zip(&bwd).map(|(a, b)| (a - b) / (2.0 * dt)).collect()
        }
    };
    let pair = fluxes(model, state)?;
    let flow = match flows {
        Flows::Full => pair.total(),
        Flows::WithoutGeometric => pair.j,
    };
    let div = covariant_divergence(geo, &flow)?;
    let field: Vec<f64> = drho.iter().zip(&div).map(|(a, b)| a + b).collect();
    let max = field.iter().fold(0.0, |m: f64, r| m.max(r.abs()));
    let sq: Vec<f64> = field.iter().map(|r| r * r).collect();
    let l2 = geo.integrate(&sq).sqrt();
    Ok(ContinuityResidual { field, max, l2 })
}
