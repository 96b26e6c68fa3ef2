use std::sync::Arc;

use crate::geometry::{
    centered_drift_operator, divergence_form_operator, gradient_with, GeometryFields, Ghost, StencilOperator, Sym2,
};
use crate::thin_layer::{check_shell, CurvaturePotentials};
use crate::transverse::epsilon_tilde_sq;

use super::EvolveError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Classical,
    Quantum,
}

/// Physical parameters of an effective model.
#[derive(Debug, Clone, PartialEq)]
pub enum Physics {
    Classical {
        diffusion: f64,
        eps: f64,
    },
    Quantum {
        mass: f64,
        hbar: f64,
        eps: f64,
        /// Transverse level `N`.
        level: i64,
        /// External potential per node; `None` means `V = 0`.
        potential: Option<Vec<f64>>,
    },
}

/// Time integrator for the classical equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClassicalScheme {
    /// Explicit classical Runge–Kutta, step limited by the stability bound.
    #[default]
    Rk4,
    /// Backward Euler with a Krylov solve, unconditionally stable.
    ImplicitEuler,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-13, max_iter: 5000 }
    }
}

/// RK4 is stable on the negative real axis down to about −2.785.
pub(crate) const RK4_REAL_STABILITY: f64 = 2.78;

/// Discrete effective generator on a fixed surface grid.
///
/// Classical: `∂ₜφ = Lφ` with
/// `L = D Δ + D̃ (1/√g) ∂ᵢ √g [(3κⁱᵐκ_mʲ − 2κκⁱʲ) ∂ⱼ − ½ gⁱʲ (∂ⱼR)]`.
///
/// Quantum: `iħ ∂ₜφ = Hφ` with
/// `H = −(ħ²/2m)[Δ + V₀ + ε̃²(V₂ + Â₂)] + V`.
#[derive(Debug, Clone)]
pub struct EffectiveModel {
    geo: Arc<GeometryFields>,
    physics: Physics,
    generator: StencilOperator,
    /// `D̃ = ε²D/12` (classical) or `ε̃²` (quantum).
    correction: f64,
    /// Tensor contracted with `∂φ` in `J_G`.
    geometric_tensor: Vec<Sym2>,
    /// `∂ⱼR` per node (classical only).
    grad_gauss: Vec<[f64; 2]>,
    scheme: ClassicalScheme,
    solver: SolverOptions,
}

pub fn build_model(
    geo: Arc<GeometryFields>,
    potentials: &CurvaturePotentials,
    physics: Physics,
) -> Result<EffectiveModel, EvolveError> {
    let n = geo.len();
    for len in [potentials.v0.len(), potentials.v2.len(), potentials.a2.len()] {
        geo.grid().check_len(len)?;
    }
    let positive = |name: &str, v: f64| {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(EvolveError::InvalidParameter(format!("{name} must be positive, got {v}")))
        }
    };
    let inv_metric = geo.inv_metric();
    let (generator, correction, geometric_tensor, grad_gauss) = match &physics {
        Physics::Classical { diffusion, eps } => {
            positive("diffusion", *diffusion)?;
            check_shell(&geo, *eps)?;
            let d_tilde = eps * eps * diffusion / 12.0;
            let tensor: Vec<Sym2> = geo
                .nodes()
                .iter()
                .map(|nd| nd.kappa_squared_upper() * 3.0 - nd.kappa_upper() * (2.0 * nd.mean_curvature))
                .collect();
            let total: Vec<Sym2> = inv_metric
                .iter()
                .zip(&tensor)
                .map(|(g, t)| *g * *diffusion + *t * d_tilde)
                .collect();
            let grad_gauss = gradient_with(geo.grid(), &geo.gauss(), Ghost::Extrapolate)?;
            let drift: Vec<[f64; 2]> = grad_gauss
                .iter()
                .zip(&inv_metric)
                .map(|(dr, g)| {
                    let v = g.apply(*dr);
                    [-0.5 * d_tilde * v[0], -0.5 * d_tilde * v[1]]
                })
                .collect();
            let mut op = divergence_form_operator(&geo, &total)?;
            op.add_scaled(&centered_drift_operator(&geo, &drift)?, 1.0);
            (op, d_tilde, tensor, grad_gauss)
        }
        Physics::Quantum {
            mass,
            hbar,
            eps,
            level,
            potential,
        } => {
            positive("mass", *mass)?;
            positive("hbar", *hbar)?;
            check_shell(&geo, *eps)?;
            let et2 = epsilon_tilde_sq(*eps, *level)?;
            if let Some(v) = potential {
                geo.grid().check_len(v.len())?;
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(EvolveError::InvalidParameter("potential must be finite".into()));
                }
            }
            let total: Vec<Sym2> = inv_metric
                .iter()
                .zip(&potentials.a2)
                .map(|(g, a)| *g + *a * et2)
                .collect();
            let kinetic = -hbar * hbar / (2.0 * mass);
            let mut op = divergence_form_operator(&geo, &total)?;
            op.scale(kinetic);
            let diag: Vec<f64> = (0..n)
                .map(|k| {
                    let ext = potential.as_ref().map_or(0.0, |v| v[k]);
                    kinetic * (potentials.v0[k] + et2 * potentials.v2[k]) + ext
                })
                .collect();
            op.add_diagonal(&diag);
            (op, et2, potentials.a2.clone(), vec![[0.0; 2]; n])
        }
    };
    Ok(EffectiveModel {
        geo,
        physics,
        generator,
        correction,
        geometric_tensor,
        grad_gauss,
        scheme: ClassicalScheme::default(),
        solver: SolverOptions::default(),
    })
}

impl EffectiveModel {
    pub fn kind(&self) -> ModelKind {
        match self.physics {
            Physics::Classical { .. } => ModelKind::Classical,
            Physics::Quantum { .. } => ModelKind::Quantum,
        }
    }

    pub fn geometry(&self) -> &GeometryFields {
        &self.geo
    }

    pub fn physics(&self) -> &Physics {
        &self.physics
    }

    /// `L` (classical) or `H` (quantum) as a stencil.
    pub fn generator(&self) -> &StencilOperator {
        &self.generator
    }

    /// `D̃` for the classical model, `ε̃²` for the quantum one.
    pub fn correction(&self) -> f64 {
        self.correction
    }

    pub(crate) fn geometric_tensor(&self) -> &[Sym2] {
        &self.geometric_tensor
    }

    pub(crate) fn grad_gauss(&self) -> &[[f64; 2]] {
        &self.grad_gauss
    }

    pub fn scheme(&self) -> ClassicalScheme {
        self.scheme
    }

    pub fn solver(&self) -> SolverOptions {
        self.solver
    }

    pub fn with_scheme(mut self, scheme: ClassicalScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_solver(mut self, solver: SolverOptions) -> Self {
        self.solver = solver;
        self
    }

    /// Largest stable explicit step, from a Gershgorin bound on the spectrum.
    pub fn stable_dt(&self) -> f64 {
        RK4_REAL_STABILITY / self.generator.gershgorin_bound()
    }

    /// `ħ/m` for quantum models.
    pub(crate) fn hbar_over_mass(&self) -> f64 {
        match self.physics {
            Physics::Quantum { mass, hbar, .. } => hbar / mass,
            Physics::Classical { .. } => 0.0,
        }
    }

    pub(crate) fn hbar(&self) -> f64 {
        match self.physics {
            Physics::Quantum { hbar, .. } => hbar,
            Physics::Classical { .. } => 1.0,
        }
    }

    pub(crate) fn diffusion(&self) -> f64 {
        match self.physics {
            Physics::Classical { diffusion, .. } => diffusion,
            Physics::Quantum { .. } => 0.0,
        }
    }
}
