use crate::geometry::{
    divergence_form_operator, gradient_with, laplace_beltrami_coefficient, GeometryError, GeometryFields, Ghost,
    StencilOperator, Sym2,
};

/// Per-node curvature potentials and the coefficient tensors of the two
/// curvature operators `Â₁ = ∇ᵢ a₁ⁱʲ ∂ⱼ` and `Â₂ = ∇ᵢ a₂ⁱʲ ∂ⱼ`.
///
/// ```text
/// V₀ = ¼(κ² − 2R)
/// V₁ = κ(R − κ²/2) − ½Δκ
/// V₂ = ¾κ⁴ − 7/4 κ²R + ½R² + ½κΔκ + ¼|∇κ|² + ∇ᵢ(κⁱʲ∂ⱼκ) − ¼ΔR
/// a₁ⁱʲ = −2κⁱʲ,   a₂ⁱʲ = 3κⁱᵏκ_kʲ
/// ```
///
/// The braced term `∇ᵢ(κⁱʲ∂ⱼκ)` of `V₂` is a scalar field, not an operator.
#[derive(Debug, Clone)]
pub struct CurvaturePotentials {
    pub v0: Vec<f64>,
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    pub a1: Vec<Sym2>,
    pub a2: Vec<Sym2>,
}

/// Potentials with derivative terms from the flux-form operators. Curvature
/// fields beyond a Dirichlet edge are extrapolated, not zeroed.
pub fn curvature_potentials(geo: &GeometryFields) -> Result<CurvaturePotentials, GeometryError> {
    let kappa = geo.mean_curvature();
    let r = geo.gauss();
    let lap_kappa = laplace_beltrami_coefficient(geo, &kappa)?;
    let lap_r = laplace_beltrami_coefficient(geo, &r)?;
    let grad_kappa = gradient_with(geo.grid(), &kappa, Ghost::Extrapolate)?;
    let a1: Vec<Sym2> = geo.nodes().iter().map(|n| n.kappa_upper() * -2.0).collect();
    let a2: Vec<Sym2> = geo.nodes().iter().map(|n| n.kappa_squared_upper() * 3.0).collect();
    let kappa_upper: Vec<Sym2> = geo.nodes().iter().map(|n| n.kappa_upper()).collect();
    let div_kappa_flux = divergence_form_operator(geo, &kappa_upper)?.apply_with_ghosts(&kappa, Ghost::Extrapolate);

    let n = geo.len();
    let mut v0 = Vec::with_capacity(n);
    let mut v1 = Vec::with_capacity(n);
    let mut v2 = Vec::with_capacity(n);
    for idx in 0..n {
        let (k, rr) = (kappa[idx], r[idx]);
        let k2 = k * k;
        let grad_sq = geo.node(idx).inv_metric.quadratic(grad_kappa[idx]);
        v0.push(0.25 * (k2 - 2.0 * rr));
        v1.push(k * (rr - 0.5 * k2) - 0.5 * lap_kappa[idx]);
        v2.push(
            0.75 * k2 * k2 - 1.75 * k2 * rr + 0.5 * rr * rr + 0.5 * k * lap_kappa[idx]
                + 0.25 * grad_sq
                + div_kappa_flux[idx]
                - 0.25 * lap_r[idx],
        );
    }
    Ok(CurvaturePotentials { v0, v1, v2, a1, a2 })
}

impl CurvaturePotentials {
    /// Flux-form discretisation of `Â₁`.
    pub fn a1_operator(&self, geo: &GeometryFields) -> Result<StencilOperator, GeometryError> {
        divergence_form_operator(geo, &self.a1)
    }

    /// Flux-form discretisation of `Â₂`.
    pub fn a2_operator(&self, geo: &GeometryFields) -> Result<StencilOperator, GeometryError> {
        divergence_form_operator(geo, &self.a2)
    }

    /// Largest absolute entry across all five fields.
    pub fn max_abs(&self) -> f64 {
        let scalars = self.v0.iter().chain(&self.v1).chain(&self.v2).map(|v| v.abs());
        let tensors = self.a1.iter().chain(&self.a2).map(Sym2::max_abs);
        scalars.chain(tensors).fold(0.0, f64::max)
    }
}
