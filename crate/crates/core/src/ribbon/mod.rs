//! The bent ribbon: a cylindrical shell `R − ε/2 < r < R + ε/2` where the 3D
//! problem separates, used as an exact oracle for the geometric flow factor
//! and for the thickness expansion of the energy.

mod annulus;

pub use annulus::{annulus_eigen_oracle, annulus_fd_eigen, AnnulusEigen, FdEigen, FD_RADIAL_INTERVALS};

use std::sync::OnceLock;

use num_complex::Complex64;
use thiserror::Error;

use crate::quadrature::GaussLegendre;
use crate::transverse::{energy_expansion, epsilon_tilde_sq, mode, TransverseError, TransverseMode};

/// Gauss–Legendre nodes for the radial weight `⟨(R/r)²⟩`.
pub const RADIAL_QUADRATURE_NODES: usize = 128;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RibbonError {
    #[error("invalid ribbon parameter: {0}")]
    InvalidSpec(String),
    #[error("thickness {eps} must be smaller than the bend radius {radius}")]
    ThickShell { eps: f64, radius: f64 },
    #[error("could not bracket radial level {level}")]
    Bracket { level: u32 },
    #[error("thickness sweep must halve at each step with eps <= R/10: {0}")]
    BadSweep(String),
    #[error("energy residual grew from {previous:e} to {current:e} at eps = {eps}")]
    NonMonotoneResidual { eps: f64, previous: f64, current: f64 },
    #[error(transparent)]
    Transverse(#[from] TransverseError),
}

/// Cylindrical shell of bend radius `R`, thickness `ε` and height `L`,
/// carrying the state `e^{i m θ} e^{i k_z z}` in transverse level `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RibbonSpec {
    pub radius: f64,
    pub eps: f64,
    pub length: f64,
    pub level: i64,
    pub m_wave: i64,
    pub k_z: f64,
    pub hbar: f64,
    pub mass: f64,
}

impl RibbonSpec {
    /// Unit `ħ` and `m`, no `z` momentum.
    pub fn new(radius: f64, eps: f64, level: i64, m_wave: i64) -> Self {
        Self {
            radius,
            eps,
            length: 1.0,
            level,
            m_wave,
            k_z: 0.0,
            hbar: 1.0,
            mass: 1.0,
        }
    }

    pub fn with_eps(self, eps: f64) -> Self {
        Self { eps, ..self }
    }

    pub fn validate(&self) -> Result<TransverseMode, RibbonError> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        for (name, v) in [
            ("radius", self.radius),
            ("eps", self.eps),
            ("length", self.length),
            ("hbar", self.hbar),
            ("mass", self.mass),
        ] {
            if !positive(v) {
                return Err(RibbonError::InvalidSpec(format!("{name} must be positive, got {v}")));
            }
        }
        if !self.k_z.is_finite() {
            return Err(RibbonError::InvalidSpec(format!("k_z must be finite, got {}", self.k_z)));
        }
        if self.eps >= self.radius {
            return Err(RibbonError::ThickShell {
                eps: self.eps,
                radius: self.radius,
            });
        }
        Ok(mode(self.level)?)
    }

    pub fn hbar2_over_m(&self) -> f64 {
        self.hbar * self.hbar / self.mass
    }

    /// `ψ = √(R/r) χ(r) e^{imθ} e^{ik_z z} / √(2πRL)` with
    /// `χ(r) = ε^{-1/2} χ_N((r − R)/ε)`; unit norm in the shell volume.
    pub fn wavefunction(&self, r: f64, theta: f64, z: f64) -> Result<Complex64, RibbonError> {
        let m = self.validate()?;
        let xi = (r - self.radius) / self.eps;
        if xi.abs() > 0.5 {
            return Ok(Complex64::default());
        }
        let amp = (self.radius / r).sqrt() * m.value(xi) / self.eps.sqrt()
            / (2.0 * std::f64::consts::PI * self.radius * self.length).sqrt();
        Ok(Complex64::from_polar(amp, self.m_wave as f64 * theta + self.k_z * z))
    }
}

fn radial_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(RADIAL_QUADRATURE_NODES))
}

/// `⟨f⟩ = ∫ f(r) |χ(r)|² dr` over the shell, written in `ξ = (r − R)/ε`.
pub fn radial_average(spec: &RibbonSpec, f: impl Fn(f64) -> f64) -> Result<f64, RibbonError> {
    let m = spec.validate()?;
    Ok(radial_rule().integrate(-0.5, 0.5, |xi| f(spec.radius + spec.eps * xi) * m.value(xi).powi(2)))
}

/// Exact radial weight `⟨(R/r)²⟩`.
pub fn weight_exact(spec: &RibbonSpec) -> Result<f64, RibbonError> {
    radial_average(spec, |r| (spec.radius / r).powi(2))
}

/// Second-order weight `1 + 3ε̃²/R²`.
pub fn weight_expansion(spec: &RibbonSpec) -> Result<f64, RibbonError> {
    spec.validate()?;
    Ok(1.0 + 3.0 * epsilon_tilde_sq(spec.eps, spec.level)? / spec.radius.powi(2))
}

/// `J^s_tot = (ħ/2mi) ⟨(R/r)²⟩ (φ*∂ₛφ − φ∂ₛφ*)`.
pub fn ribbon_flux_exact(spec: &RibbonSpec, current: Complex64) -> Result<Complex64, RibbonError> {
    Ok(base_flux(spec, current) * weight_exact(spec)?)
}

/// `J^s_tot ≈ (ħ/2mi)(1 + 3ε̃²/R²)(φ*∂ₛφ − φ∂ₛφ*)`.
pub fn ribbon_flux_expansion(spec: &RibbonSpec, current: Complex64) -> Result<Complex64, RibbonError> {
    Ok(base_flux(spec, current) * weight_expansion(spec)?)
}

/// `J^z_tot = (ħ/2mi) ∫|χ|²dr (φ*∂_zφ − φ∂_zφ*)`: the straight direction
/// carries only the normalisation integral.
pub fn ribbon_flux_z(spec: &RibbonSpec, current: Complex64) -> Result<Complex64, RibbonError> {
    Ok(base_flux(spec, current) * radial_average(spec, |_| 1.0)?)
}

fn base_flux(spec: &RibbonSpec, current: Complex64) -> Complex64 {
    current * spec.hbar / (2.0 * spec.mass) / Complex64::i()
}

/// Surface eigenvalue `λ` and `(n|ĝ|n)` for `e^{imθ}e^{ik_z z}` on the
/// cylinder, from `V0 = κ²/4`, `V2 = ¾κ⁴`, `Â2 = 3κ²∂ₛ²` at `κ = 1/R`.
pub fn surface_terms(spec: &RibbonSpec) -> Result<(f64, f64), RibbonError> {
    spec.validate()?;
    let c = 0.5 * spec.hbar2_over_m();
    let kappa = 1.0 / spec.radius;
    let ks2 = (spec.m_wave as f64 * kappa).powi(2);
    let lambda = c * (ks2 + spec.k_z * spec.k_z - 0.25 * kappa * kappa);
    let gnn = c * (3.0 * kappa * kappa * ks2 - 0.75 * kappa.powi(4));
    Ok((lambda, gnn))
}

/// One row of the thickness sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RibbonReport {
    pub eps: f64,
    pub weight_exact: f64,
    pub weight_expansion: f64,
    /// `|exact/expansion − 1|` of the flux weight.
    pub weight_err: f64,
    /// Fluxes for a unit surface factor `Im(φ*∂ₛφ) = 1`.
    pub j_s_exact: f64,
    pub j_s_expansion: f64,
    /// Geometric part of `J^z_tot`.
    pub j_z_geometric: f64,
    pub e_exact: f64,
    /// Finite-difference cross-check of `e_exact`.
    pub e_fd: f64,
    /// Interior nodes of the radial eigenfunction.
    pub nodes: usize,
    pub e_pert: f64,
    /// `|E_exact − E_pert|`, formed from the shifts to avoid cancelling `ε⁻²E_N`.
    pub e_resid: f64,
    /// Residual of the previous (twice thicker) row over this one.
    pub resid_ratio: Option<f64>,
}

pub fn ribbon_report(spec: &RibbonSpec) -> Result<RibbonReport, RibbonError> {
    let unit = Complex64::new(0.0, 2.0);
    let w_exact = weight_exact(spec)?;
    let w_exp = weight_expansion(spec)?;
    let base = base_flux(spec, unit).re;
    let jz = ribbon_flux_z(spec, unit)?.re;
    let oracle = annulus_eigen_oracle(spec)?;
    let (lambda, gnn) = surface_terms(spec)?;
    let pert = energy_expansion(spec.eps, spec.level, lambda, gnn, spec.hbar2_over_m())?;
    Ok(RibbonReport {
        eps: spec.eps,
        weight_exact: w_exact,
        weight_expansion: w_exp,
        weight_err: (w_exact / w_exp - 1.0).abs(),
        j_s_exact: base * w_exact,
        j_s_expansion: base * w_exp,
        j_z_geometric: jz - base,
        e_exact: oracle.energy,
        e_fd: oracle.fd_energy,
        nodes: oracle.nodes,
        e_pert: pert.total(),
        e_resid: (oracle.shift - pert.surface_shift()).abs(),
        resid_ratio: None,
    })
}

/// Reports for a halving sequence of thicknesses, thickest first.
pub fn eigen_perturbation_check(spec: &RibbonSpec, eps: &[f64]) -> Result<Vec<RibbonReport>, RibbonError> {
    spec.validate()?;
    let Some(&first) = eps.first() else {
        return Err(RibbonError::BadSweep("empty".into()));
    };
    if !(first > 0.0 && first <= spec.radius / 10.0) {
        return Err(RibbonError::BadSweep(format!("largest eps {first} exceeds R/10")));
    }
    for w in eps.windows(2) {
        if ((w[0] / w[1]) - 2.0).abs() > 1e-12 {
            return Err(RibbonError::BadSweep(format!("{} -> {}", w[0], w[1])));
        }
    }
    let mut out: Vec<RibbonReport> = Vec::with_capacity(eps.len());
    for &e in eps {
        let mut row = ribbon_report(&spec.with_eps(e))?;
        if let Some(prev) = out.last() {
            if row.e_resid >= prev.e_resid {
                return Err(RibbonError::NonMonotoneResidual {
                    eps: e,
                    previous: prev.e_resid,
                    current: row.e_resid,
                });
            }
            row.resid_ratio = Some(prev.e_resid / row.e_resid);
        }
        out.push(row);
    }
    Ok(out)
}
