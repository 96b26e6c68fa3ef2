//! Hard-wall transverse modes across the shell, `ξ = q⁰/ε ∈ [−½, ½]`, their
//! matrix elements, and assembly of the `ε`-expanded energy.

use std::f64::consts::{PI, SQRT_2};
use std::sync::OnceLock;

use thiserror::Error;

use crate::quadrature::GaussLegendre;

/// Number of Gauss–Legendre nodes used for all transverse integrals.
pub const TRANSVERSE_QUADRATURE_NODES: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransverseError {
    #[error("transverse level must be >= 1, got {0}")]
    InvalidLevel(i64),
    #[error("matrix element power must be 1 or 2, got {0}")]
    InvalidPower(u32),
    #[error("thickness must be positive and finite, got {0}")]
    InvalidThickness(f64),
}

fn rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(TRANSVERSE_QUADRATURE_NODES))
}

/// Shape of `χ_N`: odd `N` gives an even (cosine) profile, even `N` a sine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Cosine,
    Sine,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransverseMode {
    level: u32,
    parity: Parity,
    energy: f64,
    xi2: f64,
}

/// Normalised mode `χ_N` with `E_N = π² N² / 2` (units of `ħ²/(m ε²)`).
pub fn mode(level: i64) -> Result<TransverseMode, TransverseError> {
    if level < 1 || level > u32::MAX as i64 {
        return Err(TransverseError::InvalidLevel(level));
    }
    let n = level as u32;
    let parity = if n % 2 == 1 { Parity::Cosine } else { Parity::Sine };
    let mut m = TransverseMode {
        level: n,
        parity,
        energy: 0.5 * PI * PI * (n as f64).powi(2),
        xi2: 0.0,
    };
    m.xi2 = rule().integrate(-0.5, 0.5, |x| x * x * m.value(x).powi(2));
    Ok(m)
}

impl TransverseMode {
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// Dimensionless transverse eigenvalue `π² N² / 2`.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// `⟨N|ξ²|N⟩` by quadrature.
    pub fn xi2_moment(&self) -> f64 {
        self.xi2
    }

    /// Closed form `(1/12)(1 − 6/(π² N²))` of the second moment.
    pub fn xi2_closed_form(&self) -> f64 {
        (1.0 - 6.0 / (PI * PI * (self.level as f64).powi(2))) / 12.0
    }

    /// `χ_N(ξ)`; zero outside the shell.
    pub fn value(&self, xi: f64) -> f64 {
        if xi.abs() > 0.5 {
            return 0.0;
        }
        let arg = self.level as f64 * PI * xi;
        match self.parity {
            Parity::Cosine => SQRT_2 * arg.cos(),
            Parity::Sine => SQRT_2 * arg.sin(),
        }
    }
}

/// `∫ χ_K χ_N dξ`.
pub fn overlap(k: i64, n: i64) -> Result<f64, TransverseError> {
    let (a, b) = (mode(k)?, mode(n)?);
    Ok(rule().integrate(-0.5, 0.5, |x| a.value(x) * b.value(x)))
}

/// `⟨K|ξᵖ|N⟩ = ∫ χ_K ξᵖ χ_N dξ` for `p ∈ {1, 2}`.
pub fn xi_matrix_element(k: i64, n: i64, p: u32) -> Result<f64, TransverseError> {
    if !(p == 1 || p == 2) {
        return Err(TransverseError::InvalidPower(p));
    }
    let (a, b) = (mode(k)?, mode(n)?);
    if k == n && p == 1 {
        // |χ_N|² is even in ξ
        return Ok(0.0);
    }
    Ok(rule().integrate(-0.5, 0.5, |x| a.value(x) * x.powi(p as i32) * b.value(x)))
}

/// `ε̃² = ε² ⟨N|ξ²|N⟩ = (ε²/12)(1 − 6/(π² N²))`.
pub fn epsilon_tilde_sq(eps: f64, level: i64) -> Result<f64, TransverseError> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(TransverseError::InvalidThickness(eps));
    }
    Ok(eps * eps * mode(level)?.xi2_closed_form())
}

/// Energy to second order in the thickness:
/// `E = ε⁻² E_N (ħ²/m) + λ_n + ε² ⟨N|ξ²|N⟩ (n|ĝ|n)`.
///
/// The `ε⁻¹` and `ε¹` orders vanish identically and are not represented.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyExpansion {
    pub eps: f64,
    pub level: u32,
    /// Eigenvalue of the surface operator `ĥ`.
    pub surface: f64,
    /// Diagonal element `(n|ĝ|n)`.
    pub gnn: f64,
    pub hbar2_over_m: f64,
    /// `⟨N|ξ²|N⟩`.
    pub xi2: f64,
    /// Dimensionless `E_N`.
    pub transverse_eigenvalue: f64,
}

impl EnergyExpansion {
    /// `ε⁻² E_N (ħ²/m)`.
    pub fn transverse_term(&self) -> f64 {
        self.hbar2_over_m * self.transverse_eigenvalue / (self.eps * self.eps)
    }

    /// `ε² ⟨N|ξ²|N⟩ (n|ĝ|n)`.
    pub fn curvature_term(&self) -> f64 {
        self.eps * self.eps * self.xi2 * self.gnn
    }

    /// Everything except the transverse term: `λ_n + ε² ⟨ξ²⟩ (n|ĝ|n)`.
    pub fn surface_shift(&self) -> f64 {
        self.surface + self.curvature_term()
    }

    pub fn total(&self) -> f64 {
        self.transverse_term() + self.surface_shift()
    }
}

pub fn energy_expansion(
    eps: f64,
    level: i64,
    surface: f64,
    gnn: f64,
    hbar2_over_m: f64,
) -> Result<EnergyExpansion, TransverseError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(TransverseError::InvalidThickness(eps));
    }
    let m = mode(level)?;
    Ok(EnergyExpansion {
        eps,
        level: m.level,
        surface,
        gnn,
        hbar2_over_m,
        xi2: m.xi2_closed_form(),
        transverse_eigenvalue: m.energy,
    })
}
