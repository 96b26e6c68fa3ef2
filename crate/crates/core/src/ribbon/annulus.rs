//! Radial eigenproblem of the annulus,
//! `−(ħ²/2m)[u″ + u′/r − m²u/r²] + (ħ²/2m)k_z² u = E u`, `u(R ± ε/2) = 0`.
//!
//! With `u = r^{-1/2} w` and `r = R + εξ` it reads
//! `(ħ²/2m) ε⁻² [−w_ξξ + ε²(m² − ¼)(R + εξ)⁻² w] = (E − (ħ²/2m)k_z²) w`.
//! Two routes solve it: a sine-basis Galerkin solve partitioned around the
//! `N`-th mode, which yields the shift `E − ε⁻²E_N ħ²/m` directly and so
//! keeps full relative precision in it, and a finite-difference Sturm
//! bisection with Richardson extrapolation as an independent cross-check.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

use crate::quadrature::GaussLegendre;

use super::{RibbonError, RibbonSpec};

/// Radial intervals of the coarse finite-difference grid; the fine grid
/// doubles it.
pub const FD_RADIAL_INTERVALS: usize = 4096;

const BASIS_EXTRA: usize = 48;
const GALERKIN_NODES: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusEigen {
    pub energy: f64,
    /// `E − ε⁻² E_N ħ²/m`, computed without forming `E`.
    pub shift: f64,
    /// Richardson-extrapolated finite-difference energy.
    pub fd_energy: f64,
    /// Interior sign changes of the finite-difference eigenfunction.
    pub nodes: usize,
}

impl AnnulusEigen {
    pub fn fd_relative_deviation(&self) -> f64 {
        (self.fd_energy / self.energy - 1.0).abs()
    }
}

pub fn annulus_eigen_oracle(spec: &RibbonSpec) -> Result<AnnulusEigen, RibbonError> {
    let mode = spec.validate()?;
    let c = 0.5 * spec.hbar2_over_m();
    let eps2 = spec.eps * spec.eps;
    let s = galerkin_shift(spec, mode.level() as usize);
    let shift = c * (s / eps2 + spec.k_z * spec.k_z);
    let energy = spec.hbar2_over_m() * mode.energy() / eps2 + shift;
    let coarse = annulus_fd_eigen(spec, FD_RADIAL_INTERVALS)?;
    let fine = annulus_fd_eigen(spec, 2 * FD_RADIAL_INTERVALS)?;
    Ok(AnnulusEigen {
        energy,
        shift,
        fd_energy: (4.0 * fine.energy - coarse.energy) / 3.0,
        nodes: fine.nodes,
    })
}

/// Dimensionless shift `μ − π²N²` of the `N`-th eigenvalue of
/// `−∂ξ² + ε²V`, by the fixed point
/// `s = ε²V_NN + ε⁴ V_NQ [(π²N² + s) − D_Q − ε²V_QQ]⁻¹ V_QN`
/// over the complement `Q` of mode `N` in a sine basis.
fn galerkin_shift(spec: &RibbonSpec, level: usize) -> f64 {
    let size = level + BASIS_EXTRA;
    let eps2 = spec.eps * spec.eps;
    let c = (spec.m_wave as f64).powi(2) - 0.25;
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    let rule = RULE.get_or_init(|| GaussLegendre::new(GALERKIN_NODES));
    let pts: Vec<(f64, f64)> = rule.mapped(-0.5, 0.5).collect();
    let basis: Vec<Vec<f64>> = (1..=size)
        .map(|k| {
            pts.iter()
                .map(|&(xi, _)| std::f64::consts::SQRT_2 * (k as f64 * PI * (xi + 0.5)).sin())
                .collect()
        })
        .collect();
    let pot: Vec<f64> = pts
        .iter()
        .map(|&(xi, w)| w * c / (spec.radius + spec.eps * xi).powi(2))
        .collect();
    let v = DMatrix::from_fn(size, size, |a, b| {
        (0..pts.len()).map(|q| basis[a][q] * pot[q] * basis[b][q]).sum::<f64>()
    });
    let n = level - 1;
    let others: Vec<usize> = (0..size).filter(|&k| k != n).collect();
    let coupling = DVector::from_iterator(others.len(), others.iter().map(|&k| v[(k, n)]));
    let diag = |k: usize| PI * PI * ((k + 1) as f64).powi(2);
    let target = diag(n);
    let mut s = eps2 * v[(n, n)];
    for _ in 0..100 {
        let block = DMatrix::from_fn(others.len(), others.len(), |a, b| {
            let (ka, kb) = (others[a], others[b]);
            let d = if a == b { target + s - diag(ka) } else { 0.0 };
            d - eps2 * v[(ka, kb)]
        });
        let Some(x) = block.lu().solve(&coupling) else {
            break;
        };
        let next = eps2 * v[(n, n)] + eps2 * eps2 * coupling.dot(&x);
        let done = (next - s).abs() <= 1e-16 * next.abs();
        s = next;
        if done {
            break;
        }
    }
    s
}

/// Finite-difference eigenpair of the `w` equation on `intervals` cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdEigen {
    pub energy: f64,
    pub nodes: usize,
}

/// `N`-th eigenvalue of the second-order finite-difference operator by
/// Sturm-count bisection, and the sign changes of its eigenvector.
pub fn annulus_fd_eigen(spec: &RibbonSpec, intervals: usize) -> Result<FdEigen, RibbonError> {
    let mode = spec.validate()?;
    let level = mode.level();
    if intervals < 2 || level as usize >= intervals {
        return Err(RibbonError::Bracket { level });
    }
    let h = spec.eps / intervals as f64;
    let c = (spec.m_wave as f64).powi(2) - 0.25;
    let pot: Vec<f64> = (1..intervals)
        .map(|i| c / (spec.radius - 0.5 * spec.eps + i as f64 * h).powi(2))
        .collect();
    let lo0 = pot.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    let hi0 = 2.0 * (level as f64 * PI / spec.eps).powi(2) + pot.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    let want = level as usize;
    let below = |x: f64| sturm(&pot, h, x).0;
    if below(hi0) < want || below(lo0) >= want {
        return Err(RibbonError::Bracket { level });
    }
    let (mut lo, mut hi) = (lo0, hi0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if below(mid) >= want {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mu = 0.5 * (lo + hi);
    Ok(FdEigen {
        energy: 0.5 * spec.hbar2_over_m() * (mu + spec.k_z * spec.k_z),
        nodes: sturm(&pot, h, mu).1,
    })
}

/// Shoots `y₀ = 0, y₁ = 1` through `(y_{i+1} − 2yᵢ + y_{i−1})/h² = (Vᵢ − x)yᵢ`.
///
/// The pivots of `A − x` are `yᵢ₊₁/yᵢ`, so sign changes of `y` count the
/// eigenvalues below `x`. Carrying the difference `yᵢ₊₁ − yᵢ` rather than
/// `yᵢ₊₁` keeps `h²(Vᵢ − x)` from being swamped by the `2/h²` diagonal.
/// Returns the count and the sign changes among interior nodes.
fn sturm(pot: &[f64], h: f64, x: f64) -> (usize, usize) {
    let h2 = h * h;
    let (mut y, mut dy) = (1.0_f64, 1.0_f64);
    let (mut count, mut interior) = (0, 0);
    for (i, v) in pot.iter().enumerate() {
        dy += h2 * (v - x) * y;
        let next = y + dy;
        if next * y < 0.0 || next == 0.0 {
            count += 1;
            if i + 1 < pot.len() {
                interior += 1;
            }
        }
        y = if next == 0.0 { f64::MIN_POSITIVE.copysign(-y) } else { next };
        if y.abs() > 1e150 {
            y *= 1e-150;
            dy *= 1e-150;
        }
    }
    (count, interior)
}
