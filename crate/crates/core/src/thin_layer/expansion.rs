//! Pointwise check of the second-order expansion of the conjugated Laplacian
//! `Δ̃ = (G/g)^{1/4} Δ⁽³⁾ (G/g)^{-1/4}`.
//!
//! Both sides are evaluated off-grid with nested fourth-order central
//! differences of analytic closures, so the only grid dependence is the choice
//! of sample points. The reference side builds the full shell metric from
//! differences of the embedding `X = x + q⁰n` and never touches the curvature
//! tensors; the expansion side uses the local geometry from the chart.

use nalgebra::Matrix3;
use rayon::prelude::*;

use crate::geometry::{Grid2D, NodeGeometry, SurfaceChart, Sym2};

use super::ThinLayerError;

/// Difference step for all nested derivatives.
const STEP: f64 = 2e-3;

/// Fourth-order central first derivative.
fn d1(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (8.0 * (f(x + h) - f(x - h)) - (f(x + 2.0 * h) - f(x - 2.0 * h))) / (12.0 * h)
}

/// Fourth-order central second derivative.
fn d2(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (16.0 * (f(x + h) + f(x - h)) - (f(x + 2.0 * h) + f(x - 2.0 * h)) - 30.0 * f(x)) / (12.0 * h * h)
}

fn shift2(q: [f64; 2], axis: usize, t: f64) -> [f64; 2] {
    let mut p = q;
    p[axis] = t;
    p
}

fn shift3(p: [f64; 3], axis: usize, t: f64) -> [f64; 3] {
    let mut r = p;
    r[axis] = t;
    r
}

/// Surface quantities evaluated at arbitrary chart points.
#[derive(Debug, Clone, Copy)]
pub struct LocalSurface<'a> {
    chart: &'a SurfaceChart,
}

impl<'a> LocalSurface<'a> {
    pub fn new(chart: &'a SurfaceChart) -> Self {
        Self { chart }
    }

    fn node(&self, q: [f64; 2]) -> Option<NodeGeometry> {
        NodeGeometry::at(self.chart, q).ok()
    }

    fn scalar(&self, q: [f64; 2], f: impl Fn(&NodeGeometry) -> f64) -> f64 {
        self.node(q).map_or(f64::NAN, |n| f(&n))
    }

    /// `(1/√g) ∂ᵢ(√g Aⁱʲ ∂ⱼ u)` at `q`.
    pub fn divergence_form(
        &self,
        q: [f64; 2],
        tensor: impl Fn(&NodeGeometry) -> Sym2 + Copy,
        u: impl Fn([f64; 2]) -> f64 + Copy,
    ) -> f64 {
        let flux = |p: [f64; 2], i: usize| match self.node(p) {
            Some(n) => {
                let a = tensor(&n);
                let du = [0, 1].map(|j| d1(|t| u(shift2(p, j, t)), p[j], STEP));
                n.sqrt_g * (a.get(i, 0) * du[0] + a.get(i, 1) * du[1])
            }
            None => f64::NAN,
        };
        let div: f64 = (0..2).map(|i| d1(|t| flux(shift2(q, i, t), i), q[i], STEP)).sum();
        div / self.scalar(q, |n| n.sqrt_g)
    }

    /// `Δ u` at `q`.
    pub fn laplacian(&self, q: [f64; 2], u: impl Fn([f64; 2]) -> f64 + Copy) -> f64 {
        self.divergence_form(q, |n| n.inv_metric, u)
    }

    pub fn mean_curvature(&self, q: [f64; 2]) -> f64 {
        self.scalar(q, |n| n.mean_curvature)
    }

    pub fn gauss(&self, q: [f64; 2]) -> f64 {
        self.scalar(q, |n| n.gauss)
    }

    /// `(V₀, V₁, V₂)` at `q`.
    pub fn potentials(&self, q: [f64; 2]) -> [f64; 3] {
        let Some(n) = self.node(q) else {
            return [f64::NAN; 3];
        };
        let kappa = |p: [f64; 2]| self.mean_curvature(p);
        let gauss = |p: [f64; 2]| self.gauss(p);
        let (k, r) = (n.mean_curvature, n.gauss);
        let k2 = k * k;
        let lap_k = self.laplacian(q, kappa);
        let lap_r = self.laplacian(q, gauss);
        let grad_k = [0, 1].map(|j| d1(|t| kappa(shift2(q, j, t)), q[j], STEP));
        let flux_div = self.divergence_form(q, |m| m.kappa_upper(), kappa);
        [
            0.25 * (k2 - 2.0 * r),
            k * (r - 0.5 * k2) - 0.5 * lap_k,
            0.75 * k2 * k2 - 1.75 * k2 * r + 0.5 * r * r + 0.5 * k * lap_k
                + 0.25 * n.inv_metric.quadratic(grad_k)
                + flux_div
                - 0.25 * lap_r,
        ]
    }

    /// Truncated operator `[Δ + ∂₀² + V₀ + q⁰V₁ + (q⁰)²V₂ + q⁰Â₁ + (q⁰)²Â₂] f`
    /// at `(q⁰, q)`.
    pub fn expanded_laplacian(&self, f: &(dyn Fn(f64, f64, f64) -> f64 + Sync), q0: f64, q: [f64; 2]) -> f64 {
        let slice = |p: [f64; 2]| f(q0, p[0], p[1]);
        let [v0, v1, v2] = self.potentials(q);
        let lap = self.laplacian(q, slice);
        let normal = d2(|t| f(t, q[0], q[1]), q0, STEP);
        let a1 = -2.0 * self.divergence_form(q, |n| n.kappa_upper(), slice);
        let a2 = 3.0 * self.divergence_form(q, |n| n.kappa_squared_upper(), slice);
        let value = slice(q);
        lap + normal + (v0 + q0 * v1 + q0 * q0 * v2) * value + q0 * a1 + q0 * q0 * a2
    }

    /// Shell metric `G_μν = ∂_μX · ∂_νX` in `(q⁰, q¹, q²)` from differences of
    /// the embedding.
    fn shell_metric(&self, p: [f64; 3]) -> Matrix3<f64> {
        let x = |r: [f64; 3]| self.chart.shell_point(r[0], r[1], r[2]);
        let jac: [[f64; 3]; 3] = [0, 1, 2].map(|mu| [0, 1, 2].map(|c| d1(|t| x(shift3(p, mu, t))[c], p[mu], STEP)));
        Matrix3::from_fn(|a, b| (0..3).map(|c| jac[a][c] * jac[b][c]).sum())
    }

    /// Exact conjugated Laplacian `(G/g)^{1/4} Δ⁽³⁾ [(G/g)^{-1/4} f]` at `p`.
    pub fn conjugated_laplacian(&self, f: &(dyn Fn(f64, f64, f64) -> f64 + Sync), p: [f64; 3]) -> f64 {
        let det = |r: [f64; 3]| self.shell_metric(r).determinant();
        let ratio = |r: [f64; 3]| det(r) / det([0.0, r[1], r[2]]);
        let w = |r: [f64; 3]| ratio(r).powf(-0.25) * f(r[0], r[1], r[2]);
        let flux = |r: [f64; 3], mu: usize| {
            let g = self.shell_metric(r);
            let Some(inv) = g.try_inverse() else {
                return f64::NAN;
            };
            let dw = [0, 1, 2].map(|nu| d1(|t| w(shift3(r, nu, t)), r[nu], STEP));
            g.determinant().sqrt() * (0..3).map(|nu| inv[(mu, nu)] * dw[nu]).sum::<f64>()
        };
        let div: f64 = (0..3).map(|mu| d1(|t| flux(shift3(p, mu, t), mu), p[mu], STEP)).sum();
        ratio(p).powf(0.25) * div / det(p).sqrt()
    }
}

/// Residual of the second-order expansion on a `q⁰` slice.
#[derive(Debug, Clone)]
pub struct ExpansionResidual {
    pub q0: f64,
    /// `|expanded − exact|` at every grid node.
    pub residual: Vec<f64>,
    pub max: f64,
    /// Chart point where `max` is attained.
    pub argmax: [f64; 2],
}

/// Evaluates both sides at every node of `grid` on the slice `q⁰ = q0`.
/// Fails when `|q0|` times the largest principal curvature reaches 1.
pub fn verify_laplacian_expansion(
    chart: &SurfaceChart,
    grid: &Grid2D,
    f: &(dyn Fn(f64, f64, f64) -> f64 + Sync),
    q0: f64,
) -> Result<ExpansionResidual, ThinLayerError> {
    let points: Vec<[f64; 2]> = (0..grid.len()).map(|k| grid.node_coords(k)).collect();
    let mut kappa_max: f64 = 0.0;
    for &q in &points {
        let n = NodeGeometry::at(chart, q)?;
        kappa_max = kappa_max.max(n.principal_curvatures().iter().fold(0.0, |m: f64, k| m.max(k.abs())));
    }
    // the outer stencils reach 4 steps further along the normal
    let reach = q0.abs() + 4.0 * STEP;
    if reach * kappa_max >= 1.0 {
        return Err(ThinLayerError::SelfIntersection {
            eps: 2.0 * q0.abs(),
            kappa_max,
            product: 2.0 * q0.abs() * kappa_max,
        });
    }
    let local = LocalSurface::new(chart);
    let residual: Vec<f64> = points
        .par_iter()
        .map(|&q| (local.expanded_laplacian(f, q0, q) - local.conjugated_laplacian(f, [q0, q[0], q[1]])).abs())
        .collect();
    let mut max = 0.0;
    let mut argmax = points[0];
    for (r, q) in residual.iter().zip(&points) {
        if !r.is_finite() {
            return Err(ThinLayerError::NonFinite { q: *q });
        }
        if *r > max {
            max = *r;
            argmax = *q;
        }
    }
    Ok(ExpansionResidual { q0, residual, max, argmax })
}
