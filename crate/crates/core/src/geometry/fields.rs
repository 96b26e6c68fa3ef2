//! First and second fundamental form quantities sampled on a grid.

use super::chart::SurfaceChart;
use super::grid::Grid2D;
use super::tensor::{dot3, mat_det, mat_mul, mat_trace, Mat2, Sym2};
use super::GeometryError;

/// Differential-geometric data at a single surface point.
///
/// Conventions: the normal is the chart's oriented normal, and
/// `κ_ij = -n · ∂ᵢ∂ⱼx`, so that `∂ⱼBᵢ = -κᵢⱼ n + Γᵏᵢⱼ Bₖ` and
/// `∂ⱼn = κⱼᵐ Bₘ`. With the outward normal this makes a cylinder of radius
/// `R` have `κ_s^s = +1/R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeGeometry {
    pub q: [f64; 2],
    pub point: [f64; 3],
    pub tangents: [[f64; 3]; 2],
    pub normal: [f64; 3],
    /// `g_ij`
    pub metric: Sym2,
    /// `g^ij`
    pub inv_metric: Sym2,
    pub sqrt_g: f64,
    /// `Γᵏᵢⱼ` indexed `[k]` then `(11, 12, 22)`.
    pub christoffel: [Sym2; 2],
    /// `κ_ij`
    pub kappa: Sym2,
    /// `κ = g^ij κ_ij`
    pub mean_curvature: f64,
    /// `R = 2 det(κ^i_j)`, twice the Gauss curvature (the 2D Ricci scalar).
    pub gauss: f64,
}

impl NodeGeometry {
    pub fn at(chart: &SurfaceChart, q: [f64; 2]) -> Result<Self, GeometryError> {
        let e = chart.embed(q[0], q[1]);
        let [b1, b2] = e.tangents;
        let metric = Sym2::new(dot3(b1, b1), dot3(b1, b2), dot3(b2, b2));
        let det = metric.det();
        if !(det > 0.0) {
            return Err(GeometryError::DegenerateMetric { q, det });
        }
        let inv_metric = metric.inverse().ok_or(GeometryError::DegenerateMetric { q, det })?;
        let kappa = Sym2::new(
            -dot3(e.normal, e.second[0]),
            -dot3(e.normal, e.second[1]),
            -dot3(e.normal, e.second[2]),
        );
        // dual basis Bᵏ = g^km B_m
        let dual = |k: usize| {
            let a = inv_metric.get(k, 0);
            let b = inv_metric.get(k, 1);
            [
                a * b1[0] + b * b2[0],
                a * b1[1] + b * b2[1],
                a * b1[2] + b * b2[2],
            ]
        };
        let christoffel = [0, 1].map(|k| {
            let d = dual(k);
            Sym2::new(dot3(d, e.second[0]), dot3(d, e.second[1]), dot3(d, e.second[2]))
        });
        let mixed = mat_mul(inv_metric.to_mat(), kappa.to_mat());
        Ok(Self {
            q,
            point: e.point,
            tangents: e.tangents,
            normal: e.normal,
            metric,
            inv_metric,
            sqrt_g: det.sqrt(),
            christoffel,
            kappa,
            mean_curvature: mat_trace(mixed),
            gauss: 2.0 * mat_det(mixed),
        })
    }

    /// `κ^i_j = g^ik κ_kj` (row `i`, column `j`).
    pub fn kappa_mixed(&self) -> Mat2 {
        mat_mul(self.inv_metric.to_mat(), self.kappa.to_mat())
    }

    /// `κ^ij = g^ik κ_kl g^lj`.
    pub fn kappa_upper(&self) -> Sym2 {
        let gi = self.inv_metric.to_mat();
        Sym2::from_mat(mat_mul(mat_mul(gi, self.kappa.to_mat()), gi))
    }

    /// `κ^ik κ_k^j`.
    pub fn kappa_squared_upper(&self) -> Sym2 {
        let gi = self.inv_metric.to_mat();
        let k = self.kappa.to_mat();
        Sym2::from_mat(mat_mul(mat_mul(mat_mul(mat_mul(gi, k), gi), k), gi))
    }

    /// `κ_ij κ^ij`.
    pub fn kappa_norm_sq(&self) -> f64 {
        self.kappa_upper().contract(&self.kappa)
    }

    /// Eigenvalues of `κ^i_j`, ascending.
    pub fn principal_curvatures(&self) -> [f64; 2] {
        let half = 0.5 * self.mean_curvature;
        let disc = (half * half - 0.5 * self.gauss).max(0.0).sqrt();
        [half - disc, half + disc]
    }

    /// Max-norm of `½ R g^ij − (κ κ^ij − κ^i_m κ^mj)`.
    pub fn curvature_identity_residual(&self) -> f64 {
        let lhs = self.inv_metric * (0.5 * self.gauss);
        let rhs = self.kappa_upper() * self.mean_curvature - self.kappa_squared_upper();
        lhs.max_abs_diff(&rhs)
    }

    /// `(κ⁻¹)^ij = (2/R)(κ g^ij − κ^ij)`; `None` when `R` vanishes.
    pub fn kappa_inverse_upper(&self) -> Option<Sym2> {
        if self.gauss == 0.0 {
            return None;
        }
        Some((self.inv_metric * self.mean_curvature - self.kappa_upper()) * (2.0 / self.gauss))
    }
}

/// Geometry of a chart sampled at every node of a grid. Immutable once built.
#[derive(Debug, Clone)]
pub struct GeometryFields {
    chart: SurfaceChart,
    grid: Grid2D,
    nodes: Vec<NodeGeometry>,
}

/// Evaluates all surface quantities at the grid nodes from the chart's
/// analytic derivatives.
pub fn compute_geometry(chart: &SurfaceChart, grid: &Grid2D) -> Result<GeometryFields, GeometryError> {
    if grid.domain() != chart.domain() || grid.periodic() != chart.periodic() {
        return Err(GeometryError::ChartGridMismatch);
    }
    let nodes = (0..grid.len())
        .map(|k| NodeGeometry::at(chart, grid.node_coords(k)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GeometryFields {
        chart: chart.clone(),
        grid: grid.clone(),
        nodes,
    })
}

impl GeometryFields {
    pub fn chart(&self) -> &SurfaceChart {
        &self.chart
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn nodes(&self) -> &[NodeGeometry] {
        &self.nodes
    }

    pub fn node(&self, idx: usize) -> &NodeGeometry {
        &self.nodes[idx]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn sqrt_g(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.sqrt_g).collect()
    }

    pub fn mean_curvature(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.mean_curvature).collect()
    }

    pub fn gauss(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.gauss).collect()
    }

    pub fn inv_metric(&self) -> Vec<Sym2> {
        self.nodes.iter().map(|n| n.inv_metric).collect()
    }

    /// Largest `|principal curvature|` over the grid.
    pub fn max_principal_curvature(&self) -> f64 {
        self.nodes
            .iter()
            .flat_map(|n| n.principal_curvatures())
            .fold(0.0, |m, k| m.max(k.abs()))
    }

    /// Largest residual of the curvature identity over all nodes.
    pub fn max_identity_residual(&self) -> f64 {
        self.nodes
            .iter()
            .map(NodeGeometry::curvature_identity_residual)
            .fold(0.0, f64::max)
    }

    /// `Σ √g f h₁h₂`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        let area = self.grid.cell_area();
        self.nodes.iter().zip(f).map(|(n, v)| n.sqrt_g * v).sum::<f64>() * area
    }

    pub fn area(&self) -> f64 {
        self.integrate(&vec![1.0; self.len()])
    }
}
