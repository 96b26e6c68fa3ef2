use crate::geometry::{mat_mul, GeometryFields, Sym2};

use super::ThinLayerError;

/// Metric of the `q⁰ = const` slice of the shell, per node.
///
/// `exact` is `G_ij = g_ij + 2q⁰κ_ij + (q⁰)² κ_im κ^m_j`; `det` and `inverse`
/// are the second-order truncations of `det G_ij` and `G^ij`.
#[derive(Debug, Clone)]
pub struct OffsetMetric {
    pub q0: f64,
    pub exact: Vec<Sym2>,
    pub det: Vec<f64>,
    pub inverse: Vec<Sym2>,
}

/// Fails unless `eps · max|principal curvature| < 1`. A zero thickness is
/// the bare surface and passes.
pub fn check_shell(geo: &GeometryFields, eps: f64) -> Result<(), ThinLayerError> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(ThinLayerError::InvalidThickness(eps));
    }
    let kappa_max = geo.max_principal_curvature();
    let product = eps * kappa_max;
    if product >= 1.0 {
        return Err(ThinLayerError::SelfIntersection { eps, kappa_max, product });
    }
    Ok(())
}

pub fn metric_at_offset(geo: &GeometryFields, q0: f64, eps: f64) -> Result<OffsetMetric, ThinLayerError> {
    check_shell(geo, eps)?;
    if !(q0.abs() <= 0.5 * eps) {
        return Err(ThinLayerError::OutsideShell { q0, half: 0.5 * eps });
    }
    let q2 = q0 * q0;
    let mut exact = Vec::with_capacity(geo.len());
    let mut det = Vec::with_capacity(geo.len());
    let mut inverse = Vec::with_capacity(geo.len());
    for n in geo.nodes() {
        let k = n.kappa;
        // κ_im κ^m_j = κ g⁻¹ κ
        let kk = Sym2::from_mat(mat_mul(mat_mul(k.to_mat(), n.inv_metric.to_mat()), k.to_mat()));
        exact.push(n.metric + k * (2.0 * q0) + kk * q2);
        let g = n.metric.det();
        let (kappa, r) = (n.mean_curvature, n.gauss);
        det.push(g * (1.0 + 2.0 * kappa * q0 + (kappa * kappa + r) * q2));
        let ku = n.kappa_upper();
        inverse.push(n.inv_metric - ku * (2.0 * q0) + (ku * (2.0 * kappa) - n.inv_metric * r) * (1.5 * q2));
    }
    Ok(OffsetMetric { q0, exact, det, inverse })
}

impl OffsetMetric {
    /// `det G_ij` of the exact slice metric.
    pub fn exact_det(&self) -> Vec<f64> {
        self.exact.iter().map(Sym2::det).collect()
    }

    /// Max-norm of `det(exact) − det(truncated)` over nodes.
    pub fn det_residual(&self) -> f64 {
        self.exact
            .iter()
            .zip(&self.det)
            .map(|(e, d)| (e.det() - d).abs())
            .fold(0.0, f64::max)
    }

    /// Max-norm of `G^ik(truncated) G_kj(exact) − δ^i_j` over nodes.
    pub fn inverse_residual(&self) -> f64 {
        self.exact
            .iter()
            .zip(&self.inverse)
            .map(|(e, inv)| {
                let p = mat_mul(inv.to_mat(), e.to_mat());
                let mut worst: f64 = 0.0;
                for (i, row) in p.iter().enumerate() {
                    for (j, v) in row.iter().enumerate() {
                        let d = if i == j { 1.0 } else { 0.0 };
                        worst = worst.max((v - d).abs());
                    }
                }
                worst
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{compute_geometry, FourierMode, Grid2D, SurfaceChart};
    use std::f64::consts::PI;

    fn geo(chart: SurfaceChart) -> GeometryFields {
        let grid = Grid2D::new(&chart, 12, 10).unwrap();
        compute_geometry(&chart, &grid).unwrap()
    }

    fn charts() -> Vec<SurfaceChart> {
        vec![
            SurfaceChart::cylinder(1.0, 2.0).unwrap(),
            SurfaceChart::sphere(1.0, 0.3).unwrap(),
            SurfaceChart::torus(3.0, 1.0).unwrap(),
            SurfaceChart::graph(
                vec![FourierMode { wavevector: [1.0, 1.0], amplitude: 0.2, phase: 0.3 }],
                [[0.0, 2.0 * PI], [0.0, 2.0 * PI]],
                [true, true],
            )
            .unwrap(),
        ]
    }

    #[test]
    fn zero_offset_is_exact() {
        for c in charts() {
            let g = geo(c);
            let m = metric_at_offset(&g, 0.0, 0.1).unwrap();
            for (n, k) in g.nodes().iter().enumerate() {
                assert_eq!(m.exact[n], k.metric);
                assert_eq!(m.inverse[n], k.inv_metric);
                assert!((m.det[n] - k.metric.det()).abs() == 0.0);
            }
        }
    }

    #[test]
    fn cylinder_offset_is_a_wider_cylinder() {
        let g = geo(SurfaceChart::cylinder(1.0, 2.0).unwrap());
        let m = metric_at_offset(&g, 0.1, 0.2).unwrap();
        for (n, node) in g.nodes().iter().enumerate() {
            assert!((m.exact[n].xx / node.metric.xx - 1.21).abs() < 1e-14);
            assert!((m.exact[n].det() / node.metric.det() - 1.21).abs() < 1e-14);
            // κ = 1, R = 0 makes the truncated determinant exact here
            assert!((m.det[n] / node.metric.det() - 1.21).abs() < 1e-14);
        }
    }

    #[test]
    fn truncations_are_third_order() {
        for c in charts() {
            let g = geo(c);
            let res = |q0: f64| {
                let m = metric_at_offset(&g, q0, 0.2).unwrap();
                (m.det_residual(), m.inverse_residual())
            };
            let (d1, i1) = res(0.04);
            let (d2, i2) = res(0.02);
            let (d3, i3) = res(0.01);
            assert!(i1 / i2 >= 7.0 && i2 / i3 >= 7.0, "{i1} {i2} {i3}");
            if d1 > 1e-13 {
                assert!(d1 / d2 >= 7.0 && d2 / d3 >= 7.0, "{d1} {d2} {d3}");
            }
        }
    }

    #[test]
    fn rejects_bad_offsets() {
        let g = geo(SurfaceChart::cylinder(0.4, 2.0).unwrap());
        assert!(matches!(
            metric_at_offset(&g, 0.0, 0.5),
            Err(ThinLayerError::SelfIntersection { .. })
        ));
        assert!(matches!(
            metric_at_offset(&g, 0.2, 0.2),
            Err(ThinLayerError::OutsideShell { .. })
        ));
        assert!(matches!(check_shell(&g, -0.1), Err(ThinLayerError::InvalidThickness(_))));
        assert!(check_shell(&g, 0.0).is_ok());
    }
}
