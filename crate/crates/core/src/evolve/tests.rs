use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::*;
use crate::geometry::{compute_geometry, FourierMode, GeometryFields, Grid2D, SurfaceChart};
use crate::thin_layer::curvature_potentials;
use crate::transverse::epsilon_tilde_sq;

fn geometry(chart: SurfaceChart, n1: usize, n2: usize) -> Arc<GeometryFields> {
    let grid = Grid2D::new(&chart, n1, n2).unwrap();
    Arc::new(compute_geometry(&chart, &grid).unwrap())
}

fn model(geo: &Arc<GeometryFields>, physics: Physics) -> EffectiveModel {
    let pot = curvature_potentials(geo).unwrap();
    build_model(geo.clone(), &pot, physics).unwrap()
}

fn quantum(eps: f64) -> Physics {
    Physics::Quantum {
        mass: 1.0,
        hbar: 1.0,
        eps,
        level: 1,
        potential: None,
    }
}

fn classical(eps: f64) -> Physics {
    Physics::Classical { diffusion: 0.7, eps }
}

fn graph_chart() -> SurfaceChart {
    SurfaceChart::graph(
        vec![
            FourierMode { wavevector: [1.0, 0.0], amplitude: 0.25, phase: 0.0 },
            FourierMode { wavevector: [1.0, 1.0], amplitude: 0.1, phase: 0.4 },
        ],
        [[0.0, 2.0 * PI], [0.0, 2.0 * PI]],
        [true, true],
    )
    .unwrap()
}

/// Deterministic pseudo-random values in [-1, 1].
fn noise(n: usize, seed: u64) -> Vec<f64> {
    let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (0..n)
        .map(|_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
        .collect()
}

fn flat_laplacian(geo: &GeometryFields, u: &[f64]) -> Vec<f64> {
    let grid = geo.grid();
    let [h1, h2] = grid.spacing();
    let [n1, n2] = grid.shape();
    let mut out = Vec::with_capacity(grid.len());
    for j in 0..n2 {
        for i in 0..n1 {
            let at = |di: isize, dj: isize| grid.neighbor(i, j, di, dj).map_or(0.0, |k| u[k]);
            let c = u[grid.index(i, j)];
            out.push((at(1, 0) - 2.0 * c + at(-1, 0)) / (h1 * h1) + (at(0, 1) - 2.0 * c + at(0, -1)) / (h2 * h2));
        }
    }
    out
}

#[test]
fn plane_generators_are_textbook() {
    let chart = SurfaceChart::plane([[0.0, 1.0], [0.0, 2.0]], [true, false]).unwrap();
    let geo = geometry(chart, 16, 12);
    let u = noise(geo.len(), 3);
    let want = flat_laplacian(&geo, &u);
    let c = model(&geo, classical(0.1));
    for (a, b) in c.generator().apply(&u).iter().zip(&want) {
        assert!((a - 0.7 * b).abs() < 1e-13 * (1.0 + b.abs()));
    }
    let q = model(
        &geo,
        Physics::Quantum {
            mass: 2.0,
            hbar: 1.5,
            eps: 0.1,
            level: 2,
            potential: None,
        },
    );
    for (a, b) in q.generator().apply(&u).iter().zip(&want) {
        assert!((a + 1.5 * 1.5 / 4.0 * b).abs() < 1e-13 * (1.0 + b.abs()));
    }
}

#[test]
fn cylinder_plane_wave_eigenvalue() {
    let (radius, m, eps): (f64, f64, f64) = (1.0, 2.0, 0.2);
    let et2 = epsilon_tilde_sq(eps, 1).unwrap();
    let want = 0.5 * (m * m - 0.25) / radius.powi(2) + et2 * 0.5 * (3.0 * m * m - 0.75) / radius.powi(4);
    let err = |n: usize| {
        let geo = geometry(SurfaceChart::cylinder(radius, 1.0).unwrap(), n, 8);
        let q = model(&geo, quantum(eps));
        let phi: Vec<Complex64> = geo.nodes().iter().map(|nd| Complex64::from_polar(1.0, m * nd.q[0] / radius)).collect();
        q.generator()
            .apply(&phi)
            .iter()
            .zip(&phi)
            .map(|(h, p)| (h - p * want).norm())
            .fold(0.0, f64::max)
    };
    let (e1, e2) = (err(32), err(64));
    assert!(e1 / e2 > 3.8 && e2 < 1e-2, "{e1} {e2}");
}

#[test]
fn quantum_generator_is_weighted_self_adjoint() {
    for chart in [graph_chart(), SurfaceChart::sphere(1.0, 0.3).unwrap(), SurfaceChart::torus(2.0, 0.7).unwrap()] {
        let geo = geometry(chart, 20, 16);
        let pot_ext: Vec<f64> = noise(geo.len(), 9).iter().map(|v| v.abs()).collect();
        let q = model(
            &geo,
            Physics::Quantum {
                mass: 1.0,
                hbar: 1.0,
                eps: 0.2,
                level: 1,
                potential: Some(pot_ext),
            },
        );
        let sg = geo.sqrt_g();
        let (u, v) = (noise(geo.len(), 1), noise(geo.len(), 2));
        let (hu, hv) = (q.generator().apply(&u), q.generator().apply(&v));
        let ip = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).zip(&sg).map(|((a, b), s)| a * b * s).sum() };
        let scale = ip(&u, &u).sqrt() * ip(&v, &v).sqrt();
        let asym = (ip(&u, &hv) - ip(&hu, &v)).abs();
        assert!(asym <= 1e-12 * scale * q.generator().gershgorin_bound().max(1.0), "{asym} {scale}");
    }
}

#[test]
fn classical_generator_conserves() {
    // constant R: constants are annihilated
    let geo = geometry(SurfaceChart::cylinder(0.8, 1.0).unwrap(), 16, 8);
    let c = model(&geo, classical(0.2));
    let ones = vec![1.0; geo.len()];
    assert!(c.generator().apply(&ones).iter().all(|v| v.abs() < 1e-13));
    // curved charts: the weighted sum vanishes
    for chart in [graph_chart(), SurfaceChart::torus(2.0, 0.7).unwrap()] {
        let geo = geometry(chart, 24, 20);
        let c = model(&geo, classical(0.2));
        for seed in [1, 2] {
            let u = noise(geo.len(), seed);
            let s = geo.integrate(&c.generator().apply(&u));
            assert!(s.abs() < 1e-12, "{s}");
        }
    }
}

#[test]
fn classical_total_number_is_conserved() {
    let geo = geometry(SurfaceChart::torus(2.0, 0.7).unwrap(), 24, 20);
    let c = model(&geo, classical(0.3));
    let phi: Vec<f64> = geo
        .nodes()
        .iter()
        .map(|n| (-((n.q[0] - PI).powi(2) + (n.q[1] - 2.0).powi(2)) / 0.3).exp())
        .collect();
    let mut s = FieldState::density(phi).unwrap();
    let q0 = total_charge(&s, &geo);
    let dt = 0.9 * c.stable_dt();
    for _ in 0..1000 {
        s = step(&c, &s, dt).unwrap();
    }
    assert!(((total_charge(&s, &geo) - q0) / q0).abs() < 1e-12);
    assert!((s.time - 1000.0 * dt).abs() < 1e-9);
}

#[test]
fn flat_variance_grows_linearly() {
    let chart = SurfaceChart::plane([[-10.0, 10.0], [-10.0, 10.0]], [true, true]).unwrap();
    let geo = geometry(chart, 80, 80);
    let d = 0.7;
    let c = model(&geo, classical(0.1));
    let sigma2 = 0.2;
    let phi: Vec<f64> = geo
        .nodes()
        .iter()
        .map(|n| (-(n.q[0].powi(2) + n.q[1].powi(2)) / (2.0 * sigma2)).exp())
        .collect();
    let variance = |s: &FieldState| {
        let rho = s.rho();
        let r2: Vec<f64> = geo.nodes().iter().zip(&rho).map(|(n, p)| (n.q[0].powi(2) + n.q[1].powi(2)) * p).collect();
        geo.integrate(&r2) / geo.integrate(&rho)
    };
    let mut s = FieldState::density(phi).unwrap();
    let v0 = variance(&s);
    let dt = 0.5 * c.stable_dt();
    let steps = 40;
    for _ in 0..steps {
        s = step(&c, &s, dt).unwrap();
    }
    let grown = variance(&s) - v0;
    let want = 4.0 * d * s.time;
    assert!((grown / want - 1.0).abs() < 1e-9, "{grown} {want}");
}

#[test]
fn quantum_norm_is_conserved() {
    let geo = geometry(SurfaceChart::torus(2.0, 0.7).unwrap(), 24, 16);
    let q = model(&geo, quantum(0.2));
    let phi: Vec<Complex64> = geo
        .nodes()
        .iter()
        .map(|n| Complex64::from_polar((-(n.q[1] - 1.0).powi(2)).exp() + 0.2, 2.0 * n.q[0]))
        .collect();
    let mut s = FieldState::amplitude(phi).unwrap();
    normalize(&mut s, &geo).unwrap();
    assert!((total_charge(&s, &geo) - 1.0).abs() < 1e-14);
    for _ in 0..100 {
        s = step(&q, &s, 0.01).unwrap();
    }
    assert!((total_charge(&s, &geo) - 1.0).abs() < 1e-11);
}

#[test]
fn flat_chart_has_no_geometric_flow() {
    let chart = SurfaceChart::plane([[0.0, 1.0], [0.0, 1.0]], [true, true]).unwrap();
    let geo = geometry(chart, 16, 16);
    let c = model(&geo, classical(0.3));
    let s = FieldState::density(noise(geo.len(), 5).iter().map(|v| v + 1.0).collect()).unwrap();
    assert_eq!(fluxes(&c, &s).unwrap().max_geometric(), 0.0);
    let q = model(&geo, quantum(0.3));
    let phi: Vec<Complex64> = noise(geo.len(), 6).iter().zip(noise(geo.len(), 7)).map(|(a, b)| Complex64::new(*a, b)).collect();
    let s = FieldState::amplitude(phi).unwrap();
    assert_eq!(fluxes(&q, &s).unwrap().max_geometric(), 0.0);
}

#[test]
fn sphere_classical_geometric_flow() {
    let a = 1.3;
    let geo = geometry(SurfaceChart::sphere(a, 0.3).unwrap(), 24, 24);
    let eps = 0.2;
    let c = model(&geo, classical(eps));
    let phi: Vec<f64> = geo.nodes().iter().map(|n| 2.0 + n.q[0].cos() * n.q[1].sin()).collect();
    let s = FieldState::density(phi).unwrap();
    let pair = fluxes(&c, &s).unwrap();
    let d_tilde = eps * eps * 0.7 / 12.0;
    // the bracket is −g^ij/a², so J_G = −(D̃/(D a²)) J
    for (jg, j) in pair.j_geometric.iter().zip(&pair.j) {
        for i in 0..2 {
            let want = -(d_tilde / (0.7 * a * a)) * j[i];
            assert!((jg[i] - want).abs() < 1e-12 * (1.0 + j[i].abs()), "{} {}", jg[i], want);
        }
    }
}

#[test]
fn cylinder_quantum_flow_ratio() {
    let (radius, eps) = (1.5, 0.3);
    let geo = geometry(SurfaceChart::cylinder(radius, 1.0).unwrap(), 32, 8);
    let q = model(&geo, quantum(eps));
    let phi: Vec<Complex64> = geo.nodes().iter().map(|n| Complex64::from_polar(0.3, 3.0 * n.q[0] / radius)).collect();
    let pair = fluxes(&q, &FieldState::amplitude(phi).unwrap()).unwrap();
    let want = 3.0 * epsilon_tilde_sq(eps, 1).unwrap() / radius.powi(2);
    for (jg, j) in pair.j_geometric.iter().zip(&pair.j) {
        assert!((jg[0] / j[0] - want).abs() < 1e-12 * want);
        assert_eq!(jg[1], 0.0);
    }
}

fn superposition(geo: &GeometryFields, radius: f64) -> Vec<Complex64> {
    geo.nodes()
        .iter()
        .map(|n| {
            let t = n.q[0] / radius;
            Complex64::from_polar(1.0, t) + Complex64::from_polar(0.6, 2.0 * t)
        })
        .collect()
}

#[test]
fn continuity_residual_converges_with_geometric_flow() {
    let radius = 1.0;
    let res = |n: usize, flows: Flows| {
        let geo = geometry(SurfaceChart::cylinder(radius, 1.0).unwrap(), n, 8);
        let q = model(&geo, quantum(0.1));
        let s = FieldState::amplitude(superposition(&geo, radius)).unwrap();
        continuity_residual(&q, &s, TimeDerivative::Instantaneous, flows).unwrap()
    };
    let (a, b) = (res(256, Flows::Full), res(512, Flows::Full));
    assert!(a.max / b.max >= 3.5, "{} {}", a.max, b.max);
    let (c, d) = (res(256, Flows::WithoutGeometric), res(512, Flows::WithoutGeometric));
    assert!(d.max > 10.0 * b.max && (c.max / d.max) < 1.5);
}

#[test]
fn central_time_derivative_matches_instantaneous() {
    let geo = geometry(SurfaceChart::cylinder(1.0, 1.0).unwrap(), 32, 8);
    let q = model(&geo, quantum(0.1));
    let s = FieldState::amplitude(superposition(&geo, 1.0)).unwrap();
    let inst = continuity_residual(&q, &s, TimeDerivative::Instantaneous, Flows::Full).unwrap();
    let cen = continuity_residual(&q, &s, TimeDerivative::Central { dt: 1e-4 }, Flows::Full).unwrap();
    let diff = inst.field.iter().zip(&cen.field).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(diff < 1e-6, "{diff}");
    let c = model(&geo, classical(0.1));
    let s = FieldState::density(geo.nodes().iter().map(|n| 2.0 + n.q[0].sin()).collect()).unwrap();
    let inst = continuity_residual(&c, &s, TimeDerivative::Instantaneous, Flows::Full).unwrap();
    let cen = continuity_residual(&c, &s, TimeDerivative::Central { dt: 1e-3 }, Flows::Full).unwrap();
    let diff = inst.field.iter().zip(&cen.field).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(diff < 1e-6, "{diff}");
}

#[test]
fn implicit_euler_conserves_to_solver_tolerance() {
    let geo = geometry(graph_chart(), 20, 20);
    let c = model(&geo, classical(0.2)).with_scheme(ClassicalScheme::ImplicitEuler);
    let phi: Vec<f64> = geo.nodes().iter().map(|n| 1.5 + n.q[0].sin() * n.q[1].cos()).collect();
    let mut s = FieldState::density(phi).unwrap();
    let q0 = total_charge(&s, &geo);
    let dt = 20.0 * c.stable_dt();
    for _ in 0..10 {
        s = step(&c, &s, dt).unwrap();
    }
    assert!(((total_charge(&s, &geo) - q0) / q0).abs() < 1e-10);
}

#[test]
fn errors_are_reported() {
    let geo = geometry(SurfaceChart::cylinder(1.0, 1.0).unwrap(), 16, 8);
    let c = model(&geo, classical(0.1));
    let s = FieldState::density(vec![1.0; geo.len()]).unwrap();
    assert!(matches!(step(&c, &s, 10.0 * c.stable_dt()), Err(EvolveError::CflViolation { .. })));
    assert!(matches!(step(&c, &s, -1.0), Err(EvolveError::InvalidParameter(_))));
    let q = model(&geo, quantum(0.1));
    assert!(matches!(step(&q, &s, 0.1), Err(EvolveError::KindMismatch(_))));
    let pot = curvature_potentials(&geo).unwrap();
    assert!(matches!(
        build_model(geo.clone(), &pot, quantum(1.5)),
        Err(EvolveError::ThinLayer(_))
    ));
    assert!(FieldState::density(vec![-1.0]).is_err());
}
