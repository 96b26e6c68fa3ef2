use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::evolve::{
    build_model, continuity_residual, normalize, step, total_charge, EvolveError, FieldState, FieldValues, Flows,
    Physics, TimeDerivative,
};
use crate::geometry::{compute_geometry, GeometryFields, Grid2D};
use crate::ribbon::{eigen_perturbation_check, RibbonError, RibbonReport};
use crate::thin_layer::curvature_potentials;
use crate::transverse::{epsilon_tilde_sq, mode};

use super::config::{Command, InitialKind, PhysicsKind, RunConfig};
use super::output::{num, Artifact};
use super::CliError;

/// What a run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// One-line summary for the terminal.
    pub summary: String,
    pub artifacts: Vec<PathBuf>,
}

pub fn run(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    match cfg.command {
        Command::Geometry => run_geometry(cfg, out),
        Command::Modes => run_modes(cfg, out),
        Command::Evolve => run_evolve(cfg, out),
        Command::Ribbon => run_ribbon(cfg, out),
        Command::Eigencheck => run_eigencheck(cfg, out),
    }
}

fn artifact(cfg: &RunConfig, out: &Path, name: &str, columns: &[&str]) -> Result<Artifact, CliError> {
    Artifact::create(out, name, cfg.command.name(), &cfg.resolved, columns)
}

fn surface(cfg: &RunConfig) -> Result<Arc<GeometryFields>, CliError> {
    if let Some(geo) = &cfg.geometry {
        return Ok(geo.clone());
    }
    let grid = Grid2D::new(&cfg.chart, cfg.grid[0], cfg.grid[1]).map_err(|e| CliError::Validation(vec![e.to_string()]))?;
    let geo = compute_geometry(&cfg.chart, &grid).map_err(|e| CliError::Validation(vec![e.to_string()]))?;
    Ok(Arc::new(geo))
}

fn run_geometry(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let geo = surface(cfg)?;
    let pot = curvature_potentials(&geo).map_err(|e| CliError::Numerical(e.to_string()))?;
    let mut g = artifact(
        cfg,
        out,
        "geometry.csv",
        &["i", "j", "q1", "q2", "g11", "g12", "g22", "sqrtg", "k11", "k12", "k22", "kmean", "Rgauss"],
    )?;
    let mut p = artifact(
        cfg,
        out,
        "potentials.csv",
        &[
            "i", "j", "q1", "q2", "V0", "V1", "V2", "a1_11", "a1_12", "a1_22", "a2_11", "a2_12", "a2_22",
        ],
    )?;
    for (k, n) in geo.nodes().iter().enumerate() {
        let (i, j) = geo.grid().ij(k);
        let head = [i.to_string(), j.to_string(), num(n.q[0]), num(n.q[1])];
        let geo_row = [
            n.metric.xx,
            n.metric.xy,
            n.metric.yy,
            n.sqrt_g,
            n.kappa.xx,
            n.kappa.xy,
            n.kappa.yy,
            n.mean_curvature,
            n.gauss,
        ];
        g.row(head.iter().cloned().chain(geo_row.iter().map(|x| num(*x))))?;
        let (a1, a2) = (pot.a1[k], pot.a2[k]);
        let pot_row = [pot.v0[k], pot.v1[k], pot.v2[k], a1.xx, a1.xy, a1.yy, a2.xx, a2.xy, a2.yy];
        p.row(head.into_iter().chain(pot_row.iter().map(|x| num(*x))))?;
    }
    let artifacts = vec![g.finish()?, p.finish()?];
    Ok(Outcome {
        summary: format!(
            "geometry: {} nodes, area {:.6e}, max|kappa| {:.6e}, max curvature identity residual {:.3e}",
            geo.len(),
            geo.area(),
            geo.max_principal_curvature(),
            geo.max_identity_residual()
        ),
        artifacts,
    })
}

fn run_modes(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let mut a = artifact(cfg, out, "modes.csv", &["N", "E_N", "xi2", "eps_tilde_sq_over_eps_sq"])?;
    for level in 1..=cfg.max_level {
        let m = mode(level).map_err(|e| CliError::Validation(vec![e.to_string()]))?;
        let et = epsilon_tilde_sq(1.0, level).map_err(|e| CliError::Validation(vec![e.to_string()]))?;
        a.row([level.to_string(), num(m.energy()), num(m.xi2_moment()), num(et)])?;
    }
    Ok(Outcome {
        summary: format!("modes: levels 1..={}", cfg.max_level),
        artifacts: vec![a.finish()?],
    })
}

fn numerical(e: EvolveError) -> CliError {
    match e {
        EvolveError::CflViolation { .. } | EvolveError::SolverDivergence { .. } => CliError::Numerical(e.to_string()),
        other => CliError::Validation(vec![other.to_string()]),
    }
}

/// Displacement from `c` to `q`, taking the nearest image on periodic axes.
fn offset(geo: &GeometryFields, q: [f64; 2], c: [f64; 2]) -> [f64; 2] {
    let grid = geo.grid();
    let dom = grid.domain();
    let per = grid.periodic();
    [0, 1].map(|a| {
        let mut d = q[a] - c[a];
        if per[a] {
            let period = dom[a][1] - dom[a][0];
            d -= period * (d / period).round();
        }
        d
    })
}

fn initial_state(cfg: &RunConfig, geo: &GeometryFields) -> Result<FieldState, CliError> {
    let profile: Vec<f64> = geo
        .nodes()
        .iter()
        .map(|n| match cfg.initial {
            InitialKind::Gaussian { center, width } => {
                let d = offset(geo, n.q, center);
                let r2 = d[0] * d[0] + d[1] * d[1];
                match cfg.physics_kind {
                    PhysicsKind::Classical => (-r2 / (2.0 * width * width)).exp(),
                    // |φ|² is then a gaussian of the same width
                    PhysicsKind::Quantum => (-r2 / (4.0 * width * width)).exp(),
                }
            }
            InitialKind::PlaneWave | InitialKind::Uniform => 1.0,
        })
        .collect();
    let mut state = match cfg.physics_kind {
        PhysicsKind::Classical => FieldState::density(profile),
        PhysicsKind::Quantum => {
            let k = cfg.momentum;
            let amp = geo
                .nodes()
                .iter()
                .zip(&profile)
                .map(|(n, a)| Complex64::from_polar(*a, k[0] * n.q[0] + k[1] * n.q[1]))
                .collect();
            FieldState::amplitude(amp)
        }
    }
    .map_err(numerical)?;
    match &mut state.values {
        FieldValues::Amplitude(_) => normalize(&mut state, geo).map_err(numerical)?,
        FieldValues::Density(rho) => {
            let total = geo.integrate(rho);
            if !(total > 0.0) {
                return Err(CliError::Numerical("initial density has no mass on the grid".into()));
            }
            rho.iter_mut().for_each(|x| *x /= total);
        }
    }
    Ok(state)
}

fn run_evolve(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let geo = surface(cfg)?;
    let pot = curvature_potentials(&geo).map_err(|e| CliError::Numerical(e.to_string()))?;
    let physics = match cfg.physics_kind {
        PhysicsKind::Classical => Physics::Classical {
            diffusion: cfg.diffusion,
            eps: cfg.eps,
        },
        PhysicsKind::Quantum => Physics::Quantum {
            mass: cfg.mass,
            hbar: cfg.hbar,
            eps: cfg.eps,
            level: cfg.level,
            potential: cfg.potential.clone(),
        },
    };
    let model = build_model(geo.clone(), &pot, physics)
        .map_err(numerical)?
        .with_scheme(cfg.scheme)
        .with_solver(cfg.solver);
    let mut state = initial_state(cfg, &geo)?;
    let mut log = artifact(
        cfg,
        out,
        "evolve.csv",
        &[
            "t",
            "total_charge",
            "norm",
            "max_continuity_residual",
            "l2_continuity_residual",
        ],
    )?;
    let mut artifacts = Vec::new();
    let q0 = total_charge(&state, &geo);
    let (mut drift, mut worst) = (0.0_f64, 0.0_f64);
    for n in 0..=cfg.steps {
        if n > 0 {
            state = step(&model, &state, cfg.dt).map_err(numerical)?;
        }
        let q = total_charge(&state, &geo);
        let norm = match &state.values {
            FieldValues::Density(rho) => geo.integrate(&rho.iter().map(|x| x * x).collect::<Vec<_>>()).sqrt(),
            FieldValues::Amplitude(_) => q.sqrt(),
        };
        let res = continuity_residual(&model, &state, TimeDerivative::Instantaneous, Flows::Full).map_err(numerical)?;
        drift = drift.max((q - q0).abs());
        worst = worst.max(res.max);
        log.row([num(state.time), num(q), num(norm), num(res.max), num(res.l2)])?;
        if cfg.snapshot_stride > 0 && n % cfg.snapshot_stride == 0 {
            artifacts.push(snapshot(cfg, out, &geo, &state, n)?);
        }
    }
    artifacts.insert(0, log.finish()?);
    Ok(Outcome {
        summary: format!(
            "evolve: {} steps to t = {:.6e}, total_charge drift {:.3e}, max continuity residual {:.3e}",
            cfg.steps, state.time, drift, worst
        ),
        artifacts,
    })
}

fn snapshot(cfg: &RunConfig, out: &Path, geo: &GeometryFields, state: &FieldState, n: usize) -> Result<PathBuf, CliError> {
    let name = format!("snapshot_{n:06}.csv");
    let rho = state.rho();
    match &state.values {
        FieldValues::Density(_) => {
            let mut a = artifact(cfg, out, &name, &["i", "j", "q1", "q2", "rho"])?;
            for (k, node) in geo.nodes().iter().enumerate() {
                let (i, j) = geo.grid().ij(k);
                a.row([i.to_string(), j.to_string(), num(node.q[0]), num(node.q[1]), num(rho[k])])?;
            }
            a.finish()
        }
        FieldValues::Amplitude(phi) => {
            let mut a = artifact(cfg, out, &name, &["i", "j", "q1", "q2", "rho", "re", "im"])?;
            for (k, node) in geo.nodes().iter().enumerate() {
                let (i, j) = geo.grid().ij(k);
                a.row([
                    i.to_string(),
                    j.to_string(),
                    num(node.q[0]),
                    num(node.q[1]),
                    num(rho[k]),
                    num(phi[k].re),
                    num(phi[k].im),
                ])?;
            }
            a.finish()
        }
    }
}

fn ribbon_error(e: RibbonError) -> CliError {
    match e {
        RibbonError::NonMonotoneResidual { .. } | RibbonError::Bracket { .. } => CliError::Numerical(e.to_string()),
        other => CliError::Validation(vec![other.to_string()]),
    }
}

fn ratio(r: &RibbonReport) -> String {
    r.resid_ratio.map(num).unwrap_or_default()
}

fn min_ratio(rows: &[RibbonReport]) -> f64 {
    rows.iter().filter_map(|r| r.resid_ratio).fold(f64::INFINITY, f64::min)
}

fn run_ribbon(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let rows = eigen_perturbation_check(&cfg.ribbon, &cfg.ribbon_eps).map_err(ribbon_error)?;
    let mut a = artifact(
        cfg,
        out,
        "ribbon.csv",
        &[
            "eps",
            "weight_exact",
            "weight_expansion",
            "weight_err",
            "E_exact",
            "E_pert",
            "E_resid",
            "resid_ratio",
        ],
    )?;
    for r in &rows {
        a.row([
            num(r.eps),
            num(r.weight_exact),
            num(r.weight_expansion),
            num(r.weight_err),
            num(r.e_exact),
            num(r.e_pert),
            num(r.e_resid),
            ratio(r),
        ])?;
    }
    let worst = rows.iter().fold(0.0, |m: f64, r| m.max(r.weight_err));
    Ok(Outcome {
        summary: format!(
            "ribbon: {} thicknesses, max weight error {:.3e}, min residual ratio {:.3}",
            rows.len(),
            worst,
            min_ratio(&rows)
        ),
        artifacts: vec![a.finish()?],
    })
}

fn run_eigencheck(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let cases: Vec<(i64, i64)> = cfg
        .m_waves
        .iter()
        .flat_map(|&m| cfg.levels.iter().map(move |&n| (m, n)))
        .collect();
    let sweeps: Vec<Vec<RibbonReport>> = cases
        .par_iter()
        .map(|&(m_wave, level)| {
            let spec = crate::ribbon::RibbonSpec {
                m_wave,
                level,
                ..cfg.ribbon
            };
            eigen_perturbation_check(&spec, &cfg.ribbon_eps)
        })
        .collect::<Result<_, _>>()
        .map_err(ribbon_error)?;
    let mut a = artifact(
        cfg,
        out,
        "eigencheck.csv",
        &[
            "m_wave",
            "N",
            "eps",
            "E_exact",
            "E_fd",
            "E_pert",
            "E_resid",
            "resid_ratio",
            "nodes",
        ],
    )?;
    let mut worst = f64::INFINITY;
    for (&(m_wave, level), rows) in cases.iter().zip(&sweeps) {
        worst = worst.min(min_ratio(rows));
        for r in rows {
            a.row([
                m_wave.to_string(),
                level.to_string(),
                num(r.eps),
                num(r.e_exact),
                num(r.e_fd),
                num(r.e_pert),
                num(r.e_resid),
                ratio(r),
                r.nodes.to_string(),
            ])?;
        }
    }
    Ok(Outcome {
        summary: format!("eigencheck: {} cases, min residual ratio {:.3}", cases.len(), worst),
        artifacts: vec![a.finish()?],
    })
}
