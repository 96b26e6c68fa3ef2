use num_complex::Complex64;

use super::model::{ClassicalScheme, EffectiveModel, ModelKind};
use super::solver::{bicgstab, conjugate_gradient, SolveStats};
use super::state::{FieldState, FieldValues};
use super::EvolveError;

/// Advances `state` by `dt > 0`.
///
/// Quantum models take one Crank–Nicolson (implicit midpoint) step, which is
/// unitary in the `√g`-weighted norm. Classical models use RK4, rejecting
/// steps above [`EffectiveModel::stable_dt`], or backward Euler.
pub fn step(model: &EffectiveModel, state: &FieldState, dt: f64) -> Result<FieldState, EvolveError> {
    step_with_stats(model, state, dt).map(|(s, _)| s)
}

/// [`step`] that also reports the linear solve, when there is one.
pub fn step_with_stats(
    model: &EffectiveModel,
    state: &FieldState,
    dt: f64,
) -> Result<(FieldState, Option<SolveStats>), EvolveError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(EvolveError::InvalidParameter(format!("time step must be positive, got {dt}")));
    }
    advance(model, state, dt)
}

/// Signed step; negative `dt` is used for central time differences.
pub(crate) fn advance(
    model: &EffectiveModel,
    state: &FieldState,
    dt: f64,
) -> Result<(FieldState, Option<SolveStats>), EvolveError> {
    model.geometry().grid().check_len(state.len())?;
    let (values, stats) = match (&state.values, model.kind()) {
        (FieldValues::Amplitude(phi), ModelKind::Quantum) => {
            let (next, stats) = crank_nicolson(model, phi, dt)?;
            (FieldValues::Amplitude(next), Some(stats))
        }
        (FieldValues::Density(phi), ModelKind::Classical) => match model.scheme() {
            ClassicalScheme::Rk4 => {
                let limit = model.stable_dt();
                if dt.abs() > limit {
                    return Err(EvolveError::CflViolation { dt, limit });
                }
                (FieldValues::Density(rk4(model, phi, dt)), None)
            }
            ClassicalScheme::ImplicitEuler => {
                let (next, stats) = implicit_euler(model, phi, dt)?;
                (FieldValues::Density(next), Some(stats))
            }
        },
        (FieldValues::Density(_), ModelKind::Quantum) => return Err(EvolveError::KindMismatch("quantum model, density state")),
        (FieldValues::Amplitude(_), ModelKind::Classical) => {
            return Err(EvolveError::KindMismatch("classical model, amplitude state"))
        }
    };
    Ok((
        FieldState {
            values,
            time: state.time + dt,
        },
        stats,
    ))
}

fn rk4(model: &EffectiveModel, phi: &[f64], dt: f64) -> Vec<f64> {
    let l = model.generator();
    let stage = |base: &[f64], k: &[f64], c: f64| -> Vec<f64> { base.iter().zip(k).map(|(b, k)| b + c * k).collect() };
    let k1 = l.apply(phi);
    let k2 = l.apply(&stage(phi, &k1, 0.5 * dt));
    let k3 = l.apply(&stage(phi, &k2, 0.5 * dt));
    let k4 = l.apply(&stage(phi, &k3, dt));
    (0..phi.len())
        .map(|i| phi[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

fn implicit_euler(model: &EffectiveModel, phi: &[f64], dt: f64) -> Result<(Vec<f64>, SolveStats), EvolveError> {
    let l = model.generator();
    let diag: Vec<f64> = l.diagonal().iter().map(|d| 1.0 - dt * d).collect();
    let apply = |x: &[f64]| -> Vec<f64> { x.iter().zip(l.apply(x)).map(|(x, lx)| x - dt * lx).collect() };
    let mut x = phi.to_vec();
    let opts = model.solver();
    let stats = bicgstab(apply, &diag, phi, &mut x, opts.tol, opts.max_iter);
    if !stats.converged {
        return Err(EvolveError::SolverDivergence {
            iterations: stats.iterations,
            residual: stats.relative_residual,
        });
    }
    Ok((x, stats))
}

/// One Crank–Nicolson step `(I + iτH) φ⁺ = (I − iτH) φ`, `τ = dt/(2ħ)`.
///
/// Solved as `(I + τ²H²) φ⁺ = (I − iτH)² φ`: `H` is self-adjoint in the
/// `√g`-weighted inner product, so the left side is positive definite there
/// and plain conjugate gradient applies.
fn crank_nicolson(
    model: &EffectiveModel,
    phi: &[Complex64],
    dt: f64,
) -> Result<(Vec<Complex64>, SolveStats), EvolveError> {
    let h = model.generator();
    let w = model.geometry().sqrt_g();
    let tau = dt / (2.0 * model.hbar());
    let i_tau = Complex64::new(0.0, tau);
    let hphi = h.apply(phi);
    let hhphi = h.apply(&hphi);
    let rhs: Vec<Complex64> = (0..phi.len())
        .map(|k| phi[k] - i_tau * hphi[k] * 2.0 - hhphi[k] * (tau * tau))
        .collect();
    let apply = |x: &[Complex64]| -> Vec<Complex64> {
        let hhx = h.apply(&h.apply(x));
        x.iter().zip(&hhx).map(|(x, y)| x + y * (tau * tau)).collect()
    };
    let mut x = phi.to_vec();
    let opts = model.solver();
    let stats = conjugate_gradient(apply, &w, &rhs, &mut x, opts.tol, opts.max_iter);
    if !stats.converged {
        return Err(EvolveError::SolverDivergence {
            iterations: stats.iterations,
            residual: stats.relative_residual,
        });
    }
    Ok((x, stats))
}
