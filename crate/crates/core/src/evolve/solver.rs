//! Krylov solvers for the implicit time steps.

use num_complex::Complex64;

/// Outcome of an iterative solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// Final `‖b − Ax‖ / ‖b‖`.
    pub relative_residual: f64,
    pub converged: bool,
}

/// Conjugate gradient for `K x = b` with `K` self-adjoint and positive
/// definite in the inner product `⟨x, y⟩ = Σ wₖ x̄ₖ yₖ`. `x` holds the initial
/// guess on entry. Convergence is measured in the same weighted norm.
pub fn conjugate_gradient(
    apply: impl Fn(&[Complex64]) -> Vec<Complex64>,
    weights: &[f64],
    b: &[Complex64],
    x: &mut [Complex64],
    tol: f64,
    max_iter: usize,
) -> SolveStats {
    let ip = |u: &[Complex64], v: &[Complex64]| -> Complex64 {
        u.iter().zip(v).zip(weights).map(|((u, v), w)| u.conj() * v * w).sum()
    };
    let bnorm = ip(b, b).re.sqrt().max(f64::MIN_POSITIVE);
    let kx = apply(x);
    let mut r: Vec<Complex64> = b.iter().zip(&kx).map(|(b, k)| b - k).collect();
    let mut p = r.clone();
    let mut rho = ip(&r, &r).re;
    let mut it = 0;
    while rho.sqrt() / bnorm > tol && it < max_iter {
        let q = apply(&p);
        let pq = ip(&p, &q).re;
        if !(pq > 0.0) {
            break;
        }
        let alpha = rho / pq;
        for k in 0..x.len() {
            x[k] += p[k] * alpha;
            r[k] -= q[k] * alpha;
        }
        it += 1;
        let rho_next = ip(&r, &r).re;
        let beta = rho_next / rho;
        rho = rho_next;
        for k in 0..p.len() {
            p[k] = r[k] + p[k] * beta;
        }
    }
    // report the true residual, not the recurrence
    let kx = apply(x);
    let res: Vec<Complex64> = b.iter().zip(&kx).map(|(b, k)| b - k).collect();
    let true_rel = ip(&res, &res).re.sqrt() / bnorm;
    SolveStats {
        iterations: it,
        relative_residual: true_rel,
        converged: true_rel <= tol * 10.0,
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Jacobi-preconditioned BiCGSTAB for real nonsymmetric systems.
pub fn bicgstab(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    diagonal: &[f64],
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> SolveStats {
    let n = b.len();
    let bnorm = dot(b, b).sqrt().max(f64::MIN_POSITIVE);
    let ax = apply(x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut rel = dot(&r, &r).sqrt() / bnorm;
    let mut it = 0;
    while rel > tol && it < max_iter {
        let rho_next = dot(&r_hat, &r);
        if rho_next == 0.0 || omega == 0.0 {
            break;
        }
        let beta = (rho_next / rho) * (alpha / omega);
        rho = rho_next;
        for k in 0..n {
            p[k] = r[k] + beta * (p[k] - omega * v[k]);
        }
        let y: Vec<f64> = p.iter().zip(diagonal).map(|(p, d)| p / d).collect();
        v = apply(&y);
        let denom = dot(&r_hat, &v);
        if denom == 0.0 {
            break;
        }
        alpha = rho / denom;
        let s: Vec<f64> = r.iter().zip(&v).map(|(r, v)| r - alpha * v).collect();
        it += 1;
        if dot(&s, &s).sqrt() / bnorm <= tol {
            for k in 0..n {
                x[k] += alpha * y[k];
            }
            break;
        }
        let zs: Vec<f64> = s.iter().zip(diagonal).map(|(s, d)| s / d).collect();
        let t = apply(&zs);
        let tt = dot(&t, &t);
        omega = if tt == 0.0 { 0.0 } else { dot(&t, &s) / tt };
        for k in 0..n {
            x[k] += alpha * y[k] + omega * zs[k];
            r[k] = s[k] - omega * t[k];
        }
        rel = dot(&r, &r).sqrt() / bnorm;
    }
    let ax = apply(x);
    let true_rel = b.iter().zip(&ax).map(|(b, a)| (b - a).powi(2)).sum::<f64>().sqrt() / bnorm;
    SolveStats {
        iterations: it,
        relative_residual: true_rel,
        converged: true_rel <= tol * 10.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weighted_cg_solves_self_adjoint_system() {
        // K = W⁻¹ T with T symmetric positive definite is W-self-adjoint
        let n = 120;
        let w: Vec<f64> = (0..n).map(|k| 1.0 + 0.5 * (k as f64).sin()).collect();
        let apply = |x: &[Complex64]| -> Vec<Complex64> {
            (0..n)
                .map(|k| {
                    let mut v = x[k] * 3.0;
                    if k > 0 {
                        v -= x[k - 1];
                    }
                    if k + 1 < n {
                        v -= x[k + 1];
                    }
                    v / w[k]
                })
                .collect()
        };
        let want: Vec<Complex64> = (0..n).map(|k| Complex64::from_polar(1.0, 2.0 * k as f64)).collect();
        let b = apply(&want);
        let mut x = vec![Complex64::default(); n];
        let st = conjugate_gradient(apply, &w, &b, &mut x, 1e-14, 1000);
        assert!(st.converged, "{st:?}");
        let err = x.iter().zip(&want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn bicgstab_solves_nonsymmetric() {
        let n = 150;
        let apply = |x: &[f64]| -> Vec<f64> {
            (0..n)
                .map(|k| {
                    let mut v = 3.0 * x[k];
                    if k > 0 {
                        v -= 1.3 * x[k - 1];
                    }
                    if k + 1 < n {
                        v -= 0.7 * x[k + 1];
                    }
                    v
                })
                .collect()
        };
        let want: Vec<f64> = (0..n).map(|k| (0.1 * k as f64).cos()).collect();
        let b = apply(&want);
        let mut x = vec![0.0; n];
        let st = bicgstab(apply, &vec![3.0; n], &b, &mut x, 1e-13, 1000);
        assert!(st.converged, "{st:?}");
        let err = x.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-11);
    }
}
