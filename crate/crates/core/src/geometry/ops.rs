//! Conservative finite-difference operators on a structured surface grid.
//!
//! Divergence-form operators `(1/√g) ∂ᵢ(√g Aⁱʲ ∂ⱼ u)` use compact face
//! differences for the diagonal part and cell-corner differences for the mixed
//! part. This is the gradient of a discrete symmetric energy, so `√g L` is a
//! symmetric matrix whose rows and columns sum to zero: the operator is
//! self-adjoint under the `√g`-weighted inner product and its `√g`-weighted
//! grid sum telescopes to zero on periodic grids.

use std::ops::{AddAssign, Mul};

use super::fields::GeometryFields;
use super::grid::{Ghost, Grid2D};
use super::tensor::Sym2;
use super::GeometryError;

/// Neighbour offsets in stencil slot order.
pub const OFFSETS: [(isize, isize); 9] = [
    (0, 0),
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (-1, 1),
    (1, -1),
    (-1, -1),
];

const GHOST: usize = usize::MAX;

/// Linear nine-point operator on a grid. Ghost neighbours read as zero.
#[derive(Debug, Clone)]
pub struct StencilOperator {
    grid: Grid2D,
    neighbors: Vec<[usize; 9]>,
    rows: Vec<[f64; 9]>,
}

impl StencilOperator {
    pub fn zeros(grid: &Grid2D) -> Self {
        let [n1, n2] = grid.shape();
        let mut neighbors = Vec::with_capacity(grid.len());
        for j in 0..n2 {
            for i in 0..n1 {
                neighbors.push(OFFSETS.map(|(di, dj)| grid.neighbor(i, j, di, dj).unwrap_or(GHOST)));
            }
        }
        Self {
            grid: grid.clone(),
            neighbors,
            rows: vec![[0.0; 9]; grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn rows(&self) -> &[[f64; 9]] {
        &self.rows
    }

    pub fn neighbors(&self) -> &[[usize; 9]] {
        &self.neighbors
    }

    /// Adds `coeff` to the entry for slot `slot` of `row`. Small grids can map
    /// two slots onto the same node; the application sums them, as it should.
    fn add_entry(&mut self, row: usize, slot: usize, coeff: f64) {
        self.rows[row][slot] += coeff;
    }

    pub fn add_diagonal(&mut self, d: &[f64]) {
        for (row, v) in self.rows.iter_mut().zip(d) {
            row[0] += v;
        }
    }

    pub fn scale(&mut self, s: f64) {
        for row in &mut self.rows {
            for c in row.iter_mut() {
                *c *= s;
            }
        }
    }

    pub fn add_scaled(&mut self, other: &StencilOperator, s: f64) {
        assert_eq!(self.rows.len(), other.rows.len(), "operator size mismatch");
        for (a, b) in self.rows.iter_mut().zip(&other.rows) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += s * y;
            }
        }
    }

    pub fn apply<T>(&self, u: &[T]) -> Vec<T>
    where
        T: Copy + Default + AddAssign + Mul<f64, Output = T>,
    {
        assert_eq!(u.len(), self.rows.len(), "field size mismatch");
        self.rows
            .iter()
            .zip(&self.neighbors)
            .map(|(row, nb)| {
                let mut acc = T::default();
                for (c, &k) in row.iter().zip(nb) {
                    if k != GHOST && *c != 0.0 {
                        acc += u[k] * *c;
                    }
                }
                acc
            })
            .collect()
    }

    /// Application with ghost values reconstructed by `ghost` instead of zero.
    pub fn apply_with_ghosts(&self, u: &[f64], ghost: Ghost) -> Vec<f64> {
        if ghost == Ghost::Zero || self.grid.is_fully_periodic() {
            return self.apply(u);
        }
        let grid = &self.grid;
        (0..self.rows.len())
            .map(|r| {
                let (i, j) = grid.ij(r);
                self.rows[r]
                    .iter()
                    .zip(OFFSETS)
                    .map(|(c, (di, dj))| c * grid.sample(u, i as isize + di, j as isize + dj, ghost))
                    .sum()
            })
            .collect()
    }

    /// Gershgorin bound on the spectral radius.
    pub fn gershgorin_bound(&self) -> f64 {
        self.rows
            .iter()
            .zip(&self.neighbors)
            .map(|(row, nb)| {
                row.iter()
                    .zip(nb)
                    .filter(|(_, &k)| k != GHOST)
                    .map(|(c, _)| c.abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Diagonal entries (with any wrapped self-references folded in).
    pub fn diagonal(&self) -> Vec<f64> {
        self.rows
            .iter()
            .zip(&self.neighbors)
            .enumerate()
            .map(|(r, (row, nb))| row.iter().zip(nb).filter(|(_, &k)| k == r).map(|(c, _)| c).sum())
            .collect()
    }

    /// Largest `|w_a L_ab − w_b L_ba|` over all entries, for weights `w`.
    /// Zero means `L` is self-adjoint in the `w`-weighted inner product.
    pub fn weighted_asymmetry(&self, weights: &[f64]) -> f64 {
        let n = self.rows.len();
        let mut dense = std::collections::HashMap::new();
        for r in 0..n {
            for (c, &k) in self.rows[r].iter().zip(&self.neighbors[r]) {
                if k != GHOST {
                    *dense.entry((r, k)).or_insert(0.0) += c;
                }
            }
        }
        dense
            .iter()
            .map(|(&(a, b), &v)| {
                let t = dense.get(&(b, a)).copied().unwrap_or(0.0);
                (weights[a] * v - weights[b] * t).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Builds `u ↦ (1/√g) ∂ᵢ(√g Aⁱʲ ∂ⱼ u)` for a nodal contravariant tensor field `A`.
///
/// Face coefficients are midpoint averages of `√g Aⁱʲ`; corner coefficients
/// average the four surrounding nodes. Coefficients beyond a Dirichlet edge
/// are extrapolated; field values there are zero.
pub fn divergence_form_operator(
    geo: &GeometryFields,
    tensor: &[Sym2],
) -> Result<StencilOperator, GeometryError> {
    let grid = geo.grid();
    grid.check_len(tensor.len())?;
    let sg = geo.sqrt_g();
    let c11: Vec<f64> = tensor.iter().zip(&sg).map(|(a, s)| s * a.xx).collect();
    let c12: Vec<f64> = tensor.iter().zip(&sg).map(|(a, s)| s * a.xy).collect();
    let c22: Vec<f64> = tensor.iter().zip(&sg).map(|(a, s)| s * a.yy).collect();
    let [h1, h2] = grid.spacing();
    let [n1, n2] = grid.shape();
    let at = |f: &[f64], i: isize, j: isize| grid.sample(f, i, j, Ghost::Extrapolate);

    let mut op = StencilOperator::zeros(grid);
    for j in 0..n2 {
        for i in 0..n1 {
            let (ii, jj) = (i as isize, j as isize);
            let r = grid.index(i, j);
            let e = 0.5 * (at(&c11, ii, jj) + at(&c11, ii + 1, jj)) / (h1 * h1);
            let w = 0.5 * (at(&c11, ii, jj) + at(&c11, ii - 1, jj)) / (h1 * h1);
            let n = 0.5 * (at(&c22, ii, jj) + at(&c22, ii, jj + 1)) / (h2 * h2);
            let s = 0.5 * (at(&c22, ii, jj) + at(&c22, ii, jj - 1)) / (h2 * h2);
            op.add_entry(r, 1, e);
            op.add_entry(r, 2, w);
            op.add_entry(r, 3, n);
            op.add_entry(r, 4, s);
            op.add_entry(r, 0, -(e + w + n + s));
            // corners (i+σ/2, j+τ/2): −στ c/(2h₁h₂) (u_ij − u_{i+σ,j+τ})
            for (slot, (si, sj)) in [(5, (1, 1)), (6, (-1, 1)), (7, (1, -1)), (8, (-1, -1))] {
                let c = 0.25
                    * (at(&c12, ii, jj)
                        + at(&c12, ii + si, jj)
                        + at(&c12, ii, jj + sj)
                        + at(&c12, ii + si, jj + sj));
                let k = (si * sj) as f64 * c / (2.0 * h1 * h2);
                op.add_entry(r, slot, k);
                op.add_entry(r, 0, -k);
            }
            let inv = 1.0 / sg[r];
            for v in op.rows[r].iter_mut() {
                *v *= inv;
            }
        }
    }
    Ok(op)
}

/// Builds `u ↦ (1/√g) ∂ᵢ(√g bⁱ u)` with centred differences of the nodal
/// product, for a nodal contravariant vector field `b`.
pub fn centered_drift_operator(
    geo: &GeometryFields,
    vector: &[[f64; 2]],
) -> Result<StencilOperator, GeometryError> {
    let grid = geo.grid();
    grid.check_len(vector.len())?;
    let sg = geo.sqrt_g();
    let [h1, h2] = grid.spacing();
    let mut op = StencilOperator::zeros(grid);
    for r in 0..grid.len() {
        let nb = op.neighbors[r];
        let inv = 1.0 / sg[r];
        for (slot, axis, sign, h) in [(1, 0, 1.0, h1), (2, 0, -1.0, h1), (3, 1, 1.0, h2), (4, 1, -1.0, h2)] {
            let k = nb[slot];
            if k != GHOST {
                op.add_entry(r, slot, inv * sign * sg[k] * vector[k][axis] / (2.0 * h));
            }
        }
    }
    Ok(op)
}

/// Laplace–Beltrami operator `g^{-1/2} ∂ᵢ(g^{1/2} g^ij ∂ⱼ f)` with
/// homogeneous Dirichlet ghosts on non-periodic axes.
pub fn laplace_beltrami(geo: &GeometryFields, f: &[f64]) -> Result<Vec<f64>, GeometryError> {
    geo.grid().check_len(f.len())?;
    Ok(divergence_form_operator(geo, &geo.inv_metric())?.apply(f))
}

/// Laplace–Beltrami of a geometric coefficient field (extrapolated ghosts).
pub(crate) fn laplace_beltrami_coefficient(geo: &GeometryFields, f: &[f64]) -> Result<Vec<f64>, GeometryError> {
    geo.grid().check_len(f.len())?;
    Ok(divergence_form_operator(geo, &geo.inv_metric())?.apply_with_ghosts(f, Ghost::Extrapolate))
}

/// Covariant components `∂ᵢ f` by centred differences.
pub fn gradient(geo: &GeometryFields, f: &[f64]) -> Result<Vec<[f64; 2]>, GeometryError> {
    gradient_with(geo.grid(), f, Ghost::Zero)
}

pub(crate) fn gradient_with(grid: &Grid2D, f: &[f64], ghost: Ghost) -> Result<Vec<[f64; 2]>, GeometryError> {
    grid.check_len(f.len())?;
    let [h1, h2] = grid.spacing();
    Ok((0..grid.len())
        .map(|r| {
            let (i, j) = grid.ij(r);
            let (i, j) = (i as isize, j as isize);
            [
                (grid.sample(f, i + 1, j, ghost) - grid.sample(f, i - 1, j, ghost)) / (2.0 * h1),
                (grid.sample(f, i, j + 1, ghost) - grid.sample(f, i, j - 1, ghost)) / (2.0 * h2),
            ]
        })
        .collect())
}

/// Complex centred gradient, Dirichlet ghosts.
pub fn gradient_complex(
    grid: &Grid2D,
    f: &[num_complex::Complex64],
) -> Result<Vec<[num_complex::Complex64; 2]>, GeometryError> {
    grid.check_len(f.len())?;
    let [h1, h2] = grid.spacing();
    let [n1, n2] = grid.shape();
    let mut out = Vec::with_capacity(grid.len());
    let at = |k: Option<usize>| k.map_or(num_complex::Complex64::default(), |k| f[k]);
    for j in 0..n2 {
        for i in 0..n1 {
            out.push([
                (at(grid.neighbor(i, j, 1, 0)) - at(grid.neighbor(i, j, -1, 0))) / (2.0 * h1),
                (at(grid.neighbor(i, j, 0, 1)) - at(grid.neighbor(i, j, 0, -1))) / (2.0 * h2),
            ]);
        }
    }
    Ok(out)
}

/// Covariant divergence `g^{-1/2} ∂ᵢ(g^{1/2} Vⁱ)` of a nodal contravariant
/// field. The face flux is the average of the two adjacent nodal fluxes, so
/// the `√g`-weighted grid sum telescopes.
pub fn covariant_divergence(geo: &GeometryFields, v: &[[f64; 2]]) -> Result<Vec<f64>, GeometryError> {
    let grid = geo.grid();
    grid.check_len(v.len())?;
    let sg = geo.sqrt_g();
    let f1: Vec<f64> = v.iter().zip(&sg).map(|(v, s)| s * v[0]).collect();
    let f2: Vec<f64> = v.iter().zip(&sg).map(|(v, s)| s * v[1]).collect();
    let [h1, h2] = grid.spacing();
    Ok((0..grid.len())
        .map(|r| {
            let (i, j) = grid.ij(r);
            let (i, j) = (i as isize, j as isize);
            let d1 = (grid.sample(&f1, i + 1, j, Ghost::Zero) - grid.sample(&f1, i - 1, j, Ghost::Zero)) / (2.0 * h1);
            let d2 = (grid.sample(&f2, i, j + 1, Ghost::Zero) - grid.sample(&f2, i, j - 1, Ghost::Zero)) / (2.0 * h2);
            (d1 + d2) / sg[r]
        })
        .collect())
}

/// A vector field stored on cell faces.
///
/// `x[face_x(k, j)]` holds the first component on the face between nodes
/// `k−1` and `k` along axis 1 (faces `0..=n₁` on a Dirichlet axis, `0..n₁` on
/// a periodic one, where face 0 sits between the last and first node).
/// `y` is laid out the same way along axis 2.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceField {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    faces: [usize; 2],
    shape: [usize; 2],
}

impl FaceField {
    pub fn zeros(grid: &Grid2D) -> Self {
        let [n1, n2] = grid.shape();
        let faces = [0, 1].map(|a| grid.shape()[a] + usize::from(!grid.periodic()[a]));
        Self {
            x: vec![0.0; faces[0] * n2],
            y: vec![0.0; n1 * faces[1]],
            faces,
            shape: [n1, n2],
        }
    }

    pub fn face_x(&self, k: usize, j: usize) -> usize {
        j * self.faces[0] + k
    }

    pub fn face_y(&self, i: usize, k: usize) -> usize {
        k * self.shape[0] + i
    }
}

/// Face-normal derivatives `∂₁ f` on axis-1 faces and `∂₂ f` on axis-2 faces.
pub fn face_gradient(geo: &GeometryFields, f: &[f64]) -> Result<FaceField, GeometryError> {
    let grid = geo.grid();
    grid.check_len(f.len())?;
    let [h1, h2] = grid.spacing();
    let [n1, n2] = grid.shape();
    let mut out = FaceField::zeros(grid);
    for j in 0..n2 {
        for k in 0..out.faces[0] {
            let (k, ji) = (k as isize, j as isize);
            let d = grid.sample(f, k, ji, Ghost::Zero) - grid.sample(f, k - 1, ji, Ghost::Zero);
            let idx = out.face_x(k as usize, j);
            out.x[idx] = d / h1;
        }
    }
    for k in 0..out.faces[1] {
        for i in 0..n1 {
            let (ii, k) = (i as isize, k as isize);
            let d = grid.sample(f, ii, k, Ghost::Zero) - grid.sample(f, ii, k - 1, Ghost::Zero);
            let idx = out.face_y(i, k as usize);
            out.y[idx] = d / h2;
        }
    }
    Ok(out)
}

/// Covariant divergence of a face-staggered contravariant field, with `√g`
/// averaged onto faces.
pub fn covariant_divergence_faces(geo: &GeometryFields, v: &FaceField) -> Result<Vec<f64>, GeometryError> {
    let grid = geo.grid();
    if v.shape != grid.shape() {
        return Err(GeometryError::GridMismatch {
            expected: grid.len(),
            found: v.shape[0] * v.shape[1],
        });
    }
    let sg = geo.sqrt_g();
    let [h1, h2] = grid.spacing();
    let [n1, n2] = grid.shape();
    let sg_at = |i: isize, j: isize| grid.sample(&sg, i, j, Ghost::Extrapolate);
    let mut out = vec![0.0; grid.len()];
    for j in 0..n2 {
        for i in 0..n1 {
            let (ii, jj) = (i as isize, j as isize);
            let east = (i + 1) % v.faces[0];
            let north = (j + 1) % v.faces[1];
            let fe = 0.5 * (sg_at(ii, jj) + sg_at(ii + 1, jj)) * v.x[v.face_x(east, j)];
            let fw = 0.5 * (sg_at(ii, jj) + sg_at(ii - 1, jj)) * v.x[v.face_x(i, j)];
            let fnn = 0.5 * (sg_at(ii, jj) + sg_at(ii, jj + 1)) * v.y[v.face_y(i, north)];
            let fs = 0.5 * (sg_at(ii, jj) + sg_at(ii, jj - 1)) * v.y[v.face_y(i, j)];
            let r = grid.index(i, j);
            out[r] = ((fe - fw) / h1 + (fnn - fs) / h2) / sg[r];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::chart::{FourierMode, SurfaceChart};
    use super::super::fields::compute_geometry;
    use super::*;
    use std::f64::consts::PI;

    fn geo(chart: SurfaceChart, n1: usize, n2: usize) -> GeometryFields {
        let grid = Grid2D::new(&chart, n1, n2).unwrap();
        compute_geometry(&chart, &grid).unwrap()
    }

    fn field(g: &GeometryFields, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        g.nodes().iter().map(|n| f(n.q)).collect()
    }

    fn max_err(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    fn graph_chart() -> SurfaceChart {
        SurfaceChart::graph(
            vec![
                FourierMode { wavevector: [2.0 * PI, 2.0 * PI], amplitude: 0.1, phase: 0.2 },
                FourierMode { wavevector: [2.0 * PI, 0.0], amplitude: 0.05, phase: 0.0 },
            ],
            [[0.0, 1.0], [0.0, 1.0]],
            [true, true],
        )
        .unwrap()
    }

    #[test]
    fn plane_laplacian_second_order() {
        let mut errs = Vec::new();
        for n in [16, 32, 64] {
            let g = geo(SurfaceChart::plane([[0.0, 1.0], [0.0, 1.0]], [true, true]).unwrap(), n, n);
            let f = field(&g, |q| (2.0 * PI * q[0]).sin());
            let want: Vec<f64> = f.iter().map(|v| -4.0 * PI * PI * v).collect();
            errs.push(max_err(&laplace_beltrami(&g, &f).unwrap(), &want));
        }
        assert!(errs[0] / errs[1] > 3.9 && errs[1] / errs[2] > 3.9, "{errs:?}");
    }

    #[test]
    fn cylinder_eigenfunction() {
        let g = geo(SurfaceChart::cylinder(1.0, 1.0).unwrap(), 64, 8);
        let f = field(&g, |q| (2.0 * q[0]).cos());
        let lap = laplace_beltrami(&g, &f).unwrap();
        let want: Vec<f64> = f.iter().map(|v| -4.0 * v).collect();
        assert!(max_err(&lap, &want) < 4.0 * (2.0 * PI / 64.0f64).powi(2));
    }

    #[test]
    fn sphere_zonal_harmonic_interior() {
        let mut errs = Vec::new();
        for n in [32, 64] {
            let g = geo(SurfaceChart::sphere(1.0, 0.3).unwrap(), n, 16);
            let f = field(&g, |q| q[0].cos());
            let lap = laplace_beltrami(&g, &f).unwrap();
            let [n1, _] = g.grid().shape();
            let mut e: f64 = 0.0;
            for (k, node) in g.nodes().iter().enumerate() {
                let (i, _) = g.grid().ij(k);
                if i > 0 && i + 1 < n1 {
                    e = e.max((lap[k] + 2.0 * node.q[0].cos()).abs());
                }
            }
            errs.push(e);
        }
        assert!(errs[1] < 1e-3 && errs[0] / errs[1] > 3.5, "{errs:?}");
    }

    #[test]
    fn divergence_of_constant_on_plane_vanishes() {
        let g = geo(SurfaceChart::plane([[0.0, 1.0], [0.0, 1.0]], [true, true]).unwrap(), 8, 8);
        let div = covariant_divergence(&g, &vec![[0.3, -1.2]; g.len()]).unwrap();
        assert!(div.iter().all(|d| d.abs() < 1e-13));
    }

    #[test]
    fn face_divergence_of_face_gradient_is_laplacian_on_plane() {
        for periodic in [[true, true], [false, true], [false, false]] {
            let g = geo(SurfaceChart::plane([[0.0, 1.0], [0.0, 2.0]], periodic).unwrap(), 12, 10);
            let f = field(&g, |q| (2.0 * PI * q[0]).sin() * (PI * q[1]).cos() + q[0] * q[1]);
            let a = covariant_divergence_faces(&g, &face_gradient(&g, &f).unwrap()).unwrap();
            let b = laplace_beltrami(&g, &f).unwrap();
            assert!(max_err(&a, &b) < 1e-12, "{periodic:?}");
        }
    }

    #[test]
    fn cylinder_divergence_telescopes() {
        let g = geo(SurfaceChart::cylinder(1.0, 1.0).unwrap(), 32, 8);
        let v: Vec<[f64; 2]> = g.nodes().iter().map(|n| [n.q[0].cos(), 0.0]).collect();
        let div = covariant_divergence(&g, &v).unwrap();
        assert!(g.integrate(&div).abs() < 1e-13);
    }

    #[test]
    fn summation_by_parts_on_graph() {
        let g = geo(graph_chart(), 16, 12);
        let f = field(&g, |q| (2.0 * PI * q[0]).cos() + (2.0 * PI * q[1]).sin());
        let v: Vec<[f64; 2]> = g
            .nodes()
            .iter()
            .map(|n| [(2.0 * PI * n.q[1]).cos(), (4.0 * PI * n.q[0]).sin() + 0.3])
            .collect();
        let lhs = g.integrate(&f.iter().zip(covariant_divergence(&g, &v).unwrap()).map(|(a, b)| a * b).collect::<Vec<_>>());
        let grad = gradient(&g, &f).unwrap();
        let rhs = -g.integrate(&grad.iter().zip(&v).map(|(d, v)| d[0] * v[0] + d[1] * v[1]).collect::<Vec<_>>());
        assert!((lhs - rhs).abs() < 1e-12, "{lhs} vs {rhs}");
    }

    #[test]
    fn divergence_form_is_weighted_symmetric_and_conservative() {
        let g = geo(graph_chart(), 12, 16);
        let tensor: Vec<Sym2> = g.nodes().iter().map(|n| n.inv_metric + n.kappa_squared_upper() * 0.3).collect();
        let op = divergence_form_operator(&g, &tensor).unwrap();
        assert!(op.weighted_asymmetry(&g.sqrt_g()) < 1e-12);
        let ones = op.apply(&vec![1.0; g.len()]);
        assert!(ones.iter().all(|v| v.abs() < 1e-10));
        let u = field(&g, |q| (2.0 * PI * q[0]).sin() * (2.0 * PI * q[1]).cos() + 2.0);
        assert!(g.integrate(&op.apply(&u)).abs() < 1e-12);
    }

    #[test]
    fn mixed_term_is_second_order() {
        let mut errs = Vec::new();
        for n in [16, 32, 64] {
            // flat operator with a constant mixed coefficient: ∂₁² + ∂₂² + 2a ∂₁∂₂
            let plane = SurfaceChart::plane([[0.0, 1.0], [0.0, 1.0]], [true, true]).unwrap();
            let gp = geo(plane, n, n);
            let f = field(&gp, |q| (2.0 * PI * (q[0] + q[1])).sin());
            let a = 0.4;
            let t = vec![Sym2::new(1.0, a, 1.0); gp.len()];
            let lap = divergence_form_operator(&gp, &t).unwrap().apply(&f);
            let k = 2.0 * PI;
            let want: Vec<f64> = f.iter().map(|v| -(2.0 + 2.0 * a) * k * k * v).collect();
            errs.push(max_err(&lap, &want));
        }
        assert!(errs[0] / errs[1] > 3.8 && errs[1] / errs[2] > 3.8, "{errs:?}");
    }

    #[test]
    fn drift_operator_conserves() {
        let g = geo(SurfaceChart::torus(3.0, 1.0).unwrap(), 16, 16);
        let b: Vec<[f64; 2]> = g.nodes().iter().map(|n| [n.q[1].sin(), n.q[0].cos()]).collect();
        let op = centered_drift_operator(&g, &b).unwrap();
        let u = field(&g, |q| 1.0 + 0.5 * q[0].cos() * q[1].sin());
        assert!(g.integrate(&op.apply(&u)).abs() < 1e-12);
    }

    #[test]
    fn grid_mismatch_errors() {
        let g = geo(SurfaceChart::torus(3.0, 1.0).unwrap(), 8, 8);
        assert!(matches!(laplace_beltrami(&g, &[0.0; 3]), Err(GeometryError::GridMismatch { .. })));
        assert!(matches!(covariant_divergence(&g, &[[0.0; 2]; 3]), Err(GeometryError::GridMismatch { .. })));
    }
}
