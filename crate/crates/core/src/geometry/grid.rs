//! Structured node grids over a chart domain.

use super::chart::SurfaceChart;
use super::GeometryError;

pub const MIN_NODES: usize = 8;

/// Node-centred structured grid.
///
/// Periodic axes place `n` nodes at `q_min + k h` with `h = L / n`. Dirichlet
/// axes place `n` interior nodes at `q_min + (k + 1) h` with `h = L / (n + 1)`,
/// so the ghost nodes sit exactly on the domain edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    n: [usize; 2],
    h: [f64; 2],
    origin: [f64; 2],
    domain: [[f64; 2]; 2],
    periodic: [bool; 2],
}

/// How values outside a non-periodic axis are reconstructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ghost {
    /// Homogeneous Dirichlet: ghost values are zero.
    Zero,
    /// Cubic extrapolation from the four nearest interior nodes. Used for
    /// geometric coefficient fields, which do not vanish at the edge.
    Extrapolate,
}

impl Grid2D {
    pub fn new(chart: &SurfaceChart, n1: usize, n2: usize) -> Result<Self, GeometryError> {
        Self::from_domain(chart.domain(), chart.periodic(), n1, n2)
    }

    pub fn from_domain(
        domain: [[f64; 2]; 2],
        periodic: [bool; 2],
        n1: usize,
        n2: usize,
    ) -> Result<Self, GeometryError> {
        let n = [n1, n2];
        let mut h = [0.0; 2];
        let mut origin = [0.0; 2];
        for axis in 0..2 {
            if n[axis] < MIN_NODES {
                return Err(GeometryError::GridTooSmall {
                    axis,
                    nodes: n[axis],
                });
            }
            let len = domain[axis][1] - domain[axis][0];
            if periodic[axis] {
                h[axis] = len / n[axis] as f64;
                origin[axis] = domain[axis][0];
            } else {
                h[axis] = len / (n[axis] + 1) as f64;
                origin[axis] = domain[axis][0] + h[axis];
            }
        }
        Ok(Self {
            n,
            h,
            origin,
            domain,
            periodic,
        })
    }

    pub fn shape(&self) -> [usize; 2] {
        self.n
    }

    pub fn spacing(&self) -> [f64; 2] {
        self.h
    }

    pub fn periodic(&self) -> [bool; 2] {
        self.periodic
    }

    pub fn domain(&self) -> [[f64; 2]; 2] {
        self.domain
    }

    pub fn is_fully_periodic(&self) -> bool {
        self.periodic[0] && self.periodic[1]
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_area(&self) -> f64 {
        self.h[0] * self.h[1]
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n[0] + i
    }

    #[inline]
    pub fn ij(&self, idx: usize) -> (usize, usize) {
        (idx % self.n[0], idx / self.n[0])
    }

    pub fn coords(&self, i: usize, j: usize) -> [f64; 2] {
        [
            self.origin[0] + i as f64 * self.h[0],
            self.origin[1] + j as f64 * self.h[1],
        ]
    }

    pub fn node_coords(&self, idx: usize) -> [f64; 2] {
        let (i, j) = self.ij(idx);
        self.coords(i, j)
    }

    /// Coordinates of a possibly out-of-range index (ghost positions included).
    pub fn coords_signed(&self, i: isize, j: isize) -> [f64; 2] {
        [
            self.origin[0] + i as f64 * self.h[0],
            self.origin[1] + j as f64 * self.h[1],
        ]
    }

    /// Wraps a signed index along `axis`; `None` when it falls outside a
    /// non-periodic axis.
    #[inline]
    pub fn wrap(&self, axis: usize, k: isize) -> Option<usize> {
        let n = self.n[axis] as isize;
        if (0..n).contains(&k) {
            Some(k as usize)
        } else if self.periodic[axis] {
            Some(k.rem_euclid(n) as usize)
        } else {
            None
        }
    }

    /// Flat index of the node offset by `(di, dj)`, or `None` for a ghost.
    #[inline]
    pub fn neighbor(&self, i: usize, j: usize, di: isize, dj: isize) -> Option<usize> {
        let a = self.wrap(0, i as isize + di)?;
        let b = self.wrap(1, j as isize + dj)?;
        Some(self.index(a, b))
    }

    /// Value of a nodal field at a signed index, reconstructing ghosts.
    pub fn sample(&self, f: &[f64], i: isize, j: isize, ghost: Ghost) -> f64 {
        match (self.wrap(0, i), self.wrap(1, j)) {
            (Some(a), Some(b)) => f[self.index(a, b)],
            (None, _) => match ghost {
                Ghost::Zero => 0.0,
                Ghost::Extrapolate => {
                    let (base, step) = if i < 0 { (0, 1) } else { (self.n[0] as isize - 1, -1) };
                    extrapolate(|k| self.sample(f, base + step * k, j, ghost))
                }
            },
            (Some(_), None) => match ghost {
                Ghost::Zero => 0.0,
                Ghost::Extrapolate => {
                    let (base, step) = if j < 0 { (0, 1) } else { (self.n[1] as isize - 1, -1) };
                    extrapolate(|k| self.sample(f, i, base + step * k, ghost))
                }
            },
        }
    }

    pub fn check_len(&self, len: usize) -> Result<(), GeometryError> {
        if len == self.len() {
            Ok(())
        } else {
            Err(GeometryError::GridMismatch {
                expected: self.len(),
                found: len,
            })
        }
    }
}

/// Cubic extrapolation one step past the edge from values at distances 0..3.
fn extrapolate(at: impl Fn(isize) -> f64) -> f64 {
    4.0 * at(0) - 6.0 * at(1) + 4.0 * at(2) - at(3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_and_dirichlet_spacing() {
        let g = Grid2D::from_domain([[0.0, 1.0], [0.0, 2.0]], [true, false], 10, 9).unwrap();
        assert_eq!(g.spacing(), [0.1, 0.2]);
        assert_eq!(g.coords(0, 0), [0.0, 0.2]);
        assert_eq!(g.neighbor(0, 0, -1, 0), Some(g.index(9, 0)));
        assert_eq!(g.neighbor(0, 0, 0, -1), None);
        assert_eq!(g.neighbor(3, 8, 0, 1), None);
    }

    #[test]
    fn too_few_nodes() {
        assert!(matches!(
            Grid2D::from_domain([[0.0, 1.0], [0.0, 1.0]], [true, true], 7, 8),
            Err(GeometryError::GridTooSmall { axis: 0, nodes: 7 })
        ));
    }

    #[test]
    fn cubic_ghosts_are_exact_for_cubics() {
        let g = Grid2D::from_domain([[0.0, 1.0], [0.0, 1.0]], [false, false], 8, 8).unwrap();
        let f: Vec<f64> = (0..g.len())
            .map(|k| {
                let [x, y] = g.node_coords(k);
                x * x * x - 2.0 * x * y + y * y
            })
            .collect();
        for &(i, j) in &[(-1isize, 3isize), (8, 2), (4, -1), (0, 8), (-1, -1), (8, 8)] {
            let [x, y] = g.coords_signed(i, j);
            let want = x * x * x - 2.0 * x * y + y * y;
            assert!((g.sample(&f, i, j, Ghost::Extrapolate) - want).abs() < 1e-12);
            assert_eq!(g.sample(&f, i, j, Ghost::Zero), 0.0);
        }
    }
}
