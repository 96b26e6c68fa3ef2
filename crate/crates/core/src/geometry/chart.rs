//! Analytic surface charts `x(q¹, q²)` with first and second derivatives and
//! an oriented unit normal.

use std::f64::consts::PI;

use super::tensor::{cross3, norm3};
use super::GeometryError;

/// Default colatitude excluded around each pole of the sphere chart.
pub const DEFAULT_POLAR_CAP: f64 = 0.3;

/// One term `amplitude * cos(k₁ q¹ + k₂ q² + phase)` of a graph height function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierMode {
    pub wavevector: [f64; 2],
    pub amplitude: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChartKind {
    /// `x = (q¹, q², 0)`, normal `+z`.
    Plane,
    /// Coordinates `(s, z)` with `s` the arc length around the axis; outward normal.
    Cylinder { radius: f64 },
    /// Coordinates `(θ, φ)` (colatitude, longitude); outward normal.
    Sphere { radius: f64 },
    /// Coordinates `(u, v)` (major angle, minor angle); outward normal.
    Torus { major: f64, minor: f64 },
    /// Monge patch `x = (q¹, q², h(q¹, q²))`, normal with positive `z` component.
    Graph { modes: Vec<FourierMode> },
}

impl ChartKind {
    pub fn name(&self) -> &'static str {
        match self {
            ChartKind::Plane => "plane",
            ChartKind::Cylinder { .. } => "cylinder",
            ChartKind::Sphere { .. } => "sphere",
            ChartKind::Torus { .. } => "torus",
            ChartKind::Graph { .. } => "graph",
        }
    }
}

/// Chart description as ingested from configuration. Missing fields take the
/// per-kind defaults documented on [`build_chart`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChartSpec {
    pub kind: String,
    pub radius: Option<f64>,
    pub major_radius: Option<f64>,
    pub minor_radius: Option<f64>,
    pub polar_cap: Option<f64>,
    pub modes: Vec<FourierMode>,
    pub domain: Option<[[f64; 2]; 2]>,
    pub periodic: Option<[bool; 2]>,
}

/// Position, tangents, second derivatives and unit normal at one chart point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Embedding {
    pub point: [f64; 3],
    /// `∂x/∂q¹`, `∂x/∂q²`.
    pub tangents: [[f64; 3]; 2],
    /// `∂²x/∂q¹∂q¹`, `∂²x/∂q¹∂q²`, `∂²x/∂q²∂q²`.
    pub second: [[f64; 3]; 3],
    pub normal: [f64; 3],
}

impl Embedding {
    pub fn second_derivative(&self, i: usize, j: usize) -> [f64; 3] {
        match (i, j) {
            (0, 0) => self.second[0],
            (1, 1) => self.second[2],
            _ => self.second[1],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceChart {
    kind: ChartKind,
    domain: [[f64; 2]; 2],
    periodic: [bool; 2],
}

impl SurfaceChart {
    /// Validating constructor shared by all entry points.
    pub fn new(
        kind: ChartKind,
        domain: [[f64; 2]; 2],
        periodic: [bool; 2],
    ) -> Result<Self, GeometryError> {
        match &kind {
            ChartKind::Plane => {}
            ChartKind::Cylinder { radius } => positive("radius", *radius)?,
            ChartKind::Sphere { radius } => positive("radius", *radius)?,
            ChartKind::Torus { major, minor } => {
                positive("major_radius", *major)?;
                positive("minor_radius", *minor)?;
                if major <= minor {
                    return Err(GeometryError::TorusRadii {
                        major: *major,
                        minor: *minor,
                    });
                }
            }
            ChartKind::Graph { modes } => {
                for m in modes {
                    if !(m.amplitude.is_finite()
                        && m.wavevector.iter().all(|k| k.is_finite())
                        && m.phase.is_finite())
                    {
                        return Err(GeometryError::InvalidParameter(
                            "graph modes must be finite".into(),
                        ));
                    }
                }
            }
        }
        for (axis, d) in domain.iter().enumerate() {
            if !(d[0].is_finite() && d[1].is_finite() && d[1] > d[0]) {
                return Err(GeometryError::InvalidDomain {
                    axis,
                    reason: format!("bounds [{}, {}] are not increasing", d[0], d[1]),
                });
            }
        }
        let chart = Self {
            kind,
            domain,
            periodic,
        };
        chart.check_domain()?;
        Ok(chart)
    }

    pub fn plane(domain: [[f64; 2]; 2], periodic: [bool; 2]) -> Result<Self, GeometryError> {
        Self::new(ChartKind::Plane, domain, periodic)
    }

    /// Cylinder in arc-length coordinates, periodic in `s ∈ [0, 2πR)` and in
    /// `z ∈ [0, length)`.
    pub fn cylinder(radius: f64, length: f64) -> Result<Self, GeometryError> {
        Self::new(
            ChartKind::Cylinder { radius },
            [[0.0, 2.0 * PI * radius], [0.0, length]],
            [true, true],
        )
    }

    /// Sphere with polar caps of angular size `cap` removed; Dirichlet in `θ`.
    pub fn sphere(radius: f64, cap: f64) -> Result<Self, GeometryError> {
        Self::new(
            ChartKind::Sphere { radius },
            [[cap, PI - cap], [0.0, 2.0 * PI]],
            [false, true],
        )
    }

    pub fn torus(major: f64, minor: f64) -> Result<Self, GeometryError> {
        Self::new(
            ChartKind::Torus { major, minor },
            [[0.0, 2.0 * PI], [0.0, 2.0 * PI]],
            [true, true],
        )
    }

    pub fn graph(
        modes: Vec<FourierMode>,
        domain: [[f64; 2]; 2],
        periodic: [bool; 2],
    ) -> Result<Self, GeometryError> {
        Self::new(ChartKind::Graph { modes }, domain, periodic)
    }

    pub fn kind(&self) -> &ChartKind {
        &self.kind
    }

    pub fn domain(&self) -> [[f64; 2]; 2] {
        self.domain
    }

    pub fn periodic(&self) -> [bool; 2] {
        self.periodic
    }

    pub fn domain_length(&self, axis: usize) -> f64 {
        self.domain[axis][1] - self.domain[axis][0]
    }

    /// Period forced by the embedding on an angular axis, if any.
    pub fn natural_period(&self, axis: usize) -> Option<f64> {
        match (&self.kind, axis) {
            (ChartKind::Cylinder { radius }, 0) => Some(2.0 * PI * radius),
            (ChartKind::Sphere { .. }, 1) => Some(2.0 * PI),
            (ChartKind::Torus { .. }, _) => Some(2.0 * PI),
            _ => None,
        }
    }

    fn check_domain(&self) -> Result<(), GeometryError> {
        if let ChartKind::Sphere { .. } = self.kind {
            if self.periodic[0] {
                return Err(GeometryError::NotPeriodic { axis: 0 });
            }
            let [lo, hi] = self.domain[0];
            if lo <= 0.0 || hi >= PI {
                return Err(GeometryError::InvalidDomain {
                    axis: 0,
                    reason: "colatitude range must exclude the poles".into(),
                });
            }
        }
        for axis in 0..2 {
            if !self.periodic[axis] {
                continue;
            }
            let len = self.domain_length(axis);
            if let Some(period) = self.natural_period(axis) {
                if !close(len, period) {
                    return Err(GeometryError::PeriodMismatch {
                        axis,
                        expected: period,
                        found: len,
                    });
                }
            }
            if let ChartKind::Graph { modes } = &self.kind {
                for m in modes {
                    let turns = m.wavevector[axis] * len / (2.0 * PI);
                    if (turns - turns.round()).abs() > 1e-9 {
                        return Err(GeometryError::PeriodMismatch {
                            axis,
                            expected: 2.0 * PI / m.wavevector[axis].abs(),
                            found: len,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Analytic embedding data at `(q¹, q²)`.
    pub fn embed(&self, q1: f64, q2: f64) -> Embedding {
        match &self.kind {
            ChartKind::Plane => Embedding {
                point: [q1, q2, 0.0],
                tangents: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
                second: [[0.0; 3]; 3],
                normal: [0.0, 0.0, 1.0],
            },
            ChartKind::Cylinder { radius } => {
                let r = *radius;
                let (s, c) = (q1 / r).sin_cos();
                Embedding {
                    point: [r * c, r * s, q2],
                    tangents: [[-s, c, 0.0], [0.0, 0.0, 1.0]],
                    second: [[-c / r, -s / r, 0.0], [0.0; 3], [0.0; 3]],
                    normal: [c, s, 0.0],
                }
            }
            ChartKind::Sphere { radius } => {
                let a = *radius;
                let (st, ct) = q1.sin_cos();
                let (sp, cp) = q2.sin_cos();
                let n = [st * cp, st * sp, ct];
                Embedding {
                    point: [a * n[0], a * n[1], a * n[2]],
                    tangents: [[a * ct * cp, a * ct * sp, -a * st], [-a * st * sp, a * st * cp, 0.0]],
                    second: [
                        [-a * st * cp, -a * st * sp, -a * ct],
                        [-a * ct * sp, a * ct * cp, 0.0],
                        [-a * st * cp, -a * st * sp, 0.0],
                    ],
                    normal: n,
                }
            }
            ChartKind::Torus { major, minor } => {
                let (big, r) = (*major, *minor);
                let (su, cu) = q1.sin_cos();
                let (sv, cv) = q2.sin_cos();
                let rho = big + r * cv;
                Embedding {
                    point: [rho * cu, rho * su, r * sv],
                    tangents: [[-rho * su, rho * cu, 0.0], [-r * sv * cu, -r * sv * su, r * cv]],
                    second: [
                        [-rho * cu, -rho * su, 0.0],
                        [r * sv * su, -r * sv * cu, 0.0],
                        [-r * cv * cu, -r * cv * su, -r * sv],
                    ],
                    normal: [cv * cu, cv * su, sv],
                }
            }
            ChartKind::Graph { modes } => {
                let mut h = 0.0;
                let mut dh = [0.0; 2];
                let mut ddh = [0.0; 3];
                for m in modes {
                    let [k1, k2] = m.wavevector;
                    let (s, c) = (k1 * q1 + k2 * q2 + m.phase).sin_cos();
                    h += m.amplitude * c;
                    dh[0] -= m.amplitude * k1 * s;
                    dh[1] -= m.amplitude * k2 * s;
                    ddh[0] -= m.amplitude * k1 * k1 * c;
                    ddh[1] -= m.amplitude * k1 * k2 * c;
                    ddh[2] -= m.amplitude * k2 * k2 * c;
                }
                let t1 = [1.0, 0.0, dh[0]];
                let t2 = [0.0, 1.0, dh[1]];
                let w = (1.0 + dh[0] * dh[0] + dh[1] * dh[1]).sqrt();
                Embedding {
                    point: [q1, q2, h],
                    tangents: [t1, t2],
                    second: [[0.0, 0.0, ddh[0]], [0.0, 0.0, ddh[1]], [0.0, 0.0, ddh[2]]],
                    normal: [-dh[0] / w, -dh[1] / w, 1.0 / w],
                }
            }
        }
    }

    /// Surface point displaced along the normal: `X = x + q⁰ n`.
    pub fn shell_point(&self, q0: f64, q1: f64, q2: f64) -> [f64; 3] {
        let e = self.embed(q1, q2);
        [
            e.point[0] + q0 * e.normal[0],
            e.point[1] + q0 * e.normal[1],
            e.point[2] + q0 * e.normal[2],
        ]
    }

    /// Normal from the tangent cross product, oriented to agree with the chart
    /// convention. Used to sanity check the hand-written normals.
    pub fn cross_normal(&self, q1: f64, q2: f64) -> [f64; 3] {
        let e = self.embed(q1, q2);
        let c = cross3(e.tangents[0], e.tangents[1]);
        let n = norm3(c);
        let mut out = [c[0] / n, c[1] / n, c[2] / n];
        let d = out[0] * e.normal[0] + out[1] * e.normal[1] + out[2] * e.normal[2];
        if d < 0.0 {
            out = [-out[0], -out[1], -out[2]];
        }
        out
    }
}

/// Builds a chart from its description.
///
/// Defaults when the domain is omitted: plane and graph `[0,1]²`; cylinder
/// `s ∈ [0, 2πR)`, `z ∈ [0, 1)`; sphere `θ ∈ [θ₀, π−θ₀]` with
/// `θ₀ = polar_cap` (default 0.3), `φ ∈ [0, 2π)`; torus `[0, 2π)²`.
/// Default periodicity is `[true, true]` except the sphere (`[false, true]`).
pub fn build_chart(spec: &ChartSpec) -> Result<SurfaceChart, GeometryError> {
    let need = |v: Option<f64>, name: &'static str| v.ok_or(GeometryError::MissingParameter(name));
    let (kind, default_domain, default_periodic) = match spec.kind.as_str() {
        "plane" => (ChartKind::Plane, [[0.0, 1.0], [0.0, 1.0]], [true, true]),
        "cylinder" => {
            let radius = need(spec.radius, "radius")?;
            positive("radius", radius)?;
            (
                ChartKind::Cylinder { radius },
                [[0.0, 2.0 * PI * radius], [0.0, 1.0]],
                [true, true],
            )
        }
        "sphere" => {
            let radius = need(spec.radius, "radius")?;
            let cap = spec.polar_cap.unwrap_or(DEFAULT_POLAR_CAP);
            if !(cap > 0.0 && cap < 0.5 * PI) {
                return Err(GeometryError::InvalidParameter(format!(
                    "polar_cap {cap} must lie in (0, π/2)"
                )));
            }
            (
                ChartKind::Sphere { radius },
                [[cap, PI - cap], [0.0, 2.0 * PI]],
                [false, true],
            )
        }
        "torus" => {
            let major = need(spec.major_radius, "major_radius")?;
            let minor = need(spec.minor_radius, "minor_radius")?;
            (
                ChartKind::Torus { major, minor },
                [[0.0, 2.0 * PI], [0.0, 2.0 * PI]],
                [true, true],
            )
        }
        "graph" => (
            ChartKind::Graph {
                modes: spec.modes.clone(),
            },
            [[0.0, 1.0], [0.0, 1.0]],
            [true, true],
        ),
        other => return Err(GeometryError::UnknownChartKind(other.to_string())),
    };
    SurfaceChart::new(
        kind,
        spec.domain.unwrap_or(default_domain),
        spec.periodic.unwrap_or(default_periodic),
    )
}

fn positive(name: &'static str, value: f64) -> Result<(), GeometryError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(GeometryError::NonPositiveRadius { name, value })
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}
