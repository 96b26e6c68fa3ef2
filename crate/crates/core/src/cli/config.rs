//! Run configuration: TOML text, a raw layer carrying every default, and the
//! validated [`RunConfig`].
//!
//! Defaults (the only place they are set):
//!
//! | key | default |
//! |---|---|
//! | `chart.kind` | `plane` |
//! | `grid.n1`, `grid.n2` | 64 |
//! | `physics.kind` | `classical` |
//! | `physics.diffusion`, `physics.mass`, `physics.hbar` | 1 |
//! | `physics.eps` | 0 |
//! | `physics.level` | 1 |
//! | `physics.potential` | `zero` |
//! | `initial.kind` | `gaussian` |
//! | `initial.center` | domain midpoint |
//! | `initial.width` | a tenth of the shorter domain side |
//! | `initial.momentum` | `[0, 0]` |
//! | `time.dt` | 1e-5 |
//! | `time.steps` | 100 |
//! | `time.snapshot_stride` | 0 (off) |
//! | `time.scheme` | `rk4` |
//! | `tolerances.solver_tol` | 1e-13 |
//! | `tolerances.solver_max_iter` | 5000 |
//! | `modes.max_level` | 8 |
//! | `ribbon.radius`, `ribbon.length`, `ribbon.hbar`, `ribbon.mass` | 1 |
//! | `ribbon.eps` | `[0.08, 0.04, 0.02]` |
//! | `ribbon.level`, `ribbon.m_wave` | 1 |
//! | `ribbon.k_z` | 0 |
//! | `eigencheck.m_waves` | `[0, 1]` |
//! | `eigencheck.levels` | `[1, 2]` |

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::evolve::{ClassicalScheme, SolverOptions};
use crate::geometry::{build_chart, compute_geometry, ChartSpec, FourierMode, GeometryFields, Grid2D, SurfaceChart};
use crate::ribbon::RibbonSpec;

use super::CliError;

pub const SCHEMA_VERSION: i64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Geometry,
    Modes,
    Evolve,
    Ribbon,
    Eigencheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Geometry => "geometry",
            Command::Modes => "modes",
            Command::Evolve => "evolve",
            Command::Ribbon => "ribbon",
            Command::Eigencheck => "eigencheck",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [
            Command::Geometry,
            Command::Modes,
            Command::Evolve,
            Command::Ribbon,
            Command::Eigencheck,
        ]
        .into_iter()
        .find(|c| c.name() == s)
    }

    fn uses_surface(self) -> bool {
        matches!(self, Command::Geometry | Command::Evolve)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub schema_version: i64,
    pub command: String,
    #[serde(default)]
    pub chart: RawChart,
    #[serde(default)]
    pub grid: RawGrid,
    #[serde(default)]
    pub physics: RawPhysics,
    #[serde(default)]
    pub initial: RawInitial,
    #[serde(default)]
    pub time: RawTime,
    #[serde(default)]
    pub tolerances: RawTolerances,
    #[serde(default)]
    pub modes: RawModes,
    #[serde(default)]
    pub ribbon: RawRibbon,
    #[serde(default)]
    pub eigencheck: RawEigencheck,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawChart {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub major_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minor_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub polar_cap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<[[f64; 2]; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub periodic: Option<[bool; 2]>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub modes: Vec<RawFourierMode>,
}

impl Default for RawChart {
    fn default() -> Self {
        Self {
            kind: "plane".into(),
            radius: None,
            length: None,
            major_radius: None,
            minor_radius: None,
            polar_cap: None,
            domain: None,
            periodic: None,
            modes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawFourierMode {
    pub wavevector: [f64; 2],
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawGrid {
    pub n1: i64,
    pub n2: i64,
}

impl Default for RawGrid {
    fn default() -> Self {
        Self { n1: 64, n2: 64 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawPhysics {
    pub kind: String,
    pub diffusion: f64,
    pub mass: f64,
    pub hbar: f64,
    pub eps: f64,
    pub level: i64,
    /// `zero` or `table`.
    pub potential: String,
    /// One value per node, grid order, for `potential = "table"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub potential_file: Option<PathBuf>,
}

impl Default for RawPhysics {
    fn default() -> Self {
        Self {
            kind: "classical".into(),
            diffusion: 1.0,
            mass: 1.0,
            hbar: 1.0,
            eps: 0.0,
            level: 1,
            potential: "zero".into(),
            potential_file: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawInitial {
    /// `gaussian`, `plane_wave` or `uniform`.
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    pub momentum: [f64; 2],
}

impl Default for RawInitial {
    fn default() -> Self {
        Self {
            kind: "gaussian".into(),
            center: None,
            width: None,
            momentum: [0.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawTime {
    pub dt: f64,
    pub steps: i64,
    pub snapshot_stride: i64,
    /// `rk4` or `implicit_euler` (classical only).
    pub scheme: String,
}

impl Default for RawTime {
    fn default() -> Self {
        Self {
            dt: 1e-5,
            steps: 100,
            snapshot_stride: 0,
            scheme: "rk4".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawTolerances {
    pub solver_tol: f64,
    pub solver_max_iter: i64,
}

impl Default for RawTolerances {
    fn default() -> Self {
        let d = SolverOptions::default();
        Self {
            solver_tol: d.tol,
            solver_max_iter: d.max_iter as i64,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawModes {
    pub max_level: i64,
}

impl Default for RawModes {
    fn default() -> Self {
        Self { max_level: 8 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawRibbon {
    pub radius: f64,
    pub eps: Vec<f64>,
    pub length: f64,
    pub level: i64,
    pub m_wave: i64,
    pub k_z: f64,
    pub hbar: f64,
    pub mass: f64,
}

impl Default for RawRibbon {
    fn default() -> Self {
        Self {
            radius: 1.0,
            eps: vec![0.08, 0.04, 0.02],
            length: 1.0,
            level: 1,
            m_wave: 1,
            k_z: 0.0,
            hbar: 1.0,
            mass: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawEigencheck {
    pub m_waves: Vec<i64>,
    pub levels: Vec<i64>,
}

impl Default for RawEigencheck {
    fn default() -> Self {
        Self {
            m_waves: vec![0, 1],
            levels: vec![1, 2],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhysicsKind {
    Classical,
    Quantum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialKind {
    Gaussian { center: [f64; 2], width: f64 },
    PlaneWave,
    Uniform,
}

/// Validated configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub chart: SurfaceChart,
    pub grid: [usize; 2],
    /// Geometry built during validation, when the command needs a surface.
    pub geometry: Option<Arc<GeometryFields>>,
    pub physics_kind: PhysicsKind,
    pub diffusion: f64,
    pub mass: f64,
    pub hbar: f64,
    pub eps: f64,
    pub level: i64,
    pub potential: Option<Vec<f64>>,
    pub initial: InitialKind,
    pub momentum: [f64; 2],
    pub dt: f64,
    pub steps: usize,
    pub snapshot_stride: usize,
    pub scheme: ClassicalScheme,
    pub solver: SolverOptions,
    pub max_level: i64,
    pub ribbon: RibbonSpec,
    pub ribbon_eps: Vec<f64>,
    pub m_waves: Vec<i64>,
    pub levels: Vec<i64>,
    /// The raw configuration with every default filled in, as TOML.
    pub resolved: String,
}

/// Parses and validates; relative file paths resolve against `base`.
pub fn parse_config(text: &str, base: &Path) -> Result<RunConfig, CliError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
        CliError::Syntax {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    validate(raw, base)
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn validate(raw: RawConfig, base: &Path) -> Result<RunConfig, CliError> {
    let mut errs: Vec<String> = Vec::new();
    let mut bad = |key: &str, msg: String| errs.push(format!("{key}: {msg}"));
    let positive = |x: f64| x > 0.0 && x.is_finite();

    if raw.schema_version != SCHEMA_VERSION {
        bad(
            "schema_version",
            format!("unsupported version {} (expected {SCHEMA_VERSION})", raw.schema_version),
        );
    }
    let command = Command::parse(&raw.command);
    if command.is_none() {
        bad(
            "command",
            format!(
                "unknown command `{}` (expected geometry, modes, evolve, ribbon or eigencheck)",
                raw.command
            ),
        );
    }

    let c = &raw.chart;
    let spec = ChartSpec {
        kind: c.kind.clone(),
        radius: c.radius,
        major_radius: c.major_radius,
        minor_radius: c.minor_radius,
        polar_cap: c.polar_cap,
        modes: c
            .modes
            .iter()
            .map(|m| FourierMode {
                wavevector: m.wavevector,
                amplitude: m.amplitude,
                phase: m.phase,
            })
            .collect(),
        // a cylinder's axial length is a convenience for its domain
        domain: c.domain.or(match (c.kind.as_str(), c.radius, c.length) {
            ("cylinder", Some(r), Some(l)) => Some([[0.0, 2.0 * std::f64::consts::PI * r], [0.0, l]]),
            _ => None,
        }),
        periodic: c.periodic,
    };
    if c.length.is_some_and(|l| !positive(l)) {
        bad("chart.length", "must be positive".into());
    }
    if c.length.is_some() && c.kind != "cylinder" {
        bad("chart.length", "only applies to a cylinder".into());
    }
    let chart = match build_chart(&spec) {
        Ok(ch) => Some(ch),
        Err(e) => {
            let key = if c.kind.is_empty() || !["plane", "cylinder", "sphere", "torus", "graph"].contains(&c.kind.as_str()) {
                "chart.kind"
            } else {
                "chart"
            };
            bad(key, e.to_string());
            None
        }
    };

    let mut grid = [0usize; 2];
    for (axis, (name, n)) in [("grid.n1", raw.grid.n1), ("grid.n2", raw.grid.n2)].into_iter().enumerate() {
        if n < crate::geometry::MIN_NODES as i64 {
            bad(name, format!("need at least {} nodes, got {n}", crate::geometry::MIN_NODES));
        } else {
            grid[axis] = n as usize;
        }
    }

    let p = &raw.physics;
    let physics_kind = match p.kind.as_str() {
        "classical" => PhysicsKind::Classical,
        "quantum" => PhysicsKind::Quantum,
        other => {
            bad("physics.kind", format!("unknown kind `{other}` (expected classical or quantum)"));
            PhysicsKind::Classical
        }
    };
    for (key, v) in [
        ("physics.diffusion", p.diffusion),
        ("physics.mass", p.mass),
        ("physics.hbar", p.hbar),
    ] {
        if !positive(v) {
            bad(key, format!("must be positive, got {v}"));
        }
    }
    if !(p.eps >= 0.0 && p.eps.is_finite()) {
        bad("physics.eps", format!("must be nonnegative, got {}", p.eps));
    }
    if p.level < 1 {
        bad("physics.level", format!("must be >= 1, got {}", p.level));
    }
    let mut potential = None;
    match (p.potential.as_str(), &p.potential_file) {
        ("zero", None) => {}
        ("zero", Some(_)) => bad("physics.potential_file", "given but potential is `zero`".into()),
        ("table", None) => bad("physics.potential_file", "required for a tabulated potential".into()),
        ("table", Some(path)) => {
            let path = base.join(path);
            match read_table(&path) {
                Ok(v) => {
                    let want = grid[0] * grid[1];
                    if want > 0 && v.len() != want {
                        bad(
                            "physics.potential_file",
                            format!("{} has {} values, grid has {want} nodes", path.display(), v.len()),
                        );
                    }
                    potential = Some(v);
                }
                Err(e) => bad("physics.potential_file", format!("{}: {e}", path.display())),
            }
        }
        (other, _) => bad("physics.potential", format!("unknown potential `{other}` (expected zero or table)")),
    }
    if potential.is_some() && physics_kind == PhysicsKind::Classical {
        bad("physics.potential", "a potential only applies to the quantum kind".into());
    }

    let i = &raw.initial;
    let domain = chart.as_ref().map_or([[0.0, 1.0], [0.0, 1.0]], |ch| ch.domain());
    let initial = match i.kind.as_str() {
        "gaussian" => {
            let center = i
                .center
                .unwrap_or([0.5 * (domain[0][0] + domain[0][1]), 0.5 * (domain[1][0] + domain[1][1])]);
            let width = i
                .width
                .unwrap_or(0.1 * (domain[0][1] - domain[0][0]).min(domain[1][1] - domain[1][0]));
            if !positive(width) {
                bad("initial.width", format!("must be positive, got {width}"));
            }
            if !center.iter().all(|x| x.is_finite()) {
                bad("initial.center", "must be finite".into());
            }
            InitialKind::Gaussian { center, width }
        }
        "plane_wave" => {
            if physics_kind == PhysicsKind::Classical {
                bad("initial.kind", "a plane wave needs the quantum kind".into());
            }
            InitialKind::PlaneWave
        }
        "uniform" => InitialKind::Uniform,
        other => {
            bad(
                "initial.kind",
                format!("unknown initial state `{other}` (expected gaussian, plane_wave or uniform)"),
            );
            InitialKind::Uniform
        }
    };
    if i.kind != "gaussian" && (i.center.is_some() || i.width.is_some()) {
        bad("initial", "center and width only apply to a gaussian".into());
    }
    if !i.momentum.iter().all(|x| x.is_finite()) {
        bad("initial.momentum", "must be finite".into());
    }
    if physics_kind == PhysicsKind::Classical && i.momentum != [0.0, 0.0] {
        bad("initial.momentum", "only applies to the quantum kind".into());
    }

    let t = &raw.time;
    if !positive(t.dt) {
        bad("time.dt", format!("must be positive, got {}", t.dt));
    }
    if t.steps < 1 {
        bad("time.steps", format!("must be >= 1, got {}", t.steps));
    }
    if t.snapshot_stride < 0 {
        bad("time.snapshot_stride", format!("must be >= 0, got {}", t.snapshot_stride));
    }
    let scheme = match t.scheme.as_str() {
        "rk4" => ClassicalScheme::Rk4,
        "implicit_euler" => ClassicalScheme::ImplicitEuler,
        other => {
            bad("time.scheme", format!("unknown scheme `{other}` (expected rk4 or implicit_euler)"));
            ClassicalScheme::Rk4
        }
    };

    let tol = &raw.tolerances;
    if !positive(tol.solver_tol) {
        bad("tolerances.solver_tol", format!("must be positive, got {}", tol.solver_tol));
    }
    if tol.solver_max_iter < 1 {
        bad(
            "tolerances.solver_max_iter",
            format!("must be >= 1, got {}", tol.solver_max_iter),
        );
    }

    if raw.modes.max_level < 1 {
        bad("modes.max_level", format!("must be >= 1, got {}", raw.modes.max_level));
    }

    let r = &raw.ribbon;
    for (key, v) in [
        ("ribbon.radius", r.radius),
        ("ribbon.length", r.length),
        ("ribbon.hbar", r.hbar),
        ("ribbon.mass", r.mass),
    ] {
        if !positive(v) {
            bad(key, format!("must be positive, got {v}"));
        }
    }
    if !r.k_z.is_finite() {
        bad("ribbon.k_z", "must be finite".into());
    }
    if r.level < 1 {
        bad("ribbon.level", format!("must be >= 1, got {}", r.level));
    }
    if r.eps.is_empty() {
        bad("ribbon.eps", "needs at least one thickness".into());
    }
    for e in &r.eps {
        if !(positive(*e) && *e < r.radius) {
            bad("ribbon.eps", format!("{e} must lie in (0, radius)"));
        }
    }
    let ec = &raw.eigencheck;
    if ec.m_waves.is_empty() {
        bad("eigencheck.m_waves", "needs at least one value".into());
    }
    if ec.levels.is_empty() || ec.levels.iter().any(|&l| l < 1) {
        bad("eigencheck.levels", "needs values >= 1".into());
    }

    // the shell must not self-intersect: ε max|κ| < 1
    let mut geometry = None;
    if let (Some(cmd), Some(ch)) = (command, &chart) {
        if cmd.uses_surface() && grid[0] > 0 && grid[1] > 0 {
            match Grid2D::new(ch, grid[0], grid[1]).and_then(|g| compute_geometry(ch, &g)) {
                Ok(geo) => {
                    let product = p.eps * geo.max_principal_curvature();
                    if p.eps.is_finite() && product >= 1.0 {
                        bad(
                            "physics.eps",
                            format!(
                                "shell self-intersects: eps * max|kappa| = {product} >= 1 (eps = {}, max|kappa| = {})",
                                p.eps,
                                geo.max_principal_curvature()
                            ),
                        );
                    }
                    geometry = Some(Arc::new(geo));
                }
                Err(e) => bad("grid", e.to_string()),
            }
        }
    }

    if !errs.is_empty() {
        return Err(CliError::Validation(errs));
    }
    let resolved = toml::to_string(&raw).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(RunConfig {
        command: command.expect("validated"),
        chart: chart.expect("validated"),
        grid,
        geometry,
        physics_kind,
        diffusion: p.diffusion,
        mass: p.mass,
        hbar: p.hbar,
        eps: p.eps,
        level: p.level,
        potential,
        initial,
        momentum: i.momentum,
        dt: t.dt,
        steps: t.steps as usize,
        snapshot_stride: t.snapshot_stride as usize,
        scheme,
        solver: SolverOptions {
            tol: tol.solver_tol,
            max_iter: tol.solver_max_iter as usize,
        },
        max_level: raw.modes.max_level,
        ribbon: RibbonSpec {
            radius: r.radius,
            eps: r.eps[0],
            length: r.length,
            level: r.level,
            m_wave: r.m_wave,
            k_z: r.k_z,
            hbar: r.hbar,
            mass: r.mass,
        },
        ribbon_eps: r.eps.clone(),
        m_waves: ec.m_waves.clone(),
        levels: ec.levels.clone(),
        resolved,
    })
}

/// Numbers separated by commas or whitespace; `#` starts a comment.
fn read_table(path: &Path) -> Result<Vec<f64>, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        for field in rec.iter().flat_map(|f| f.split_whitespace()) {
            out.push(field.parse::<f64>().map_err(|e| format!("`{field}`: {e}"))?);
        }
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err("values must be finite".into());
    }
    Ok(out)
}
