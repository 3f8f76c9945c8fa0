//! Problem definitions: plane-wave solutions, domains, boundary maps and
//! the mesh/time-step ladders of the convergence studies.

use crate::assembly::{BoundaryCondition, BoundaryConditions};
use crate::mesh::{
    circle_projector, generate_lshape_mesh, generate_rect_mesh, perturb_interior, read_mesh,
    refine_regular, BoundaryTag, Rect, RefinementMap, TriMesh,
};
use crate::postprocess::ReconstructionSpace;
use crate::{Error, Point, Result};

/// The shipped coarse mesh of the scattering domain, `h ≈ 2⁻³`.
pub const SCATTERING_COARSE_MESH: &str = include_str!("../assets/scattering_coarse.mesh");

/// Level of [`SCATTERING_COARSE_MESH`] in the `h = 2^-level` ladder.
pub const SCATTERING_BASE_LEVEL: u32 = 3;

pub const SCATTERER_CENTRE: Point = Point::new(0.0, -1.0);
pub const SCATTERER_RADIUS: f64 = 0.2;

/// Gaussian pulse `g(s) = A exp(−a (s + b)²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pulse {
    pub amplitude: f64,
    pub width: f64,
    pub shift: f64,
}

impl Pulse {
    pub fn value(&self, s: f64) -> f64 {
        let z = s + self.shift;
        self.amplitude * (-self.width * z * z).exp()
    }

    pub fn derivative(&self, s: f64) -> f64 {
        -2.0 * self.width * (s + self.shift) * self.value(s)
    }

    /// `∫_{s0}^{s1} g`, via erf/erfc so that the difference keeps full
    /// relative accuracy in the tails.
    pub fn integral(&self, s0: f64, s1: f64) -> f64 {
        let r = self.width.sqrt();
        let (z0, z1) = (r * (s0 + self.shift), r * (s1 + self.shift));
        let scale = self.amplitude * 0.5 * (std::f64::consts::PI / self.width).sqrt();
        let diff = if z0 >= 0.0 && z1 >= 0.0 {
            libm::erfc(z0) - libm::erfc(z1)
        } else if z0 <= 0.0 && z1 <= 0.0 {
            libm::erfc(-z1) - libm::erfc(-z0)
        } else {
            libm::erf(z1) - libm::erf(z0)
        };
        scale * diff
    }
}

/// `p = g(k·x − t)`, `u = k g(k·x − t)` with `|k| = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneWave {
    pub pulse: Pulse,
    pub direction: Point,
}

impl PlaneWave {
    pub fn new(pulse: Pulse, direction: Point) -> Result<Self> {
        let n = direction.norm();
        if !(n > 0.0) {
            return Err(Error::InvalidArgument(
                "wave direction must be nonzero".into(),
            ));
        }
        Ok(Self {
            pulse,
            direction: direction / n,
        })
    }

    fn phase(&self, x: &Point) -> f64 {
        self.direction.dot(x)
    }

    pub fn pressure(&self, x: &Point, t: f64) -> f64 {
        self.pulse.value(self.phase(x) - t)
    }

    pub fn velocity(&self, x: &Point, t: f64) -> Point {
        self.direction * self.pulse.value(self.phase(x) - t)
    }

    /// `P(x, t) = ∫₀ᵗ p(x, s) ds`.
    pub fn pressure_integral(&self, x: &Point, t: f64) -> f64 {
        let s = self.phase(x);
        self.pulse.integral(s - t, s)
    }

    pub fn pressure_dt(&self, x: &Point, t: f64) -> f64 {
        -self.pulse.derivative(self.phase(x) - t)
    }

    pub fn velocity_dt(&self, x: &Point, t: f64) -> Point {
        -self.direction * self.pulse.derivative(self.phase(x) - t)
    }

    pub fn divergence(&self, x: &Point, t: f64) -> f64 {
        self.direction.norm_squared() * self.pulse.derivative(self.phase(x) - t)
    }

    pub fn gradient(&self, x: &Point, t: f64) -> Point {
        self.direction * self.pulse.derivative(self.phase(x) - t)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain {
    Rectangle(Rect),
    LShape,
    Scattering,
}

/// How `τ` follows from the mesh level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeStep {
    /// `τ = factor · 2^-level`
    MeshFraction(f64),
    Fixed(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScenarioKind {
    PlaneWave,
    Scattering,
    LShape,
    Cavity,
}

impl ScenarioKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::PlaneWave => "plane_wave",
            Self::Scattering => "scattering",
            Self::LShape => "lshape",
            Self::Cavity => "cavity",
        }
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "plane_wave" => Ok(Self::PlaneWave),
            "scattering" => Ok(Self::Scattering),
            "lshape" => Ok(Self::LShape),
            "cavity" => Ok(Self::Cavity),
            _ => Err(format!(
                "unknown scenario '{s}' (expected plane_wave, scattering, lshape or cavity)"
            )),
        }
    }
}

/// Everything needed to set up and run one experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub domain: Domain,
    pub boundary: BoundaryConditions,
    /// incident wave providing initial and boundary data
    pub wave: Option<PlaneWave>,
    /// whether `wave` solves the problem on the domain
    pub exact: bool,
    pub final_time: f64,
    /// `h = 2^-level`
    pub levels: Vec<u32>,
    pub time_step: TimeStep,
    /// spacing of the observation times used by the error norms
    pub output_interval: f64,
    /// random interior vertex displacement relative to `h_min` applied to
    /// generated meshes (0 keeps them structured)
    pub mesh_perturbation: f64,
    /// velocity space of the post-processing
    pub reconstruction: ReconstructionSpace,
}

impl Scenario {
    pub fn exact_solution(&self) -> Option<&PlaneWave> {
        if self.exact {
            self.wave.as_ref()
        } else {
            None
        }
    }

    pub fn tau(&self, level: u32) -> f64 {
        match self.time_step {
            TimeStep::MeshFraction(f) => f * mesh_size(level),
            TimeStep::Fixed(t) => t,
        }
    }

    /// Mesh of one level. Scattering meshes are refined from the shipped
    /// asset; use [`Scenario::mesh_hierarchy`] to keep the refinement maps.
    pub fn mesh(&self, level: u32) -> Result<TriMesh> {
        match self.domain {
            Domain::Rectangle(r) => self.perturbed(generate_rect_mesh(r, 1 << level)?, level),
            Domain::LShape => self.perturbed(generate_lshape_mesh(1 << level)?, level),
            Domain::Scattering => {
                let mut h = scattering_hierarchy(level)?;
                Ok(h.pop().expect("hierarchy is never empty").0)
            }
        }
    }

    fn perturbed(&self, mesh: TriMesh, level: u32) -> Result<TriMesh> {
        if self.mesh_perturbation == 0.0 {
            return Ok(mesh);
        }
        // a different seed per level: the family is not nested
        Ok(perturb_interior(
            &mesh,
            self.mesh_perturbation,
            0x6d65_7368 + u64::from(level),
        )?)
    }

    /// Meshes of all levels with the map from each to the previous one
    /// (`None` for the first level and for non-nested families).
    pub fn mesh_hierarchy(&self) -> Result<Vec<(TriMesh, Option<RefinementMap>)>> {
        match self.domain {
            Domain::Scattering => {
                let all = scattering_hierarchy(
                    *self.levels.iter().max().unwrap_or(&SCATTERING_BASE_LEVEL),
                )?;
                let lo = SCATTERING_BASE_LEVEL;
                let mut out = Vec::new();
                let mut prev: Option<u32> = None;
                for (i, (mesh, map)) in all.into_iter().enumerate() {
                    let level = lo + i as u32;
                    if !self.levels.contains(&level) {
                        continue;
                    }
                    // maps only chain when the levels are consecutive
                    let map = if prev == Some(level - 1) { map } else { None };
                    out.push((mesh, map));
                    prev = Some(level);
                }
                Ok(out)
            }
            _ => self
                .levels
                .iter()
                .map(|&l| Ok((self.mesh(l)?, None)))
                .collect(),
        }
    }

    /// Boundary pressure data at `(x, t)`; zero without an incident wave.
    pub fn pressure_data(&self, x: &Point, t: f64) -> f64 {
        self.wave.map_or(0.0, |w| w.pressure(x, t))
    }
}

/// `2^-level`
pub fn mesh_size(level: u32) -> f64 {
    (-(level as f64)).exp2()
}

/// Plane wave on `(−1, 1)²`: `g(s) = e^{−2(s+5)²}`, `k = (2, 1)/√5`,
/// `T = 5`, `τ = h/4`, levels `h = 2⁻³ … 2⁻⁶`, pressure data on the whole
/// boundary.
pub fn plane_wave_scenario() -> Scenario {
    let wave = PlaneWave::new(
        Pulse {
            amplitude: 1.0,
            width: 2.0,
            shift: 5.0,
        },
        Point::new(2.0, 1.0),
    )
    .expect("nonzero direction");
    Scenario {
        kind: ScenarioKind::PlaneWave,
        domain: Domain::Rectangle(Rect::biunit()),
        boundary: BoundaryConditions::default(),
        wave: Some(wave),
        exact: true,
        final_time: 5.0,
        levels: vec![3, 4, 5, 6],
        time_step: TimeStep::MeshFraction(0.25),
        output_interval: 1.0 / 16.0,
        mesh_perturbation: 0.0,
        reconstruction: ReconstructionSpace::Auto,
    }
}

/// The plane wave of [`plane_wave_scenario`] on `(−1,1)² \ [0,1]²`.
pub fn lshape_scenario() -> Scenario {
    Scenario {
        kind: ScenarioKind::LShape,
        domain: Domain::LShape,
        ..plane_wave_scenario()
    }
}

/// Pulse `g(s) = 2e^{−10(s+3)²}` travelling along `k = (1, 0)` into
/// `(−1,1)²` minus the disk of radius 0.2 about `(0, −1)`: pressure data on
/// the left and right sides, no flux through top and bottom, `p = 0` on the
/// circle. `T = 2`, `τ = 1/1000`, no exact solution.
pub fn scattering_scenario() -> Scenario {
    let wave = PlaneWave::new(
        Pulse {
            amplitude: 2.0,
            width: 10.0,
            shift: 3.0,
        },
        Point::new(1.0, 0.0),
    )
    .expect("nonzero direction");
    Scenario {
        kind: ScenarioKind::Scattering,
        domain: Domain::Scattering,
        boundary: BoundaryConditions::default(),
        wave: Some(wave),
        exact: false,
        final_time: 2.0,
        levels: vec![3, 4, 5, 6],
        time_step: TimeStep::Fixed(1e-3),
        output_interval: 0.05,
        mesh_perturbation: 0.0,
        reconstruction: ReconstructionSpace::Auto,
    }
}

/// Closed box `(−1, 1)²` with rigid walls and no incident wave; used with
/// random initial data for energy checks.
pub fn cavity_scenario() -> Scenario {
    Scenario {
        kind: ScenarioKind::Cavity,
        domain: Domain::Rectangle(Rect::biunit()),
        boundary: BoundaryConditions::uniform(BoundaryCondition::NoFlux),
        wave: None,
        exact: false,
        final_time: 1.0,
        levels: vec![3],
        time_step: TimeStep::MeshFraction(0.25),
        output_interval: 1.0 / 16.0,
        mesh_perturbation: 0.0,
        reconstruction: ReconstructionSpace::Auto,
    }
}

pub fn scenario(kind: ScenarioKind) -> Scenario {
    match kind {
        ScenarioKind::PlaneWave => plane_wave_scenario(),
        ScenarioKind::Scattering => scattering_scenario(),
        ScenarioKind::LShape => lshape_scenario(),
        ScenarioKind::Cavity => cavity_scenario(),
    }
}

/// The scattering meshes from the base level up to `finest`, each with the
/// map to its predecessor. New midpoints on the circle are snapped to it.
pub fn scattering_hierarchy(finest: u32) -> Result<Vec<(TriMesh, Option<RefinementMap>)>> {
    if finest < SCATTERING_BASE_LEVEL {
        return Err(Error::InvalidArgument(format!(
            "scattering meshes start at level {SCATTERING_BASE_LEVEL}, requested {finest}"
        )));
    }
    let coarse = read_mesh(SCATTERING_COARSE_MESH.as_bytes())?;
    let snap = circle_projector(SCATTERER_CENTRE, SCATTERER_RADIUS);
    let mut out = vec![(coarse, None)];
    for _ in SCATTERING_BASE_LEVEL..finest {
        let (fine, map) = refine_regular(&out.last().unwrap().0, Some(&snap))?;
        out.push((fine, Some(map)));
    }
    Ok(out)
}

/// Tag of a boundary edge of the scattering domain from its endpoints.
pub fn scattering_tag(a: &Point, b: &Point) -> BoundaryTag {
    const EPS: f64 = 1e-9;
    let on_side = |v: f64| (a.x - v).abs() < EPS && (b.x - v).abs() < EPS;
    if on_side(-1.0) || on_side(1.0) {
        BoundaryTag::DirichletP
    } else if (a - SCATTERER_CENTRE).norm() < SCATTERER_RADIUS + EPS
        && (b - SCATTERER_CENTRE).norm() < SCATTERER_RADIUS + EPS
    {
        BoundaryTag::Scatterer
    } else {
        BoundaryTag::NeumannU
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn origin_value() {
        let w = plane_wave_scenario().wave.unwrap();
        assert_eq!(w.pressure(&Point::zeros(), 0.0), (-50.0f64).exp());
        assert!((w.direction.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn integral_matches_quadrature() {
        let w = plane_wave_scenario().wave.unwrap();
        for (x, t) in [
            (Point::new(0.3, -0.2), 5.0),
            (Point::new(-1.0, 1.0), 3.7),
            (Point::new(1.0, 1.0), 0.4),
        ] {
            let q = simpson(|s| w.pressure(&x, s), 0.0, t, 20_000);
            assert!((w.pressure_integral(&x, t) - q).abs() < 1e-12, "{x:?} {t}");
        }
    }

    #[test]
    fn pde_residual_vanishes() {
        let d = 1e-5;
        for s in [plane_wave_scenario(), scattering_scenario()] {
            let w = s.wave.unwrap();
            for (x, t) in [
                (Point::new(0.1, 0.4), 4.2),
                (Point::new(-0.7, 0.9), 2.0),
                (Point::new(0.5, -0.5), 1.3),
            ] {
                let dp = (w.pressure(&x, t + d) - w.pressure(&x, t - d)) / (2.0 * d);
                let ex = Point::new(d, 0.0);
                let ey = Point::new(0.0, d);
                let du = ((w.velocity(&(x + ex), t) - w.velocity(&(x - ex), t)).x
                    + (w.velocity(&(x + ey), t) - w.velocity(&(x - ey), t)).y)
                    / (2.0 * d);
                assert!((dp + du).abs() < 1e-6);
                let ut = (w.velocity(&x, t + d) - w.velocity(&x, t - d)) / (2.0 * d);
                let gp = Point::new(
                    w.pressure(&(x + ex), t) - w.pressure(&(x - ex), t),
                    w.pressure(&(x + ey), t) - w.pressure(&(x - ey), t),
                ) / (2.0 * d);
                assert!((ut + gp).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn scattering_tags_partition_boundary() {
        let s = scattering_scenario();
        let mesh = s.mesh(3).unwrap();
        let mut seen = vec![0; mesh.num_edges()];
        for (e, tag) in mesh.boundary_edges() {
            seen[e] += 1;
            let [a, b] = mesh.edge(e);
            assert_eq!(tag, scattering_tag(&mesh.vertex(a), &mesh.vertex(b)));
        }
        for e in 0..mesh.num_edges() {
            assert_eq!(seen[e], usize::from(mesh.is_boundary_edge(e)));
        }
    }

    #[test]
    fn scattering_pulse_starts_outside() {
        let s = scattering_scenario();
        let mesh = s.mesh(3).unwrap();
        let bound = 2.0 * (-40.0f64).exp();
        for v in mesh.vertices() {
            assert!(s.pressure_data(v, 0.0) <= bound * (1.0 + 1e-12));
        }
    }

    #[test]
    fn refined_circle_vertices_lie_on_circle() {
        let h = scattering_hierarchy(4).unwrap();
        let (fine, map) = &h[1];
        let map = map.as_ref().unwrap();
        assert!(!map.boundary_snap.is_empty());
        for r in &map.boundary_snap {
            assert!(
                ((fine.vertex(r.vertex) - SCATTERER_CENTRE).norm() - SCATTERER_RADIUS).abs()
                    < 1e-14
            );
        }
    }

    #[test]
    fn lshape_area() {
        let m = lshape_scenario().mesh(2).unwrap();
        assert!((m.total_area() - 3.0).abs() < 1e-12);
        assert!(m
            .boundary_edges()
            .all(|(_, t)| t == BoundaryTag::DirichletP));
    }

    #[test]
    fn time_steps() {
        assert_eq!(plane_wave_scenario().tau(3), 1.0 / 32.0);
        assert_eq!(scattering_scenario().tau(6), 1e-3);
        assert_eq!(
            plane_wave_scenario().mesh(3).unwrap().num_cells(),
            2 * 16 * 16
        );
    }
}
