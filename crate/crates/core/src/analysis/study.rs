use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    auxiliary_velocity_hat, error_l2, p0_l2, p1_self_difference, velocity_l2,
    velocity_self_difference, EllipticProjector, ErrorReport, Exact,
};
use crate::assembly::{apply_normal_bc, assemble_boundary_load, BoundaryCondition, Space};
use crate::fem::{cell_vertex_velocities, interpolate_bdm1, project_p0, FieldRef, P1Field};
use crate::integrator::{cfl_estimate, num_steps, run, CflEstimate, LeapfrogState, Operators};
use crate::mesh::TriMesh;
use crate::postprocess::{pp_pressure, VelocityPostprocessor};
use crate::scenarios::{mesh_size, PlaneWave, Scenario};
use crate::{Error, Point, Result};

/// Columns of the plane-wave table: raw errors, superconvergence
/// distances and post-processed errors, each maximized over the output
/// times.
pub const PLANE_WAVE_NORMS: [&str; 6] =
    ["u_hat_err", "p_err", "u_super", "p_super", "u_pp", "p_pp"];

/// Columns of the scattering table: distances between post-processed
/// solutions on consecutive levels.
pub const SCATTERING_NORMS: [&str; 2] = ["u_self", "p_self"];

/// Choice of the discrete initial velocity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialVelocity {
    /// `u_h^*(0)`, the elliptic projection of `(u(0), 0)`
    Projection,
    /// `ρ_h u(0)`
    Interpolation,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyOptions {
    pub allow_cfl_violation: bool,
    pub initial_velocity: InitialVelocity,
    /// overrides the scenario's output spacing
    pub output_interval: Option<f64>,
    /// overrides the scenario's levels
    pub levels: Option<Vec<u32>>,
    /// progress lines on stderr
    pub verbose: bool,
}

impl Default for StudyOptions {
    fn default() -> Self {
        Self {
            allow_cfl_violation: false,
            initial_velocity: InitialVelocity::Projection,
            output_interval: None,
            levels: None,
            verbose: false,
        }
    }
}

impl StudyOptions {
    fn levels(&self, scenario: &Scenario) -> Vec<u32> {
        self.levels
            .clone()
            .unwrap_or_else(|| scenario.levels.clone())
    }

    fn interval(&self, scenario: &Scenario) -> f64 {
        self.output_interval.unwrap_or(scenario.output_interval)
    }
}

/// Integer levels at which observations are taken: every
/// `round(interval/τ)` steps, the last step, and the levels of `extra`
/// times (which must lie on the time grid).
pub fn output_steps(steps: usize, tau: f64, interval: f64, extra: &[f64]) -> Result<Vec<usize>> {
    if !(interval > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "output interval must be positive, got {interval}"
        )));
    }
    let stride = ((interval / tau).round() as usize).max(1);
    let mut out: Vec<usize> = (0..=steps).step_by(stride).collect();
    out.push(steps);
    for &t in extra {
        let n = (t / tau).round();
        if !(t >= 0.0) || (n * tau - t).abs() > 1e-9 * t.max(1.0) || n as usize > steps {
            return Err(Error::InvalidArgument(format!(
                "time {t} is not a level of the time grid τ = {tau}"
            )));
        }
        out.push(n as usize);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Everything assembled for one mesh level.
pub struct LevelRun {
    pub level: u32,
    pub space: Space,
    pub ops: Operators,
    pub pp: VelocityPostprocessor,
    pub cfl: CflEstimate,
    pub tau: f64,
    pub steps: usize,
}

impl LevelRun {
    /// Assembles the operators and checks `τ ≤ τ_max` unless allowed.
    pub fn new(
        scenario: &Scenario,
        mesh: TriMesh,
        level: u32,
        tau: f64,
        allow_cfl_violation: bool,
    ) -> Result<Self> {
        let h = mesh.h_max();
        let space = Space::new(mesh, &scenario.boundary);
        let ops = Operators::new(&space)?;
        let cfl = cfl_estimate(&ops, h)?;
        if tau > cfl.tau_max && !allow_cfl_violation {
            return Err(Error::CflViolation {
                tau,
                tau_max: cfl.tau_max,
            });
        }
        let pp = VelocityPostprocessor::with_space(&space, scenario.reconstruction)?;
        let steps = num_steps(scenario.final_time, tau)?;
        Ok(Self {
            level,
            space,
            ops,
            pp,
            cfl,
            tau,
            steps,
        })
    }

    pub fn projector(&self) -> Result<EllipticProjector<'_>> {
        EllipticProjector::new(&self.space, &self.pp)
    }

    fn has_pressure_data(&self, scenario: &Scenario) -> bool {
        scenario.wave.is_some()
            && self
                .space
                .mesh()
                .boundary_edges()
                .any(|(_, tag)| scenario.boundary.get(tag) == BoundaryCondition::PressureData)
    }

    /// Boundary load at `t`, `None` for homogeneous data.
    pub fn load(&self, scenario: &Scenario, t: f64) -> Option<Vec<f64>> {
        self.has_pressure_data(scenario)
            .then(|| assemble_boundary_load(&self.space, |x, s| scenario.pressure_data(x, s), t))
    }

    /// Discrete initial data: `π_h⁰ p(0)` and the chosen velocity; zero
    /// without an incident wave.
    pub fn initial_data(
        &self,
        scenario: &Scenario,
        initial: InitialVelocity,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let Some(wave) = scenario.wave else {
            return Ok((
                vec![0.0; self.space.num_velocity_dofs()],
                vec![0.0; self.space.num_cells()],
            ));
        };
        let p0 = project_p0(self.space.mesh(), |x| wave.pressure(x, 0.0));
        let mut u0 = match initial {
            InitialVelocity::Projection => {
                self.projector()?
                    .project(|x| wave.velocity(x, 0.0), |_| 0.0, None)?
                    .w
            }
            InitialVelocity::Interpolation => {
                interpolate_bdm1(&self.space, |x| wave.velocity(x, 0.0))
            }
        };
        apply_normal_bc(self.space.dofmap(), &mut u0);
        Ok((u0, p0))
    }
}

/// What the observer of [`run_level`] receives at an output level.
pub struct Snapshot<'a> {
    pub n: usize,
    pub t: f64,
    pub u_hat: Vec<f64>,
    pub dtau_u: Vec<f64>,
    pub p: &'a [f64],
    /// `p̃_h^n`, when post-processing is requested
    pub p_pp: Option<P1Field>,
    /// `ũ_h^n`, when post-processing is requested
    pub u_pp: Option<Vec<f64>>,
}

/// Time-steps one level from the given initial data and calls `observe`
/// at the `outputs` levels.
pub fn run_level<F>(
    scenario: &Scenario,
    lr: &LevelRun,
    u0: &[f64],
    p0: &[f64],
    outputs: &[usize],
    postprocess: bool,
    mut observe: F,
) -> Result<()>
where
    F: FnMut(&Snapshot<'_>) -> Result<()>,
{
    let load0 = lr.load(scenario, 0.0);
    let mut state = LeapfrogState::new(&lr.ops, u0, p0, load0.as_deref(), lr.tau)?;
    let mut next = 0;
    let mut r_prev: Option<Vec<f64>> = None;
    run(
        &lr.ops,
        &mut state,
        lr.steps,
        |t| lr.load(scenario, t),
        |obs| {
            if next >= outputs.len() || outputs[next] != obs.n {
                return Ok(());
            }
            next += 1;
            let u_hat = obs.u_hat();
            let dtau_u = obs.dtau_u();
            let (p_pp, u_pp) = if postprocess {
                let p_pp = pp_pressure(&lr.space, &dtau_u, obs.p())?;
                let (ut, r) = lr.pp.solve(&u_hat, r_prev.as_deref())?;
                r_prev = Some(r);
                (Some(p_pp), Some(ut))
            } else {
                (None, None)
            };
            observe(&Snapshot {
                n: obs.n,
                t: obs.t,
                u_hat,
                dtau_u,
                p: obs.p(),
                p_pp,
                u_pp,
            })
        },
    )
}

fn log(opts: &StudyOptions, msg: impl FnOnce() -> String) {
    if opts.verbose {
        eprintln!("{}", msg());
    }
}

/// The [`PLANE_WAVE_NORMS`] of one post-processed snapshot.
pub fn plane_wave_norms(
    lr: &LevelRun,
    proj: &EllipticProjector<'_>,
    wave: &PlaneWave,
    s: &Snapshot<'_>,
) -> Result<[f64; 6]> {
    let t = s.t;
    let u = |x: &Point| wave.velocity(x, t);
    let p = |x: &Point| wave.pressure(x, t);
    let (Some(u_pp), Some(p_pp)) = (&s.u_pp, &s.p_pp) else {
        return Err(Error::InvalidArgument(
            "snapshot was not post-processed".into(),
        ));
    };
    let star = auxiliary_velocity_hat(proj, wave, t, lr.tau)?;
    let diff: Vec<f64> = s.u_hat.iter().zip(&star.w).map(|(a, b)| a - b).collect();
    let pi_p = project_p0(lr.space.mesh(), p);
    let pdiff: Vec<f64> = pi_p.iter().zip(s.p).map(|(a, b)| a - b).collect();
    Ok([
        error_l2(&lr.space, FieldRef::Bdm1(&s.u_hat), Exact::Vector(&u))?,
        error_l2(&lr.space, FieldRef::P0(s.p), Exact::Scalar(&p))?,
        velocity_l2(&lr.pp.exact_mass, &diff),
        p0_l2(&lr.space, &pdiff),
        error_l2(&lr.space, FieldRef::Bdm1(u_pp), Exact::Vector(&u))?,
        error_l2(&lr.space, FieldRef::P1(p_pp), Exact::Scalar(&p))?,
    ])
}

/// Runs every level of a scenario with an exact solution and tabulates
/// [`PLANE_WAVE_NORMS`].
pub fn plane_wave_study(scenario: &Scenario, opts: &StudyOptions) -> Result<ErrorReport> {
    let wave = *scenario.exact_solution().ok_or_else(|| {
        Error::InvalidArgument(format!(
            "scenario {} has no exact solution",
            scenario.kind.as_str()
        ))
    })?;
    let levels = opts.levels(scenario);
    if levels.len() < 2 {
        return Err(Error::InvalidArgument(
            "a convergence study needs at least two levels".into(),
        ));
    }
    let mut report = ErrorReport::new(&PLANE_WAVE_NORMS);
    for &level in &levels {
        let start = Instant::now();
        let tau = scenario.tau(level);
        let lr = LevelRun::new(
            scenario,
            scenario.mesh(level)?,
            level,
            tau,
            opts.allow_cfl_violation,
        )?;
        let proj = lr.projector()?;
        let (u0, p0) = lr.initial_data(scenario, opts.initial_velocity)?;
        let outputs = output_steps(lr.steps, tau, opts.interval(scenario), &[])?;
        let mut worst = [0.0f64; 6];
        run_level(scenario, &lr, &u0, &p0, &outputs, true, |s| {
            let values = plane_wave_norms(&lr, &proj, &wave, s)?;
            for (w, v) in worst.iter_mut().zip(values) {
                *w = w.max(v);
            }
            Ok(())
        })?;
        log(opts, || {
            format!(
                "level {level}: {} cells, {} steps, tau_max {:.3e}, {:.1} s",
                lr.space.num_cells(),
                lr.steps,
                lr.cfl.tau_max,
                start.elapsed().as_secs_f64()
            )
        });
        report.push(mesh_size(level), tau, worst.to_vec())?;
    }
    Ok(report)
}

/// Self-convergence on topologically nested meshes: row `i` holds
/// `max_t ‖ũ_{i+1} − π ũ_i‖` and `max_t ‖p̃_{i+1} − π p̃_i‖`, with `h` and `τ`
/// of the coarser level `i`.
pub fn scattering_study(scenario: &Scenario, opts: &StudyOptions) -> Result<ErrorReport> {
    let mut sc = scenario.clone();
    sc.levels = opts.levels(scenario);
    let hierarchy = sc.mesh_hierarchy()?;
    if hierarchy.len() < 3 {
        return Err(Error::InvalidArgument(
            "self-convergence needs at least three levels".into(),
        ));
    }
    let mut report = ErrorReport::new(&SCATTERING_NORMS);
    // post-processed fields of the previous level at the output times
    let mut coarse: Option<Vec<(f64, Vec<[Point; 3]>, P1Field)>> = None;
    let mut prev_level: Option<(u32, f64)> = None;
    for ((mesh, map), &level) in hierarchy.into_iter().zip(&sc.levels) {
        let start = Instant::now();
        let tau = sc.tau(level);
        let lr = LevelRun::new(&sc, mesh, level, tau, opts.allow_cfl_violation)?;
        let (u0, p0) = lr.initial_data(&sc, opts.initial_velocity)?;
        let outputs = output_steps(lr.steps, tau, opts.interval(&sc), &[])?;
        let mut series = Vec::with_capacity(outputs.len());
        let mut worst = [0.0f64; 2];
        let mut k = 0;
        run_level(&sc, &lr, &u0, &p0, &outputs, true, |s| {
            let ut = s.u_pp.as_ref().unwrap();
            let pt = s.p_pp.as_ref().unwrap();
            if let (Some(prev), Some(map)) = (&coarse, &map) {
                let (tc, uc, pc) = prev.get(k).ok_or_else(|| {
                    Error::InvalidArgument("output times differ between levels".into())
                })?;
                if (tc - s.t).abs() > 1e-9 {
                    return Err(Error::InvalidArgument(format!(
                        "output time {} vs {tc} on the coarser level",
                        s.t
                    )));
                }
                worst[0] = worst[0].max(velocity_self_difference(&lr.space, ut, uc, map)?);
                worst[1] = worst[1].max(p1_self_difference(&lr.space, pt, pc, map)?);
            }
            k += 1;
            series.push((s.t, cell_vertex_velocities(&lr.space, ut), pt.clone()));
            Ok(())
        })?;
        log(opts, || {
            format!(
                "level {level}: {} cells, {} steps, tau_max {:.3e}, {:.1} s",
                lr.space.num_cells(),
                lr.steps,
                lr.cfl.tau_max,
                start.elapsed().as_secs_f64()
            )
        });
        if let Some((pl, ptau)) = prev_level {
            if map.is_none() {
                return Err(Error::InvalidArgument(format!(
                    "levels {pl} and {level} are not nested"
                )));
            }
            report.push(mesh_size(pl), ptau, worst.to_vec())?;
        }
        coarse = Some(series);
        prev_level = Some((level, tau));
    }
    Ok(report)
}

/// Uniform random velocity and pressure coefficients in `[−1, 1]`,
/// constrained dofs zeroed.
pub fn random_initial_data(space: &Space, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u: Vec<f64> = (0..space.num_velocity_dofs())
        .map(|_| rng.gen_range(-1.0..1.0))
        .collect();
    let p = (0..space.num_cells())
        .map(|_| rng.gen_range(-1.0..1.0))
        .collect();
    apply_normal_bc(space.dofmap(), &mut u);
    (u, p)
}

/// Discrete energies `E^0 … E^steps` of a homogeneous run. Stops early
/// (returning the trace so far) if the solution stops being finite.
pub fn energy_trace(
    ops: &Operators,
    u0: &[f64],
    p0: &[f64],
    tau: f64,
    steps: usize,
) -> Result<Vec<f64>> {
    let mut state = LeapfrogState::new(ops, u0, p0, None, tau)?;
    let mut trace = vec![state.energy(ops)];
    for _ in 0..steps {
        match state.step(ops, None) {
            Ok(()) => trace.push(state.energy(ops)),
            Err(Error::NonFinite { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(trace)
}
