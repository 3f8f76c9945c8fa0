//! Batch driver behind the `mixwave` binary: configuration, the `run`,
//! `convergence` and `energy` commands, and CSV/VTK output.

mod config;
mod vtk;

pub use config::{parse_config, Config, EnergySection, EnergyStep, OutputField, OutputSection};
pub use vtk::{write_vtk, VtkField};

use std::fmt::Write as _;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use crate::analysis::{
    energy_trace, fmt_num, output_steps, p0_l2, p1_l2, plane_wave_norms, plane_wave_study,
    random_initial_data, run_level, scattering_study, velocity_l2, ErrorReport, LevelRun,
    StudyOptions, PLANE_WAVE_NORMS,
};
use crate::fem::cell_vertex_velocities;
use crate::integrator::Operators;
use crate::scenarios::ScenarioKind;
use crate::{Error, Result};

/// Settings shared by all commands.
#[derive(Clone, Debug)]
pub struct CommandOptions {
    pub out_dir: PathBuf,
    pub allow_cfl_violation: bool,
    pub verbose: bool,
}

impl CommandOptions {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        Self {
            out_dir: out_dir.into(),
            allow_cfl_violation: false,
            verbose: false,
        }
    }
}

/// Reads and parses a configuration file; errors carry the path.
pub fn load_config(path: &Path) -> Result<Config> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

/// Files written by [`cmd_run`].
#[derive(Clone, Debug, Default)]
pub struct RunOutput {
    pub snapshots: Vec<PathBuf>,
    pub norms: PathBuf,
}

/// One level of the configured scenario: VTK snapshots of the requested
/// fields at the snapshot times and `norms.csv` with field norms (and, for
/// exact solutions, errors) at every output time.
pub fn cmd_run(cfg: &Config, opts: &CommandOptions) -> Result<RunOutput> {
    let sc = &cfg.scenario;
    let level = cfg.output.level;
    let tau = sc.tau(level);
    let lr = LevelRun::new(sc, sc.mesh(level)?, level, tau, opts.allow_cfl_violation)?;
    let proj = lr.projector()?;
    let (u0, p0) = if sc.kind == ScenarioKind::Cavity {
        random_initial_data(&lr.space, cfg.energy.seed)
    } else {
        lr.initial_data(sc, cfg.initial_velocity)?
    };
    let snapshot_steps: Vec<usize> = cfg
        .output
        .snapshot_times
        .iter()
        .map(|t| (t / tau).round() as usize)
        .collect();
    let outputs = output_steps(
        lr.steps,
        tau,
        sc.output_interval,
        &cfg.output.snapshot_times,
    )?;
    let exact = sc.exact_solution().copied();

    let mut header = String::from("t,u_hat_l2,p_l2,u_pp_l2,p_pp_l2");
    if exact.is_some() {
        for n in PLANE_WAVE_NORMS {
            let _ = write!(header, ",{n}");
        }
    }
    let mut csv = header + "\n";
    let mut written = Vec::new();
    run_level(sc, &lr, &u0, &p0, &outputs, true, |s| {
        let (u_pp, p_pp) = (s.u_pp.as_ref().unwrap(), s.p_pp.as_ref().unwrap());
        let mut row = vec![
            s.t,
            velocity_l2(&lr.pp.exact_mass, &s.u_hat),
            p0_l2(&lr.space, s.p),
            velocity_l2(&lr.pp.exact_mass, u_pp),
            p1_l2(&lr.space, p_pp),
        ];
        if let Some(w) = &exact {
            row.extend(plane_wave_norms(&lr, &proj, w, s)?);
        }
        let line: Vec<String> = row.into_iter().map(fmt_num).collect();
        csv.push_str(&line.join(","));
        csv.push('\n');

        if snapshot_steps.contains(&s.n) {
            for &field in &cfg.output.fields {
                let name = format!("{}_t{:.4}.vtk", field.as_str(), s.t);
                fs::create_dir_all(&opts.out_dir)?;
                let path = opts.out_dir.join(&name);
                let mut w = BufWriter::new(fs::File::create(&path)?);
                let title = format!(
                    "{} {} level {level} t={}",
                    sc.kind.as_str(),
                    field.as_str(),
                    s.t
                );
                let mesh = lr.space.mesh();
                match field {
                    config::OutputField::P => {
                        write_vtk(&mut w, mesh, &title, &[VtkField::Cell("p", s.p)])?
                    }
                    config::OutputField::PPp => {
                        write_vtk(&mut w, mesh, &title, &[VtkField::Linear("p_pp", p_pp)])?
                    }
                    config::OutputField::UHat => {
                        let v = cell_vertex_velocities(&lr.space, &s.u_hat);
                        write_vtk(&mut w, mesh, &title, &[VtkField::Vector("u_hat", &v)])?
                    }
                    config::OutputField::UPp => {
                        let v = cell_vertex_velocities(&lr.space, u_pp);
                        write_vtk(&mut w, mesh, &title, &[VtkField::Vector("u_pp", &v)])?
                    }
                }
                written.push(path);
            }
        }
        Ok(())
    })?;
    let norms = write_file(&opts.out_dir, "norms.csv", &csv)?;
    Ok(RunOutput {
        snapshots: written,
        norms,
    })
}

/// Runs all configured levels and writes `convergence.csv`: errors and
/// superconvergence distances for scenarios with an exact solution,
/// self-convergence distances for the scattering problem.
pub fn cmd_convergence(cfg: &Config, opts: &CommandOptions) -> Result<(ErrorReport, PathBuf)> {
    let sc = &cfg.scenario;
    let study = StudyOptions {
        allow_cfl_violation: opts.allow_cfl_violation,
        initial_velocity: cfg.initial_velocity,
        verbose: opts.verbose,
        ..Default::default()
    };
    let report = match sc.kind {
        ScenarioKind::PlaneWave | ScenarioKind::LShape => {
            if sc.levels.len() < 2 {
                return Err(Error::InvalidArgument(
                    "convergence needs at least two levels (eoc undefined)".into(),
                ));
            }
            plane_wave_study(sc, &study)?
        }
        ScenarioKind::Scattering => {
            if sc.levels.len() < 3 {
                return Err(Error::InvalidArgument(
                    "self-convergence needs at least three levels (eoc undefined)".into(),
                ));
            }
            scattering_study(sc, &study)?
        }
        ScenarioKind::Cavity => {
            return Err(Error::InvalidArgument(
                "the cavity scenario has no convergence study".into(),
            ))
        }
    };
    let path = write_file(&opts.out_dir, "convergence.csv", &report.to_csv())?;
    Ok((report, path))
}

/// Summary of an energy run.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergySummary {
    pub tau: f64,
    pub tau_max: f64,
    pub steps_done: usize,
    /// `max |E^n − E^0| / E^0`
    pub max_drift: f64,
    /// `max E^n / E^0`
    pub growth: f64,
    /// growth beyond 10³ or non-finite values
    pub unstable: bool,
    pub path: PathBuf,
}

/// Homogeneous run from seeded random data; writes `energy.csv` with
/// `n,t,energy,drift`.
pub fn cmd_energy(cfg: &Config, opts: &CommandOptions) -> Result<EnergySummary> {
    let sc = &cfg.scenario;
    let e = &cfg.energy;
    let mesh = sc.mesh(e.level)?;
    let space = crate::assembly::Space::new(mesh, &sc.boundary);
    let ops = Operators::new(&space)?;
    let cfl = crate::integrator::cfl_estimate(&ops, space.mesh().h_max())?;
    let tau = match e.time_step {
        config::EnergyStep::CflFraction(f) => f * cfl.tau_max,
        config::EnergyStep::Fixed(t) => t,
    };
    if tau > cfl.tau_max && !opts.allow_cfl_violation {
        return Err(Error::CflViolation {
            tau,
            tau_max: cfl.tau_max,
        });
    }
    let (u0, p0) = random_initial_data(&space, e.seed);
    let trace = energy_trace(&ops, &u0, &p0, tau, e.steps)?;
    let e0 = trace[0];
    let rel = |v: f64| if e0 > 0.0 { (v - e0) / e0 } else { v - e0 };
    let mut csv = String::from("n,t,energy,drift\n");
    for (n, v) in trace.iter().enumerate() {
        let _ = writeln!(
            csv,
            "{n},{},{},{}",
            fmt_num(n as f64 * tau),
            fmt_num(*v),
            fmt_num(rel(*v))
        );
    }
    let max_drift = trace.iter().map(|v| rel(*v).abs()).fold(0.0, f64::max);
    let growth = if e0 > 0.0 {
        trace.iter().fold(0.0f64, |m, v| m.max(v / e0))
    } else {
        1.0
    };
    let steps_done = trace.len() - 1;
    let unstable = growth > 1e3 || steps_done < e.steps;
    let path = write_file(&opts.out_dir, "energy.csv", &csv)?;
    Ok(EnergySummary {
        tau,
        tau_max: cfl.tau_max,
        steps_done,
        max_drift,
        growth,
        unstable,
        path,
    })
}
