//! Run configuration.
//!
//! Line-oriented `key = value` text with `[section]` headers; `#` starts a
//! comment. Lists are comma-separated. Every key is optional; unspecified
//! values fall back to the selected scenario's defaults.
//!
//! ```text
//! [scenario]
//! name = plane_wave           # plane_wave | scattering | lshape | cavity
//! levels = 3, 4, 5, 6         # h = 2^-level
//! final_time = 5
//! time_step_factor = 0.25     # τ = factor · h   (exclusive with time_step)
//! time_step = 0.001           # fixed τ
//! output_interval = 0.0625    # spacing of the error evaluations
//! mesh_perturbation = 0       # random interior vertex shift, fraction of h_min
//! initial_velocity = projection   # projection | interpolation
//! velocity_reconstruction = auto  # auto | free | constrained
//!
//! [boundary]                  # tag = pressure | zero_pressure | no_flux
//! dirichlet_p = pressure
//! neumann_u = no_flux
//! scatterer = zero_pressure
//!
//! [output]                    # the `run` command
//! level = 3
//! snapshot_times = 2
//! fields = p, p_pp, u_hat, u_pp
//!
//! [energy]                    # the `energy` command
//! level = 3
//! steps = 1000
//! cfl_fraction = 0.9          # τ = fraction · τ_max (exclusive with time_step)
//! time_step = 0.1
//! seed = 1
//! ```

use std::str::FromStr;

use crate::analysis::InitialVelocity;
use crate::assembly::BoundaryCondition;
use crate::mesh::BoundaryTag;
use crate::postprocess::ReconstructionSpace;
use crate::scenarios::{scenario, Scenario, ScenarioKind, TimeStep};
use crate::{Error, Result};

/// Fields that `run` can export.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputField {
    /// `p_h` (cell data)
    P,
    /// `p̃_h` (per-cell linear)
    PPp,
    /// `û_h`
    UHat,
    /// `ũ_h`
    UPp,
}

impl OutputField {
    pub const ALL: [OutputField; 4] = [Self::P, Self::PPp, Self::UHat, Self::UPp];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::P => "p",
            Self::PPp => "p_pp",
            Self::UHat => "u_hat",
            Self::UPp => "u_pp",
        }
    }
}

impl FromStr for OutputField {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| format!("unknown field '{s}' (expected p, p_pp, u_hat or u_pp)"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputSection {
    pub level: u32,
    pub snapshot_times: Vec<f64>,
    pub fields: Vec<OutputField>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EnergyStep {
    CflFraction(f64),
    Fixed(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergySection {
    pub level: u32,
    pub steps: usize,
    pub time_step: EnergyStep,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub scenario: Scenario,
    pub initial_velocity: InitialVelocity,
    pub output: OutputSection,
    pub energy: EnergySection,
}

impl Default for Config {
    fn default() -> Self {
        Self::for_scenario(ScenarioKind::PlaneWave)
    }
}

impl Config {
    pub fn for_scenario(kind: ScenarioKind) -> Self {
        let sc = scenario(kind);
        let level = sc.levels[0];
        Self {
            scenario: sc,
            initial_velocity: InitialVelocity::Projection,
            output: OutputSection {
                level,
                snapshot_times: Vec::new(),
                fields: OutputField::ALL.to_vec(),
            },
            energy: EnergySection {
                level,
                steps: 1000,
                time_step: EnergyStep::CflFraction(0.9),
                seed: 1,
            },
        }
    }
}

struct Entry {
    line: usize,
    section: String,
    key: String,
    value: String,
}

fn err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("line {line}: {msg}"))
}

fn parse_value<T: FromStr>(e: &Entry) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    e.value.parse::<T>().map_err(|m| {
        err(
            e.line,
            format!("invalid value '{}' for {}: {m}", e.value, e.key),
        )
    })
}

fn parse_list<T: FromStr>(e: &Entry) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    e.value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>().map_err(|m| {
                err(
                    e.line,
                    format!("invalid list item '{s}' for {}: {m}", e.key),
                )
            })
        })
        .collect()
}

fn positive(e: &Entry) -> Result<f64> {
    let v: f64 = parse_value(e)?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(err(e.line, format!("{} must be positive, got {v}", e.key)))
    }
}

fn tokenize(text: &str) -> Result<Vec<Entry>> {
    let mut section = String::new();
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.split('#').next().unwrap_or("").trim();
        if s.is_empty() {
            continue;
        }
        if let Some(rest) = s.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| err(line, "unterminated section header"))?
                .trim();
            if !["scenario", "boundary", "output", "energy"].contains(&name) {
                return Err(err(line, format!("unknown section [{name}]")));
            }
            section = name.to_string();
            continue;
        }
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| err(line, format!("expected 'key = value', found '{s}'")))?;
        if section.is_empty() {
            return Err(err(line, "key outside of a section"));
        }
        let (key, value) = (k.trim(), v.trim());
        if key.is_empty() || value.is_empty() {
            return Err(err(line, "empty key or value"));
        }
        if out
            .iter()
            .any(|e: &Entry| e.section == section && e.key == key)
        {
            return Err(err(line, format!("duplicate key '{key}' in [{section}]")));
        }
        out.push(Entry {
            line,
            section: section.clone(),
            key: key.to_string(),
            value: value.to_string(),
        });
    }
    Ok(out)
}

/// Parses a configuration text.
pub fn parse_config(text: &str) -> Result<Config> {
    let entries = tokenize(text)?;
    let kind = match entries
        .iter()
        .find(|e| e.section == "scenario" && e.key == "name")
    {
        Some(e) => parse_value::<ScenarioKind>(e)?,
        None => ScenarioKind::PlaneWave,
    };
    let mut cfg = Config::for_scenario(kind);
    let mut fixed_step: Option<usize> = None;
    let mut factor_step: Option<usize> = None;
    let mut energy_fixed: Option<usize> = None;
    let mut energy_fraction: Option<usize> = None;
    let mut output_level_set = false;
    let mut energy_level_set = false;

    for e in &entries {
        let sc = &mut cfg.scenario;
        match (e.section.as_str(), e.key.as_str()) {
            ("scenario", "name") => {}
            ("scenario", "levels") => {
                let levels: Vec<u32> = parse_list(e)?;
                if levels.is_empty() {
                    return Err(err(e.line, "levels must not be empty"));
                }
                if levels.iter().any(|&l| l > 12) {
                    return Err(err(e.line, "levels above 12 are not supported"));
                }
                if levels.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(err(e.line, "levels must be strictly increasing"));
                }
                sc.levels = levels;
            }
            ("scenario", "final_time") => {
                let t: f64 = parse_value(e)?;
                if !(t >= 0.0 && t.is_finite()) {
                    return Err(err(e.line, format!("final_time must be nonnegative, got {t}")));
                }
                sc.final_time = t;
            }
            ("scenario", "time_step") => {
                sc.time_step = TimeStep::Fixed(positive(e)?);
                fixed_step = Some(e.line);
            }
            ("scenario", "time_step_factor") => {
                sc.time_step = TimeStep::MeshFraction(positive(e)?);
                factor_step = Some(e.line);
            }
            ("scenario", "output_interval") => sc.output_interval = positive(e)?,
            ("scenario", "mesh_perturbation") => {
                let a: f64 = parse_value(e)?;
                if !(0.0..0.5).contains(&a) {
                    return Err(err(e.line, format!("mesh_perturbation must lie in [0, 0.5), got {a}")));
                }
                sc.mesh_perturbation = a;
            }
            ("scenario", "initial_velocity") => {
                cfg.initial_velocity = match e.value.as_str() {
                    "projection" => InitialVelocity::Projection,
                    "interpolation" => InitialVelocity::Interpolation,
                    v => {
                        return Err(err(
                            e.line,
                            format!("unknown initial_velocity '{v}' (expected projection or interpolation)"),
                        ))
                    }
                }
            }
            ("scenario", "velocity_reconstruction") => {
                sc.reconstruction = match e.value.as_str() {
                    "auto" => ReconstructionSpace::Auto,
                    "free" => ReconstructionSpace::Free,
                    "constrained" => ReconstructionSpace::Constrained,
                    v => {
                        return Err(err(
                            e.line,
                            format!("unknown velocity_reconstruction '{v}' (expected auto, free or constrained)"),
                        ))
                    }
                }
            }
            ("boundary", tag) => {
                let tag: BoundaryTag = tag.parse().map_err(|m| err(e.line, m))?;
                let cond: BoundaryCondition = parse_value(e)?;
                sc.boundary.set(tag, cond);
            }
            ("output", "level") => {
                cfg.output.level = parse_value(e)?;
                output_level_set = true;
            }
            ("output", "snapshot_times") => {
                let times: Vec<f64> = parse_list(e)?;
                if let Some(t) = times.iter().find(|t| !(**t >= 0.0)) {
                    return Err(err(e.line, format!("snapshot time {t} is negative")));
                }
                cfg.output.snapshot_times = times;
            }
            ("output", "fields") => cfg.output.fields = parse_list(e)?,
            ("energy", "level") => {
                cfg.energy.level = parse_value(e)?;
                energy_level_set = true;
            }
            ("energy", "steps") => cfg.energy.steps = parse_value(e)?,
            ("energy", "cfl_fraction") => {
                cfg.energy.time_step = EnergyStep::CflFraction(positive(e)?);
                energy_fraction = Some(e.line);
            }
            ("energy", "time_step") => {
                cfg.energy.time_step = EnergyStep::Fixed(positive(e)?);
                energy_fixed = Some(e.line);
            }
            ("energy", "seed") => cfg.energy.seed = parse_value(e)?,
            (section, key) => return Err(err(e.line, format!("unknown key '{key}' in [{section}]"))),
        }
    }
    if let (Some(_), Some(b)) = (fixed_step, factor_step) {
        return Err(err(
            b,
            "time_step and time_step_factor are mutually exclusive",
        ));
    }
    if let (Some(_), Some(b)) = (energy_fixed, energy_fraction) {
        return Err(err(b, "time_step and cfl_fraction are mutually exclusive"));
    }
    if !output_level_set {
        cfg.output.level = cfg.scenario.levels[0];
    }
    if !energy_level_set {
        cfg.energy.level = cfg.scenario.levels[0];
    }
    Ok(cfg)
}
