//! Error norms, convergence tables and the reference quantities used to
//! measure superconvergence.

mod projection;
mod study;

pub use projection::{auxiliary_velocity, auxiliary_velocity_hat, EllipticProjector, Projection};
pub use study::{
    energy_trace, output_steps, plane_wave_norms, plane_wave_study, random_initial_data, run_level,
    scattering_study, InitialVelocity, LevelRun, Snapshot, StudyOptions, PLANE_WAVE_NORMS,
    SCATTERING_NORMS,
};

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::assembly::Space;
use crate::fem::{eval_bdm1, quad_rule, FieldRef, P1Field, QuadKind};
use crate::linalg::SparseMatrix;
use crate::mesh::{ProlongedVelocity, RefinementMap};
use crate::{Error, Point, Result};

/// A reference function for [`error_l2`].
#[derive(Clone, Copy)]
pub enum Exact<'a> {
    Scalar(&'a (dyn Fn(&Point) -> f64 + Sync)),
    Vector(&'a (dyn Fn(&Point) -> Point + Sync)),
}

/// `‖field − exact‖_{L²(Ω)}` with the degree-6 rule on every cell.
pub fn error_l2(space: &Space, field: FieldRef<'_>, exact: Exact<'_>) -> Result<f64> {
    let mesh = space.mesh();
    let rule = quad_rule(QuadKind::HighOrder);
    let check = |len: usize, expected: usize, what: &str| {
        if len == expected {
            Ok(())
        } else {
            Err(Error::SizeMismatch(format!(
                "{what} field has {len} entries, expected {expected}"
            )))
        }
    };
    match (field, exact) {
        (FieldRef::Bdm1(c), Exact::Vector(_)) => {
            check(c.len(), space.num_velocity_dofs(), "velocity")?
        }
        (FieldRef::P0(p), Exact::Scalar(_)) => check(p.len(), space.num_cells(), "P0")?,
        (FieldRef::P1(p), Exact::Scalar(_)) => check(p.values.len(), space.num_cells(), "P1")?,
        _ => {
            return Err(Error::InvalidArgument(
                "field and reference differ in kind".into(),
            ))
        }
    }
    let sum: f64 = (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| {
            let area = mesh.cell_area(c);
            let mut s = 0.0;
            for (l, w) in rule.points.iter().zip(&rule.weights) {
                let x = mesh.point_from_barycentric(c, l);
                let d2 = match (field, exact) {
                    (FieldRef::Bdm1(u), Exact::Vector(f)) => {
                        (eval_bdm1(space, u, c, l) - f(&x)).norm_squared()
                    }
                    (FieldRef::P0(p), Exact::Scalar(f)) => (p[c] - f(&x)).powi(2),
                    (FieldRef::P1(p), Exact::Scalar(f)) => (p.eval(c, l) - f(&x)).powi(2),
                    _ => unreachable!(),
                };
                s += 2.0 * area * w * d2;
            }
            s
        })
        .sum();
    Ok(sum.sqrt())
}

/// `‖v‖_{L²}` of a velocity field through the consistent mass.
pub fn velocity_l2(exact_mass: &SparseMatrix, v: &[f64]) -> f64 {
    crate::linalg::dot(v, &exact_mass.mul_vec(v))
        .max(0.0)
        .sqrt()
}

/// `‖q‖_{L²}` of a P0 field.
pub fn p0_l2(space: &Space, q: &[f64]) -> f64 {
    (0..space.num_cells())
        .map(|c| space.mesh().cell_area(c) * q[c] * q[c])
        .sum::<f64>()
        .sqrt()
}

/// `‖q‖_{L²}` of a per-cell linear field.
pub fn p1_l2(space: &Space, q: &P1Field) -> f64 {
    (0..space.num_cells())
        .map(|c| p1_mass_form(space.mesh().cell_area(c), &q.values[c]))
        .sum::<f64>()
        .sqrt()
}

/// `‖p̃_fine − π p̃_coarse‖_{L²}` on the fine mesh. Both fields are linear
/// on every fine cell, so the integral is evaluated exactly from the
/// corner differences.
pub fn p1_self_difference(
    fine: &Space,
    fine_field: &P1Field,
    coarse_field: &P1Field,
    map: &RefinementMap,
) -> Result<f64> {
    check_map(fine, coarse_field.values.len(), map)?;
    let sum: f64 = (0..fine.num_cells())
        .into_par_iter()
        .map(|f| {
            let mut d = [0.0; 3];
            for (a, l) in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
                .iter()
                .enumerate()
            {
                let (c, lc) = map.to_parent(f, l);
                d[a] = fine_field.values[f][a] - coarse_field.eval(c, &lc);
            }
            p1_mass_form(fine.mesh().cell_area(f), &d)
        })
        .sum();
    Ok(sum.sqrt())
}

/// Velocity analogue of [`p1_self_difference`]; `coarse` holds the corner
/// values of the coarse field (see [`crate::fem::cell_vertex_velocities`]).
pub fn velocity_self_difference(
    fine: &Space,
    fine_field: &[f64],
    coarse: &[[Point; 3]],
    map: &RefinementMap,
) -> Result<f64> {
    check_map(fine, coarse.len(), map)?;
    let prolonged = ProlongedVelocity::new(coarse, map)?;
    let sum: f64 = (0..fine.num_cells())
        .into_par_iter()
        .map(|f| {
            let corners = fine
                .element(f)
                .vertex_values(&crate::fem::local_coeffs(fine, fine_field, f));
            let mut dx = [0.0; 3];
            let mut dy = [0.0; 3];
            for (a, l) in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
                .iter()
                .enumerate()
            {
                let d = corners[a] - prolonged.eval(f, l);
                dx[a] = d.x;
                dy[a] = d.y;
            }
            let area = fine.mesh().cell_area(f);
            p1_mass_form(area, &dx) + p1_mass_form(area, &dy)
        })
        .sum();
    Ok(sum.sqrt())
}

fn check_map(fine: &Space, coarse_cells: usize, map: &RefinementMap) -> Result<()> {
    if map.fine_cells() != fine.num_cells() || map.coarse_cells != coarse_cells {
        return Err(Error::SizeMismatch(format!(
            "refinement map {} -> {} cells, fields on {} and {} cells",
            map.coarse_cells,
            map.fine_cells(),
            coarse_cells,
            fine.num_cells()
        )));
    }
    Ok(())
}

/// `∫_K v²` for the linear function with vertex values `d`.
fn p1_mass_form(area: f64, d: &[f64; 3]) -> f64 {
    let s: f64 = d.iter().sum();
    let sq: f64 = d.iter().map(|v| v * v).sum();
    area / 12.0 * (s * s + sq)
}

/// One row of an [`ErrorReport`].
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub h: f64,
    pub tau: f64,
    pub values: Vec<f64>,
}

/// Errors per level with estimated orders of convergence.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorReport {
    pub names: Vec<String>,
    pub rows: Vec<ReportRow>,
}

impl ErrorReport {
    pub fn new(names: &[&str]) -> Self {
        Self {
            names: names.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, h: f64, tau: f64, values: Vec<f64>) -> Result<()> {
        if values.len() != self.names.len() {
            return Err(Error::SizeMismatch(format!(
                "{} values for {} norms",
                values.len(),
                self.names.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "error norm {v} is not a nonnegative number"
            )));
        }
        self.rows.push(ReportRow { h, tau, values });
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.names.iter().position(|n| n == name)?;
        Some(self.rows.iter().map(|r| r.values[i]).collect())
    }

    /// `eoc_i = log(e_{i−1}/e_i) / log(h_{i−1}/h_i)` for rows `i ≥ 1`.
    pub fn eoc(&self, name: &str) -> Option<Vec<f64>> {
        let col = self.column(name)?;
        Some(
            (1..self.rows.len())
                .map(|i| (col[i - 1] / col[i]).ln() / (self.rows[i - 1].h / self.rows[i].h).ln())
                .collect(),
        )
    }

    /// Comma-separated table `h,tau,<norm>,eoc_<norm>,…` with 12
    /// significant digits; the first row's eoc cells are empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("h,tau");
        for n in &self.names {
            let _ = write!(out, ",{n},eoc_{n}");
        }
        out.push('\n');
        let eocs: Vec<Vec<f64>> = self
            .names
            .iter()
            .map(|n| self.eoc(n).unwrap_or_default())
            .collect();
        for (i, row) in self.rows.iter().enumerate() {
            let _ = write!(out, "{},{}", fmt_num(row.h), fmt_num(row.tau));
            for (k, v) in row.values.iter().enumerate() {
                let eoc = if i == 0 {
                    String::new()
                } else {
                    fmt_num(eocs[k][i - 1])
                };
                let _ = write!(out, ",{},{eoc}", fmt_num(*v));
            }
            out.push('\n');
        }
        out
    }
}

/// Scientific notation with 12 significant digits.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.11e}")
}
