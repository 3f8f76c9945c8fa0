//! Reference-element machinery and the interpolation, projection and
//! evaluation operators built on it.

mod bdm1;
mod quadrature;

pub use bdm1::{
    piola_map, ref_barycentric, ref_div, ref_edge_length, ref_functional, ref_normal, ref_shape,
    AffineMap, Bdm1Element, DOF_VERTEX, REF_VERTICES, VERTEX_DOFS,
};
pub use quadrature::{gauss_legendre4, quad_rule, QuadKind, QuadRule};

use crate::assembly::Space;
use crate::mesh::TriMesh;
use crate::{Error, Point, Result};

/// Tolerance on barycentric coordinates for point-in-cell checks.
pub const INSIDE_TOL: f64 = 1e-12;

/// Discontinuous piecewise linear scalar field stored by its three vertex
/// values on every cell.
#[derive(Clone, Debug, PartialEq)]
pub struct P1Field {
    pub values: Vec<[f64; 3]>,
}

impl P1Field {
    pub fn zeros(cells: usize) -> Self {
        Self {
            values: vec![[0.0; 3]; cells],
        }
    }

    pub fn eval(&self, cell: usize, bary: &[f64; 3]) -> f64 {
        let v = &self.values[cell];
        v[0] * bary[0] + v[1] * bary[1] + v[2] * bary[2]
    }

    /// Cell mean (the vertex average for a linear function).
    pub fn mean(&self, cell: usize) -> f64 {
        self.values[cell].iter().sum::<f64>() / 3.0
    }
}

/// A discrete field borrowed for evaluation.
#[derive(Clone, Copy, Debug)]
pub enum FieldRef<'a> {
    Bdm1(&'a [f64]),
    P0(&'a [f64]),
    P1(&'a P1Field),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FieldValue {
    Scalar(f64),
    Vector(Point),
}

/// Integrates `f(cell, barycentric, x)` over every cell with `rule`,
/// returning per-cell integrals.
pub fn integrate_cells<F>(mesh: &TriMesh, rule: &QuadRule, f: F) -> Vec<f64>
where
    F: Fn(usize, &[f64; 3], &Point) -> f64,
{
    (0..mesh.num_cells())
        .map(|c| {
            let area = mesh.cell_area(c);
            rule.points
                .iter()
                .zip(&rule.weights)
                .map(|(l, w)| {
                    let x = mesh.point_from_barycentric(c, l);
                    2.0 * area * w * f(c, l, &x)
                })
                .sum()
        })
        .collect()
}

/// Canonical BDM1 interpolant `ρ_h u`.
///
/// On every edge the normal trace `u · n` is replaced by its L²(e)
/// projection onto linears, computed with 4-point Gauss. This reproduces
/// the endpoint values whenever `u · n` is linear on the edge and makes
/// `div ρ_h u = π_h⁰ div u` hold exactly.
pub fn interpolate_bdm1(space: &Space, u: impl Fn(&Point) -> Point) -> Vec<f64> {
    let mesh = space.mesh();
    let dofmap = space.dofmap();
    let mut coeffs = vec![0.0; dofmap.num_velocity_dofs()];
    let gauss = gauss_legendre4();
    for e in 0..mesh.num_edges() {
        let [a, b] = mesh.edge(e);
        let (xa, xb) = (mesh.vertex(a), mesh.vertex(b));
        let n = mesh.edge_normal(e);
        let len = mesh.edge_length(e);
        // moments against λ_a and λ_b along the edge
        let (mut ma, mut mb) = (0.0, 0.0);
        for &(s, w) in &gauss {
            let un = u(&(xa + s * (xb - xa))).dot(&n) * w * len;
            ma += (1.0 - s) * un;
            mb += s * un;
        }
        let [da, db] = dofmap.edge_dofs(e);
        coeffs[da] = 2.0 * (2.0 * ma - mb) / len;
        coeffs[db] = 2.0 * (2.0 * mb - ma) / len;
    }
    coeffs
}

/// Cell averages `π_h⁰ p` with the degree-6 rule.
pub fn project_p0(mesh: &TriMesh, p: impl Fn(&Point) -> f64) -> Vec<f64> {
    let rule = quad_rule(QuadKind::HighOrder);
    integrate_cells(mesh, &rule, |_, _, x| p(x))
        .into_iter()
        .enumerate()
        .map(|(c, v)| v / mesh.cell_area(c))
        .collect()
}

/// Local coefficients of a global velocity vector on one cell.
pub fn local_coeffs(space: &Space, coeffs: &[f64], cell: usize) -> [f64; 6] {
    let dofs = space.cell_dofs(cell);
    let mut out = [0.0; 6];
    for k in 0..6 {
        out[k] = coeffs[dofs[k]];
    }
    out
}

/// Velocity values at the three corners of every cell. This is the
/// mesh-independent storage used for prolongation and VTK export.
pub fn cell_vertex_velocities(space: &Space, coeffs: &[f64]) -> Vec<[Point; 3]> {
    (0..space.mesh().num_cells())
        .map(|c| {
            space
                .element(c)
                .vertex_values(&local_coeffs(space, coeffs, c))
        })
        .collect()
}

/// Cellwise divergence of a velocity field.
pub fn cell_divergence(space: &Space, coeffs: &[f64]) -> Vec<f64> {
    (0..space.mesh().num_cells())
        .map(|c| space.element(c).divergence(&local_coeffs(space, coeffs, c)))
        .collect()
}

/// BDM1 field at barycentric coordinates of `cell`.
pub fn eval_bdm1(space: &Space, coeffs: &[f64], cell: usize, bary: &[f64; 3]) -> Point {
    space
        .element(cell)
        .eval(&local_coeffs(space, coeffs, cell), bary)
}

/// Point evaluation of a discrete field at `x`, which must lie in `cell`.
pub fn eval_field(
    space: &Space,
    field: FieldRef<'_>,
    x: &Point,
    cell: usize,
) -> Result<FieldValue> {
    let mesh = space.mesh();
    if cell >= mesh.num_cells() {
        return Err(Error::InvalidArgument(format!("cell {cell} out of range")));
    }
    let bary = mesh.barycentric(cell, x);
    if bary.iter().any(|&l| l < -INSIDE_TOL) {
        return Err(Error::PointOutsideCell {
            cell,
            x: x.x,
            y: x.y,
        });
    }
    Ok(match field {
        FieldRef::Bdm1(c) => FieldValue::Vector(eval_bdm1(space, c, cell, &bary)),
        FieldRef::P0(p) => FieldValue::Scalar(p[cell]),
        FieldRef::P1(f) => FieldValue::Scalar(f.eval(cell, &bary)),
    })
}
