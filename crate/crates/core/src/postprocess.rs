//! Superconvergent post-processing.
//!
//! The pressure is lifted cell by cell to a linear function whose gradient
//! matches `−d_τ u` in the mean and whose mean is `p_h`. The velocity is
//! recovered globally from a mixed problem with the consistent mass on the
//! left and the lumped product of `û_h` on the right, keeping the
//! divergence of `û_h`.

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;

use crate::assembly::{
    assemble_div, assemble_exact_mass, assemble_lumped_mass, assemble_lumped_mass_free, Space,
};
use crate::fem::local_coeffs;
use crate::linalg::{
    saddle_solve, BlockDiagMatrix, CgInner, EnvelopeCholesky, SaddleOptions, SparseMatrix,
};
use crate::{Error, Result};

pub use crate::fem::P1Field;

/// Local P1 reconstruction of the pressure from `p_h^n` and `d_τ u_h^n`.
///
/// Per cell solves `(S + α m mᵀ) x = b + α m p_K` where `S` is the P1
/// stiffness, `m = (1, 1, 1) / 3` the mean functional, `b_i = −∫ d_τ u · ∇λ_i`
/// and `α = tr S`; `x` are the vertex values. The rank-one term removes the
/// constant kernel of `S` and imposes the mean in one step; scaling it
/// like `S` keeps the local system well conditioned on small cells.
pub fn pp_pressure(space: &Space, dtu: &[f64], p: &[f64]) -> Result<P1Field> {
    if dtu.len() != space.num_velocity_dofs() || p.len() != space.num_cells() {
        return Err(Error::SizeMismatch(format!(
            "pp_pressure got {} velocity and {} pressure values for {} and {}",
            dtu.len(),
            p.len(),
            space.num_velocity_dofs(),
            space.num_cells()
        )));
    }
    let values = (0..space.num_cells())
        .into_par_iter()
        .map(|c| {
            let el = space.element(c);
            let area = el.area;
            let corners = el.vertex_values(&local_coeffs(space, dtu, c));
            // ∫_K d_τu = |K| · mean of the corner values (linear field)
            let integral = (corners[0] + corners[1] + corners[2]) * (area / 3.0);
            let mut a = Matrix3::zeros();
            for i in 0..3 {
                for j in 0..3 {
                    a[(i, j)] = area * el.grad_lambda[i].dot(&el.grad_lambda[j]);
                }
            }
            // mean constraint x̄ = p_K, weighted like the stiffness
            let alpha = a.trace();
            let mut rhs = Vector3::zeros();
            for i in 0..3 {
                for j in 0..3 {
                    a[(i, j)] += alpha / 9.0;
                }
                rhs[i] = -el.grad_lambda[i].dot(&integral) + alpha / 3.0 * p[c];
            }
            let x = a
                .cholesky()
                .expect("local pressure system is SPD on a non-degenerate cell")
                .solve(&rhs);
            [x[0], x[1], x[2]]
        })
        .collect();
    Ok(P1Field { values })
}

/// `S_L = B M_L⁻¹ Bᵀ` for a block-diagonal `M_L`, assembled vertex block by
/// vertex block.
pub fn lumped_schur_complement(div: &SparseMatrix, lumped: &BlockDiagMatrix) -> SparseMatrix {
    let bt = div.transpose();
    let mut triplets = Vec::new();
    let mut cols: Vec<(usize, usize, f64)> = Vec::new();
    for b in 0..lumped.num_blocks() {
        let r = lumped.block_range(b);
        let s = r.len();
        let inv = lumped.block_inverse(b);
        cols.clear();
        for (li, d) in r.enumerate() {
            cols.extend(bt.row(d).map(|(cell, v)| (li, cell, v)));
        }
        for &(i, ci, vi) in &cols {
            for &(j, cj, vj) in &cols {
                triplets.push((ci, cj, vi * inv[i * s + j] * vj));
            }
        }
    }
    SparseMatrix::from_triplets(div.nrows(), div.nrows(), &triplets)
}

/// Velocity space of the global reconstruction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ReconstructionSpace {
    /// [`Self::Constrained`] unless every boundary dof carries the no-flux
    /// constraint, in which case the multiplier would have no gauge
    #[default]
    Auto,
    /// all of `V_h`, no boundary rows
    Free,
    /// `n · ũ = 0` on no-flux edges, the space of the time stepping
    Constrained,
}

impl ReconstructionSpace {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Auto => "auto",
            Self::Free => "free",
            Self::Constrained => "constrained",
        }
    }
}

/// Tolerances of the velocity reconstruction.
#[derive(Clone, Copy, Debug)]
pub struct VelocityPostprocessOptions {
    /// relative tolerance on ‖B ũ − B û‖
    pub outer_tol: f64,
    /// relative tolerance of the inner consistent-mass solves
    pub inner_tol: f64,
}

impl Default for VelocityPostprocessOptions {
    fn default() -> Self {
        Self {
            outer_tol: 1e-12,
            inner_tol: 1e-12,
        }
    }
}

/// Operators of the global velocity reconstruction, assembled once per
/// mesh. The Schur complement CG is preconditioned with the exact inverse
/// of `B M_L⁻¹ Bᵀ`, which is spectrally equivalent to `B M⁻¹ Bᵀ` because
/// the lumped and consistent products are.
pub struct VelocityPostprocessor {
    pub exact_mass: SparseMatrix,
    pub lumped: BlockDiagMatrix,
    pub div: SparseMatrix,
    schur: EnvelopeCholesky,
    pub options: VelocityPostprocessOptions,
}

impl VelocityPostprocessor {
    pub fn new(space: &Space) -> Result<Self> {
        Self::build(
            assemble_lumped_mass_free(space)?,
            assemble_div(space),
            assemble_exact_mass(space),
        )
    }

    /// Reconstruction on the requested space.
    pub fn with_space(space: &Space, which: ReconstructionSpace) -> Result<Self> {
        let dm = space.dofmap();
        let mesh = space.mesh();
        let any_free_boundary = mesh
            .boundary_edges()
            .any(|(e, _)| dm.edge_dofs(e).iter().any(|&d| !dm.is_constrained(d)));
        match which {
            ReconstructionSpace::Free => Self::new(space),
            ReconstructionSpace::Auto if dm.num_constrained() == 0 || !any_free_boundary => {
                Self::new(space)
            }
            ReconstructionSpace::Auto | ReconstructionSpace::Constrained => {
                Self::constrained(space)
            }
        }
    }

    /// Variant on the subspace with `n · ũ = 0` on no-flux edges: the
    /// constrained dofs get identity rows in both masses and drop out of
    /// the divergence. Needs at least one edge without the constraint,
    /// otherwise the multiplier is only defined up to a constant.
    pub fn constrained(space: &Space) -> Result<Self> {
        let dm = space.dofmap();
        let keep = |i: usize, j: usize| !dm.is_constrained(i) && !dm.is_constrained(j);
        let mass = assemble_exact_mass(space);
        let mut triplets: Vec<_> = (0..mass.nrows())
            .flat_map(|i| {
                mass.row(i)
                    .filter(move |&(j, _)| keep(i, j))
                    .map(move |(j, v)| (i, j, v))
            })
            .collect();
        triplets.extend(
            (0..mass.nrows())
                .filter(|&i| dm.is_constrained(i))
                .map(|i| (i, i, 1.0)),
        );
        let exact_mass = SparseMatrix::from_triplets(mass.nrows(), mass.ncols(), &triplets);
        let div = assemble_div(space);
        let triplets: Vec<_> = (0..div.nrows())
            .flat_map(|c| {
                div.row(c)
                    .filter(|&(j, _)| !dm.is_constrained(j))
                    .map(move |(j, v)| (c, j, v))
            })
            .collect();
        let div = SparseMatrix::from_triplets(div.nrows(), div.ncols(), &triplets);
        Self::build(assemble_lumped_mass(space)?, div, exact_mass)
    }

    fn build(lumped: BlockDiagMatrix, div: SparseMatrix, exact_mass: SparseMatrix) -> Result<Self> {
        let schur = EnvelopeCholesky::new(&lumped_schur_complement(&div, &lumped))?;
        Ok(Self {
            exact_mass,
            lumped,
            div,
            schur,
            options: VelocityPostprocessOptions::default(),
        })
    }

    /// Inverse of `B M_L⁻¹ Bᵀ`, shared with the elliptic projection.
    pub fn schur_preconditioner(&self) -> &EnvelopeCholesky {
        &self.schur
    }

    /// Returns `(ũ, r̃)`; `r_guess` warm-starts the multiplier.
    pub fn solve(&self, u_hat: &[f64], r_guess: Option<&[f64]>) -> Result<(Vec<f64>, Vec<f64>)> {
        if u_hat.len() != self.div.ncols() {
            return Err(Error::SizeMismatch(format!(
                "velocity has {} values, space has {}",
                u_hat.len(),
                self.div.ncols()
            )));
        }
        let f = self.lumped.mul_vec(u_hat);
        let g = self.div.mul_vec(u_hat);
        let inner = CgInner {
            matrix: &self.exact_mass,
            precond: Some(&self.lumped_inverse()),
            tol: self.options.inner_tol,
            max_iters: 1000,
        };
        let opts = SaddleOptions {
            tol: self.options.outer_tol,
            atol: 1e-14,
            max_iters: 2000,
        };
        let sol = saddle_solve(&inner, &self.div, &f, &g, opts, Some(&self.schur), r_guess)?;
        Ok((sol.x, sol.y))
    }

    fn lumped_inverse(&self) -> LumpedInverse<'_> {
        LumpedInverse(&self.lumped)
    }
}

struct LumpedInverse<'a>(&'a BlockDiagMatrix);

impl crate::linalg::LinearOperator for LumpedInverse<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.0.solve_into(x, y)
    }
}

/// Global velocity reconstruction `(ũ_h, r̃_h)` from `û_h`.
pub fn pp_velocity(pp: &VelocityPostprocessor, u_hat: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    pp.solve(u_hat, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::BoundaryConditions;
    use crate::fem::{cell_divergence, interpolate_bdm1, project_p0};
    use crate::mesh::{generate_rect_mesh, Rect};
    use crate::Point;

    fn space(n: usize) -> Space {
        Space::new(
            generate_rect_mesh(Rect::biunit(), n).unwrap(),
            &BoundaryConditions::default(),
        )
    }

    #[test]
    fn zero_rate_gives_constant() {
        let s = space(2);
        let p: Vec<f64> = (0..s.num_cells()).map(|c| c as f64 - 3.0).collect();
        let f = pp_pressure(&s, &vec![0.0; s.num_velocity_dofs()], &p).unwrap();
        for c in 0..s.num_cells() {
            for v in f.values[c] {
                assert!((v - p[c]).abs() < 1e-13);
            }
        }
    }

    /// The gradient of the reconstruction is minus the cell mean of `d_τu`.
    #[test]
    fn matches_closed_form() {
        let s = space(2);
        let dtu = interpolate_bdm1(&s, |x| Point::new(x.y * x.y, x.x - 0.5 * x.y));
        let p: Vec<f64> = (0..s.num_cells()).map(|c| (c as f64).cos()).collect();
        let f = pp_pressure(&s, &dtu, &p).unwrap();
        for c in 0..s.num_cells() {
            let pts = s.mesh().cell_points(c);
            let corners = s.element(c).vertex_values(&local_coeffs(&s, &dtu, c));
            let g = -(corners[0] + corners[1] + corners[2]) / 3.0;
            let centroid = s.mesh().cell_centroid(c);
            for a in 0..3 {
                let expected = p[c] + g.dot(&(pts[a] - centroid));
                assert!((f.values[c][a] - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reproduces_linear_pressure() {
        let s = space(4);
        let dtu = interpolate_bdm1(&s, |_| Point::new(-1.0, 0.0));
        let p = project_p0(s.mesh(), |x| x.x);
        let f = pp_pressure(&s, &dtu, &p).unwrap();
        for c in 0..s.num_cells() {
            for (a, x) in s.mesh().cell_points(c).iter().enumerate() {
                assert!((f.values[c][a] - x.x).abs() < 1e-12);
            }
            assert!((f.mean(c) - p[c]).abs() < 1e-12);
        }
    }

    #[test]
    fn locality() {
        let s = space(2);
        let dtu = interpolate_bdm1(&s, |x| Point::new(x.x, x.y * x.x));
        let p = vec![1.0; s.num_cells()];
        let base = pp_pressure(&s, &dtu, &p).unwrap();
        let mut p2 = p.clone();
        p2[5] = 7.0;
        let changed = pp_pressure(&s, &dtu, &p2).unwrap();
        for c in 0..s.num_cells() {
            assert_eq!(base.values[c] == changed.values[c], c != 5);
        }
    }

    #[test]
    fn constant_velocity_is_reproduced() {
        let s = space(4);
        let pp = VelocityPostprocessor::new(&s).unwrap();
        let u = interpolate_bdm1(&s, |_| Point::new(0.4, -1.3));
        let (ut, r) = pp_velocity(&pp, &u).unwrap();
        for (a, b) in ut.iter().zip(&u) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(r.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn divergence_is_kept() {
        let s = space(4);
        let pp = VelocityPostprocessor::new(&s).unwrap();
        let u = interpolate_bdm1(&s, |x| Point::new((3.0 * x.y).sin(), x.x * x.x * x.y));
        let (ut, _) = pp_velocity(&pp, &u).unwrap();
        let (d1, d2) = (cell_divergence(&s, &ut), cell_divergence(&s, &u));
        for (a, b) in d1.iter().zip(&d2) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    fn walled_space(n: usize) -> Space {
        use crate::assembly::BoundaryCondition;
        use crate::mesh::{generate_rect_mesh_tagged, BoundaryTag};
        let mesh = generate_rect_mesh_tagged(Rect::biunit(), n, |a, b| {
            if a.y == b.y {
                BoundaryTag::NeumannU
            } else {
                BoundaryTag::DirichletP
            }
        })
        .unwrap();
        let mut bc = BoundaryConditions::default();
        bc.set(BoundaryTag::NeumannU, BoundaryCondition::NoFlux);
        Space::new(mesh, &bc)
    }

    #[test]
    fn constrained_reconstruction_keeps_walls_closed() {
        let s = walled_space(4);
        let pp = VelocityPostprocessor::with_space(&s, ReconstructionSpace::Auto).unwrap();
        let mut u = interpolate_bdm1(&s, |x| Point::new(x.y.cos(), x.x * (1.0 - x.y * x.y)));
        crate::assembly::apply_normal_bc(s.dofmap(), &mut u);
        let (ut, _) = pp_velocity(&pp, &u).unwrap();
        let dm = s.dofmap();
        assert!(dm.num_constrained() > 0);
        for d in 0..ut.len() {
            if dm.is_constrained(d) {
                assert_eq!(ut[d], 0.0);
            }
        }
        for (a, b) in cell_divergence(&s, &ut)
            .iter()
            .zip(&cell_divergence(&s, &u))
        {
            assert!((a - b).abs() < 1e-9);
        }
        // the free space lets the normal flux through the walls move
        let free = VelocityPostprocessor::with_space(&s, ReconstructionSpace::Free).unwrap();
        let (uf, _) = pp_velocity(&free, &u).unwrap();
        assert!((0..uf.len()).any(|d| dm.is_constrained(d) && uf[d].abs() > 1e-6));
    }

    #[test]
    fn closed_box_falls_back_to_free_space() {
        use crate::assembly::BoundaryCondition;
        let s = Space::new(
            generate_rect_mesh(Rect::biunit(), 2).unwrap(),
            &BoundaryConditions::uniform(BoundaryCondition::NoFlux),
        );
        assert!(VelocityPostprocessor::with_space(&s, ReconstructionSpace::Auto).is_ok());
        assert!(VelocityPostprocessor::with_space(&s, ReconstructionSpace::Constrained).is_err());
    }

    #[test]
    fn schur_complement_matches_dense() {
        let s = space(1);
        let pp = VelocityPostprocessor::new(&s).unwrap();
        let sl = lumped_schur_complement(&pp.div, &pp.lumped);
        let n = s.num_cells();
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let mut bt = vec![0.0; s.num_velocity_dofs()];
            pp.div.matvec_transpose(&e, &mut bt);
            let col = pp.div.mul_vec(&pp.lumped.solve(&bt));
            for i in 0..n {
                assert!((sl.get(i, j) - col[i]).abs() < 1e-14);
            }
        }
    }
}
