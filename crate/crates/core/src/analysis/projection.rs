use rayon::prelude::*;

use crate::assembly::{assemble_boundary_load, Space};
use crate::fem::{gauss_legendre4, quad_rule, QuadKind};
use crate::linalg::{saddle_solve, BlockDiagMatrix, EnvelopeCholesky, SaddleOptions, SparseMatrix};
use crate::postprocess::VelocityPostprocessor;
use crate::scenarios::PlaneWave;
use crate::{Error, Point, Result};

/// `(w_h, r_h)` of the inexact elliptic projection.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub w: Vec<f64>,
    pub r: Vec<f64>,
}

/// The mixed projection with the lumped product,
///
/// ```text
///   (w_h, v)_h − (r_h, div v) = (w, v) − (r, div v)   for all v
///   (div w_h, q)              = (div w, q)            for all q
/// ```
///
/// on the full (unconstrained) velocity space. Its Schur complement is
/// exactly `B M_L⁻¹ Bᵀ`, whose factorization is borrowed from the velocity
/// post-processor, so the outer iteration converges in one step.
pub struct EllipticProjector<'a> {
    space: &'a Space,
    lumped: &'a BlockDiagMatrix,
    div: &'a SparseMatrix,
    schur: &'a EnvelopeCholesky,
    pub options: SaddleOptions,
}

impl<'a> EllipticProjector<'a> {
    pub fn new(space: &'a Space, pp: &'a VelocityPostprocessor) -> Result<Self> {
        if pp.div.ncols() != space.num_velocity_dofs() || pp.div.nrows() != space.num_cells() {
            return Err(Error::SizeMismatch(
                "post-processor built for another space".into(),
            ));
        }
        Ok(Self {
            space,
            lumped: &pp.lumped,
            div: &pp.div,
            schur: pp.schur_preconditioner(),
            options: SaddleOptions {
                tol: 1e-12,
                atol: 1e-14,
                max_iters: 100,
            },
        })
    }

    /// Right-hand sides `f_j = (w, φ_j) − (r, div φ_j)` and `g_K = ∫_K div w`.
    pub fn load<W, R>(&self, w: W, r: R) -> (Vec<f64>, Vec<f64>)
    where
        W: Fn(&Point) -> Point + Sync,
        R: Fn(&Point) -> f64 + Sync,
    {
        let space = self.space;
        let mesh = space.mesh();
        let rule = quad_rule(QuadKind::HighOrder);
        let local: Vec<[f64; 6]> = (0..mesh.num_cells())
            .into_par_iter()
            .map(|c| {
                let el = space.element(c);
                let mut out = [0.0; 6];
                for (l, qw) in rule.points.iter().zip(&rule.weights) {
                    let x = mesh.point_from_barycentric(c, l);
                    let (wx, rx) = (w(&x), r(&x));
                    let scale = 2.0 * el.area * qw;
                    for (k, o) in out.iter_mut().enumerate() {
                        *o += scale * (wx.dot(&el.shape(k, l)) - rx * el.div[k]);
                    }
                }
                out
            })
            .collect();
        let mut f = vec![0.0; space.num_velocity_dofs()];
        for (c, vals) in local.iter().enumerate() {
            for (d, v) in space.cell_dofs(c).into_iter().zip(vals) {
                f[d] += v;
            }
        }

        // ∫_K div w = ∫_∂K w · n through the global edge fluxes
        let gauss = gauss_legendre4();
        let flux: Vec<f64> = (0..mesh.num_edges())
            .into_par_iter()
            .map(|e| {
                let [a, b] = mesh.edge(e);
                let (xa, xb) = (mesh.vertex(a), mesh.vertex(b));
                let n = mesh.edge_normal(e);
                let len = mesh.edge_length(e);
                gauss
                    .iter()
                    .map(|&(s, qw)| qw * len * w(&(xa + s * (xb - xa))).dot(&n))
                    .sum()
            })
            .collect();
        let g = (0..mesh.num_cells())
            .map(|c| {
                let signs = mesh.cell_signs(c);
                mesh.cell_edges(c)
                    .iter()
                    .zip(signs)
                    .map(|(&e, s)| s * flux[e])
                    .sum()
            })
            .collect();
        (f, g)
    }

    /// Projects `(w, r)`. With `boundary_r`, the term
    /// `−∫_{Γ_D} boundary_r n · φ_j ds` is added to `f_j` on edges carrying
    /// pressure data.
    pub fn project<W, R>(
        &self,
        w: W,
        r: R,
        boundary_r: Option<&dyn Fn(&Point) -> f64>,
    ) -> Result<Projection>
    where
        W: Fn(&Point) -> Point + Sync,
        R: Fn(&Point) -> f64 + Sync,
    {
        let (mut f, g) = self.load(w, r);
        if let Some(br) = boundary_r {
            let l = assemble_boundary_load(self.space, |x, _| br(x), 0.0);
            crate::linalg::axpy(1.0, &l, &mut f);
        }
        self.solve(&f, &g)
    }

    /// Solves with given right-hand sides.
    pub fn solve(&self, f: &[f64], g: &[f64]) -> Result<Projection> {
        let sol = saddle_solve(
            self.lumped,
            self.div,
            f,
            g,
            self.options,
            Some(self.schur),
            None,
        )?;
        Ok(Projection { w: sol.x, r: sol.y })
    }
}

/// `u_h^*(t)`: the projection of `(u(t), ∫₀ᵗ p ds)`.
///
/// Integrating the defining evolution of the auxiliary functions in time
/// shows that `(u_h^*(t), ∫₀ᵗ p_h^*)` differs from this projection by the
/// projection of `(0, 0)` only, given `u_h^*(0)` is the projection of
/// `(u(0), 0)`. The Dirichlet data enter through `(P(t), div v)` already,
/// so no separate boundary term is added.
pub fn auxiliary_velocity(
    proj: &EllipticProjector<'_>,
    wave: &PlaneWave,
    t: f64,
) -> Result<Projection> {
    proj.project(
        |x| wave.velocity(x, t),
        |x| wave.pressure_integral(x, t),
        None,
    )
}

/// `û_h^*(t) = (u_h^*(t + τ/2) + u_h^*(t − τ/2)) / 2`, computed as one
/// projection of the averaged data.
pub fn auxiliary_velocity_hat(
    proj: &EllipticProjector<'_>,
    wave: &PlaneWave,
    t: f64,
    tau: f64,
) -> Result<Projection> {
    let (t0, t1) = (t - tau / 2.0, t + tau / 2.0);
    proj.project(
        |x| (wave.velocity(x, t0) + wave.velocity(x, t1)) / 2.0,
        |x| (wave.pressure_integral(x, t0) + wave.pressure_integral(x, t1)) / 2.0,
        None,
    )
}
