//! Explicit leapfrog for the lumped semi-discrete system
//!
//! ```text
//!   M (u^{n+1/2} − u^{n−1/2}) / τ = Bᵀ p^n + ℓ(t^n)
//!   D (p^{n+1} − p^n) / τ        = −B u^{n+1/2}
//! ```
//!
//! with `M` the block-diagonal lumped mass, `D = diag |K|`, `B` the
//! divergence and `ℓ` the Dirichlet boundary load.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assembly::{assemble_div, assemble_lumped_mass, pressure_mass, Space};
use crate::linalg::{BlockDiagMatrix, SolverError, SparseMatrix};
use crate::{Error, Result};

/// The assembled operators of the time loop.
#[derive(Clone, Debug)]
pub struct Operators {
    pub mass: BlockDiagMatrix,
    pub div: SparseMatrix,
    pub pressure_mass: Vec<f64>,
    pub constrained: Vec<bool>,
}

impl Operators {
    pub fn new(space: &Space) -> Result<Self> {
        Ok(Self {
            mass: assemble_lumped_mass(space)?,
            div: assemble_div(space),
            pressure_mass: pressure_mass(space),
            constrained: space.dofmap().constrained().to_vec(),
        })
    }

    pub fn num_velocity_dofs(&self) -> usize {
        self.div.ncols()
    }

    pub fn num_cells(&self) -> usize {
        self.div.nrows()
    }

    fn mask(&self, v: &mut [f64]) {
        for (x, &c) in v.iter_mut().zip(&self.constrained) {
            if c {
                *x = 0.0;
            }
        }
    }

    /// `M⁻¹ (Bᵀ p + ℓ)` restricted to the free dofs.
    pub fn velocity_rate(&self, p: &[f64], load: Option<&[f64]>) -> Vec<f64> {
        let mut rhs = vec![0.0; self.num_velocity_dofs()];
        self.div.matvec_transpose(p, &mut rhs);
        if let Some(l) = load {
            crate::linalg::axpy(1.0, l, &mut rhs);
        }
        self.mask(&mut rhs);
        let mut out = self.mass.solve(&rhs);
        self.mask(&mut out);
        out
    }

    /// `‖v‖²_M` in the lumped product.
    pub fn velocity_norm_sq(&self, v: &[f64]) -> f64 {
        self.mass.quad_form(v)
    }

    /// `‖q‖²_D = Σ |K| q_K²`.
    pub fn pressure_norm_sq(&self, q: &[f64]) -> f64 {
        q.iter()
            .zip(&self.pressure_mass)
            .map(|(v, a)| a * v * v)
            .sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CflEstimate {
    /// largest eigenvalue of `Bᵀ D⁻¹ B x = λ M x`
    pub lambda_max: f64,
    /// inverse-inequality constant `h √λ_max`
    pub c: f64,
    pub tau_max: f64,
    pub iterations: usize,
}

/// Power iteration with Rayleigh quotients on `M⁻¹ Bᵀ D⁻¹ B` over the free
/// dofs, stopped when the quotient changes by less than `1e-8` relatively.
pub fn cfl_estimate(ops: &Operators, h: f64) -> Result<CflEstimate> {
    const TOL: f64 = 1e-8;
    const MAX_ITERS: usize = 20_000;
    let n = ops.num_velocity_dofs();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    ops.mask(&mut x);
    let mut bx = vec![0.0; ops.num_cells()];
    let mut lambda = 0.0;
    for it in 1..=MAX_ITERS {
        let mx = ops.mass.quad_form(&x);
        if mx == 0.0 {
            return Err(Error::InvalidArgument("no free velocity dofs".into()));
        }
        ops.div.matvec(&x, &mut bx);
        let kx: f64 = bx
            .iter()
            .zip(&ops.pressure_mass)
            .map(|(b, a)| b * b / a)
            .sum();
        let next = kx / mx;
        let converged = it > 1 && (next - lambda).abs() <= TOL * next.abs();
        lambda = next;
        if converged {
            let c = h * lambda.sqrt();
            return Ok(CflEstimate {
                lambda_max: lambda,
                c,
                tau_max: 1.0 / lambda.sqrt(),
                iterations: it,
            });
        }
        for (b, a) in bx.iter_mut().zip(&ops.pressure_mass) {
            *b /= a;
        }
        let y = ops.velocity_rate(&bx, None);
        let norm = crate::linalg::norm(&y);
        if !(norm > 0.0) {
            // x is in the kernel of B; any positive bound is vacuous
            return Err(Error::InvalidArgument(
                "divergence vanishes on the start vector".into(),
            ));
        }
        x = y.into_iter().map(|v| v / norm).collect();
    }
    Err(SolverError::NotConverged {
        what: "power iteration",
        iterations: MAX_ITERS,
        residual: f64::NAN,
    }
    .into())
}

/// `u^{−1/2} = u0 − (τ/2) M⁻¹ (Bᵀ p0 + ℓ(0))`.
pub fn init_half_step(
    ops: &Operators,
    u0: &[f64],
    p0: &[f64],
    load0: Option<&[f64]>,
    tau: f64,
) -> Vec<f64> {
    let rate = ops.velocity_rate(p0, load0);
    let mut u = u0.to_vec();
    crate::linalg::axpy(-tau / 2.0, &rate, &mut u);
    ops.mask(&mut u);
    u
}

/// Staggered state at a completed integer level `n`: `u_minus = u^{n−1/2}`,
/// `u_plus = u^{n+1/2}`, `p = p^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct LeapfrogState {
    pub u_minus: Vec<f64>,
    pub u_plus: Vec<f64>,
    pub p: Vec<f64>,
    pub n: usize,
    pub tau: f64,
}

impl LeapfrogState {
    /// Initializes level 0 from `(u0, p0)` and the load at `t = 0`.
    pub fn new(
        ops: &Operators,
        u0: &[f64],
        p0: &[f64],
        load0: Option<&[f64]>,
        tau: f64,
    ) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "time step must be positive, got {tau}"
            )));
        }
        if u0.len() != ops.num_velocity_dofs() || p0.len() != ops.num_cells() {
            return Err(Error::SizeMismatch(format!(
                "initial data has {} + {} entries, operators expect {} + {}",
                u0.len(),
                p0.len(),
                ops.num_velocity_dofs(),
                ops.num_cells()
            )));
        }
        let u_minus = init_half_step(ops, u0, p0, load0, tau);
        let mut u_plus = u_minus.clone();
        crate::linalg::axpy(tau, &ops.velocity_rate(p0, load0), &mut u_plus);
        Ok(Self {
            u_minus,
            u_plus,
            p: p0.to_vec(),
            n: 0,
            tau,
        })
    }

    pub fn time(&self) -> f64 {
        self.n as f64 * self.tau
    }

    /// `û^n = (u^{n+1/2} + u^{n−1/2}) / 2`
    pub fn u_hat(&self) -> Vec<f64> {
        self.u_plus
            .iter()
            .zip(&self.u_minus)
            .map(|(a, b)| 0.5 * (a + b))
            .collect()
    }

    /// `d_τ u^n = (u^{n+1/2} − u^{n−1/2}) / τ`
    pub fn dtau_u(&self) -> Vec<f64> {
        self.u_plus
            .iter()
            .zip(&self.u_minus)
            .map(|(a, b)| (a - b) / self.tau)
            .collect()
    }

    /// Advances to level `n + 1`; `load_next` is `ℓ(t^{n+1})`.
    pub fn step(&mut self, ops: &Operators, load_next: Option<&[f64]>) -> Result<()> {
        let mut bu = vec![0.0; ops.num_cells()];
        ops.div.matvec(&self.u_plus, &mut bu);
        for ((p, b), a) in self.p.iter_mut().zip(&bu).zip(&ops.pressure_mass) {
            *p -= self.tau * b / a;
        }
        self.n += 1;
        std::mem::swap(&mut self.u_minus, &mut self.u_plus);
        let rate = ops.velocity_rate(&self.p, load_next);
        for ((up, um), r) in self.u_plus.iter_mut().zip(&self.u_minus).zip(&rate) {
            *up = um + self.tau * r;
        }
        if !(self.p.iter().all(|v| v.is_finite()) && self.u_plus.iter().all(|v| v.is_finite())) {
            return Err(Error::NonFinite { step: self.n });
        }
        Ok(())
    }

    /// `E^n = ‖û‖²_M + ‖p‖²_D − (τ²/4) ‖d_τ u‖²_M`
    pub fn energy(&self, ops: &Operators) -> f64 {
        let (hat, dtu) = (self.u_hat(), self.dtau_u());
        ops.velocity_norm_sq(&hat) + ops.pressure_norm_sq(&self.p)
            - self.tau * self.tau / 4.0 * ops.velocity_norm_sq(&dtu)
    }
}

/// What an observer sees at each integer level.
pub struct Observation<'a> {
    pub n: usize,
    pub t: f64,
    pub state: &'a LeapfrogState,
}

impl Observation<'_> {
    pub fn u_hat(&self) -> Vec<f64> {
        self.state.u_hat()
    }

    pub fn dtau_u(&self) -> Vec<f64> {
        self.state.dtau_u()
    }

    pub fn p(&self) -> &[f64] {
        &self.state.p
    }
}

/// Number of steps for a final time, rejecting grids that miss `T` by more
/// than rounding.
pub fn num_steps(final_time: f64, tau: f64) -> Result<usize> {
    if !(final_time >= 0.0) || !(tau > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "final time {final_time} and time step {tau}"
        )));
    }
    let n = (final_time / tau).round();
    if (n * tau - final_time).abs() > 1e-9 * final_time.max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "final time {final_time} is not a multiple of τ = {tau}"
        )));
    }
    Ok(n as usize)
}

/// Runs `steps` leapfrog steps from `state`, calling `observe` at every
/// integer level including the initial and the final one. `load(t)`
/// returns the boundary load at time `t`, or `None` when homogeneous.
pub fn run<L, O>(
    ops: &Operators,
    state: &mut LeapfrogState,
    steps: usize,
    load: L,
    mut observe: O,
) -> Result<()>
where
    L: Fn(f64) -> Option<Vec<f64>>,
    O: FnMut(&Observation<'_>) -> Result<()>,
{
    loop {
        observe(&Observation {
            n: state.n,
            t: state.time(),
            state,
        })?;
        if state.n >= steps {
            return Ok(());
        }
        let next = load((state.n + 1) as f64 * state.tau);
        state.step(ops, next.as_deref())?;
    }
}
