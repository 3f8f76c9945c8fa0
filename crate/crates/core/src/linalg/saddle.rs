use super::{norm, BlockDiagMatrix, LinearOperator, SolverError, SparseMatrix};

/// Solver for the (1,1) block `A` of a saddle-point system.
pub trait InnerSolver {
    fn dim(&self) -> usize;
    fn solve(&self, rhs: &[f64], x: &mut [f64]) -> Result<(), SolverError>;
}

impl InnerSolver for BlockDiagMatrix {
    fn dim(&self) -> usize {
        BlockDiagMatrix::dim(self)
    }

    fn solve(&self, rhs: &[f64], x: &mut [f64]) -> Result<(), SolverError> {
        self.solve_into(rhs, x);
        Ok(())
    }
}

/// Inner CG on a sparse SPD matrix, optionally preconditioned.
pub struct CgInner<'a> {
    pub matrix: &'a SparseMatrix,
    pub precond: Option<&'a dyn LinearOperator>,
    pub tol: f64,
    pub max_iters: usize,
}

impl<'a> CgInner<'a> {
    pub fn new(matrix: &'a SparseMatrix) -> Self {
        Self {
            matrix,
            precond: None,
            tol: 1e-10,
            max_iters: 10 * matrix.nrows().max(10),
        }
    }

    pub fn with_preconditioner(mut self, p: &'a dyn LinearOperator) -> Self {
        self.precond = Some(p);
        self
    }
}

impl InnerSolver for CgInner<'_> {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn solve(&self, rhs: &[f64], x: &mut [f64]) -> Result<(), SolverError> {
        let out = super::pcg(
            self.matrix,
            self.precond,
            rhs,
            None,
            self.tol,
            self.max_iters,
        )?;
        x.copy_from_slice(&out.x);
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SaddleOptions {
    /// relative tolerance on ‖B x − g‖
    pub tol: f64,
    /// absolute floor added to the tolerance, for `g = 0`
    pub atol: f64,
    pub max_iters: usize,
}

impl Default for SaddleOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            atol: 1e-12,
            max_iters: 5000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SaddleSolution {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub iterations: usize,
}

/// Solves
///
/// ```text
///   A x − Bᵀ y = f
///   B x        = g
/// ```
///
/// with `A` SPD and `B` of full row rank, by CG on the Schur complement
/// `S = B A⁻¹ Bᵀ`: `S y = g − B A⁻¹ f`, then `x = A⁻¹ (f + Bᵀ y)`.
///
/// The velocity iterate is updated alongside `y`, so the monitored residual
/// is exactly `g − B x` of the returned `x`. `schur_precond` approximates
/// `S⁻¹`; `y0` warm-starts the multiplier.
pub fn saddle_solve(
    a: &dyn InnerSolver,
    b: &SparseMatrix,
    f: &[f64],
    g: &[f64],
    opts: SaddleOptions,
    schur_precond: Option<&dyn LinearOperator>,
    y0: Option<&[f64]>,
) -> Result<SaddleSolution, SolverError> {
    let (m, n) = (b.nrows(), b.ncols());
    if a.dim() != n || f.len() != n || g.len() != m {
        return Err(SolverError::Dimension(format!(
            "A is {0}x{0}, B is {m}x{n}, f has {1}, g has {2}",
            a.dim(),
            f.len(),
            g.len()
        )));
    }

    let mut y = match y0 {
        Some(y0) => y0.to_vec(),
        None => vec![0.0; m],
    };
    let mut x = vec![0.0; n];
    let mut rhs = f.to_vec();
    let mut bty = vec![0.0; n];
    if y0.is_some() {
        b.matvec_transpose(&y, &mut bty);
        for (r, v) in rhs.iter_mut().zip(&bty) {
            *r += v;
        }
    }
    a.solve(&rhs, &mut x)?;
    let mut r: Vec<f64> = g
        .iter()
        .zip(b.mul_vec(&x))
        .map(|(gi, bx)| gi - bx)
        .collect();
    let target = opts.tol * norm(g) + opts.atol;

    let mut z = vec![0.0; m];
    let mut q = vec![0.0; n];
    let mut s = vec![0.0; m];
    let precond = |r: &[f64], z: &mut [f64]| match schur_precond {
        Some(p) => p.apply(r, z),
        None => z.copy_from_slice(r),
    };

    let mut rnorm = norm(&r);
    if rnorm <= target {
        return Ok(SaddleSolution {
            x,
            y,
            iterations: 0,
        });
    }
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut rz = super::dot(&r, &z);
    for it in 1..=opts.max_iters {
        b.matvec_transpose(&p, &mut bty);
        a.solve(&bty, &mut q)?;
        b.matvec(&q, &mut s);
        let ps = super::dot(&p, &s);
        if !(ps > 0.0) {
            return Err(SolverError::Breakdown(ps));
        }
        let alpha = rz / ps;
        super::axpy(alpha, &p, &mut y);
        super::axpy(alpha, &q, &mut x);
        super::axpy(-alpha, &s, &mut r);
        rnorm = norm(&r);
        if rnorm <= target {
            return Ok(SaddleSolution {
                x,
                y,
                iterations: it,
            });
        }
        precond(&r, &mut z);
        let rz_new = super::dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    Err(SolverError::NotConverged {
        what: "schur complement cg",
        iterations: opts.max_iters,
        residual: rnorm / norm(g).max(f64::MIN_POSITIVE),
    })
}

/// [`saddle_solve`] with inner CG (relative tolerance 1e-10) on a sparse
/// `A`, no Schur preconditioner, default options.
pub fn saddle_solve_cg(
    a: &SparseMatrix,
    b: &SparseMatrix,
    f: &[f64],
    g: &[f64],
) -> Result<SaddleSolution, SolverError> {
    saddle_solve(
        &CgInner::new(a),
        b,
        f,
        g,
        SaddleOptions::default(),
        None,
        None,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn identity(n: usize) -> SparseMatrix {
        SparseMatrix::from_triplets(n, n, &(0..n).map(|i| (i, i, 1.0)).collect::<Vec<_>>())
    }

    #[test]
    fn two_by_one_example() {
        let b = SparseMatrix::from_triplets(1, 2, &[(0, 0, 1.0)]);
        let sol = saddle_solve_cg(&identity(2), &b, &[1.0, 1.0], &[0.0]).unwrap();
        assert!((sol.x[0]).abs() < 1e-12 && (sol.x[1] - 1.0).abs() < 1e-12);
        assert!((sol.y[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn kernel_data_gives_zero_multiplier() {
        // x0 = (1, 1, 0) lies in ker B for B = [1 -1 0; 0 0 1]
        let a = SparseMatrix::from_triplets(
            3,
            3,
            &[
                (0, 0, 2.0),
                (0, 1, 0.5),
                (1, 0, 0.5),
                (1, 1, 3.0),
                (2, 2, 1.0),
            ],
        );
        let b = SparseMatrix::from_triplets(2, 3, &[(0, 0, 1.0), (0, 1, -1.0), (1, 2, 1.0)]);
        let x0 = [1.0, 1.0, 0.0];
        let f = a.mul_vec(&x0);
        let sol = saddle_solve_cg(&a, &b, &f, &[0.0, 0.0]).unwrap();
        for i in 0..3 {
            assert!((sol.x[i] - x0[i]).abs() < 1e-12);
        }
        assert!(sol.y.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn dimension_mismatch() {
        let b = SparseMatrix::from_triplets(1, 2, &[(0, 0, 1.0)]);
        assert!(matches!(
            saddle_solve_cg(&identity(3), &b, &[1.0, 1.0, 1.0], &[0.0]),
            Err(SolverError::Dimension(_))
        ));
    }

    proptest! {
        #[test]
        fn random_instances_satisfy_both_equations(
            seed in proptest::collection::vec(-1.0f64..1.0, 200),
            n in 4usize..10,
            m in 1usize..4,
        ) {
            let mut it = seed.iter().cycle();
            // A = G Gᵀ + I, B = [I_m | random]
            let g: Vec<f64> = (0..n * n).map(|_| *it.next().unwrap()).collect();
            let mut ta = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    let mut v = if i == j { 1.0 } else { 0.0 };
                    for k in 0..n { v += g[i * n + k] * g[j * n + k]; }
                    ta.push((i, j, v));
                }
            }
            let a = SparseMatrix::from_triplets(n, n, &ta);
            let mut tb = Vec::new();
            for i in 0..m {
                tb.push((i, i, 1.0));
                for j in m..n { tb.push((i, j, *it.next().unwrap())); }
            }
            let b = SparseMatrix::from_triplets(m, n, &tb);
            let f: Vec<f64> = (0..n).map(|_| *it.next().unwrap()).collect();
            let gv: Vec<f64> = (0..m).map(|_| *it.next().unwrap()).collect();

            let sol = saddle_solve_cg(&a, &b, &f, &gv).unwrap();
            let bx = b.mul_vec(&sol.x);
            let res2 = norm(&bx.iter().zip(&gv).map(|(p, q)| p - q).collect::<Vec<_>>());
            prop_assert!(res2 <= 1e-9 * norm(&gv) + 1e-12);
            let mut bty = vec![0.0; n];
            b.matvec_transpose(&sol.y, &mut bty);
            let ax = a.mul_vec(&sol.x);
            let res1: Vec<f64> = (0..n).map(|i| ax[i] - bty[i] - f[i]).collect();
            prop_assert!(norm(&res1) <= 1e-8 * (norm(&f) + norm(&bty)) + 1e-12);
        }
    }
}
