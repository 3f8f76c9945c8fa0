use super::{axpy, dot, norm, LinearOperator, SolverError};

#[derive(Clone, Debug)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// ‖b − A x‖ / ‖b‖ at exit
    pub relative_residual: f64,
}

/// Preconditioned conjugate gradients on fallible operator closures.
///
/// Stops when ‖r‖ ≤ `tol`·‖b‖ + `atol`. A zero right-hand side returns
/// the zero vector after zero iterations regardless of `x0`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn pcg_core(
    what: &'static str,
    n: usize,
    mut apply: impl FnMut(&[f64], &mut [f64]) -> Result<(), SolverError>,
    mut precond: impl FnMut(&[f64], &mut [f64]) -> Result<(), SolverError>,
    rhs: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    atol: f64,
    max_iters: usize,
) -> Result<CgOutcome, SolverError> {
    if rhs.len() != n {
        return Err(SolverError::Dimension(format!(
            "rhs has length {}, operator {n}",
            rhs.len()
        )));
    }
    let bnorm = norm(rhs);
    if bnorm == 0.0 {
        return Ok(CgOutcome {
            x: vec![0.0; n],
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let target = tol * bnorm + atol;

    let mut x = match x0 {
        Some(x0) if x0.len() == n => x0.to_vec(),
        Some(x0) => {
            return Err(SolverError::Dimension(format!(
                "initial guess has length {}, operator {n}",
                x0.len()
            )))
        }
        None => vec![0.0; n],
    };
    let mut r = rhs.to_vec();
    let mut q = vec![0.0; n];
    if x0.is_some() {
        apply(&x, &mut q)?;
        axpy(-1.0, &q, &mut r);
    }
    let mut rnorm = norm(&r);
    if rnorm <= target {
        return Ok(CgOutcome {
            x,
            iterations: 0,
            relative_residual: rnorm / bnorm,
        });
    }
    let mut z = vec![0.0; n];
    precond(&r, &mut z)?;
    let mut p = z.clone();
    let mut rz = dot(&r, &z);

    for it in 1..=max_iters {
        apply(&p, &mut q)?;
        let pq = dot(&p, &q);
        if !(pq > 0.0) {
            return Err(SolverError::Breakdown(pq));
        }
        let alpha = rz / pq;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &q, &mut r);
        rnorm = norm(&r);
        if rnorm <= target {
            return Ok(CgOutcome {
                x,
                iterations: it,
                relative_residual: rnorm / bnorm,
            });
        }
        precond(&r, &mut z)?;
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    Err(SolverError::NotConverged {
        what,
        iterations: max_iters,
        residual: rnorm / bnorm,
    })
}

/// Unpreconditioned CG from a zero initial guess; stops at ‖r‖ ≤ `tol`·‖b‖.
pub fn cg_solve(
    a: &dyn LinearOperator,
    rhs: &[f64],
    tol: f64,
    max_iters: usize,
) -> Result<CgOutcome, SolverError> {
    pcg(a, None, rhs, None, tol, max_iters)
}

/// CG with optional preconditioner `precond ≈ A⁻¹` and warm start.
pub fn pcg(
    a: &dyn LinearOperator,
    precond: Option<&dyn LinearOperator>,
    rhs: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    max_iters: usize,
) -> Result<CgOutcome, SolverError> {
    let apply = |x: &[f64], y: &mut [f64]| {
        a.apply(x, y);
        Ok(())
    };
    match precond {
        Some(m) => pcg_core(
            "cg",
            a.dim(),
            apply,
            |r: &[f64], z: &mut [f64]| {
                m.apply(r, z);
                Ok(())
            },
            rhs,
            x0,
            tol,
            0.0,
            max_iters,
        ),
        None => pcg_core(
            "cg",
            a.dim(),
            apply,
            |r: &[f64], z: &mut [f64]| {
                z.copy_from_slice(r);
                Ok(())
            },
            rhs,
            x0,
            tol,
            0.0,
            max_iters,
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{Diagonal, SparseMatrix};

    fn laplace_1d(n: usize) -> SparseMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
                t.push((i - 1, i, -1.0));
            }
        }
        SparseMatrix::from_triplets(n, n, &t)
    }

    #[test]
    fn identity_in_one_iteration() {
        let id = SparseMatrix::from_triplets(
            4,
            4,
            &[(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0), (3, 3, 1.0)],
        );
        let b = [1.0, -2.0, 3.0, 0.5];
        let out = cg_solve(&id, &b, 1e-12, 10).unwrap();
        assert_eq!(out.iterations, 1);
        assert_eq!(out.x, b.to_vec());
    }

    #[test]
    fn zero_rhs() {
        let out = cg_solve(&laplace_1d(5), &[0.0; 5], 1e-12, 10).unwrap();
        assert_eq!(out.iterations, 0);
        assert!(out.x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn laplacian_converges_within_n_steps() {
        let n = 30;
        let a = laplace_1d(n);
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let out = cg_solve(&a, &b, 1e-12, n + 5).unwrap();
        let r: Vec<f64> = a
            .mul_vec(&out.x)
            .iter()
            .zip(&b)
            .map(|(x, y)| x - y)
            .collect();
        assert!(norm(&r) <= 1e-11 * norm(&b));
    }

    #[test]
    fn jacobi_preconditioned() {
        let n = 20;
        let a = laplace_1d(n);
        let inv = vec![0.5; n];
        let b = vec![1.0; n];
        let out = pcg(&a, Some(&Diagonal(&inv)), &b, None, 1e-12, 100).unwrap();
        let warm = pcg(&a, None, &b, Some(&out.x), 1e-10, 100).unwrap();
        assert_eq!(warm.iterations, 0);
    }

    #[test]
    fn indefinite_reports_breakdown() {
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 1, -1.0)]);
        assert!(matches!(
            cg_solve(&a, &[0.0, 1.0], 1e-12, 10),
            Err(SolverError::Breakdown(_))
        ));
    }

    #[test]
    fn iteration_cap() {
        let a = laplace_1d(50);
        let r = cg_solve(&a, &vec![1.0; 50], 1e-14, 3);
        assert!(matches!(
            r,
            Err(SolverError::NotConverged { iterations: 3, .. })
        ));
    }
}
