use std::collections::VecDeque;

use super::{LinearOperator, SolverError, SparseMatrix};

/// Reverse Cuthill–McKee ordering of a structurally symmetric matrix.
/// Returns `perm` with `perm[new] = old`.
pub fn rcm_ordering(a: &SparseMatrix) -> Vec<usize> {
    let n = a.nrows();
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).count()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    let mut neighbours = Vec::new();

    while order.len() < n {
        // start each component from a minimum-degree vertex
        let start = (0..n)
            .filter(|&i| !visited[i])
            .min_by_key(|&i| degree[i])
            .unwrap();
        visited[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            neighbours.clear();
            neighbours.extend(a.row(v).map(|(j, _)| j).filter(|&j| !visited[j]));
            neighbours.sort_by_key(|&j| degree[j]);
            for &j in &neighbours {
                visited[j] = true;
                queue.push_back(j);
            }
        }
    }
    order.reverse();
    order
}

/// Envelope (skyline) Cholesky factorization `P A Pᵀ = L Lᵀ` of a sparse
/// SPD matrix under a fill-reducing permutation.
#[derive(Clone, Debug)]
pub struct EnvelopeCholesky {
    perm: Vec<usize>,
    /// first stored column of each permuted row
    first: Vec<usize>,
    /// start of row `i` in `values`; row `i` holds columns `first[i]..=i`
    start: Vec<usize>,
    values: Vec<f64>,
}

impl EnvelopeCholesky {
    /// Factorizes `a` in reverse Cuthill–McKee order.
    pub fn new(a: &SparseMatrix) -> Result<Self, SolverError> {
        Self::with_ordering(a, rcm_ordering(a))
    }

    pub fn with_ordering(a: &SparseMatrix, perm: Vec<usize>) -> Result<Self, SolverError> {
        let n = a.nrows();
        if a.ncols() != n || perm.len() != n {
            return Err(SolverError::Dimension(format!(
                "{}x{} matrix, ordering of {}",
                n,
                a.ncols(),
                perm.len()
            )));
        }
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (new, &old) in perm.iter().enumerate() {
            for (j, _) in a.row(old) {
                let jn = inv[j];
                // symmetric pattern: use the lower triangle from both sides
                let (hi, lo) = if jn > new { (jn, new) } else { (new, jn) };
                first[hi] = first[hi].min(lo);
            }
        }
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for i in 0..n {
            start.push(start[i] + i - first[i] + 1);
        }
        let mut values = vec![0.0; start[n]];
        for (new, &old) in perm.iter().enumerate() {
            for (j, v) in a.row(old) {
                let jn = inv[j];
                if jn <= new {
                    values[start[new] + jn - first[new]] = v;
                }
            }
        }

        for i in 0..n {
            let fi = first[i];
            let si = start[i];
            for j in fi..i {
                let fj = first[j];
                let sj = start[j];
                let k0 = fi.max(fj);
                let mut s = values[si + j - fi];
                let (ri, rj) = (
                    &values[si + k0 - fi..si + j - fi],
                    &values[sj + k0 - fj..sj + j - fj],
                );
                s -= ri.iter().zip(rj).map(|(x, y)| x * y).sum::<f64>();
                values[si + j - fi] = s / values[sj + j - fj];
            }
            let diag_orig = values[si + i - fi];
            let row = &values[si..si + i - fi];
            let d = diag_orig - row.iter().map(|x| x * x).sum::<f64>();
            if !(d > 1e-14 * diag_orig.abs()) || !d.is_finite() {
                return Err(SolverError::NotSpd { block: perm[i] });
            }
            values[si + i - fi] = d.sqrt();
        }
        Ok(Self {
            perm,
            first,
            start,
            values,
        })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Number of stored factor entries.
    pub fn envelope_size(&self) -> usize {
        self.values.len()
    }

    pub fn solve_into(&self, rhs: &[f64], x: &mut [f64]) {
        let n = self.dim();
        let mut y: Vec<f64> = self.perm.iter().map(|&old| rhs[old]).collect();
        for i in 0..n {
            let (fi, si) = (self.first[i], self.start[i]);
            let row = &self.values[si..si + i - fi];
            let s: f64 = row.iter().zip(&y[fi..i]).map(|(l, v)| l * v).sum();
            y[i] = (y[i] - s) / self.values[si + i - fi];
        }
        for i in (0..n).rev() {
            let (fi, si) = (self.first[i], self.start[i]);
            let xi = y[i] / self.values[si + i - fi];
            y[i] = xi;
            for (k, l) in self.values[si..si + i - fi].iter().enumerate() {
                y[fi + k] -= l * xi;
            }
        }
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        self.solve_into(rhs, &mut x);
        x
    }
}

/// Applying the factorization as an operator means applying `A⁻¹`.
impl LinearOperator for EnvelopeCholesky {
    fn dim(&self) -> usize {
        EnvelopeCholesky::dim(self)
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.solve_into(x, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm;

    fn grid_laplacian(m: usize) -> SparseMatrix {
        let id = |i: usize, j: usize| i * m + j;
        let mut t = Vec::new();
        for i in 0..m {
            for j in 0..m {
                t.push((id(i, j), id(i, j), 4.5));
                if i > 0 {
                    t.push((id(i, j), id(i - 1, j), -1.0));
                    t.push((id(i - 1, j), id(i, j), -1.0));
                }
                if j > 0 {
                    t.push((id(i, j), id(i, j - 1), -1.0));
                    t.push((id(i, j - 1), id(i, j), -1.0));
                }
            }
        }
        SparseMatrix::from_triplets(m * m, m * m, &t)
    }

    #[test]
    fn rcm_is_a_permutation() {
        let a = grid_laplacian(7);
        let mut p = rcm_ordering(&a);
        p.sort();
        assert_eq!(p, (0..49).collect::<Vec<_>>());
    }

    #[test]
    fn solves_grid_laplacian() {
        let a = grid_laplacian(12);
        let b: Vec<f64> = (0..144).map(|i| ((i * 7) % 11) as f64 - 5.0).collect();
        let f = EnvelopeCholesky::new(&a).unwrap();
        let x = f.solve(&b);
        let r: Vec<f64> = a.mul_vec(&x).iter().zip(&b).map(|(p, q)| p - q).collect();
        assert!(norm(&r) < 1e-12 * norm(&b));
        // natural order has bandwidth 12, RCM must not be worse
        let natural = EnvelopeCholesky::with_ordering(&a, (0..144).collect()).unwrap();
        assert!(f.envelope_size() <= natural.envelope_size());
    }

    #[test]
    fn rejects_indefinite() {
        let a = SparseMatrix::from_triplets(
            2,
            2,
            &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)],
        );
        assert!(matches!(
            EnvelopeCholesky::new(&a),
            Err(SolverError::NotSpd { .. })
        ));
    }
}
