use super::{LinearOperator, SolverError};

/// Block-diagonal matrix with dense symmetric blocks on contiguous index
/// ranges, factorized once by Cholesky.
#[derive(Clone, Debug)]
pub struct BlockDiagMatrix {
    /// block `b` covers rows `offsets[b]..offsets[b + 1]`
    offsets: Vec<usize>,
    /// start of block `b` inside `data` (row-major, size²)
    data_offsets: Vec<usize>,
    data: Vec<f64>,
    /// lower Cholesky factors, same layout as `data`
    factors: Vec<f64>,
}

impl BlockDiagMatrix {
    /// Builds and factorizes. `data` holds the dense blocks back to back.
    pub fn new(offsets: Vec<usize>, data: Vec<f64>) -> Result<Self, SolverError> {
        let mut data_offsets = Vec::with_capacity(offsets.len());
        let mut pos = 0;
        data_offsets.push(0);
        for w in offsets.windows(2) {
            let s = w[1] - w[0];
            pos += s * s;
            data_offsets.push(pos);
        }
        if pos != data.len() {
            return Err(SolverError::Dimension(format!(
                "block data has {} entries, layout needs {pos}",
                data.len()
            )));
        }
        let mut m = Self {
            offsets,
            data_offsets,
            factors: data.clone(),
            data,
        };
        m.factorize()?;
        Ok(m)
    }

    /// Identity-sized zero blocks, to be filled through [`Self::block_mut`]
    /// before calling [`Self::factorize`].
    pub fn zeros(offsets: Vec<usize>) -> Self {
        let total: usize = offsets.windows(2).map(|w| (w[1] - w[0]).pow(2)).sum();
        let mut data_offsets = vec![0];
        for w in offsets.windows(2) {
            let s = w[1] - w[0];
            data_offsets.push(data_offsets.last().unwrap() + s * s);
        }
        Self {
            offsets,
            data_offsets,
            data: vec![0.0; total],
            factors: vec![0.0; total],
        }
    }

    pub fn num_blocks(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn block_range(&self, b: usize) -> std::ops::Range<usize> {
        self.offsets[b]..self.offsets[b + 1]
    }

    pub fn block_size(&self, b: usize) -> usize {
        self.offsets[b + 1] - self.offsets[b]
    }

    /// Row-major entries of block `b`.
    pub fn block(&self, b: usize) -> &[f64] {
        &self.data[self.data_offsets[b]..self.data_offsets[b + 1]]
    }

    pub fn block_mut(&mut self, b: usize) -> &mut [f64] {
        &mut self.data[self.data_offsets[b]..self.data_offsets[b + 1]]
    }

    /// Entry `(i, j)` of the global matrix.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let b = self.offsets.partition_point(|&o| o <= i) - 1;
        let r = self.block_range(b);
        if !r.contains(&j) {
            return 0.0;
        }
        let s = r.len();
        self.block(b)[(i - r.start) * s + (j - r.start)]
    }

    /// Dense Cholesky `A = L Lᵀ` of every block.
    pub fn factorize(&mut self) -> Result<(), SolverError> {
        self.factors.copy_from_slice(&self.data);
        for b in 0..self.num_blocks() {
            let s = self.block_size(b);
            let l = &mut self.factors[self.data_offsets[b]..self.data_offsets[b + 1]];
            for j in 0..s {
                let mut d = l[j * s + j];
                for k in 0..j {
                    d -= l[j * s + k] * l[j * s + k];
                }
                // relative pivot check against the original diagonal
                if !(d > 1e-14 * l[j * s + j].abs()) || !d.is_finite() {
                    return Err(SolverError::NotSpd { block: b });
                }
                let d = d.sqrt();
                l[j * s + j] = d;
                for i in j + 1..s {
                    let mut v = l[i * s + j];
                    for k in 0..j {
                        v -= l[i * s + k] * l[j * s + k];
                    }
                    l[i * s + j] = v / d;
                }
                for i in 0..j {
                    l[i * s + j] = 0.0;
                }
            }
        }
        Ok(())
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for b in 0..self.num_blocks() {
            let r = self.block_range(b);
            let s = r.len();
            let a = self.block(b);
            for i in 0..s {
                let mut v = 0.0;
                for j in 0..s {
                    v += a[i * s + j] * x[r.start + j];
                }
                y[r.start + i] = v;
            }
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.matvec(x, &mut y);
        y
    }

    /// `xᵀ A x`
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        let mut total = 0.0;
        for b in 0..self.num_blocks() {
            let r = self.block_range(b);
            let s = r.len();
            let a = self.block(b);
            let xb = &x[r.clone()];
            for i in 0..s {
                let mut v = 0.0;
                for j in 0..s {
                    v += a[i * s + j] * xb[j];
                }
                total += xb[i] * v;
            }
        }
        total
    }

    /// Solves `A x = rhs` in place of `x` using the cached factors.
    pub fn solve_into(&self, rhs: &[f64], x: &mut [f64]) {
        for b in 0..self.num_blocks() {
            let r = self.block_range(b);
            let s = r.len();
            let l = &self.factors[self.data_offsets[b]..self.data_offsets[b + 1]];
            let xb = &mut x[r.clone()];
            xb.copy_from_slice(&rhs[r]);
            for i in 0..s {
                let mut v = xb[i];
                for k in 0..i {
                    v -= l[i * s + k] * xb[k];
                }
                xb[i] = v / l[i * s + i];
            }
            for i in (0..s).rev() {
                let mut v = xb[i];
                for k in i + 1..s {
                    v -= l[k * s + i] * xb[k];
                }
                xb[i] = v / l[i * s + i];
            }
        }
    }

    /// Dense inverse of block `b`, row-major.
    pub fn block_inverse(&self, b: usize) -> Vec<f64> {
        let s = self.block_size(b);
        let l = &self.factors[self.data_offsets[b]..self.data_offsets[b + 1]];
        let mut inv = vec![0.0; s * s];
        let mut col = vec![0.0; s];
        for j in 0..s {
            col.iter_mut()
                .enumerate()
                .for_each(|(i, v)| *v = if i == j { 1.0 } else { 0.0 });
            for i in 0..s {
                let mut v = col[i];
                for k in 0..i {
                    v -= l[i * s + k] * col[k];
                }
                col[i] = v / l[i * s + i];
            }
            for i in (0..s).rev() {
                let mut v = col[i];
                for k in i + 1..s {
                    v -= l[k * s + i] * col[k];
                }
                col[i] = v / l[i * s + i];
            }
            for i in 0..s {
                inv[i * s + j] = col[i];
            }
        }
        inv
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        self.solve_into(rhs, &mut x);
        x
    }
}

impl LinearOperator for BlockDiagMatrix {
    fn dim(&self) -> usize {
        BlockDiagMatrix::dim(self)
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y)
    }
}
