use rayon::prelude::*;

use super::{BoundaryCondition, DofMap, Space};
use crate::fem::{gauss_legendre4, DOF_VERTEX, VERTEX_DOFS};
use crate::linalg::{BlockDiagMatrix, SolverError, SparseMatrix};
use crate::Point;

/// Per-cell contributions are computed in parallel and scattered in cell
/// order, so results do not depend on the thread count.
fn cell_contributions<T: Send, F>(space: &Space, f: F) -> Vec<T>
where
    F: Fn(usize) -> T + Sync + Send,
{
    (0..space.num_cells()).into_par_iter().map(f).collect()
}

fn lumped_blocks(space: &Space) -> BlockDiagMatrix {
    let dofmap = space.dofmap();
    let mut m = BlockDiagMatrix::zeros(dofmap.block_offsets().to_vec());
    let local = cell_contributions(space, |c| {
        let el = space.element(c);
        let dofs = space.cell_dofs(c);
        let mut out = [(0usize, 0usize, 0.0); 12];
        let mut n = 0;
        for pair in VERTEX_DOFS {
            for &i in &pair {
                for &j in &pair {
                    out[n] = (dofs[i], dofs[j], el.area / 3.0 * el.w[i].dot(&el.w[j]));
                    n += 1;
                }
            }
        }
        out
    });
    for entries in local {
        for (i, j, v) in entries {
            let v_block = dofmap.dof_vertex(i);
            let r = dofmap.vertex_block(v_block);
            let s = r.len();
            m.block_mut(v_block)[(i - r.start) * s + (j - r.start)] += v;
        }
    }
    m
}

/// Vertex-rule velocity mass, one dense block per mesh vertex, with
/// identity rows and columns on constrained dofs.
pub fn assemble_lumped_mass(space: &Space) -> Result<BlockDiagMatrix, SolverError> {
    let dofmap = space.dofmap();
    let mut m = lumped_blocks(space);
    for v in 0..space.mesh().num_vertices() {
        let r = dofmap.vertex_block(v);
        let s = r.len();
        let block = m.block_mut(v);
        for (li, d) in r.clone().enumerate() {
            if dofmap.is_constrained(d) {
                for lj in 0..s {
                    block[li * s + lj] = 0.0;
                    block[lj * s + li] = 0.0;
                }
                block[li * s + li] = 1.0;
            }
        }
    }
    m.factorize()?;
    Ok(m)
}

/// Vertex-rule velocity mass on the full space, ignoring constraints.
pub fn assemble_lumped_mass_free(space: &Space) -> Result<BlockDiagMatrix, SolverError> {
    let mut m = lumped_blocks(space);
    m.factorize()?;
    Ok(m)
}

/// Consistent velocity mass, unconstrained.
///
/// Entries are `∫_K λ_a λ_b w_k · w_l = |K| (1 + δ_ab) / 12 · w_k · w_l`,
/// which the edge-midpoint rule integrates exactly.
pub fn assemble_exact_mass(space: &Space) -> SparseMatrix {
    let local = cell_contributions(space, |c| {
        let el = space.element(c);
        let dofs = space.cell_dofs(c);
        let mut out = [(0usize, 0usize, 0.0); 36];
        for k in 0..6 {
            for l in 0..6 {
                let f = if DOF_VERTEX[k] == DOF_VERTEX[l] {
                    2.0
                } else {
                    1.0
                };
                out[6 * k + l] = (dofs[k], dofs[l], el.area * f / 12.0 * el.w[k].dot(&el.w[l]));
            }
        }
        out
    });
    let triplets: Vec<_> = local.into_iter().flatten().collect();
    let n = space.num_velocity_dofs();
    SparseMatrix::from_triplets(n, n, &triplets)
}

/// `B[K, j] = ∫_K div φ_j`, one row per cell, unconstrained.
pub fn assemble_div(space: &Space) -> SparseMatrix {
    let local = cell_contributions(space, |c| {
        let el = space.element(c);
        let dofs = space.cell_dofs(c);
        let mut out = [(0usize, 0usize, 0.0); 6];
        for k in 0..6 {
            out[k] = (c, dofs[k], el.area * el.div[k]);
        }
        out
    });
    let triplets: Vec<_> = local.into_iter().flatten().collect();
    SparseMatrix::from_triplets(space.num_cells(), space.num_velocity_dofs(), &triplets)
}

/// Diagonal of the pressure mass: the cell areas.
pub fn pressure_mass(space: &Space) -> Vec<f64> {
    (0..space.num_cells())
        .map(|c| space.mesh().cell_area(c))
        .collect()
}

/// `ℓ_j = −∫_{Γ_D} p_data(·, t) n · φ_j ds` over edges whose tag maps to
/// [`BoundaryCondition::PressureData`].
pub fn assemble_boundary_load(
    space: &Space,
    p_data: impl Fn(&Point, f64) -> f64,
    t: f64,
) -> Vec<f64> {
    let mesh = space.mesh();
    let dofmap = space.dofmap();
    let bc = space.boundary_conditions();
    let mut load = vec![0.0; dofmap.num_velocity_dofs()];
    let gauss = gauss_legendre4();
    for (e, tag) in mesh.boundary_edges() {
        if bc.get(tag) != BoundaryCondition::PressureData {
            continue;
        }
        let c = mesh.edge_cells(e)[0].expect("boundary edge has a cell");
        let i = mesh.cell_edges(c).iter().position(|&x| x == e).unwrap();
        let s_out = mesh.cell_signs(c)[i];
        let [a, b] = mesh.edge(e);
        let (xa, xb) = (mesh.vertex(a), mesh.vertex(b));
        let len = mesh.edge_length(e);
        // the global normal trace of the dof at `a` is λ_a along the edge
        let (mut ia, mut ib) = (0.0, 0.0);
        for &(s, w) in &gauss {
            let p = p_data(&(xa + s * (xb - xa)), t) * w * len;
            ia += (1.0 - s) * p;
            ib += s * p;
        }
        let [da, db] = dofmap.edge_dofs(e);
        load[da] -= s_out * ia;
        load[db] -= s_out * ib;
    }
    apply_normal_bc(dofmap, &mut load);
    load
}

/// Zeroes the constrained velocity dofs.
pub fn apply_normal_bc(dofmap: &DofMap, field: &mut [f64]) {
    for (v, &c) in field.iter_mut().zip(dofmap.constrained()) {
        if c {
            *v = 0.0;
        }
    }
}
