//! Degrees of freedom, boundary conditions and the global operators of the
//! semi-discrete system.

mod matrices;

use std::fmt;
use std::str::FromStr;

pub use matrices::{
    apply_normal_bc, assemble_boundary_load, assemble_div, assemble_exact_mass,
    assemble_lumped_mass, assemble_lumped_mass_free, pressure_mass,
};

use crate::fem::Bdm1Element;
use crate::mesh::{BoundaryTag, TriMesh};

/// What a boundary tag means for the wave problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryCondition {
    /// `p = p_data`, imposed weakly through the boundary load
    PressureData,
    /// `p = 0`, natural, no load
    ZeroPressure,
    /// `n · u = 0`, essential on the velocity
    NoFlux,
}

impl BoundaryCondition {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::PressureData => "pressure",
            Self::ZeroPressure => "zero_pressure",
            Self::NoFlux => "no_flux",
        }
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundaryCondition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "pressure" => Ok(Self::PressureData),
            "zero_pressure" => Ok(Self::ZeroPressure),
            "no_flux" => Ok(Self::NoFlux),
            _ => Err(format!(
                "unknown boundary condition '{s}' (expected pressure, zero_pressure or no_flux)"
            )),
        }
    }
}

/// Tag → condition map.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryConditions {
    map: [BoundaryCondition; 3],
}

impl Default for BoundaryConditions {
    /// Dirichlet data on `DirichletP`, no flux on `NeumannU`, sound-soft
    /// `Scatterer`.
    fn default() -> Self {
        Self {
            map: [
                BoundaryCondition::PressureData,
                BoundaryCondition::NoFlux,
                BoundaryCondition::ZeroPressure,
            ],
        }
    }
}

impl BoundaryConditions {
    fn slot(tag: BoundaryTag) -> usize {
        match tag {
            BoundaryTag::DirichletP => 0,
            BoundaryTag::NeumannU => 1,
            BoundaryTag::Scatterer => 2,
        }
    }

    pub fn get(&self, tag: BoundaryTag) -> BoundaryCondition {
        self.map[Self::slot(tag)]
    }

    pub fn set(&mut self, tag: BoundaryTag, cond: BoundaryCondition) {
        self.map[Self::slot(tag)] = cond;
    }

    /// Every tag mapped to `cond`.
    pub fn uniform(cond: BoundaryCondition) -> Self {
        Self { map: [cond; 3] }
    }
}

/// Velocity dofs are the edge-endpoint normal values, numbered so that all
/// dofs sharing a mesh vertex are contiguous; pressure dofs are cells.
#[derive(Clone, Debug)]
pub struct DofMap {
    block_offsets: Vec<usize>,
    edge_dofs: Vec<[usize; 2]>,
    dof_edge: Vec<usize>,
    dof_vertex: Vec<usize>,
    constrained: Vec<bool>,
    num_cells: usize,
}

impl DofMap {
    pub fn new(mesh: &TriMesh, bc: &BoundaryConditions) -> Self {
        let ne = mesh.num_edges();
        let mut block_offsets = Vec::with_capacity(mesh.num_vertices() + 1);
        let mut edge_dofs = vec![[usize::MAX; 2]; ne];
        let mut dof_edge = Vec::with_capacity(2 * ne);
        let mut dof_vertex = Vec::with_capacity(2 * ne);
        block_offsets.push(0);
        for (v, edges) in mesh.vertex_edges().into_iter().enumerate() {
            for e in edges {
                let j = if mesh.edge(e)[0] == v { 0 } else { 1 };
                edge_dofs[e][j] = dof_edge.len();
                dof_edge.push(e);
                dof_vertex.push(v);
            }
            block_offsets.push(dof_edge.len());
        }
        let constrained = dof_edge
            .iter()
            .map(|&e| {
                mesh.boundary_tag(e)
                    .is_some_and(|t| bc.get(t) == BoundaryCondition::NoFlux)
            })
            .collect();
        Self {
            block_offsets,
            edge_dofs,
            dof_edge,
            dof_vertex,
            constrained,
            num_cells: mesh.num_cells(),
        }
    }

    pub fn num_velocity_dofs(&self) -> usize {
        self.dof_edge.len()
    }

    pub fn num_pressure_dofs(&self) -> usize {
        self.num_cells
    }

    /// Dofs of edge `e` at its lower- and higher-indexed endpoint.
    pub fn edge_dofs(&self, e: usize) -> [usize; 2] {
        self.edge_dofs[e]
    }

    pub fn dof_edge(&self, d: usize) -> usize {
        self.dof_edge[d]
    }

    pub fn dof_vertex(&self, d: usize) -> usize {
        self.dof_vertex[d]
    }

    pub fn block_offsets(&self) -> &[usize] {
        &self.block_offsets
    }

    pub fn vertex_block(&self, v: usize) -> std::ops::Range<usize> {
        self.block_offsets[v]..self.block_offsets[v + 1]
    }

    pub fn is_constrained(&self, d: usize) -> bool {
        self.constrained[d]
    }

    pub fn constrained(&self) -> &[bool] {
        &self.constrained
    }

    pub fn num_constrained(&self) -> usize {
        self.constrained.iter().filter(|&&c| c).count()
    }
}

/// A mesh together with its dof layout, boundary conditions and cached
/// element data.
#[derive(Clone, Debug)]
pub struct Space {
    mesh: TriMesh,
    dofmap: DofMap,
    bc: BoundaryConditions,
    elements: Vec<Bdm1Element>,
    cell_dofs: Vec<[usize; 6]>,
}

impl Space {
    pub fn new(mesh: TriMesh, bc: &BoundaryConditions) -> Self {
        let dofmap = DofMap::new(&mesh, bc);
        let mut elements = Vec::with_capacity(mesh.num_cells());
        let mut cell_dofs = Vec::with_capacity(mesh.num_cells());
        for c in 0..mesh.num_cells() {
            let cell = mesh.cell(c);
            let edges = mesh.cell_edges(c);
            let lengths = edges.map(|e| mesh.edge_length(e));
            elements.push(Bdm1Element::new(
                &mesh.cell_points(c),
                &mesh.cell_signs(c),
                &lengths,
            ));
            let mut dofs = [0; 6];
            for (k, d) in dofs.iter_mut().enumerate() {
                let e = edges[k / 2];
                let v = cell[crate::fem::DOF_VERTEX[k]];
                let j = if mesh.edge(e)[0] == v { 0 } else { 1 };
                *d = dofmap.edge_dofs(e)[j];
            }
            cell_dofs.push(dofs);
        }
        Self {
            mesh,
            dofmap,
            bc: *bc,
            elements,
            cell_dofs,
        }
    }

    pub fn mesh(&self) -> &TriMesh {
        &self.mesh
    }

    pub fn dofmap(&self) -> &DofMap {
        &self.dofmap
    }

    pub fn boundary_conditions(&self) -> &BoundaryConditions {
        &self.bc
    }

    pub fn element(&self, c: usize) -> &Bdm1Element {
        &self.elements[c]
    }

    /// Global dof of every local dof of cell `c`.
    pub fn cell_dofs(&self, c: usize) -> [usize; 6] {
        self.cell_dofs[c]
    }

    pub fn num_velocity_dofs(&self) -> usize {
        self.dofmap.num_velocity_dofs()
    }

    pub fn num_cells(&self) -> usize {
        self.mesh.num_cells()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_rect_mesh_tagged, Rect};

    #[test]
    fn counts_and_partition() {
        let m = crate::mesh::generate_rect_mesh(Rect::biunit(), 2).unwrap();
        let d = DofMap::new(&m, &BoundaryConditions::default());
        assert_eq!(d.num_velocity_dofs(), 2 * m.num_edges());
        assert_eq!(d.num_pressure_dofs(), m.num_cells());
        let mut seen = vec![false; d.num_velocity_dofs()];
        for v in 0..m.num_vertices() {
            for dof in d.vertex_block(v) {
                assert!(!seen[dof]);
                seen[dof] = true;
                assert_eq!(d.dof_vertex(dof), v);
            }
        }
        assert!(seen.into_iter().all(|s| s));
        for e in 0..m.num_edges() {
            let [a, b] = m.edge(e);
            let [da, db] = d.edge_dofs(e);
            assert_eq!((d.dof_vertex(da), d.dof_vertex(db)), (a, b));
        }
    }

    #[test]
    fn no_flux_edges_constrained() {
        let m = generate_rect_mesh_tagged(Rect::biunit(), 2, |a, b| {
            if (a.y - b.y).abs() < 1e-12 && a.y.abs() > 0.999 {
                BoundaryTag::NeumannU
            } else {
                BoundaryTag::DirichletP
            }
        })
        .unwrap();
        let d = DofMap::new(&m, &BoundaryConditions::default());
        // 4 horizontal boundary edges on top and bottom, two dofs each
        assert_eq!(d.num_constrained(), 2 * 8);
        let free = DofMap::new(
            &m,
            &BoundaryConditions::uniform(BoundaryCondition::PressureData),
        );
        assert_eq!(free.num_constrained(), 0);
    }

    #[test]
    fn condition_names_roundtrip() {
        for c in [
            BoundaryCondition::PressureData,
            BoundaryCondition::ZeroPressure,
            BoundaryCondition::NoFlux,
        ] {
            assert_eq!(c.as_str().parse::<BoundaryCondition>().unwrap(), c);
        }
        assert!("wall".parse::<BoundaryCondition>().is_err());
    }
}
