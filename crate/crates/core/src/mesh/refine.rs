use std::collections::HashMap;

use super::{BoundaryTag, MeshError, TriMesh};
use crate::Point;

/// Vertices of the four children in barycentric coordinates of the parent.
///
/// Child `k < 3` sits at parent vertex `k`; child 3 is the medial triangle.
/// All children keep the parent's counterclockwise orientation.
pub const CHILD_BARYCENTRIC: [[[f64; 3]; 3]; 4] = [
    [[1.0, 0.0, 0.0], [0.5, 0.5, 0.0], [0.5, 0.0, 0.5]],
    [[0.5, 0.5, 0.0], [0.0, 1.0, 0.0], [0.0, 0.5, 0.5]],
    [[0.5, 0.0, 0.5], [0.0, 0.5, 0.5], [0.0, 0.0, 1.0]],
    [[0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]],
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SnapRecord {
    pub vertex: usize,
    pub from: Point,
    pub to: Point,
}

/// Parent/child bookkeeping of one regular refinement step.
///
/// Fine cell `4c + k` is child `k` of coarse cell `c`.
#[derive(Clone, Debug)]
pub struct RefinementMap {
    pub parent_cell: Vec<usize>,
    pub child_index: Vec<u8>,
    pub boundary_snap: Vec<SnapRecord>,
    pub coarse_cells: usize,
}

impl RefinementMap {
    pub fn fine_cells(&self) -> usize {
        self.parent_cell.len()
    }

    /// Maps barycentric coordinates in fine cell `f` to barycentric
    /// coordinates in its parent. This is the inverse of the piecewise
    /// affine snapping map followed by the regular child-to-parent map.
    pub fn to_parent(&self, f: usize, fine: &[f64; 3]) -> (usize, [f64; 3]) {
        let cb = &CHILD_BARYCENTRIC[self.child_index[f] as usize];
        let mut out = [0.0; 3];
        for (i, li) in fine.iter().enumerate() {
            for j in 0..3 {
                out[j] += li * cb[i][j];
            }
        }
        (self.parent_cell[f], out)
    }
}

/// Radial projection onto the circle `|x - centre| = radius`.
pub fn circle_projector(centre: Point, radius: f64) -> impl Fn(&Point) -> Point {
    move |x: &Point| {
        let d = x - centre;
        centre + d * (radius / d.norm())
    }
}

/// Splits every cell into four through its edge midpoints.
///
/// Midpoints of [`BoundaryTag::Scatterer`] edges are moved by `snap` when
/// given; the resulting mesh stays straight-edged. Boundary tags are
/// inherited by both halves of each boundary edge.
pub fn refine_regular(
    mesh: &TriMesh,
    snap: Option<&dyn Fn(&Point) -> Point>,
) -> Result<(TriMesh, RefinementMap), MeshError> {
    let nv = mesh.num_vertices();
    let mut vertices: Vec<Point> = mesh.vertices().to_vec();
    vertices.reserve(mesh.num_edges());
    let mut boundary_snap = Vec::new();
    let limit = mesh.h_max() / 2.0;
    for e in 0..mesh.num_edges() {
        let [a, b] = mesh.edge(e);
        let mid = (mesh.vertex(a) + mesh.vertex(b)) / 2.0;
        let v = nv + e;
        let pos = match (snap, mesh.boundary_tag(e)) {
            (Some(project), Some(BoundaryTag::Scatterer)) => {
                let to = project(&mid);
                let distance = (to - mid).norm();
                if !(distance <= limit) {
                    return Err(MeshError::BadProjector {
                        vertex: v,
                        distance,
                        limit,
                    });
                }
                boundary_snap.push(SnapRecord {
                    vertex: v,
                    from: mid,
                    to,
                });
                to
            }
            _ => mid,
        };
        vertices.push(pos);
    }

    let mut cells = Vec::with_capacity(4 * mesh.num_cells());
    let mut parent_cell = Vec::with_capacity(4 * mesh.num_cells());
    let mut child_index = Vec::with_capacity(4 * mesh.num_cells());
    for c in 0..mesh.num_cells() {
        let [v0, v1, v2] = mesh.cell(c);
        // midpoint opposite local vertex i
        let [e0, e1, e2] = mesh.cell_edges(c);
        let (m0, m1, m2) = (nv + e0, nv + e1, nv + e2);
        let children = [[v0, m2, m1], [m2, v1, m0], [m1, m0, v2], [m0, m1, m2]];
        for (k, child) in children.into_iter().enumerate() {
            cells.push(child);
            parent_cell.push(c);
            child_index.push(k as u8);
        }
    }

    let mut tags: HashMap<[usize; 2], BoundaryTag> = HashMap::new();
    for (e, tag) in mesh.boundary_edges() {
        let [a, b] = mesh.edge(e);
        let m = nv + e;
        tags.insert([a.min(m), a.max(m)], tag);
        tags.insert([b.min(m), b.max(m)], tag);
    }
    let fine = TriMesh::new(vertices, cells, |a, b| tags.get(&[a, b]).copied())?;
    let map = RefinementMap {
        parent_cell,
        child_index,
        boundary_snap,
        coarse_cells: mesh.num_cells(),
    };
    Ok((fine, map))
}

/// Copies each coarse cell value to its four children.
pub fn prolong_p0(field: &[f64], map: &RefinementMap) -> Result<Vec<f64>, MeshError> {
    if field.len() != map.coarse_cells {
        return Err(MeshError::MapMismatch(format!(
            "field has {} values, coarse mesh has {} cells",
            field.len(),
            map.coarse_cells
        )));
    }
    Ok(map.parent_cell.iter().map(|&c| field[c]).collect())
}

/// Point evaluation of a coarse piecewise linear vector field on the fine
/// mesh, composed with the child-to-parent map.
///
/// The coarse field is given by its values at the three vertices of every
/// coarse cell, which is how BDM1 fields are stored after evaluation
/// (see [`crate::fem::cell_vertex_velocities`]).
pub struct ProlongedVelocity<'a> {
    values: &'a [[Point; 3]],
    map: &'a RefinementMap,
}

impl<'a> ProlongedVelocity<'a> {
    pub fn new(values: &'a [[Point; 3]], map: &'a RefinementMap) -> Result<Self, MeshError> {
        if values.len() != map.coarse_cells {
            return Err(MeshError::MapMismatch(format!(
                "velocity has {} cells, coarse mesh has {}",
                values.len(),
                map.coarse_cells
            )));
        }
        Ok(Self { values, map })
    }

    pub fn eval(&self, fine_cell: usize, fine_bary: &[f64; 3]) -> Point {
        let (c, l) = self.map.to_parent(fine_cell, fine_bary);
        let v = &self.values[c];
        v[0] * l[0] + v[1] * l[1] + v[2] * l[2]
    }
}
