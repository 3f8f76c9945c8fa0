//! Conforming triangular meshes.
//!
//! A [`TriMesh`] owns its vertex coordinates and counterclockwise cells and
//! derives everything else on construction: the global edge list, a fixed
//! unit normal per edge, the cell-to-edge incidence with orientation signs,
//! and the boundary tags. Meshes are immutable afterwards.

mod generate;
mod io;
mod refine;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::Point;

pub use generate::{
    generate_lshape_mesh, generate_rect_mesh, generate_rect_mesh_tagged, perturb_interior, Rect,
};
pub use io::{read_mesh, write_mesh};
pub use refine::{
    circle_projector, prolong_p0, refine_regular, ProlongedVelocity, RefinementMap, SnapRecord,
    CHILD_BARYCENTRIC,
};

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("cell {cell} has non-positive signed area {area:e}")]
    DegenerateCell { cell: usize, area: f64 },
    #[error("cell {cell} references vertex {vertex}, but the mesh has {count} vertices")]
    VertexOutOfRange {
        cell: usize,
        vertex: usize,
        count: usize,
    },
    #[error("cell {cell} duplicates cell {other}")]
    DuplicateCell { cell: usize, other: usize },
    #[error("non-conforming connectivity at edge ({a}, {b}): {msg}")]
    NonConforming { a: usize, b: usize, msg: String },
    #[error("boundary edge ({a}, {b}) has no tag")]
    MissingTag { a: usize, b: usize },
    #[error("tagged edge ({a}, {b}) is not a boundary edge")]
    TagOnInterior { a: usize, b: usize },
    #[error("Euler relation violated: V - E + C = {found}, expected {expected}")]
    Euler { found: i64, expected: i64 },
    #[error("shape regularity {ratio:.4} below the required {gamma:.4} (cell {cell})")]
    ShapeRegularity { cell: usize, ratio: f64, gamma: f64 },
    #[error("boundary projector moved vertex {vertex} by {distance:e} (> h_max/2 = {limit:e})")]
    BadProjector {
        vertex: usize,
        distance: f64,
        limit: f64,
    },
    #[error("invalid mesh parameter: {0}")]
    InvalidParameter(String),
    #[error("mesh/refinement map mismatch: {0}")]
    MapMismatch(String),
}

/// Boundary edge labels. What each label means physically is decided by
/// the scenario's boundary map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryTag {
    DirichletP,
    NeumannU,
    Scatterer,
}

impl BoundaryTag {
    pub const ALL: [BoundaryTag; 3] = [Self::DirichletP, Self::NeumannU, Self::Scatterer];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::DirichletP => "dirichlet_p",
            Self::NeumannU => "neumann_u",
            Self::Scatterer => "scatterer",
        }
    }
}

impl fmt::Display for BoundaryTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundaryTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dirichlet_p" => Ok(Self::DirichletP),
            "neumann_u" => Ok(Self::NeumannU),
            "scatterer" => Ok(Self::Scatterer),
            other => Err(format!(
                "unknown boundary tag '{other}' (expected dirichlet_p, neumann_u or scatterer)"
            )),
        }
    }
}

/// Summary produced by [`TriMesh::validate`].
#[derive(Clone, Copy, Debug)]
pub struct MeshQuality {
    /// min over cells of inradius / diameter
    pub min_shape_ratio: f64,
    pub h_max: f64,
    pub h_min: f64,
    pub euler: i64,
    pub boundary_loops: usize,
    pub components: usize,
}

#[derive(Clone, Debug)]
pub struct TriMesh {
    vertices: Vec<Point>,
    cells: Vec<[usize; 3]>,
    /// `(a, b)` with `a < b`.
    edges: Vec<[usize; 2]>,
    normals: Vec<Point>,
    lengths: Vec<f64>,
    /// Local edge `i` is opposite local vertex `i`.
    cell_edges: Vec<[usize; 3]>,
    /// `+1` when the global edge normal points out of the cell.
    cell_signs: Vec<[f64; 3]>,
    edge_cells: Vec<[Option<usize>; 2]>,
    boundary_tags: Vec<Option<BoundaryTag>>,
    h_max: f64,
    h_min: f64,
}

impl TriMesh {
    /// Builds the derived connectivity and checks conformity and orientation.
    ///
    /// `tagger` is called once per boundary edge with its sorted vertex pair
    /// and must supply a tag.
    pub fn new<F>(
        vertices: Vec<Point>,
        cells: Vec<[usize; 3]>,
        mut tagger: F,
    ) -> Result<Self, MeshError>
    where
        F: FnMut(usize, usize) -> Option<BoundaryTag>,
    {
        let nv = vertices.len();
        let mut seen: HashMap<[usize; 3], usize> = HashMap::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            for &v in cell {
                if v >= nv {
                    return Err(MeshError::VertexOutOfRange {
                        cell: c,
                        vertex: v,
                        count: nv,
                    });
                }
            }
            let mut key = *cell;
            key.sort_unstable();
            if key[0] == key[1] || key[1] == key[2] {
                return Err(MeshError::DegenerateCell { cell: c, area: 0.0 });
            }
            if let Some(&other) = seen.get(&key) {
                return Err(MeshError::DuplicateCell { cell: c, other });
            }
            seen.insert(key, c);
            let area = signed_area(&vertices[cell[0]], &vertices[cell[1]], &vertices[cell[2]]);
            if area <= 0.0 {
                return Err(MeshError::DegenerateCell { cell: c, area });
            }
        }

        let mut edge_index: HashMap<[usize; 2], usize> = HashMap::with_capacity(cells.len() * 2);
        let mut edges = Vec::new();
        let mut edge_cells: Vec<[Option<usize>; 2]> = Vec::new();
        // local direction (from, to) in which each incident cell traverses the edge
        let mut edge_dirs: Vec<[usize; 2]> = Vec::new();
        let mut cell_edges = vec![[0usize; 3]; cells.len()];
        for (c, cell) in cells.iter().enumerate() {
            for i in 0..3 {
                let from = cell[(i + 1) % 3];
                let to = cell[(i + 2) % 3];
                let key = [from.min(to), from.max(to)];
                let e = *edge_index.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edge_cells.push([None, None]);
                    edge_dirs.push([from, to]);
                    edges.len() - 1
                });
                match edge_cells[e] {
                    [None, _] => edge_cells[e][0] = Some(c),
                    [Some(_), None] => {
                        if edge_dirs[e] == [from, to] {
                            return Err(MeshError::NonConforming {
                                a: key[0],
                                b: key[1],
                                msg: "two cells traverse the edge in the same direction (overlap)"
                                    .into(),
                            });
                        }
                        edge_cells[e][1] = Some(c);
                    }
                    _ => {
                        return Err(MeshError::NonConforming {
                            a: key[0],
                            b: key[1],
                            msg: "shared by more than two cells".into(),
                        })
                    }
                }
                cell_edges[c][i] = e;
            }
        }

        let mut normals = Vec::with_capacity(edges.len());
        let mut lengths = Vec::with_capacity(edges.len());
        for &[a, b] in &edges {
            let t = vertices[b] - vertices[a];
            let len = t.norm();
            lengths.push(len);
            normals.push(Point::new(-t.y, t.x) / len);
        }

        let mut cell_signs = vec![[0.0; 3]; cells.len()];
        for (c, cell) in cells.iter().enumerate() {
            for i in 0..3 {
                let e = cell_edges[c][i];
                // the opposite vertex lies on the inner side of the edge
                let inward = vertices[cell[i]] - vertices[edges[e][0]];
                cell_signs[c][i] = if normals[e].dot(&inward) < 0.0 {
                    1.0
                } else {
                    -1.0
                };
            }
        }

        let mut boundary_tags = vec![None; edges.len()];
        for (e, &[a, b]) in edges.iter().enumerate() {
            if edge_cells[e][1].is_none() {
                boundary_tags[e] = Some(tagger(a, b).ok_or(MeshError::MissingTag { a, b })?);
            }
        }

        let mut h_max: f64 = 0.0;
        let mut h_min = f64::INFINITY;
        for ce in &cell_edges {
            let d = ce.iter().map(|&e| lengths[e]).fold(0.0, f64::max);
            h_max = h_max.max(d);
            h_min = h_min.min(d);
        }

        Ok(Self {
            vertices,
            cells,
            edges,
            normals,
            lengths,
            cell_edges,
            cell_signs,
            edge_cells,
            boundary_tags,
            h_max,
            h_min,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> Point {
        self.vertices[v]
    }

    pub fn cells(&self) -> &[[usize; 3]] {
        &self.cells
    }

    pub fn cell(&self, c: usize) -> [usize; 3] {
        self.cells[c]
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> [usize; 2] {
        self.edges[e]
    }

    /// Global unit normal of edge `e`: the tangent `(x_b - x_a)/|..|` rotated
    /// by 90° counterclockwise, where `a < b`.
    pub fn edge_normal(&self, e: usize) -> Point {
        self.normals[e]
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        self.lengths[e]
    }

    pub fn cell_edges(&self, c: usize) -> [usize; 3] {
        self.cell_edges[c]
    }

    pub fn cell_signs(&self, c: usize) -> [f64; 3] {
        self.cell_signs[c]
    }

    pub fn edge_cells(&self, e: usize) -> [Option<usize>; 2] {
        self.edge_cells[e]
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edge_cells[e][1].is_none()
    }

    pub fn boundary_tag(&self, e: usize) -> Option<BoundaryTag> {
        self.boundary_tags[e]
    }

    pub fn boundary_edges(&self) -> impl Iterator<Item = (usize, BoundaryTag)> + '_ {
        self.boundary_tags
            .iter()
            .enumerate()
            .filter_map(|(e, t)| t.map(|t| (e, t)))
    }

    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    pub fn h_min(&self) -> f64 {
        self.h_min
    }

    pub fn cell_points(&self, c: usize) -> [Point; 3] {
        let [a, b, d] = self.cells[c];
        [self.vertices[a], self.vertices[b], self.vertices[d]]
    }

    pub fn cell_area(&self, c: usize) -> f64 {
        let [a, b, d] = self.cell_points(c);
        signed_area(&a, &b, &d)
    }

    pub fn cell_centroid(&self, c: usize) -> Point {
        let [a, b, d] = self.cell_points(c);
        (a + b + d) / 3.0
    }

    /// inradius / diameter of cell `c`
    pub fn shape_ratio(&self, c: usize) -> f64 {
        let ce = self.cell_edges[c];
        let perimeter: f64 = ce.iter().map(|&e| self.lengths[e]).sum();
        let diameter = ce.iter().map(|&e| self.lengths[e]).fold(0.0, f64::max);
        2.0 * self.cell_area(c) / perimeter / diameter
    }

    pub fn total_area(&self) -> f64 {
        (0..self.num_cells()).map(|c| self.cell_area(c)).sum()
    }

    /// Edges incident to each vertex, in increasing edge order.
    pub fn vertex_edges(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_vertices()];
        for (e, &[a, b]) in self.edges.iter().enumerate() {
            out[a].push(e);
            out[b].push(e);
        }
        out
    }

    /// Checks the structural invariants plus shape regularity `ρ_K/h_K ≥ gamma`.
    ///
    /// Conformity and orientation are already enforced by [`TriMesh::new`];
    /// this adds the topological (Euler) check and the quality bound.
    pub fn validate(&self, gamma: f64) -> Result<MeshQuality, MeshError> {
        for c in 0..self.num_cells() {
            let area = self.cell_area(c);
            if area <= 0.0 {
                return Err(MeshError::DegenerateCell { cell: c, area });
            }
        }
        for (e, &[a, b]) in self.edges.iter().enumerate() {
            if self.is_boundary_edge(e) != self.boundary_tags[e].is_some() {
                return Err(MeshError::MissingTag { a, b });
            }
        }
        let (components, loops) = self.topology();
        let euler = self.num_vertices() as i64 - self.num_edges() as i64 + self.num_cells() as i64;
        let expected = 2 * components as i64 - loops as i64;
        if euler != expected {
            return Err(MeshError::Euler {
                found: euler,
                expected,
            });
        }
        let mut min_ratio = f64::INFINITY;
        for c in 0..self.num_cells() {
            let r = self.shape_ratio(c);
            if r < gamma {
                return Err(MeshError::ShapeRegularity {
                    cell: c,
                    ratio: r,
                    gamma,
                });
            }
            min_ratio = min_ratio.min(r);
        }
        Ok(MeshQuality {
            min_shape_ratio: min_ratio,
            h_max: self.h_max,
            h_min: self.h_min,
            euler,
            boundary_loops: loops,
            components,
        })
    }

    /// (number of cell-connected components, number of boundary loops)
    fn topology(&self) -> (usize, usize) {
        let mut cell_comp = UnionFind::new(self.num_cells());
        for ec in &self.edge_cells {
            if let [Some(a), Some(b)] = *ec {
                cell_comp.union(a, b);
            }
        }
        let components = (0..self.num_cells())
            .filter(|&c| cell_comp.find(c) == c)
            .count();

        // boundary loops: components of the graph formed by boundary edges
        let mut vert = UnionFind::new(self.num_vertices());
        let mut on_boundary = vec![false; self.num_vertices()];
        for (e, _) in self.boundary_edges() {
            let [a, b] = self.edges[e];
            vert.union(a, b);
            on_boundary[a] = true;
            on_boundary[b] = true;
        }
        let loops = (0..self.num_vertices())
            .filter(|&v| on_boundary[v] && vert.find(v) == v)
            .count();
        (components, loops)
    }

    /// Barycentric coordinates of `x` with respect to cell `c`.
    pub fn barycentric(&self, c: usize, x: &Point) -> [f64; 3] {
        let [a, b, d] = self.cell_points(c);
        let area = signed_area(&a, &b, &d);
        let l0 = signed_area(x, &b, &d) / area;
        let l1 = signed_area(&a, x, &d) / area;
        [l0, l1, 1.0 - l0 - l1]
    }

    pub fn point_from_barycentric(&self, c: usize, l: &[f64; 3]) -> Point {
        let [a, b, d] = self.cell_points(c);
        a * l[0] + b * l[1] + d * l[2]
    }
}

pub(crate) fn signed_area(a: &Point, b: &Point, c: &Point) -> f64 {
    0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x))
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_triangle() -> TriMesh {
        TriMesh::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(0.0, 1.0),
            ],
            vec![[0, 1, 2]],
            |_, _| Some(BoundaryTag::DirichletP),
        )
        .unwrap()
    }

    #[test]
    fn single_triangle_connectivity() {
        let m = reference_triangle();
        assert_eq!((m.num_vertices(), m.num_edges(), m.num_cells()), (3, 3, 1));
        assert_eq!(m.boundary_edges().count(), 3);
        let q = m.validate(0.1).unwrap();
        assert_eq!(q.euler, 1);
        // every global normal is outward or inward, never tangential
        for i in 0..3 {
            let e = m.cell_edges(0)[i];
            let n = m.edge_normal(e) * m.cell_signs(0)[i];
            let mid = {
                let [a, b] = m.edge(e);
                (m.vertex(a) + m.vertex(b)) / 2.0
            };
            assert!(n.dot(&(mid - m.cell_centroid(0))) > 0.0);
        }
    }

    #[test]
    fn normal_convention() {
        let m = reference_triangle();
        // edge (0,1) runs along +x; rotated counterclockwise gives +y
        let e = m.edges().iter().position(|&e| e == [0, 1]).unwrap();
        assert_eq!(m.edge_normal(e), Point::new(0.0, 1.0));
    }

    #[test]
    fn clockwise_cell_rejected() {
        let r = TriMesh::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(0.0, 1.0),
            ],
            vec![[0, 2, 1]],
            |_, _| Some(BoundaryTag::DirichletP),
        );
        assert!(matches!(r, Err(MeshError::DegenerateCell { .. })));
    }

    #[test]
    fn overlapping_cells_rejected() {
        let r = TriMesh::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(0.0, 1.0),
                Point::new(0.2, 0.2),
            ],
            vec![[0, 1, 2], [0, 1, 3]],
            |_, _| Some(BoundaryTag::DirichletP),
        );
        assert!(matches!(r, Err(MeshError::NonConforming { .. })));
    }

    #[test]
    fn barycentric_roundtrip() {
        let m = reference_triangle();
        let x = Point::new(0.2, 0.3);
        let l = m.barycentric(0, &x);
        assert!((l[1] - 0.2).abs() < 1e-15 && (l[2] - 0.3).abs() < 1e-15);
        assert!((m.point_from_barycentric(0, &l) - x).norm() < 1e-15);
    }
}
