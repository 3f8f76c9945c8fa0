use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BoundaryTag, MeshError, TriMesh};
use crate::Point;

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub const fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }

    /// `(-1, 1)²`
    pub const fn biunit() -> Self {
        Self::new(-1.0, 1.0, -1.0, 1.0)
    }

    pub const fn unit() -> Self {
        Self::new(0.0, 1.0, 0.0, 1.0)
    }
}

fn grid_counts(bounds: &Rect, n: usize) -> Result<(usize, usize), MeshError> {
    if n == 0 {
        return Err(MeshError::InvalidParameter(
            "subdivisions per unit length must be >= 1".into(),
        ));
    }
    let (w, h) = (bounds.x1 - bounds.x0, bounds.y1 - bounds.y0);
    if !(w > 0.0 && h > 0.0) {
        return Err(MeshError::InvalidParameter(format!(
            "empty rectangle {bounds:?}"
        )));
    }
    let nx = (w * n as f64).round();
    let ny = (h * n as f64).round();
    if (nx - w * n as f64).abs() > 1e-9 || (ny - h * n as f64).abs() > 1e-9 {
        return Err(MeshError::InvalidParameter(format!(
            "rectangle sides must be multiples of 1/{n}"
        )));
    }
    Ok((nx as usize, ny as usize))
}

/// Uniform grid with spacing `1/n`, each square split along its
/// lower-left to upper-right diagonal. All boundary edges are tagged
/// [`BoundaryTag::DirichletP`].
pub fn generate_rect_mesh(bounds: Rect, n: usize) -> Result<TriMesh, MeshError> {
    generate_rect_mesh_tagged(bounds, n, |_, _| BoundaryTag::DirichletP)
}

/// Like [`generate_rect_mesh`], with the tag of each boundary edge chosen
/// from its endpoint coordinates.
pub fn generate_rect_mesh_tagged<F>(bounds: Rect, n: usize, tagger: F) -> Result<TriMesh, MeshError>
where
    F: Fn(&Point, &Point) -> BoundaryTag,
{
    build_grid(bounds, n, |_| true, tagger)
}

/// `(-1,1)² \ [0,1]²` on the same grid as [`generate_rect_mesh`].
pub fn generate_lshape_mesh(n: usize) -> Result<TriMesh, MeshError> {
    build_grid(
        Rect::biunit(),
        n,
        |c: &Point| !(c.x > 0.0 && c.y > 0.0),
        |_, _| BoundaryTag::DirichletP,
    )
}

/// Moves every vertex not on the boundary by a random offset of length at
/// most `amplitude · h_min`, uniformly distributed in the disk. Small
/// amplitudes (≤ 0.3) keep all cells positively oriented on the
/// structured grids; the result is a quasi-uniform unstructured-looking
/// mesh. Boundary tags are kept.
pub fn perturb_interior(mesh: &TriMesh, amplitude: f64, seed: u64) -> Result<TriMesh, MeshError> {
    if !(0.0..0.5).contains(&amplitude) {
        return Err(MeshError::InvalidParameter(format!(
            "perturbation amplitude {amplitude} outside [0, 0.5)"
        )));
    }
    let mut on_boundary = vec![false; mesh.num_vertices()];
    let mut tags = HashMap::new();
    for (e, tag) in mesh.boundary_edges() {
        let [a, b] = mesh.edge(e);
        on_boundary[a] = true;
        on_boundary[b] = true;
        tags.insert([a, b], tag);
    }
    let radius = amplitude * mesh.h_min();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vertices = mesh
        .vertices()
        .iter()
        .zip(&on_boundary)
        .map(|(x, &fixed)| {
            let r = radius * rng.gen::<f64>().sqrt();
            let phi = std::f64::consts::TAU * rng.gen::<f64>();
            if fixed {
                *x
            } else {
                x + Point::new(r * phi.cos(), r * phi.sin())
            }
        })
        .collect();
    TriMesh::new(vertices, mesh.cells().to_vec(), |a, b| {
        tags.get(&[a, b]).copied()
    })
}

fn build_grid<K, F>(bounds: Rect, n: usize, keep: K, tagger: F) -> Result<TriMesh, MeshError>
where
    K: Fn(&Point) -> bool,
    F: Fn(&Point, &Point) -> BoundaryTag,
{
    let (nx, ny) = grid_counts(&bounds, n)?;
    let dx = (bounds.x1 - bounds.x0) / nx as f64;
    let dy = (bounds.y1 - bounds.y0) / ny as f64;
    let grid_index = |i: usize, j: usize| j * (nx + 1) + i;
    let coord = |i: usize, j: usize| {
        // hit the far sides exactly
        let x = if i == nx {
            bounds.x1
        } else {
            bounds.x0 + i as f64 * dx
        };
        let y = if j == ny {
            bounds.y1
        } else {
            bounds.y0 + j as f64 * dy
        };
        Point::new(x, y)
    };

    let mut raw_cells = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let centre = Point::new(
                bounds.x0 + (i as f64 + 0.5) * dx,
                bounds.y0 + (j as f64 + 0.5) * dy,
            );
            if !keep(&centre) {
                continue;
            }
            let v00 = grid_index(i, j);
            let v10 = grid_index(i + 1, j);
            let v01 = grid_index(i, j + 1);
            let v11 = grid_index(i + 1, j + 1);
            raw_cells.push([v00, v10, v11]);
            raw_cells.push([v00, v11, v01]);
        }
    }

    // drop grid points not used by any kept cell
    let mut new_index = vec![usize::MAX; (nx + 1) * (ny + 1)];
    for cell in &raw_cells {
        for &v in cell {
            new_index[v] = 0;
        }
    }
    let mut vertices = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            let g = grid_index(i, j);
            if new_index[g] == 0 {
                new_index[g] = vertices.len();
                vertices.push(coord(i, j));
            }
        }
    }
    let cells: Vec<[usize; 3]> = raw_cells
        .iter()
        .map(|c| [new_index[c[0]], new_index[c[1]], new_index[c[2]]])
        .collect();
    let verts = vertices.clone();
    TriMesh::new(vertices, cells, |a, b| Some(tagger(&verts[a], &verts[b])))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_h1() {
        let m = generate_rect_mesh(Rect::biunit(), 1).unwrap();
        assert_eq!((m.num_vertices(), m.num_cells(), m.num_edges()), (9, 8, 16));
    }

    #[test]
    fn counts_h8() {
        let m = generate_rect_mesh(Rect::biunit(), 8).unwrap();
        assert_eq!(
            (m.num_cells(), m.num_vertices(), m.num_edges()),
            (512, 289, 800)
        );
        let q = m.validate(0.2).unwrap();
        assert_eq!(q.euler, 1);
        // legs 1/8, hypotenuse sqrt(2)/8
        assert!((m.h_max() - 2f64.sqrt() / 8.0).abs() < 1e-14);
    }

    #[test]
    fn zero_subdivisions_rejected() {
        assert!(generate_rect_mesh(Rect::biunit(), 0).is_err());
    }

    #[test]
    fn every_interior_edge_has_two_cells() {
        let m = generate_rect_mesh(Rect::unit(), 5).unwrap();
        for e in 0..m.num_edges() {
            let [a, b] = m.edge_cells(e);
            assert!(a.is_some());
            assert_eq!(b.is_none(), m.boundary_tag(e).is_some());
        }
        for c in 0..m.num_cells() {
            assert!(m.cell_area(c) > 0.0);
        }
    }

    #[test]
    fn lshape() {
        let m = generate_lshape_mesh(4).unwrap();
        assert!((m.total_area() - 3.0).abs() < 1e-13);
        m.validate(0.2).unwrap();
        assert!(m
            .boundary_edges()
            .all(|(_, t)| t == BoundaryTag::DirichletP));
    }
}
