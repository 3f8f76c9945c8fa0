//! Legacy ASCII VTK (version 3.0) unstructured grids.
//!
//! Every cell gets its own three points, so discontinuous per-cell linear
//! fields are written without averaging. Piecewise constants go to
//! `CELL_DATA`, everything else to `POINT_DATA`.

use std::io::{self, Write};

use crate::fem::P1Field;
use crate::mesh::TriMesh;
use crate::Point;

pub enum VtkField<'a> {
    /// one value per cell
    Cell(&'a str, &'a [f64]),
    /// per-cell linear scalar
    Linear(&'a str, &'a P1Field),
    /// per-cell linear vector, given by its corner values
    Vector(&'a str, &'a [[Point; 3]]),
}

pub fn write_vtk<W: Write>(
    out: &mut W,
    mesh: &TriMesh,
    title: &str,
    fields: &[VtkField<'_>],
) -> io::Result<()> {
    let nc = mesh.num_cells();
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "{}", title.lines().next().unwrap_or(""))?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {} double", 3 * nc)?;
    for c in 0..nc {
        for p in mesh.cell_points(c) {
            writeln!(out, "{:e} {:e} 0", p.x, p.y)?;
        }
    }
    writeln!(out, "CELLS {nc} {}", 4 * nc)?;
    for c in 0..nc {
        writeln!(out, "3 {} {} {}", 3 * c, 3 * c + 1, 3 * c + 2)?;
    }
    writeln!(out, "CELL_TYPES {nc}")?;
    for _ in 0..nc {
        writeln!(out, "5")?;
    }

    let cell: Vec<_> = fields
        .iter()
        .filter(|f| matches!(f, VtkField::Cell(..)))
        .collect();
    if !cell.is_empty() {
        writeln!(out, "CELL_DATA {nc}")?;
        for f in cell {
            if let VtkField::Cell(name, v) = f {
                writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default")?;
                for x in v.iter() {
                    writeln!(out, "{x:e}")?;
                }
            }
        }
    }
    let point: Vec<_> = fields
        .iter()
        .filter(|f| !matches!(f, VtkField::Cell(..)))
        .collect();
    if !point.is_empty() {
        writeln!(out, "POINT_DATA {}", 3 * nc)?;
        for f in point {
            match f {
                VtkField::Linear(name, p) => {
                    writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default")?;
                    for v in p.values.iter().flatten() {
                        writeln!(out, "{v:e}")?;
                    }
                }
                VtkField::Vector(name, u) => {
                    writeln!(out, "VECTORS {name} double")?;
                    for v in u.iter().flatten() {
                        writeln!(out, "{:e} {:e} 0", v.x, v.y)?;
                    }
                    for (k, comp) in ["x", "y"].iter().enumerate() {
                        writeln!(out, "SCALARS {name}_{comp} double 1\nLOOKUP_TABLE default")?;
                        for v in u.iter().flatten() {
                            writeln!(out, "{:e}", v[k])?;
                        }
                    }
                }
                VtkField::Cell(..) => unreachable!(),
            }
        }
    }
    Ok(())
}
