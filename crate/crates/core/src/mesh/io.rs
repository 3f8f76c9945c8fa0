//! The `trimesh 1` text format:
//!
//! ```text
//! trimesh 1
//! vertices N
//! x y            (N lines)
//! cells M
//! i j k          (M lines, 0-based, counterclockwise)
//! boundary B
//! i j TAG        (B lines, TAG in dirichlet_p | neumann_u | scatterer)
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use super::{BoundaryTag, MeshError, TriMesh};
use crate::Point;

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_content(&mut self) -> Result<(usize, String), MeshError> {
        loop {
            self.line += 1;
            match self.inner.next() {
                None => {
                    return Err(MeshError::Parse {
                        line: self.line,
                        msg: "unexpected end of file".into(),
                    })
                }
                Some(Err(e)) => {
                    return Err(MeshError::Parse {
                        line: self.line,
                        msg: e.to_string(),
                    })
                }
                Some(Ok(s)) => {
                    let t = s.trim();
                    if !t.is_empty() && !t.starts_with('#') {
                        return Ok((self.line, t.to_string()));
                    }
                }
            }
        }
    }

    fn header(&mut self, keyword: &str) -> Result<usize, MeshError> {
        let (line, s) = self.next_content()?;
        let mut it = s.split_whitespace();
        match (it.next(), it.next(), it.next()) {
            (Some(k), Some(n), None) if k == keyword => n.parse().map_err(|_| MeshError::Parse {
                line,
                msg: format!("bad count '{n}'"),
            }),
            _ => Err(MeshError::Parse {
                line,
                msg: format!("expected '{keyword} <count>', found '{s}'"),
            }),
        }
    }
}

fn parse_fields<T: std::str::FromStr, const N: usize>(
    line: usize,
    s: &str,
) -> Result<[T; N], MeshError> {
    let parts: Vec<&str> = s.split_whitespace().collect();
    if parts.len() != N {
        return Err(MeshError::Parse {
            line,
            msg: format!("expected {N} fields, found {}", parts.len()),
        });
    }
    let mut out = Vec::with_capacity(N);
    for p in parts {
        out.push(p.parse::<T>().map_err(|_| MeshError::Parse {
            line,
            msg: format!("cannot parse '{p}'"),
        })?);
    }
    out.try_into().map_err(|_| MeshError::Parse {
        line,
        msg: "field count".into(),
    })
}

/// Reads and validates a mesh in the `trimesh 1` format.
pub fn read_mesh<R: BufRead>(source: R) -> Result<TriMesh, MeshError> {
    let mut lines = Lines {
        inner: source.lines(),
        line: 0,
    };
    let (line, head) = lines.next_content()?;
    if head.split_whitespace().collect::<Vec<_>>() != ["trimesh", "1"] {
        return Err(MeshError::Parse {
            line,
            msg: format!("expected header 'trimesh 1', found '{head}'"),
        });
    }

    let nv = lines.header("vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, s) = lines.next_content()?;
        let [x, y] = parse_fields::<f64, 2>(line, &s)?;
        if !(x.is_finite() && y.is_finite()) {
            return Err(MeshError::Parse {
                line,
                msg: "non-finite coordinate".into(),
            });
        }
        vertices.push(Point::new(x, y));
    }

    let nc = lines.header("cells")?;
    let mut cells = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (line, s) = lines.next_content()?;
        cells.push(parse_fields::<usize, 3>(line, &s)?);
    }

    let nb = lines.header("boundary")?;
    let mut tags: HashMap<[usize; 2], BoundaryTag> = HashMap::with_capacity(nb);
    for _ in 0..nb {
        let (line, s) = lines.next_content()?;
        let parts: Vec<&str> = s.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(MeshError::Parse {
                line,
                msg: format!("expected 'i j TAG', found '{s}'"),
            });
        }
        let parse = |p: &str| {
            p.parse::<usize>().map_err(|_| MeshError::Parse {
                line,
                msg: format!("cannot parse '{p}'"),
            })
        };
        let (a, b) = (parse(parts[0])?, parse(parts[1])?);
        let tag: BoundaryTag = parts[2]
            .parse()
            .map_err(|msg| MeshError::Parse { line, msg })?;
        if tags.insert([a.min(b), a.max(b)], tag).is_some() {
            return Err(MeshError::Parse {
                line,
                msg: format!("edge ({a}, {b}) tagged twice"),
            });
        }
    }

    let mut used = 0usize;
    let mesh = TriMesh::new(vertices, cells, |a, b| {
        let t = tags.get(&[a, b]).copied();
        used += t.is_some() as usize;
        t
    })?;
    if used != tags.len() {
        // some tagged pair is interior or not an edge at all
        for &[a, b] in tags.keys() {
            let e = mesh.edges().iter().position(|&e| e == [a, b]);
            if e.is_none_or(|e| !mesh.is_boundary_edge(e)) {
                return Err(MeshError::TagOnInterior { a, b });
            }
        }
    }
    Ok(mesh)
}

pub fn write_mesh<W: Write>(mesh: &TriMesh, mut out: W) -> std::io::Result<()> {
    writeln!(out, "trimesh 1")?;
    writeln!(out, "vertices {}", mesh.num_vertices())?;
    for p in mesh.vertices() {
        writeln!(out, "{:e} {:e}", p.x, p.y)?;
    }
    writeln!(out, "cells {}", mesh.num_cells())?;
    for c in mesh.cells() {
        writeln!(out, "{} {} {}", c[0], c[1], c[2])?;
    }
    let boundary: Vec<_> = mesh.boundary_edges().collect();
    writeln!(out, "boundary {}", boundary.len())?;
    for (e, tag) in boundary {
        let [a, b] = mesh.edge(e);
        writeln!(out, "{a} {b} {tag}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRIANGLE: &str = "trimesh 1\nvertices 3\n0 0\n1 0\n0 1\ncells 1\n0 1 2\nboundary 3\n0 1 neumann_u\n1 2 dirichlet_p\n0 2 scatterer\n";

    #[test]
    fn single_triangle() {
        let m = read_mesh(TRIANGLE.as_bytes()).unwrap();
        assert_eq!(m.num_cells(), 1);
        assert_eq!(m.boundary_edges().count(), 3);
        let tag_of = |a, b| {
            let e = m.edges().iter().position(|&e| e == [a, b]).unwrap();
            m.boundary_tag(e).unwrap()
        };
        assert_eq!(tag_of(0, 1), BoundaryTag::NeumannU);
        assert_eq!(tag_of(1, 2), BoundaryTag::DirichletP);
        assert_eq!(tag_of(0, 2), BoundaryTag::Scatterer);
    }

    #[test]
    fn duplicated_cell() {
        let src = "trimesh 1\nvertices 3\n0 0\n1 0\n0 1\ncells 2\n0 1 2\n1 2 0\nboundary 0\n";
        assert!(matches!(
            read_mesh(src.as_bytes()),
            Err(MeshError::DuplicateCell { .. })
        ));
    }

    #[test]
    fn zero_area_cell() {
        let src = "trimesh 1\nvertices 3\n0 0\n1 0\n2 0\ncells 1\n0 1 2\nboundary 3\n0 1 dirichlet_p\n1 2 dirichlet_p\n0 2 dirichlet_p\n";
        assert!(matches!(
            read_mesh(src.as_bytes()),
            Err(MeshError::DegenerateCell { .. })
        ));
    }

    #[test]
    fn malformed_inputs() {
        for bad in [
            "trimesh 2\n",
            "trimesh 1\nvertices 1\n0\n",
            "trimesh 1\nvertices 3\n0 0\n1 0\n0 1\ncells 1\n0 1 7\nboundary 0\n",
            "trimesh 1\nvertices 3\n0 0\n1 0\n0 1\ncells 1\n0 1 2\nboundary 3\n0 1 wall\n1 2 dirichlet_p\n0 2 dirichlet_p\n",
            "trimesh 1\nvertices 3\n0 0\n1 0\n0 1\ncells 1\n0 1 2\nboundary 2\n0 1 neumann_u\n1 2 dirichlet_p\n",
        ] {
            assert!(read_mesh(bad.as_bytes()).is_err(), "accepted: {bad:?}");
        }
    }

    #[test]
    fn parse_error_reports_line() {
        let src = "trimesh 1\nvertices 2\n0 0\n1 x\n";
        match read_mesh(src.as_bytes()) {
            Err(MeshError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn interior_tag_rejected() {
        let src = "trimesh 1\nvertices 4\n0 0\n1 0\n1 1\n0 1\ncells 2\n0 1 2\n0 2 3\nboundary 5\n0 1 dirichlet_p\n1 2 dirichlet_p\n2 3 dirichlet_p\n0 3 dirichlet_p\n0 2 dirichlet_p\n";
        assert!(matches!(
            read_mesh(src.as_bytes()),
            Err(MeshError::TagOnInterior { .. })
        ));
    }

    #[test]
    fn write_read_roundtrip() {
        let m = read_mesh(TRIANGLE.as_bytes()).unwrap();
        let mut buf = Vec::new();
        write_mesh(&m, &mut buf).unwrap();
        let m2 = read_mesh(buf.as_slice()).unwrap();
        assert_eq!(m.cells(), m2.cells());
        assert_eq!(
            m.boundary_edges().collect::<Vec<_>>(),
            m2.boundary_edges().collect::<Vec<_>>()
        );
    }
}
