//! Lowest-order BDM element with edge-endpoint normal degrees of freedom.
//!
//! Local numbering: edge `i` is opposite vertex `i` and runs from vertex
//! `(i+1) % 3` to vertex `(i+2) % 3`. Local dof `k = 2i + j` is the normal
//! component on edge `i` at its endpoint `j`. Each shape function has the
//! form `λ_a w` with `a` the dof's vertex and `w` a constant vector, which
//! is what makes the vertex-rule mass matrix block-diagonal.

use nalgebra::Matrix2;

use crate::Point;

/// Local vertex carrying each local dof.
pub const DOF_VERTEX: [usize; 6] = [1, 2, 2, 0, 0, 1];

/// The two local dofs living at each local vertex.
pub const VERTEX_DOFS: [[usize; 2]; 3] = [[4, 3], [0, 5], [2, 1]];

pub const REF_VERTICES: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

pub fn ref_edge_length(i: usize) -> f64 {
    if i == 0 {
        std::f64::consts::SQRT_2
    } else {
        1.0
    }
}

/// Outward unit normal of reference edge `i`.
pub fn ref_normal(i: usize) -> Point {
    match i {
        0 => Point::new(1.0, 1.0) / std::f64::consts::SQRT_2,
        1 => Point::new(-1.0, 0.0),
        _ => Point::new(0.0, -1.0),
    }
}

/// Solves `n_i · w = 1`, `n_o · w = 0`.
fn dual_vector(n_i: Point, n_o: Point) -> Point {
    let m = Matrix2::new(n_i.x, n_i.y, n_o.x, n_o.y);
    let inv = m
        .try_inverse()
        .expect("edges at a vertex are never parallel");
    inv * Point::new(1.0, 0.0)
}

/// Constant vector `ŵ_k` of reference shape function `k = λ̂_a ŵ_k`.
pub fn ref_direction(k: usize) -> Point {
    let i = k / 2;
    let a = DOF_VERTEX[k];
    let other = 3 - a - i;
    dual_vector(ref_normal(i), ref_normal(other))
}

/// Reference barycentric coordinates at `x̂`.
pub fn ref_barycentric(x: &Point) -> [f64; 3] {
    [1.0 - x.x - x.y, x.x, x.y]
}

/// Reference shape function `k` at `x̂`.
pub fn ref_shape(k: usize, x: &Point) -> Point {
    ref_barycentric(x)[DOF_VERTEX[k]] * ref_direction(k)
}

pub fn ref_div(k: usize) -> f64 {
    const GRAD: [[f64; 2]; 3] = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
    let g = GRAD[DOF_VERTEX[k]];
    let w = ref_direction(k);
    g[0] * w.x + g[1] * w.y
}

/// DOF functional `k` applied to a reference vector field.
pub fn ref_functional(k: usize, v: impl Fn(&Point) -> Point) -> f64 {
    let a = REF_VERTICES[DOF_VERTEX[k]];
    v(&Point::new(a[0], a[1])).dot(&ref_normal(k / 2))
}

/// Affine map `x = x0 + J x̂` of the reference triangle onto a cell.
#[derive(Clone, Copy, Debug)]
pub struct AffineMap {
    pub origin: Point,
    pub jacobian: Matrix2<f64>,
    pub det: f64,
}

impl AffineMap {
    pub fn new(points: &[Point; 3]) -> Self {
        let e1 = points[1] - points[0];
        let e2 = points[2] - points[0];
        let jacobian = Matrix2::new(e1.x, e2.x, e1.y, e2.y);
        Self {
            origin: points[0],
            jacobian,
            det: jacobian.determinant(),
        }
    }

    pub fn apply(&self, xh: &Point) -> Point {
        self.origin + self.jacobian * xh
    }

    pub fn inverse(&self, x: &Point) -> Option<Point> {
        self.jacobian
            .try_inverse()
            .map(|inv| inv * (x - self.origin))
    }
}

/// Contravariant Piola transform `v = J v̂ / det J` of a reference vector.
pub fn piola_map(map: &AffineMap, v_ref: &Point) -> Point {
    map.jacobian * v_ref / map.det
}

/// Physical shape functions of one cell: `φ_k = λ_{a(k)} w[k]`.
#[derive(Clone, Debug)]
pub struct Bdm1Element {
    pub area: f64,
    pub grad_lambda: [Point; 3],
    pub w: [Point; 6],
    pub div: [f64; 6],
}

impl Bdm1Element {
    /// `signs[i]` is +1 when the global normal of local edge `i` points out
    /// of the cell; `lengths[i]` is the length of local edge `i`.
    pub fn new(points: &[Point; 3], signs: &[f64; 3], lengths: &[f64; 3]) -> Self {
        let map = AffineMap::new(points);
        let area = map.det / 2.0;
        let mut grad_lambda = [Point::zeros(); 3];
        for (i, g) in grad_lambda.iter_mut().enumerate() {
            let (p, q) = (points[(i + 1) % 3], points[(i + 2) % 3]);
            // ∇λ_i is the inward normal of the opposite edge over the height
            let t = q - p;
            *g = Point::new(-t.y, t.x) / map.det;
        }
        let mut w = [Point::zeros(); 6];
        let mut div = [0.0; 6];
        for k in 0..6 {
            let i = k / 2;
            let scale = signs[i] * lengths[i] / ref_edge_length(i);
            w[k] = scale * piola_map(&map, &ref_direction(k));
            div[k] = grad_lambda[DOF_VERTEX[k]].dot(&w[k]);
        }
        Self {
            area,
            grad_lambda,
            w,
            div,
        }
    }

    pub fn shape(&self, k: usize, bary: &[f64; 3]) -> Point {
        bary[DOF_VERTEX[k]] * self.w[k]
    }

    /// Field value from local coefficients at barycentric point `bary`.
    pub fn eval(&self, coeffs: &[f64; 6], bary: &[f64; 3]) -> Point {
        (0..6).map(|k| coeffs[k] * self.shape(k, bary)).sum()
    }

    /// Values at the three vertices.
    pub fn vertex_values(&self, coeffs: &[f64; 6]) -> [Point; 3] {
        let mut out = [Point::zeros(); 3];
        for (a, dofs) in VERTEX_DOFS.iter().enumerate() {
            out[a] = coeffs[dofs[0]] * self.w[dofs[0]] + coeffs[dofs[1]] * self.w[dofs[1]];
        }
        out
    }

    /// Constant divergence from local coefficients.
    pub fn divergence(&self, coeffs: &[f64; 6]) -> f64 {
        (0..6).map(|k| coeffs[k] * self.div[k]).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EDGE_ENDPOINTS: [[usize; 2]; 3] = [[1, 2], [2, 0], [0, 1]];

    #[test]
    fn dof_tables_consistent() {
        for k in 0..6 {
            let (i, j) = (k / 2, k % 2);
            assert_eq!(DOF_VERTEX[k], EDGE_ENDPOINTS[i][j]);
        }
        for (a, dofs) in VERTEX_DOFS.iter().enumerate() {
            assert_eq!(DOF_VERTEX[dofs[0]], a);
            assert_eq!(DOF_VERTEX[dofs[1]], a);
        }
    }

    #[test]
    fn duality() {
        for i in 0..6 {
            for j in 0..6 {
                let v = ref_functional(i, |x| ref_shape(j, x));
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (v - expected).abs() < 1e-13,
                    "functional {i} on shape {j} = {v}"
                );
            }
        }
    }

    #[test]
    fn constants_in_span() {
        for c in [
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(-0.3, 2.0),
        ] {
            let coeffs: Vec<f64> = (0..6).map(|k| ref_functional(k, |_| c)).collect();
            for x in [
                Point::new(0.2, 0.3),
                Point::new(0.0, 1.0),
                Point::new(0.5, 0.0),
            ] {
                let v: Point = (0..6).map(|k| coeffs[k] * ref_shape(k, &x)).sum();
                assert!((v - c).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn divergence_constant_matches_finite_difference() {
        let h = 1e-6;
        for k in 0..6 {
            for x in [Point::new(0.2, 0.2), Point::new(0.6, 0.1)] {
                let dx = (ref_shape(k, &(x + Point::new(h, 0.0)))
                    - ref_shape(k, &(x - Point::new(h, 0.0))))
                .x;
                let dy = (ref_shape(k, &(x + Point::new(0.0, h)))
                    - ref_shape(k, &(x - Point::new(0.0, h))))
                .y;
                assert!(((dx + dy) / (2.0 * h) - ref_div(k)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn identity_piola() {
        let map = AffineMap::new(&[
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ]);
        let v = Point::new(0.3, -0.7);
        assert_eq!(piola_map(&map, &v), v);
    }

    #[test]
    fn scaled_cell_halves_divergence() {
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(0.0, 2.0),
        ];
        let map = AffineMap::new(&pts);
        // plain Piola: div v = div v̂ / det J; the element basis carries the
        // extra edge-length factor 2, so its divergence is div v̂ / 2
        let el = Bdm1Element::new(&pts, &[1.0; 3], &[2.0 * 2f64.sqrt(), 2.0, 2.0]);
        for k in 0..6 {
            let v = |x: &Point| piola_map(&map, &ref_shape(k, &map.inverse(x).unwrap()));
            let h = 1e-6;
            let x = Point::new(0.5, 0.4);
            let d = (v(&(x + Point::new(h, 0.0))).x - v(&(x - Point::new(h, 0.0))).x
                + v(&(x + Point::new(0.0, h))).y
                - v(&(x - Point::new(0.0, h))).y)
                / (2.0 * h);
            assert!((d - ref_div(k) / 4.0).abs() < 1e-8);
            assert!((el.div[k] - ref_div(k) / 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn flux_preserved_by_piola() {
        let pts = [
            Point::new(0.3, -0.2),
            Point::new(1.4, 0.1),
            Point::new(0.5, 0.9),
        ];
        let map = AffineMap::new(&pts);
        let vh = |x: &Point| Point::new(1.0 + x.x, 2.0 * x.y - 0.5);
        for i in 0..3 {
            let [a, b] = EDGE_ENDPOINTS[i];
            let ra = Point::new(REF_VERTICES[a][0], REF_VERTICES[a][1]);
            let rb = Point::new(REF_VERTICES[b][0], REF_VERTICES[b][1]);
            let (pa, pb) = (pts[a], pts[b]);
            let t = pb - pa;
            // outward normal for a counterclockwise cell
            let n = Point::new(t.y, -t.x) / t.norm();
            let mut phys = 0.0;
            let mut reference = 0.0;
            for (s, w) in crate::fem::gauss_legendre4() {
                let xr = ra + s * (rb - ra);
                phys += w * t.norm() * piola_map(&map, &vh(&xr)).dot(&n);
                reference += w * ref_edge_length(i) * vh(&xr).dot(&ref_normal(i));
            }
            assert!((phys - reference).abs() < 1e-13);
        }
    }

    /// Direct construction `λ_a w` with `w · n_e = 1`, `w · n_e' = 0` in
    /// physical normals.
    #[test]
    fn element_matches_direct_formula() {
        let pts = [
            Point::new(0.1, 0.0),
            Point::new(1.0, 0.3),
            Point::new(0.4, 1.1),
        ];
        let signs = [1.0, -1.0, 1.0];
        let len = |i: usize| (pts[EDGE_ENDPOINTS[i][1]] - pts[EDGE_ENDPOINTS[i][0]]).norm();
        let el = Bdm1Element::new(&pts, &signs, &[len(0), len(1), len(2)]);
        let normal = |i: usize| {
            let t = pts[EDGE_ENDPOINTS[i][1]] - pts[EDGE_ENDPOINTS[i][0]];
            signs[i] * Point::new(t.y, -t.x) / t.norm()
        };
        for k in 0..6 {
            let i = k / 2;
            let a = DOF_VERTEX[k];
            let o = 3 - a - i;
            let w = dual_vector(normal(i), normal(o));
            assert!((w - el.w[k]).norm() < 1e-13, "dof {k}");
        }
        assert!((el.area - 0.5 * ((pts[1] - pts[0]).perp(&(pts[2] - pts[0])))).abs() < 1e-15);
    }
}
