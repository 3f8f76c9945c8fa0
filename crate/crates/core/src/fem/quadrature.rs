/// Triangle quadrature in barycentric coordinates; weights sum to the
/// reference area 1/2.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    /// highest total degree integrated exactly
    pub degree: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadKind {
    /// the three vertices — the mass-lumping rule
    Vertex,
    /// the three edge midpoints
    EdgeMidpoint,
    /// symmetric 12-point rule of degree 6, used for error integrals
    HighOrder,
}

pub fn quad_rule(kind: QuadKind) -> QuadRule {
    match kind {
        QuadKind::Vertex => QuadRule {
            points: vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            weights: vec![1.0 / 6.0; 3],
            degree: 1,
        },
        QuadKind::EdgeMidpoint => QuadRule {
            points: vec![[0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]],
            weights: vec![1.0 / 6.0; 3],
            degree: 2,
        },
        QuadKind::HighOrder => dunavant6(),
    }
}

fn dunavant6() -> QuadRule {
    let mut points = Vec::with_capacity(12);
    let mut weights = Vec::with_capacity(12);
    for (w, a, b) in [
        (0.116786275726379, 0.501426509658179, 0.249286745170910),
        (0.050844906370207, 0.873821971016996, 0.063089014491502),
    ] {
        for p in [[a, b, b], [b, a, b], [b, b, a]] {
            points.push(p);
            weights.push(w / 2.0);
        }
    }
    let (w, a, b, c) = (
        0.082851075618374,
        0.053145049844817,
        0.310352451033784,
        0.636502499121399,
    );
    for p in [
        [a, b, c],
        [a, c, b],
        [b, a, c],
        [b, c, a],
        [c, a, b],
        [c, b, a],
    ] {
        points.push(p);
        weights.push(w / 2.0);
    }
    // the tabulated weights carry 15 digits; renormalize so constants are
    // integrated to the last bit
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w *= 0.5 / total);
    QuadRule {
        points,
        weights,
        degree: 6,
    }
}

/// 4-point Gauss–Legendre rule on [0, 1] as `(s, weight)`; degree 7.
pub fn gauss_legendre4() -> [(f64, f64); 4] {
    const X: [f64; 2] = [0.3399810435848563, 0.8611363115940526];
    const W: [f64; 2] = [0.6521451548625461, 0.3478548451374538];
    [
        ((1.0 - X[1]) / 2.0, W[1] / 2.0),
        ((1.0 - X[0]) / 2.0, W[0] / 2.0),
        ((1.0 + X[0]) / 2.0, W[0] / 2.0),
        ((1.0 + X[1]) / 2.0, W[1] / 2.0),
    ]
}
