use std::f64::consts::PI;

use mixwave::analysis::{run_level, InitialVelocity, LevelRun};
use mixwave::mesh::{read_mesh, write_mesh, BoundaryTag};
use mixwave::scenarios::{
    plane_wave_scenario, scattering_hierarchy, scattering_scenario, SCATTERER_CENTRE,
    SCATTERER_RADIUS, SCATTERING_COARSE_MESH,
};
use mixwave::Point;

#[test]
fn scattering_hierarchy_follows_the_circle() {
    let levels = scattering_hierarchy(5).unwrap();
    assert_eq!(levels.len(), 3);
    // Ω is the square minus a half disk; the polygonal area error is O(h²)
    let exact = 4.0 - PI * SCATTERER_RADIUS * SCATTERER_RADIUS / 2.0;
    let mut prev_err = f64::INFINITY;
    for (i, (mesh, map)) in levels.iter().enumerate() {
        assert_eq!(map.is_some(), i > 0);
        mesh.validate(0.0).unwrap();
        for (e, tag) in mesh.boundary_edges() {
            if tag == BoundaryTag::Scatterer {
                for v in mesh.edge(e) {
                    let r = (mesh.vertex(v) - SCATTERER_CENTRE).norm();
                    assert!((r - SCATTERER_RADIUS).abs() < 1e-14);
                }
            }
        }
        let err = (mesh.total_area() - exact).abs();
        assert!(
            err > 0.0 && err < prev_err / 3.5,
            "level {i}: {err} after {prev_err}"
        );
        prev_err = err;
    }
}

#[test]
fn shipped_mesh_survives_a_write_read_cycle() {
    let mesh = read_mesh(SCATTERING_COARSE_MESH.as_bytes()).unwrap();
    let mut buf = Vec::new();
    write_mesh(&mesh, &mut buf).unwrap();
    let back = read_mesh(buf.as_slice()).unwrap();
    assert_eq!(back.cells(), mesh.cells());
    assert_eq!(back.vertices(), mesh.vertices());
    let tags = |m: &mixwave::mesh::TriMesh| m.boundary_edges().map(|(_, t)| t).collect::<Vec<_>>();
    assert_eq!(tags(&back), tags(&mesh));
}

/// Central differences of the exact plane wave satisfy both equations.
#[test]
fn plane_wave_solves_the_system() {
    let w = plane_wave_scenario().wave.unwrap();
    let d = 1e-5;
    for &(x, y, t) in &[(0.1, -0.3, 4.2), (-0.9, 0.7, 3.9), (0.5, 0.5, 4.8)] {
        let x0 = Point::new(x, y);
        let dx = Point::new(d, 0.0);
        let dy = Point::new(0.0, d);
        let p_t = (w.pressure(&x0, t + d) - w.pressure(&x0, t - d)) / (2.0 * d);
        let div = (w.velocity(&(x0 + dx), t).x - w.velocity(&(x0 - dx), t).x
            + w.velocity(&(x0 + dy), t).y
            - w.velocity(&(x0 - dy), t).y)
            / (2.0 * d);
        assert!((p_t + div).abs() < 1e-6);
        let u_t = (w.velocity(&x0, t + d) - w.velocity(&x0, t - d)) / (2.0 * d);
        let grad = Point::new(
            w.pressure(&(x0 + dx), t) - w.pressure(&(x0 - dx), t),
            w.pressure(&(x0 + dy), t) - w.pressure(&(x0 - dy), t),
        ) / (2.0 * d);
        assert!((u_t + grad).norm() < 1e-6);
    }
}

/// The incident pulse enters the scattering domain only from the left:
/// after a short time the pressure is still zero on the right half.
#[test]
fn scattering_wave_enters_from_the_left() {
    let mut sc = scattering_scenario();
    sc.final_time = 1.8;
    let mesh = sc.mesh(3).unwrap();
    let lr = LevelRun::new(&sc, mesh, 3, sc.tau(3), false).unwrap();
    let (u0, p0) = lr.initial_data(&sc, InitialVelocity::Projection).unwrap();
    let mut last = Vec::new();
    run_level(&sc, &lr, &u0, &p0, &[lr.steps], false, |s| {
        last = s.p.to_vec();
        Ok(())
    })
    .unwrap();
    let m = lr.space.mesh();
    let (mut left, mut right) = (0.0f64, 0.0f64);
    for c in 0..m.num_cells() {
        if m.cell_centroid(c).x < -0.5 {
            left = left.max(last[c].abs());
        } else if m.cell_centroid(c).x > 0.0 {
            right = right.max(last[c].abs());
        }
    }
    assert!(left > 0.05, "{left}");
    assert!(right < 1e-3 * left, "{right} vs {left}");
}
