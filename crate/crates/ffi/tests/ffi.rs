use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use mixwave_ffi::*;

fn last_error() -> String {
    let n = unsafe { mw_last_error_message(ptr::null_mut(), 0) };
    let mut buf = vec![0 as std::ffi::c_char; n];
    unsafe { mw_last_error_message(buf.as_mut_ptr(), n) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(mw_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn rect_mesh_roundtrip_through_file() {
    let mut mesh = ptr::null_mut();
    assert_eq!(
        unsafe { mw_mesh_new_rect(0.0, 1.0, 0.0, 1.0, 2, &mut mesh) },
        MwStatus::Ok
    );
    let (nv, nc) = unsafe { (mw_mesh_num_vertices(mesh), mw_mesh_num_cells(mesh)) };
    assert_eq!((nv, nc), (9, 8));

    let mut xy = vec![0.0; 2 * nv];
    assert_eq!(
        unsafe { mw_mesh_vertices(mesh, xy.as_mut_ptr(), xy.len()) },
        MwStatus::Ok
    );
    assert!(xy.iter().all(|c| (0.0..=1.0).contains(c)));
    let mut cells = vec![0u64; 3 * nc];
    assert_eq!(
        unsafe { mw_mesh_cells(mesh, cells.as_mut_ptr(), cells.len()) },
        MwStatus::Ok
    );
    // counterclockwise orientation ⇒ positive signed areas
    for t in cells.chunks(3) {
        let p = |i: u64| (xy[2 * i as usize], xy[2 * i as usize + 1]);
        let (a, b, c) = (p(t[0]), p(t[1]), p(t[2]));
        assert!((b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0) > 0.0);
    }

    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("m.mesh").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { mw_mesh_write(mesh, path.as_ptr()) }, MwStatus::Ok);
    let mut back = ptr::null_mut();
    assert_eq!(
        unsafe { mw_mesh_read(path.as_ptr(), &mut back) },
        MwStatus::Ok
    );
    assert_eq!(unsafe { mw_mesh_num_cells(back) }, nc);
    unsafe {
        mw_mesh_free(back);
        mw_mesh_free(mesh);
    }
}

#[test]
fn errors_carry_status_and_message() {
    let mut mesh = ptr::null_mut();
    assert_eq!(
        unsafe { mw_mesh_new_rect(0.0, 1.0, 0.0, 1.0, 0, &mut mesh) },
        MwStatus::MeshError
    );
    assert!(mesh.is_null());
    assert!(last_error().contains("subdivisions"), "{}", last_error());

    assert_eq!(
        unsafe { mw_mesh_new_rect(0.0, 1.0, 0.0, 1.0, 1, ptr::null_mut()) },
        MwStatus::NullPointer
    );
    assert_eq!(
        unsafe { mw_mesh_vertices(ptr::null(), ptr::null_mut(), 0) },
        MwStatus::NullPointer
    );
    assert_eq!(unsafe { mw_mesh_num_cells(ptr::null()) }, 0);

    let missing = CString::new("/nonexistent/dir/x.mesh").unwrap();
    assert_eq!(
        unsafe { mw_mesh_read(missing.as_ptr(), &mut mesh) },
        MwStatus::IoError
    );

    assert_eq!(
        unsafe { mw_mesh_new_rect(0.0, 1.0, 0.0, 1.0, 1, &mut mesh) },
        MwStatus::Ok
    );
    let mut small = [0.0; 3];
    assert_eq!(
        unsafe { mw_mesh_vertices(mesh, small.as_mut_ptr(), small.len()) },
        MwStatus::BufferTooSmall
    );
    assert!(last_error().contains("8 needed"));
    // success clears the message
    assert_eq!(unsafe { mw_mesh_num_vertices(mesh) }, 4);
    let mut xy = [0.0; 8];
    assert_eq!(
        unsafe { mw_mesh_vertices(mesh, xy.as_mut_ptr(), 8) },
        MwStatus::Ok
    );
    assert_eq!(last_error(), "");
    unsafe { mw_mesh_free(mesh) };

    // truncation keeps the terminator
    let mut sim = ptr::null_mut();
    let st = unsafe { mw_simulation_new(MwScenario::Cavity, 2, 10.0, 0, &mut sim) };
    assert_eq!(st, MwStatus::CflViolation);
    let mut buf = [1 as std::ffi::c_char; 5];
    let needed = unsafe { mw_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(needed > 5);
    assert_eq!(buf[4], 0);
}

#[test]
fn cavity_conserves_energy() {
    let mut sim = ptr::null_mut();
    assert_eq!(
        unsafe { mw_simulation_new(MwScenario::Cavity, 2, 0.0, 0, &mut sim) },
        MwStatus::Ok
    );
    let mut info = MwSimulationInfo::default();
    assert_eq!(unsafe { mw_simulation_info(sim, &mut info) }, MwStatus::Ok);
    let e0 = info.energy;
    assert!(e0 > 0.0 && info.tau <= info.tau_max);
    assert_eq!(unsafe { mw_simulation_step(sim, 50) }, MwStatus::Ok);
    assert_eq!(unsafe { mw_simulation_info(sim, &mut info) }, MwStatus::Ok);
    assert_eq!(info.step, 50);
    assert!((info.time - 50.0 * info.tau).abs() < 1e-12);
    assert!(((info.energy - e0) / e0).abs() < 1e-12);
    unsafe { mw_simulation_free(sim) };
}

#[test]
fn plane_wave_fields_have_documented_layout() {
    let mut sim = ptr::null_mut();
    assert_eq!(
        unsafe { mw_simulation_new(MwScenario::PlaneWave, 2, 0.0, 0, &mut sim) },
        MwStatus::Ok
    );
    // pulse centre reaches the domain around t = 3.7
    assert_eq!(unsafe { mw_simulation_step(sim, 64) }, MwStatus::Ok);
    let mut info = MwSimulationInfo::default();
    unsafe { mw_simulation_info(sim, &mut info) };
    assert!((info.time - 4.0).abs() < 1e-12);
    let nc = info.num_cells as usize;

    let mut p = vec![0.0; nc];
    let mut pp = vec![0.0; 3 * nc];
    let mut u = vec![0.0; 6 * nc];
    let mut ut = vec![0.0; 6 * nc];
    unsafe {
        assert_eq!(
            mw_simulation_pressure(sim, p.as_mut_ptr(), nc),
            MwStatus::Ok
        );
        assert_eq!(
            mw_simulation_pp_pressure(sim, pp.as_mut_ptr(), pp.len()),
            MwStatus::Ok
        );
        assert_eq!(
            mw_simulation_velocity(sim, u.as_mut_ptr(), u.len()),
            MwStatus::Ok
        );
        assert_eq!(
            mw_simulation_pp_velocity(sim, ut.as_mut_ptr(), ut.len()),
            MwStatus::Ok
        );
    }
    // post-processing keeps the cell means of the pressure
    for c in 0..nc {
        let mean = (pp[3 * c] + pp[3 * c + 1] + pp[3 * c + 2]) / 3.0;
        assert!((mean - p[c]).abs() < 1e-12);
    }
    assert!(p.iter().any(|v| v.abs() > 0.1));
    assert!(u.iter().zip(&ut).any(|(a, b)| a != b));

    let mut mesh = ptr::null_mut();
    assert_eq!(unsafe { mw_simulation_mesh(sim, &mut mesh) }, MwStatus::Ok);
    assert_eq!(unsafe { mw_mesh_num_cells(mesh) }, nc);
    unsafe {
        mw_mesh_free(mesh);
        mw_simulation_free(sim);
    }
}

#[test]
fn simulation_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "[scenario]\nname = scattering\n[output]\nlevel = 3\n").unwrap();
    let path = CString::new(cfg.to_str().unwrap()).unwrap();
    let mut sim = ptr::null_mut();
    assert_eq!(
        unsafe { mw_simulation_from_config(path.as_ptr(), 0, &mut sim) },
        MwStatus::Ok
    );
    let mut info = MwSimulationInfo::default();
    unsafe { mw_simulation_info(sim, &mut info) };
    assert_eq!(info.tau, 1e-3);
    assert_eq!(info.num_cells, 541);
    unsafe { mw_simulation_free(sim) };

    std::fs::write(&cfg, "[scenario]\nname = moon\n").unwrap();
    assert_eq!(
        unsafe { mw_simulation_from_config(path.as_ptr(), 0, &mut sim) },
        MwStatus::ConfigError
    );
    assert!(last_error().contains("line 2"));
}

#[test]
fn null_handles_are_ignored_by_free() {
    unsafe {
        mw_mesh_free(ptr::null_mut());
        mw_simulation_free(ptr::null_mut());
    }
}

/// The generated header must compile as C and as C++ when a compiler is
/// available.
#[test]
fn header_compiles() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/mixwave.h");
    assert!(header.exists());
    for (compiler, lang) in [("cc", "c"), ("c++", "c++")] {
        let out = Command::new(compiler)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang])
            .arg(&header)
            .output();
        match out {
            Ok(o) => assert!(
                o.status.success(),
                "{compiler}: {}",
                String::from_utf8_lossy(&o.stderr)
            ),
            Err(_) => eprintln!("{compiler} not found, skipping"),
        }
    }
}

/// Builds `examples/cavity.c` against the static library and checks that
/// the energy it prints stays constant.
#[test]
fn c_example_links_and_runs() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    // tests live in target/<profile>/deps, the library one level up
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe.parent().and_then(Path::parent).unwrap();
    let lib = lib_dir.join("libmixwave_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("static library or C compiler unavailable, skipping");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("cavity");
    let out = Command::new("cc")
        .arg(manifest.join("examples/cavity.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success());
    let text = String::from_utf8(run.stdout).unwrap();
    let energies: Vec<f64> = text
        .lines()
        .map(|l| l.rsplit(' ').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(energies.len(), 6);
    for e in &energies {
        assert!(((e - energies[0]) / energies[0]).abs() < 1e-12, "{text}");
    }
}
