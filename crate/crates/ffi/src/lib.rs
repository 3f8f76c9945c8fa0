//! C ABI for `mixwave`.
//!
//! Objects are opaque handles created by `mw_*_new`-style functions and
//! released with the matching `mw_*_free`. Every fallible call returns an
//! [`MwStatus`]; on failure a description is kept per thread and can be
//! copied out with [`mw_last_error_message`]. Array accessors copy into
//! caller-owned buffers and report [`MwStatus::BufferTooSmall`] when the
//! given length is short. Panics never cross the boundary.
//!
//! The header `include/mixwave.h` is generated by the build script.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mixwave::analysis::{random_initial_data, InitialVelocity, LevelRun};
use mixwave::cli::load_config;
use mixwave::fem::cell_vertex_velocities;
use mixwave::integrator::LeapfrogState;
use mixwave::mesh::{generate_rect_mesh, read_mesh, write_mesh, Rect, TriMesh};
use mixwave::postprocess::pp_pressure;
use mixwave::scenarios::{scenario, Scenario, ScenarioKind};
use mixwave::Error;

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    MeshError = 3,
    SolverError = 4,
    CflViolation = 5,
    NonFinite = 6,
    IoError = 7,
    ConfigError = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

/// Built-in problem setups.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MwScenario {
    PlaneWave = 0,
    Scattering = 1,
    LShape = 2,
    Cavity = 3,
}

impl From<MwScenario> for ScenarioKind {
    fn from(s: MwScenario) -> Self {
        match s {
            MwScenario::PlaneWave => ScenarioKind::PlaneWave,
            MwScenario::Scattering => ScenarioKind::Scattering,
            MwScenario::LShape => ScenarioKind::LShape,
            MwScenario::Cavity => ScenarioKind::Cavity,
        }
    }
}

/// A triangulation.
pub struct MwMesh {
    mesh: TriMesh,
}

/// One level of a scenario being time-stepped.
pub struct MwSimulation {
    scenario: Scenario,
    run: LevelRun,
    state: LeapfrogState,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &Error) -> MwStatus {
    match e {
        Error::Mesh(_) => MwStatus::MeshError,
        Error::Solver(_) => MwStatus::SolverError,
        Error::CflViolation { .. } => MwStatus::CflViolation,
        Error::NonFinite { .. } => MwStatus::NonFinite,
        Error::Io(_) => MwStatus::IoError,
        Error::Config(_) => MwStatus::ConfigError,
        Error::PointOutsideCell { .. } | Error::SizeMismatch(_) | Error::InvalidArgument(_) => {
            MwStatus::InvalidArgument
        }
    }
}

struct Failure(MwStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

impl From<mixwave::mesh::MeshError> for Failure {
    fn from(e: mixwave::mesh::MeshError) -> Self {
        Failure(MwStatus::MeshError, e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure(MwStatus::IoError, e.to_string())
    }
}

fn fail(status: MwStatus, msg: impl Into<String>) -> Failure {
    Failure(status, msg.into())
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            MwStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            MwStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    // SAFETY: the caller passes either null or a live handle from this library
    unsafe { p.as_ref() }.ok_or_else(|| fail(MwStatus::NullPointer, format!("{what} is null")))
}

unsafe fn borrow_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    // SAFETY: as in `borrow`, and the handle is not aliased during the call
    unsafe { p.as_mut() }.ok_or_else(|| fail(MwStatus::NullPointer, format!("{what} is null")))
}

unsafe fn path_arg<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(MwStatus::NullPointer, "path is null"));
    }
    // SAFETY: non-null, and the caller promises a NUL-terminated string
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| fail(MwStatus::InvalidArgument, "path is not valid UTF-8"))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(fail(MwStatus::NullPointer, "output pointer is null"));
    }
    // SAFETY: `out` is non-null and points to writable storage for a pointer
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(())
}

unsafe fn copy_out<T: Copy>(src: &[T], buf: *mut T, len: usize) -> Result<(), Failure> {
    if buf.is_null() {
        return Err(fail(MwStatus::NullPointer, "buffer is null"));
    }
    if len < src.len() {
        return Err(fail(
            MwStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", src.len()),
        ));
    }
    // SAFETY: `buf` has room for `len >= src.len()` elements
    unsafe { ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len()) };
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the message of the last failed call on this thread into `buf`
/// (truncated, always NUL-terminated when `len > 0`). Returns the length
/// needed for the full message including the terminator.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn mw_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            // SAFETY: `buf` has `len > n` bytes
            unsafe {
                ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
                *buf.add(n) = 0;
            }
        }
        bytes.len() + 1
    })
}

// ---------------------------------------------------------------- meshes

/// Uniform triangulation of `[x0, x1] × [y0, y1]` with `n` subdivisions per
/// unit length; all boundary edges are pressure-data edges.
///
/// # Safety
/// `out` must point to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn mw_mesh_new_rect(
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    n: usize,
    out: *mut *mut MwMesh,
) -> MwStatus {
    guard(|| {
        let mesh = generate_rect_mesh(Rect::new(x0, x1, y0, y1), n)?;
        unsafe { store(out, MwMesh { mesh }) }
    })
}

/// Reads a mesh in the `trimesh 1` text format.
///
/// # Safety
/// `path` must be a NUL-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mw_mesh_read(path: *const c_char, out: *mut *mut MwMesh) -> MwStatus {
    guard(|| {
        let path = unsafe { path_arg(path) }?;
        let mesh = read_mesh(BufReader::new(File::open(path)?))?;
        unsafe { store(out, MwMesh { mesh }) }
    })
}

/// Writes a mesh in the `trimesh 1` text format.
///
/// # Safety
/// `mesh` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mw_mesh_write(mesh: *const MwMesh, path: *const c_char) -> MwStatus {
    guard(|| {
        let m = unsafe { borrow(mesh, "mesh") }?;
        let path = unsafe { path_arg(path) }?;
        write_mesh(&m.mesh, BufWriter::new(File::create(path)?))?;
        Ok(())
    })
}

/// Number of vertices, 0 for a null handle.
///
/// # Safety
/// `mesh` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mw_mesh_num_vertices(mesh: *const MwMesh) -> usize {
    unsafe { mesh.as_ref() }.map_or(0, |m| m.mesh.num_vertices())
}

/// Number of triangles, 0 for a null handle.
///
/// # Safety
/// `mesh` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mw_mesh_num_cells(mesh: *const MwMesh) -> usize {
    unsafe { mesh.as_ref() }.map_or(0, |m| m.mesh.num_cells())
}

/// Vertex coordinates as `x0 y0 x1 y1 …` (`2 · num_vertices` values).
///
/// # Safety
/// `mesh` must be a live handle, `xy` must have room for `len` values.
#[no_mangle]
pub unsafe extern "C" fn mw_mesh_vertices(
    mesh: *const MwMesh,
    xy: *mut f64,
    len: usize,
) -> MwStatus {
    guard(|| {
        let m = unsafe { borrow(mesh, "mesh") }?;
        let flat: Vec<f64> = m.mesh.vertices().iter().flat_map(|p| [p.x, p.y]).collect();
        unsafe { copy_out(&flat, xy, len) }
    })
}

/// Counterclockwise vertex triples of all cells (`3 · num_cells` values).
///
/// # Safety
/// `mesh` must be a live handle, `idx` must have room for `len` values.
#[no_mangle]
pub unsafe extern "C" fn mw_mesh_cells(mesh: *const MwMesh, idx: *mut u64, len: usize) -> MwStatus {
    guard(|| {
        let m = unsafe { borrow(mesh, "mesh") }?;
        let flat: Vec<u64> = m.mesh.cells().iter().flatten().map(|&v| v as u64).collect();
        unsafe { copy_out(&flat, idx, len) }
    })
}

/// Releases a mesh; null is ignored.
///
/// # Safety
/// `mesh` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mw_mesh_free(mesh: *mut MwMesh) {
    if !mesh.is_null() {
        // SAFETY: created by `Box::into_raw` in this library
        drop(unsafe { Box::from_raw(mesh) });
    }
}

// ----------------------------------------------------------- simulations

fn new_simulation(
    sc: Scenario,
    level: u32,
    tau: f64,
    allow_cfl_violation: bool,
) -> Result<MwSimulation, Failure> {
    if tau.is_nan() {
        return Err(fail(MwStatus::InvalidArgument, "time step is NaN"));
    }
    let tau = if tau > 0.0 { tau } else { sc.tau(level) };
    let run = LevelRun::new(&sc, sc.mesh(level)?, level, tau, allow_cfl_violation)?;
    let (u0, p0) = if sc.kind == ScenarioKind::Cavity {
        random_initial_data(&run.space, 1)
    } else {
        run.initial_data(&sc, InitialVelocity::Projection)?
    };
    let load0 = run.load(&sc, 0.0);
    let state = LeapfrogState::new(&run.ops, &u0, &p0, load0.as_deref(), tau)?;
    Ok(MwSimulation {
        scenario: sc,
        run,
        state,
    })
}

/// Sets up a built-in scenario on mesh level `level` (`h = 2^-level`).
/// `tau <= 0` selects the scenario's time step. Time steps above the
/// estimated stability bound fail with `CflViolation` unless
/// `allow_cfl_violation` is non-zero.
///
/// # Safety
/// `out` must point to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn mw_simulation_new(
    kind: MwScenario,
    level: u32,
    tau: f64,
    allow_cfl_violation: i32,
    out: *mut *mut MwSimulation,
) -> MwStatus {
    guard(|| {
        let sim = new_simulation(scenario(kind.into()), level, tau, allow_cfl_violation != 0)?;
        unsafe { store(out, sim) }
    })
}

/// Like [`mw_simulation_new`] with scenario, boundary map and level taken
/// from a configuration file (the `[scenario]`, `[boundary]` and
/// `[output] level` entries).
///
/// # Safety
/// `path` must be a NUL-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mw_simulation_from_config(
    path: *const c_char,
    allow_cfl_violation: i32,
    out: *mut *mut MwSimulation,
) -> MwStatus {
    guard(|| {
        let path = unsafe { path_arg(path) }?;
        let cfg = load_config(path.as_ref())?;
        let level = cfg.output.level;
        let sim = new_simulation(cfg.scenario, level, 0.0, allow_cfl_violation != 0)?;
        unsafe { store(out, sim) }
    })
}

/// Advances by `steps` leapfrog steps.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mw_simulation_step(sim: *mut MwSimulation, steps: usize) -> MwStatus {
    guard(|| {
        let s = unsafe { borrow_mut(sim, "simulation") }?;
        for _ in 0..steps {
            let t = (s.state.n + 1) as f64 * s.state.tau;
            let load = s.run.load(&s.scenario, t);
            s.state.step(&s.run.ops, load.as_deref())?;
        }
        Ok(())
    })
}

/// Scalar properties of a simulation.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MwSimulationInfo {
    /// completed steps
    pub step: u64,
    pub time: f64,
    pub tau: f64,
    /// estimated stability bound of the time step
    pub tau_max: f64,
    /// discrete energy of the current state
    pub energy: f64,
    pub num_cells: u64,
    pub num_velocity_dofs: u64,
}

/// Fills `info` with the current state.
///
/// # Safety
/// `sim` must be a live handle and `info` writable.
#[no_mangle]
pub unsafe extern "C" fn mw_simulation_info(
    sim: *const MwSimulation,
    info: *mut MwSimulationInfo,
) -> MwStatus {
    guard(|| {
        let s = unsafe { borrow(sim, "simulation") }?;
        let out = unsafe { borrow_mut(info, "info") }?;
        *out = MwSimulationInfo {
            step: s.state.n as u64,
            time: s.state.time(),
            tau: s.state.tau,
            tau_max: s.run.cfl.tau_max,
            energy: s.state.energy(&s.run.ops),
            num_cells: s.run.space.num_cells() as u64,
            num_velocity_dofs: s.run.space.num_velocity_dofs() as u64,
        };
        Ok(())
    })
}

/// Copy of the simulation's mesh as a new handle.
///
/// # Safety
/// `sim` must be a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mw_simulation_mesh(
    sim: *const MwSimulation,
    out: *mut *mut MwMesh,
) -> MwStatus {
    guard(|| {
        let s = unsafe { borrow(sim, "simulation") }?;
        unsafe {
            store(
                out,
                MwMesh {
                    mesh: s.run.space.mesh().clone(),
                },
            )
        }
    })
}

/// Piecewise constant pressure `p_h^n`, one value per cell.
///
/// # Safety
/// `sim` must be a live handle, `buf` must have room for `len` values.
#[no_mangle]
pub unsafe extern "C" fn mw_simulation_pressure(
    sim: *const MwSimulation,
    buf: *mut f64,
    len: usize,
) -> MwStatus {
    guard(|| {
        let s = unsafe { borrow(sim, "simulation") }?;
        unsafe { copy_out(&s.state.p, buf, len) }
    })
}

/// Post-processed linear pressure: the values at the three corners of
/// every cell (`3 · num_cells` values, cell by cell).
///
/// # Safety
/// `sim` must be a live handle, `buf` must have room for `len` values.
#[no_mangle]
pub unsafe extern "C" fn mw_simulation_pp_pressure(
    sim: *const MwSimulation,
    buf: *mut f64,
    len: usize,
) -> MwStatus {
    guard(|| {
        let s = unsafe { borrow(sim, "simulation") }?;
        let field = pp_pressure(&s.run.space, &s.state.dtau_u(), &s.state.p)?;
        let flat: Vec<f64> = field.values.iter().flatten().copied().collect();
        unsafe { copy_out(&flat, buf, len) }
    })
}

fn corner_values(s: &MwSimulation, coeffs: &[f64]) -> Vec<f64> {
    cell_vertex_velocities(&s.run.space, coeffs)
        .iter()
        .flat_map(|c| c.iter().flat_map(|v| [v.x, v.y]))
        .collect()
}

/// Averaged velocity `û_h^n` at the corners of every cell as
/// `(x, y)` pairs (`6 · num_cells` values).
///
/// # Safety
/// `sim` must be a live handle, `buf` must have room for `len` values.
#[no_mangle]
pub unsafe extern "C" fn mw_simulation_velocity(
    sim: *const MwSimulation,
    buf: *mut f64,
    len: usize,
) -> MwStatus {
    guard(|| {
        let s = unsafe { borrow(sim, "simulation") }?;
        unsafe { copy_out(&corner_values(s, &s.state.u_hat()), buf, len) }
    })
}

/// Post-processed velocity `ũ_h^n` in the layout of
/// [`mw_simulation_velocity`]. Costs a global solve.
///
/// # Safety
/// `sim` must be a live handle, `buf` must have room for `len` values.
#[no_mangle]
pub unsafe extern "C" fn mw_simulation_pp_velocity(
    sim: *const MwSimulation,
    buf: *mut f64,
    len: usize,
) -> MwStatus {
    guard(|| {
        let s = unsafe { borrow(sim, "simulation") }?;
        let (ut, _) = s.run.pp.solve(&s.state.u_hat(), None)?;
        unsafe { copy_out(&corner_values(s, &ut), buf, len) }
    })
}

/// Releases a simulation; null is ignored.
///
/// # Safety
/// `sim` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mw_simulation_free(sim: *mut MwSimulation) {
    if !sim.is_null() {
        // SAFETY: created by `Box::into_raw` in this library
        drop(unsafe { Box::from_raw(sim) });
    }
}
