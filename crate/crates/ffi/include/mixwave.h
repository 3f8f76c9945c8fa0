#ifndef MIXWAVE_H
#define MIXWAVE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Built-in problem setups.
typedef enum MwScenario {
  MW_SCENARIO_PLANE_WAVE = 0,
  MW_SCENARIO_SCATTERING = 1,
  MW_SCENARIO_L_SHAPE = 2,
  MW_SCENARIO_CAVITY = 3,
} MwScenario;

// Result codes.
typedef enum MwStatus {
  MW_STATUS_OK = 0,
  MW_STATUS_NULL_POINTER = 1,
  MW_STATUS_INVALID_ARGUMENT = 2,
  MW_STATUS_MESH_ERROR = 3,
  MW_STATUS_SOLVER_ERROR = 4,
  MW_STATUS_CFL_VIOLATION = 5,
  MW_STATUS_NON_FINITE = 6,
  MW_STATUS_IO_ERROR = 7,
  MW_STATUS_CONFIG_ERROR = 8,
  MW_STATUS_BUFFER_TOO_SMALL = 9,
  MW_STATUS_PANIC = 10,
} MwStatus;

// A triangulation.
typedef struct MwMesh MwMesh;

// One level of a scenario being time-stepped.
typedef struct MwSimulation MwSimulation;

// Scalar properties of a simulation.
typedef struct MwSimulationInfo {
  // completed steps
  uint64_t step;
  double time;
  double tau;
  // estimated stability bound of the time step
  double tau_max;
  // discrete energy of the current state
  double energy;
  uint64_t num_cells;
  uint64_t num_velocity_dofs;
} MwSimulationInfo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *mw_version(void);

// Copies the message of the last failed call on this thread into `buf`
// (truncated, always NUL-terminated when `len > 0`). Returns the length
// needed for the full message including the terminator.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t mw_last_error_message(char *buf, size_t len);

// Uniform triangulation of `[x0, x1] × [y0, y1]` with `n` subdivisions per
// unit length; all boundary edges are pressure-data edges.
//
// # Safety
// `out` must point to writable storage for a handle.
enum MwStatus mw_mesh_new_rect(double x0,
                               double x1,
                               double y0,
                               double y1,
                               size_t n,
                               struct MwMesh **out);

// Reads a mesh in the `trimesh 1` text format.
//
// # Safety
// `path` must be a NUL-terminated string, `out` writable.
enum MwStatus mw_mesh_read(const char *path, struct MwMesh **out);

// Writes a mesh in the `trimesh 1` text format.
//
// # Safety
// `mesh` must be a live handle and `path` a NUL-terminated string.
enum MwStatus mw_mesh_write(const struct MwMesh *mesh, const char *path);

// Number of vertices, 0 for a null handle.
//
// # Safety
// `mesh` must be null or a live handle.
size_t mw_mesh_num_vertices(const struct MwMesh *mesh);

// Number of triangles, 0 for a null handle.
//
// # Safety
// `mesh` must be null or a live handle.
size_t mw_mesh_num_cells(const struct MwMesh *mesh);

// Vertex coordinates as `x0 y0 x1 y1 …` (`2 · num_vertices` values).
//
// # Safety
// `mesh` must be a live handle, `xy` must have room for `len` values.
enum MwStatus mw_mesh_vertices(const struct MwMesh *mesh, double *xy, size_t len);

// Counterclockwise vertex triples of all cells (`3 · num_cells` values).
//
// # Safety
// `mesh` must be a live handle, `idx` must have room for `len` values.
enum MwStatus mw_mesh_cells(const struct MwMesh *mesh, uint64_t *idx, size_t len);

// Releases a mesh; null is ignored.
//
// # Safety
// `mesh` must be null or a handle not yet freed.
void mw_mesh_free(struct MwMesh *mesh);

// Sets up a built-in scenario on mesh level `level` (`h = 2^-level`).
// `tau <= 0` selects the scenario's time step. Time steps above the
// estimated stability bound fail with `CflViolation` unless
// `allow_cfl_violation` is non-zero.
//
// # Safety
// `out` must point to writable storage for a handle.
enum MwStatus mw_simulation_new(enum MwScenario kind,
                                uint32_t level,
                                double tau,
                                int32_t allow_cfl_violation,
                                struct MwSimulation **out);

// Like [`mw_simulation_new`] with scenario, boundary map and level taken
// from a configuration file (the `[scenario]`, `[boundary]` and
// `[output] level` entries).
//
// # Safety
// `path` must be a NUL-terminated string, `out` writable.
enum MwStatus mw_simulation_from_config(const char *path,
                                        int32_t allow_cfl_violation,
                                        struct MwSimulation **out);

// Advances by `steps` leapfrog steps.
//
// # Safety
// `sim` must be a live handle.
enum MwStatus mw_simulation_step(struct MwSimulation *sim, size_t steps);

// Fills `info` with the current state.
//
// # Safety
// `sim` must be a live handle and `info` writable.
enum MwStatus mw_simulation_info(const struct MwSimulation *sim, struct MwSimulationInfo *info);

// Copy of the simulation's mesh as a new handle.
//
// # Safety
// `sim` must be a live handle, `out` writable.
enum MwStatus mw_simulation_mesh(const struct MwSimulation *sim, struct MwMesh **out);

// Piecewise constant pressure `p_h^n`, one value per cell.
//
// # Safety
// `sim` must be a live handle, `buf` must have room for `len` values.
enum MwStatus mw_simulation_pressure(const struct MwSimulation *sim, double *buf, size_t len);

// Post-processed linear pressure: the values at the three corners of
// every cell (`3 · num_cells` values, cell by cell).
//
// # Safety
// `sim` must be a live handle, `buf` must have room for `len` values.
enum MwStatus mw_simulation_pp_pressure(const struct MwSimulation *sim, double *buf, size_t len);

// Averaged velocity `û_h^n` at the corners of every cell as
// `(x, y)` pairs (`6 · num_cells` values).
//
// # Safety
// `sim` must be a live handle, `buf` must have room for `len` values.
enum MwStatus mw_simulation_velocity(const struct MwSimulation *sim, double *buf, size_t len);

// Post-processed velocity `ũ_h^n` in the layout of
// [`mw_simulation_velocity`]. Costs a global solve.
//
// # Safety
// `sim` must be a live handle, `buf` must have room for `len` values.
enum MwStatus mw_simulation_pp_velocity(const struct MwSimulation *sim, double *buf, size_t len);

// Releases a simulation; null is ignored.
//
// # Safety
// `sim` must be null or a handle not yet freed.
void mw_simulation_free(struct MwSimulation *sim);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MIXWAVE_H */
