//! Mass-lumped BDM1–P0 mixed finite elements for the first-order acoustic
//! wave system
//!
//! ```text
//!     ∂t u + ∇p = 0,    ∂t p + div u = 0
//! ```
//!
//! on conforming triangulations of 2D domains. The velocity lives in the
//! lowest-order BDM space with edge-endpoint normal degrees of freedom, the
//! pressure is piecewise constant. Integrating the velocity mass with the
//! vertex rule makes the mass matrix block-diagonal (one block per mesh
//! vertex), so the staggered leapfrog scheme is fully explicit.
//!
//! The raw scheme is first-order accurate, but the discrete solution is
//! second-order close to a mixed projection of the exact solution. Two
//! post-processing steps ([`postprocess::pp_pressure`] and
//! [`postprocess::pp_velocity`]) turn this into piecewise linear fields that
//! converge at second order. The [`analysis`] module contains the
//! instruments used to measure all of this.

pub mod analysis;
pub mod assembly;
pub mod cli;
pub mod error;
pub mod fem;
pub mod integrator;
pub mod linalg;
pub mod mesh;
pub mod postprocess;
pub mod scenarios;

pub use error::{Error, Result};

/// Points and vectors in the plane.
pub type Point = nalgebra::Vector2<f64>;
