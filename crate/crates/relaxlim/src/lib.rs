//! Numerical verification of diffusive relaxation limits via relative entropy.
//!
//! Three hyperbolic relaxation systems are solved next to their parabolic
//! limits: isentropic Euler with friction (limit: porous media), the p-system
//! with damping (limit: nonlinear diffusion) and viscoelasticity with memory
//! (limit: rate-type viscoelasticity). The relative entropy between the
//! relaxation solution and the lifted limit solution is monitored along runs,
//! and sweeps over the relaxation parameter measure the fourth-order decay of
//! that distance.

pub mod checks;
pub mod config;
pub mod constitutive;
pub mod diagnostics;
pub mod entropy;
pub mod error;
pub mod grid;
pub mod quadrature;
pub mod solver;
pub mod sweep;
pub mod systems;

pub use error::{RelaxError, Result};
