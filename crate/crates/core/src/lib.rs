#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! Quantum Zeno effect under projective measurements and under the
//! dissipative three-level dynamics that realizes them.
//!
//! * [`state`]: density matrices and the two-level Bloch vector.
//! * [`evolution`]: Bloch precession, projection and the master equation.
//! * [`projection`]: P₂(T) for the driven ion, ideal and decoherence-limited.
//! * [`neutron`]: spin-flip survival for the neutron variant.
//! * [`runner`]: configuration, sweeps and CSV/JSON tables.

pub mod error;
pub mod evolution;
mod integrator;
pub mod neutron;
pub mod projection;
pub mod runner;
pub mod state;

pub use error::{Error, Result};
