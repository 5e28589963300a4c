//! Simulation of driven Kerr-nonlinear cavity-magnon systems on truncated
//! Fock spaces.
//!
//! All rates are in units of the cavity-magnon coupling `g`, and times in
//! units of `1/g`. The crate is organised bottom-up:
//!
//! - [`fock`]: spaces, operators and states on truncated Fock spaces.
//! - [`model`]: the two-mode and effective polariton Hamiltonians, the
//!   polariton basis change and the Lindblad generator.
//! - [`solvers`]: closed and dissipative time evolution, steady states and
//!   spectra.
//! - [`observables`]: populations, mean excitation and blockade fidelity.
//! - [`harness`]: configuration, parameter sweeps and figure datasets.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fock;
pub mod harness;
pub mod model;
pub mod observables;
pub mod solvers;

pub use error::{Error, Result};
pub use fock::{Basis, FockOperator, Mode, QuantumState, SpaceDescriptor, SpaceKind};
pub use model::{Liouvillian, SystemParams};
pub use observables::{BlockadeReport, BlockadeThresholds, ReportSource};
pub use solvers::{EvolveConfig, Integrator, Trajectory};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
