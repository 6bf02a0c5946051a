//! Simulation library for quantum thermal clocks.
//!
//! The crate is organised bottom-up:
//!
//! * [`quantum`]: Hilbert spaces, dense operators, density matrices, the
//!   Lindblad dissipator and the measurement innovation superoperator.
//! * [`dynamics`]: Lindblad models and their deterministic integration,
//!   Bloch vectors and the statistical-distance precision bound.
//! * [`trajectories`]: diffusive and jump unravelings, the reduced
//!   occupation SDEs, telegraph signals and seeded ensemble execution.
//! * [`models`]: builders for the two-level, swap, optomechanical and
//!   collective-spin (Dicke) models together with their classical reductions.
//! * [`clocks`]: elapsed-time and temperature estimators and their errors.
//!
//! Units: ħ = k_B = 1. Rates are in inverse time, Hamiltonians in angular
//! frequency.

pub mod clocks;
pub mod dynamics;
pub mod error;
pub mod models;
pub mod quantum;
pub mod tolerances;
pub mod trajectories;

pub use error::{Error, Result};
pub use quantum::{C64, DensityMatrix, HilbertSpace, Operator};
