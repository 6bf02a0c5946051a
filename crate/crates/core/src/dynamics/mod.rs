//! Deterministic master-equation integration and qubit precision bounds.

mod bloch;
mod distance;
mod evolve;
mod model;

pub use bloch::{bloch, two_level_closed_form, two_level_steady_x3};
pub use distance::{clock_bound, qubit_distance_rate, statistical_distance_rate};
pub use evolve::{check_step, evolve, EvolutionResult, EvolveDiagnostics, TimeGrid};
pub use model::{Dissipator, LindbladModel, ModelSummary};

pub(crate) use evolve::Rk4;
pub(crate) use model::Generator;
