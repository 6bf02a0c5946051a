//! Numerical tolerances and step-size limits used throughout the crate.

/// Default cap on the total Hilbert-space dimension.
pub const MAX_TOTAL_DIM: usize = 4096;

/// Hermiticity tolerance for Hamiltonians, observables and states.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Allowed deviation of a density matrix trace from one.
pub const TRACE_TOL: f64 = 1e-10;

/// Most negative eigenvalue accepted for a valid density matrix.
pub const MIN_EIGENVALUE: f64 = -1e-8;

/// Integrators abort once an eigenvalue drops below this value.
pub const POSITIVITY_ABORT: f64 = -1e-6;

/// Thermal occupation beyond a Fock cutoff must stay below this mass.
pub const TAIL_MASS_LIMIT: f64 = 1e-6;

/// Maximum `rate * dt` accepted by the deterministic integrator.
pub const EVOLVE_RATE_DT: f64 = 1e-2;

/// Maximum `(rate + strength) * dt` for the diffusive unraveling.
pub const DIFFUSIVE_RATE_DT: f64 = 1e-3;

/// Maximum total jump probability per step for Bernoulli jump sampling.
pub const JUMP_PROBABILITY_PER_STEP: f64 = 1e-2;

/// Maximum `Γ dt` for the reduced occupation SDEs.
pub const ZSDE_STRENGTH_DT: f64 = 1e-4;

/// Maximum `rate * dt` for the hidden-path diffusive filter.
pub const CLASSICAL_FILTER_RATE_DT: f64 = 1e-2;

/// Classical RK4 is stable for `|λ| dt` below about 2.78; we stop earlier.
pub const RK4_STABILITY: f64 = 2.5;

/// Trace drift tolerated over a whole deterministic run.
pub const TRACE_DRIFT_TOL: f64 = 1e-9;

/// Eigenvalue floor used when inverting the symmetrised product with ρ.
pub const RHO_FLOOR: f64 = 1e-12;
