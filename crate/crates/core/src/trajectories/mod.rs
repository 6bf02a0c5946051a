//! Stochastic unravelings, reduced SDEs, telegraph sampling and ensembles.
mod channel;
mod classical;
mod counts;
mod diffusive;
mod ensemble;
mod jump;
mod result;
mod rng;
mod telegraph;
mod zsde;

pub use channel::{unconditional_model, ChannelSummary, DiffusiveChannel};
pub use classical::simulate_diffusive_classical;
pub use counts::simulate_poisson_count;
pub use diffusive::simulate_diffusive;
pub use ensemble::{ensemble_run, EnsembleOptions, EnsembleResult, SeriesStats, TrajectoryJob};
pub use jump::{simulate_jump, JumpScheme};
pub use result::{moving_average, JumpEvent, MeasurementRecord, Observable, Series, TrajectoryResult};
pub use rng::SeedSpec;
pub use telegraph::{simulate_telegraph, TelegraphRecord};
pub use zsde::simulate_z_sde;
