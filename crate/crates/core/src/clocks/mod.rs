//! Time and temperature estimators, their error laws and the
//! information-theoretic quantities of the weak-measurement clock.

mod estimate;
mod estimators;
mod weak;

pub use estimate::{ClockEstimate, Convention};
pub use estimators::{
    dwell_survival, dwell_time_estimate, dwell_time_from_record, dwell_time_high_t, dwell_time_mle, ensemble_swap_estimate,
    radiocarbon_estimate, radiocarbon_relative_error, temperature_error, temperature_estimate,
};
pub use weak::{
    delta_s, delta_s_from_divergence, kl_divergence, kl_high_t, mu_coefficient, mu_high_t, regime_check,
    s_statistic, t_from_s, thermal_populations, RegimeReport,
};
