//! Builders for the thermal-clock models and their classical reductions.

mod blocks;
mod dicke;
mod measurement;
mod mixture;
mod optomech;
mod qubits;

pub use blocks::{
    block_cutoff, block_probability, conditional_probabilities, initial_block_weights,
    jz_initial_mean, jz_initial_mean_high_t, lambda_from_nbar, semiclassical_rhs,
    thermal_n_moments, thermal_probability, BlockWeights, SemiclassicalVariant,
};
pub use dicke::{
    classical_birth_death, dicke_rates, photon_block, BirthDeathChain, DickeBlock, TwoModeSpin,
};
pub use measurement::{build_number_measurement, NumberMeasurement};
pub use mixture::{
    adjudicate_semiclassical, block_mixture, linear_fit, log_linear_fit, semiclassical_solution,
    BlockMixture, SemiclassicalAdjudication,
};
pub use optomech::{
    build_full_optomech, build_optomech_adiabatic, gamma_from_coupling, gibbs_factor,
    lambda_from_probe, thermal_cutoff, CavityOps, OptomechParams, Sign,
};
pub use qubits::{
    build_swap_model, build_two_level_thermal, newton_cooling_rate, qubit_temperature,
    swap_output_tanh, swap_solution, swap_stationary,
    SwapModel,
};
