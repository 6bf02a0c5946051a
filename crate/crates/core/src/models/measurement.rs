use crate::dynamics::LindbladModel;
use crate::error::{Error, Result};
use crate::models::CavityOps;
use crate::trajectories::DiffusiveChannel;

/// Cavity model conditioned on a continuous photon-number read-out of cavity 1.
#[derive(Debug, Clone)]
pub struct NumberMeasurement {
    /// Input model plus `Λ D[n1]`.
    pub model: LindbladModel,
    /// Channel on `n1` with strength `Λ` and record scale `1/√Λ`.
    pub channel: DiffusiveChannel,
}

/// Attach a number measurement of cavity 1 at rate `Λ`.
///
/// The ensemble-average dephasing is `−Λ[n1,[n1,ρ]] = 2Λ D[n1]ρ`; half of it
/// is added to the returned model and the other half is the backaction the
/// channel contributes when it is unravelled (or folded in with
/// [`crate::trajectories::unconditional_model`]).
pub fn build_number_measurement(model: &LindbladModel, lambda: f64) -> Result<NumberMeasurement> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "number decoherence rate {lambda} must be positive"
        )));
    }
    let ops = CavityOps::new(model.space())?;
    let mut out = model.clone();
    out.add_dissipator("number-dephasing", lambda, ops.n1.clone())?;
    let channel = DiffusiveChannel::number("n1", ops.n1, lambda)?;
    Ok(NumberMeasurement { model: out, channel })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_optomech_adiabatic, OptomechParams, Sign};
    use crate::quantum::{c, max_abs_diff, thermal_mode, DensityMatrix, C64};
    use crate::trajectories::unconditional_model;

    #[test]
    fn double_commutator_factor() {
        let p = OptomechParams::new(1.0, 100.0, 1.0);
        let base = build_optomech_adiabatic(&p, Sign::Plus, (3, 3)).unwrap();
        let lambda = 0.7;
        let nm = build_number_measurement(&base, lambda).unwrap();
        let full = unconditional_model(&nm.model, std::slice::from_ref(&nm.channel)).unwrap();
        let space = base.space().clone();
        let amps: Vec<C64> = (0..9).map(|k| C64::new(0.1 * k as f64 + 0.2, 0.05 * k as f64)).collect();
        let rho = DensityMatrix::pure(&space, &amps).unwrap();
        let n1 = CavityOps::new(&space).unwrap().n1;
        let comm = |x: &crate::quantum::CMatrix| n1.matrix() * x - x * n1.matrix();
        let expected = base.apply(&rho).unwrap().matrix() - comm(&comm(rho.matrix())) * c(lambda);
        assert!(max_abs_diff(full.apply(&rho).unwrap().matrix(), &expected) < 1e-13);
    }

    #[test]
    fn diagonal_states_feel_no_dephasing() {
        let p = OptomechParams::new(1.0, 100.0, 1.0);
        let base = build_optomech_adiabatic(&p, Sign::Plus, (30, 30)).unwrap();
        let nm = build_number_measurement(&base, 5.0).unwrap();
        let full = unconditional_model(&nm.model, std::slice::from_ref(&nm.channel)).unwrap();
        let rho = thermal_mode(1.0, 30).unwrap().kron(&thermal_mode(0.5, 30).unwrap()).unwrap();
        let d = max_abs_diff(full.apply(&rho).unwrap().matrix(), base.apply(&rho).unwrap().matrix());
        assert!(d < 1e-15);
        assert!((nm.channel.record_noise_scale - 1.0 / 5f64.sqrt()).abs() < 1e-15);
        assert!(build_number_measurement(&base, 0.0).is_err());
    }
}
