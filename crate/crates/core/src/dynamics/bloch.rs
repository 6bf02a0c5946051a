use crate::error::{Error, Result};
use crate::quantum::{sigma_x, sigma_y, sigma_z, DensityMatrix};

/// Bloch vector `x_i = tr(ρ σ_i)` of a qubit state.
pub fn bloch(rho: &DensityMatrix) -> Result<[f64; 3]> {
    if rho.space().dims() != [2] {
        return Err(Error::InvalidDimension(format!(
            "Bloch vector needs a single qubit, got {:?}",
            rho.space().dims()
        )));
    }
    Ok([
        rho.expect(&sigma_x())?,
        rho.expect(&sigma_y())?,
        rho.expect(&sigma_z())?,
    ])
}

/// Steady-state polarisation `-1/(2n̄+1)` of a qubit coupled to a thermal bath.
pub fn two_level_steady_x3(nbar: f64) -> f64 {
    -1.0 / (2.0 * nbar + 1.0)
}

/// Exact Bloch vector at time `t` for the thermal two-level master equation.
///
/// With `Γ = γ(2n̄+1)` the transverse components decay as `e^{-Γt/2}` and
/// `x3` relaxes to `-1/(2n̄+1)` at rate `Γ`.
pub fn two_level_closed_form(x0: [f64; 3], gamma: f64, nbar: f64, t: f64) -> [f64; 3] {
    let big = gamma * (2.0 * nbar + 1.0);
    let x3_inf = two_level_steady_x3(nbar);
    let transverse = (-0.5 * big * t).exp();
    [
        x0[0] * transverse,
        x0[1] * transverse,
        x3_inf + (x0[2] - x3_inf) * (-big * t).exp(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{thermal_qubit, HilbertSpace};

    #[test]
    fn bloch_examples() {
        let q = HilbertSpace::qubit();
        let e = DensityMatrix::basis_state(&q, 0).unwrap();
        assert_eq!(bloch(&e).unwrap(), [0.0, 0.0, 1.0]);
        assert_eq!(bloch(&DensityMatrix::maximally_mixed(&q)).unwrap(), [0.0, 0.0, 0.0]);
        for be in [0.1, 1.0, 3.0] {
            let x = bloch(&thermal_qubit(be).unwrap()).unwrap();
            assert!((x[2] + (be / 2.0).tanh()).abs() < 1e-15);
            assert_eq!((x[0], x[1]), (0.0, 0.0));
        }
        let big = DensityMatrix::maximally_mixed(&HilbertSpace::single(3).unwrap());
        assert!(bloch(&big).is_err());
    }

    #[test]
    fn closed_form_examples() {
        let x3_inf = two_level_steady_x3(1.5);
        let x = two_level_closed_form([0.0, 0.0, x3_inf], 2.0, 1.5, 7.0);
        assert!((x[2] - x3_inf).abs() < 1e-15);
        let x = two_level_closed_form([0.0, 0.0, 1.0], 1.0, 0.0, 2f64.ln());
        assert!(x[2].abs() < 1e-15);
        let x = two_level_closed_form([0.3, -0.2, 0.9], 1.0, 1.0, 1e3);
        assert!((x[2] + 1.0 / 3.0).abs() < 1e-15 && x[0].abs() < 1e-15);
    }
}
