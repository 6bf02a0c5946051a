use crate::error::{Error, Result};
use crate::quantum::{hermitian_eigen, CMatrix, DensityMatrix, Operator};
use crate::tolerances::{HERMITIAN_TOL, RHO_FLOOR};

/// Rate of change of statistical distance, `ds/dt = √tr(ρ̇ L)`, where `L`
/// solves `(ρL + Lρ)/2 = ρ̇`.
///
/// Works in the eigenbasis of `ρ`, with eigenvalues floored at 1e-12 and
/// renormalised, where `L_ij = 2 ρ̇_ij / (λ_i + λ_j)`.
pub fn statistical_distance_rate(rho: &DensityMatrix, drho: &Operator) -> Result<f64> {
    if rho.space() != drho.space() {
        return Err(Error::SpaceMismatch("state and derivative".into()));
    }
    let scale = drho.inf_norm().max(1.0);
    let defect = drho.hermiticity_defect();
    if defect > HERMITIAN_TOL * scale {
        return Err(Error::NonHermitian(format!("state derivative defect {defect:e}")));
    }
    let eig = hermitian_eigen(rho.matrix());
    let mut lambda: Vec<f64> = eig.eigenvalues.iter().map(|l| l.max(RHO_FLOOR)).collect();
    let total: f64 = lambda.iter().sum();
    lambda.iter_mut().for_each(|l| *l /= total);
    let u = &eig.eigenvectors;
    let d: CMatrix = u.adjoint() * drho.matrix() * u;
    let n = lambda.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += 2.0 * d[(i, j)].norm_sqr() / (lambda[i] + lambda[j]);
        }
    }
    Ok(acc.max(0.0).sqrt())
}

/// Closed form for a qubit with Bloch vector `x` and velocity `dx`:
/// `√(|ẋ|² + (x·ẋ)² / (1 − |x|²))`.
pub fn qubit_distance_rate(x: [f64; 3], dx: [f64; 3]) -> f64 {
    let dot: f64 = x.iter().zip(&dx).map(|(a, b)| a * b).sum();
    let r2: f64 = x.iter().map(|a| a * a).sum();
    let v2: f64 = dx.iter().map(|a| a * a).sum();
    (v2 + dot * dot / (1.0 - r2).max(RHO_FLOOR)).sqrt()
}

/// Lower bound `δt ≥ (ds/dt)^{-1}` on the error of any time estimate.
///
/// Returns `f64::INFINITY` when the state does not move.
pub fn clock_bound(ds_dt: f64) -> Result<f64> {
    if ds_dt.is_nan() || ds_dt < 0.0 {
        return Err(Error::InvalidParameter(format!("distance rate {ds_dt}")));
    }
    Ok(if ds_dt == 0.0 { f64::INFINITY } else { 1.0 / ds_dt })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::bloch;
    use crate::quantum::{c, sigma_x, sigma_y, sigma_z, thermal_qubit, HilbertSpace, C64};

    fn qubit_from_bloch(x: [f64; 3]) -> DensityMatrix {
        let id = Operator::identity(&HilbertSpace::qubit());
        let m = &(&(&id + &sigma_x().scale_real(x[0])) + &sigma_y().scale_real(x[1]))
            + &sigma_z().scale_real(x[2]);
        DensityMatrix::new(HilbertSpace::qubit(), m.matrix() * c(0.5)).unwrap()
    }

    fn velocity(dx: [f64; 3]) -> Operator {
        let m = &(&sigma_x().scale_real(dx[0]) + &sigma_y().scale_real(dx[1]))
            + &sigma_z().scale_real(dx[2]);
        m.scale_real(0.5)
    }

    #[test]
    fn zero_velocity_gives_zero() {
        let rho = thermal_qubit(0.4).unwrap();
        let zero = Operator::zeros(rho.space());
        assert_eq!(statistical_distance_rate(&rho, &zero).unwrap(), 0.0);
    }

    #[test]
    fn matches_qubit_closed_form() {
        let cases = [
            ([0.1, 0.2, -0.3], [0.5, -0.1, 0.2]),
            ([0.0, 0.0, -0.8], [0.0, 0.0, 0.3]),
            ([0.6, 0.0, 0.0], [0.0, 1.0, 0.0]),
            ([0.3, -0.4, 0.5], [-0.2, 0.7, 0.1]),
        ];
        for (x, dx) in cases {
            let rho = qubit_from_bloch(x);
            assert!(bloch(&rho).unwrap().iter().zip(&x).all(|(a, b)| (a - b).abs() < 1e-14));
            let num = statistical_distance_rate(&rho, &velocity(dx)).unwrap();
            let exact = qubit_distance_rate(x, dx);
            assert!((num - exact).abs() < 1e-12 * exact, "{num} vs {exact}");
        }
    }

    #[test]
    fn rejects_non_hermitian_velocity() {
        let rho = thermal_qubit(0.4).unwrap();
        let bad = sigma_x().scale(C64::new(0.0, 1.0));
        assert!(matches!(
            statistical_distance_rate(&rho, &bad),
            Err(Error::NonHermitian(_))
        ));
    }

    #[test]
    fn bound_is_reciprocal() {
        assert_eq!(clock_bound(2.0).unwrap(), 0.5);
        assert_eq!(clock_bound(0.0).unwrap(), f64::INFINITY);
        assert!(clock_bound(-1.0).is_err());
    }
}
