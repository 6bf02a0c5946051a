use rand_distr::{Distribution, StandardNormal};

use super::rng::channel_stream;
use super::{MeasurementRecord, SeedSpec, Series, TrajectoryResult};
use crate::dynamics::TimeGrid;
use crate::error::{Error, Result};
use crate::tolerances::ZSDE_STRENGTH_DT;

/// Conditional σz means of the measured swap pair.
///
/// `dz₁ = −γ(z₁−z₂)dt + 2√Γ(1−z₁²)dW₁` and the mirror equation for `z₂`.
/// The linear drift is integrated exactly (it only rotates `z₁−z₂`), the
/// noise with Euler–Maruyama from the pre-step values, and both components
/// are clamped to `[−1, 1]` afterwards. Observables are `z1`, `z2`; when
/// `gamma_meas > 0` records `z1`, `z2` carry `dy = z dt + dW/√(8Γ)`.
pub fn simulate_z_sde(
    z0: (f64, f64),
    gamma: f64,
    gamma_meas: f64,
    grid: &TimeGrid,
    seed: SeedSpec,
) -> Result<TrajectoryResult> {
    for z in [z0.0, z0.1] {
        if !(z.abs() <= 1.0) {
            return Err(Error::InvalidState(format!("initial z = {z} outside [-1, 1]")));
        }
    }
    if !(gamma >= 0.0 && gamma_meas >= 0.0) {
        return Err(Error::InvalidParameter(format!("gamma = {gamma}, Gamma = {gamma_meas}")));
    }
    if gamma_meas * grid.dt > ZSDE_STRENGTH_DT {
        return Err(Error::StepTooLarge(format!(
            "Gamma*dt = {} exceeds {ZSDE_STRENGTH_DT}",
            gamma_meas * grid.dt
        )));
    }
    let decay = (-2.0 * gamma * grid.dt).exp();
    let amp = 2.0 * gamma_meas.sqrt();
    let sqrt_dt = grid.dt.sqrt();
    let mut rngs = [seed.rng(channel_stream(0)), seed.rng(channel_stream(1))];
    let mut records = if gamma_meas > 0.0 {
        let scale = 1.0 / (8.0 * gamma_meas).sqrt();
        vec![
            MeasurementRecord::new("z1", grid.dt, scale, grid.steps),
            MeasurementRecord::new("z2", grid.dt, scale, grid.steps),
        ]
    } else {
        Vec::new()
    };
    let n = grid.sample_times().len();
    let mut z1s = Vec::with_capacity(n);
    let mut z2s = Vec::with_capacity(n);
    let (mut z1, mut z2) = z0;
    z1s.push(z1);
    z2s.push(z2);
    for step in 1..=grid.steps {
        let dw1 = sqrt_dt * Distribution::<f64>::sample(&StandardNormal, &mut rngs[0]);
        let dw2 = sqrt_dt * Distribution::<f64>::sample(&StandardNormal, &mut rngs[1]);
        if let [r1, r2] = records.as_mut_slice() {
            r1.push(z1, dw1);
            r2.push(z2, dw2);
        }
        let sum = 0.5 * (z1 + z2);
        let diff = 0.5 * (z1 - z2) * decay;
        let n1 = amp * (1.0 - z1 * z1) * dw1;
        let n2 = amp * (1.0 - z2 * z2) * dw2;
        z1 = (sum + diff + n1).clamp(-1.0, 1.0);
        z2 = (sum - diff + n2).clamp(-1.0, 1.0);
        if grid.is_sampled(step) {
            z1s.push(z1);
            z2s.push(z2);
        }
    }
    Ok(TrajectoryResult {
        seed,
        scheme: "z-sde".into(),
        times: grid.sample_times(),
        observables: vec![
            Series {
                name: "z1".into(),
                values: z1s,
            },
            Series {
                name: "z2".into(),
                values: z2s,
            },
        ],
        records,
        jump_counts: Vec::new(),
        jumps: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_limit_is_exact() {
        let grid = TimeGrid::new(2.0, 1e-2).unwrap().with_stride(10);
        let r = simulate_z_sde((0.6, -0.2), 1.5, 0.0, &grid, SeedSpec::new(1, 0)).unwrap();
        let z1 = r.observable("z1").unwrap();
        let z2 = r.observable("z2").unwrap();
        for (k, t) in r.times.iter().enumerate() {
            assert!((z1[k] + z2[k] - 0.4).abs() < 1e-14);
            assert!((z1[k] - z2[k] - 0.8 * (-3.0 * t).exp()).abs() < 1e-13);
        }
        assert!(r.records.is_empty());
    }

    #[test]
    fn pure_states_are_frozen() {
        let grid = TimeGrid::new(1.0, 1e-3).unwrap();
        let r = simulate_z_sde((1.0, 1.0), 2.0, 0.05, &grid, SeedSpec::new(1, 0)).unwrap();
        assert!(r.observable("z1").unwrap().iter().all(|z| *z == 1.0));
        assert!(r.observable("z2").unwrap().iter().all(|z| *z == 1.0));
        assert!(r.records[0].consistency_defect() < 1e-15);
    }

    #[test]
    fn preconditions() {
        let grid = TimeGrid::new(1.0, 1e-3).unwrap();
        assert!(simulate_z_sde((1.1, 0.0), 1.0, 0.0, &grid, SeedSpec::new(1, 0)).is_err());
        assert!(matches!(
            simulate_z_sde((0.1, 0.0), 1.0, 1.0, &grid, SeedSpec::new(1, 0)),
            Err(Error::StepTooLarge(_))
        ));
    }

    #[test]
    fn paths_stay_in_range() {
        let grid = TimeGrid::new(5.0, 1e-3).unwrap();
        for i in 0..20 {
            let r = simulate_z_sde((0.99, -0.99), 0.1, 0.1, &grid, SeedSpec::new(3, i)).unwrap();
            for s in &r.observables {
                assert!(s.values.iter().all(|z| z.abs() <= 1.0));
            }
        }
    }
}
