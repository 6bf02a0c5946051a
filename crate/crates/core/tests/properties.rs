use machclock::clocks::{radiocarbon_estimate, t_from_s, Convention};
use machclock::dynamics::{evolve, LindbladModel, TimeGrid};
use machclock::models::{build_optomech_adiabatic, OptomechParams, Sign};
use machclock::quantum::{dissipator, innovation};
use machclock::trajectories::{
    simulate_diffusive, simulate_jump, simulate_telegraph, simulate_z_sde, DiffusiveChannel,
    JumpScheme, SeedSpec,
};
use machclock::{DensityMatrix, HilbertSpace, Operator, C64};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn matrix(d: usize, v: &[f64]) -> DMatrix<C64> {
    DMatrix::from_fn(d, d, |i, j| C64::new(v[2 * (i * d + j)], v[2 * (i * d + j) + 1]))
}

fn hermitian(d: usize, v: &[f64]) -> Operator {
    let m = matrix(d, v);
    let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    Operator::new(HilbertSpace::single(d).unwrap(), h).unwrap()
}

fn state(d: usize, v: &[f64]) -> DensityMatrix {
    let m = matrix(d, v);
    let p = &m * m.adjoint();
    let tr = p.trace();
    DensityMatrix::new(HilbertSpace::single(d).unwrap(), p / tr).unwrap()
}

fn coeffs(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 2 * d * d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn generator_preserves_trace_and_hermiticity(
        h in coeffs(3), a in coeffs(3), r in coeffs(3), rate in 0.0f64..2.0
    ) {
        let space = HilbertSpace::single(3).unwrap();
        let op = Operator::new(space.clone(), matrix(3, &a)).unwrap();
        let model = LindbladModel::new(space)
            .with_hamiltonian(hermitian(3, &h)).unwrap()
            .with_dissipator("a", rate, op).unwrap();
        let rho = state(3, &r);
        let drho = model.apply(&rho).unwrap();
        prop_assert!(drho.trace().norm() < 1e-12);
        prop_assert!(drho.hermiticity_defect() < 1e-12);
    }

    #[test]
    fn superoperators_are_traceless(a in coeffs(3), r in coeffs(3)) {
        let rho = state(3, &r);
        let op = Operator::new(rho.space().clone(), matrix(3, &a)).unwrap();
        prop_assert!(dissipator(&op, &rho).unwrap().trace().norm() < 1e-12);
        let herm = hermitian(3, &a);
        prop_assert!(innovation(&herm, &rho).unwrap().trace().norm() < 1e-12);
    }

    #[test]
    fn evolve_keeps_states_physical(h in coeffs(2), a in coeffs(2), r in coeffs(2), rate in 0.0f64..1.0) {
        let space = HilbertSpace::single(2).unwrap();
        let op = Operator::new(space.clone(), matrix(2, &a)).unwrap();
        let model = LindbladModel::new(space)
            .with_hamiltonian(hermitian(2, &h)).unwrap()
            .with_dissipator("a", rate, op).unwrap();
        let grid = TimeGrid::new(1.0, 2e-3).unwrap().with_stride(50);
        let run = evolve(&model, &state(2, &r), &grid).unwrap();
        for s in &run.states {
            prop_assert!((s.trace() - 1.0).abs() < 1e-9);
            prop_assert!(s.min_eigenvalue() > -1e-8);
        }
    }

    #[test]
    fn diffusive_records_are_filter_consistent(seed in any::<u64>(), r in coeffs(2), s in 0.01f64..0.5) {
        let q = HilbertSpace::qubit();
        let model = LindbladModel::new(q);
        let ch = DiffusiveChannel::sigma_z("z", machclock::quantum::sigma_z(), s).unwrap();
        let grid = TimeGrid::new(0.2, 1e-3).unwrap();
        let out = simulate_diffusive(&model, &[ch], &state(2, &r), &grid, SeedSpec::new(seed, 0), &[]).unwrap();
        prop_assert_eq!(out.records[0].increments.len(), grid.steps);
        prop_assert!(out.records[0].consistency_defect() < 1e-13);
        prop_assert!(out.records[0].increments.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn jump_counts_never_decrease(seed in any::<u64>(), n1 in 0usize..3, n2 in 0usize..3) {
        let p = OptomechParams::new(0.5, 1.0, 1.0);
        let m = build_optomech_adiabatic(&p, Sign::Plus, (4, 4)).unwrap();
        let rho0 = DensityMatrix::basis_state(m.space(), m.space().flatten(&[n1, n2])).unwrap();
        let grid = TimeGrid::new(3.0, 1e-3).unwrap().with_stride(10);
        let r = simulate_jump(&m, &rho0, &grid, SeedSpec::new(seed, 1), &[], JumpScheme::Gillespie).unwrap();
        for (_, c) in &r.jump_counts {
            prop_assert!(c.windows(2).all(|w| w[0] <= w[1]));
            prop_assert_eq!(c.len(), r.times.len());
        }
    }

    #[test]
    fn z_sde_paths_stay_in_range(seed in any::<u64>(), z1 in -1.0f64..=1.0, z2 in -1.0f64..=1.0, g in 0.0f64..0.1) {
        let grid = TimeGrid::new(0.5, 1e-3).unwrap().with_stride(10);
        let r = simulate_z_sde((z1, z2), 1.0, g, &grid, SeedSpec::new(seed, 0)).unwrap();
        for s in &r.observables {
            prop_assert!(s.values.iter().all(|z| z.abs() <= 1.0));
        }
    }

    #[test]
    fn telegraph_is_consistent(seed in any::<u64>(), up in 0.0f64..5.0, down in 0.0f64..5.0) {
        let r = simulate_telegraph(up, down, None, 20.0, SeedSpec::new(seed, 0)).unwrap();
        prop_assert!(r.switches.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(r.switches.iter().all(|s| *s <= 20.0));
        let occ = r.occupancy_plus();
        prop_assert!((0.0..=1.0).contains(&occ));
        for (start, end, value) in r.segments() {
            prop_assert_eq!(r.value_at(0.5 * (start + end)), value);
        }
    }

    #[test]
    fn radiocarbon_inverts_the_count(n in 0u64..100_000, gamma in 0.01f64..100.0) {
        let e = radiocarbon_estimate(n, gamma).unwrap();
        prop_assert!((e.t_est.unwrap() * gamma - n as f64).abs() < 1e-9 * (n as f64).max(1.0));
        prop_assert!(e.sigma_t.unwrap() >= 0.0);
    }

    #[test]
    fn derived_inversion_is_half_the_printed_one(s in -1.0f64..1.0, gamma in 0.01f64..10.0) {
        let d = t_from_s(s, gamma, Some(0.1), Convention::Derived).unwrap();
        let p = t_from_s(s, gamma, Some(0.1), Convention::Printed).unwrap();
        prop_assert!((2.0 * d.t_est.unwrap() - p.t_est.unwrap()).abs() < 1e-12);
        prop_assert!((2.0 * d.sigma_t.unwrap() - p.sigma_t.unwrap()).abs() < 1e-12);
    }
}
