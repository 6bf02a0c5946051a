use machclock::dynamics::{evolve, LindbladModel, TimeGrid};
use machclock::models::{
    build_optomech_adiabatic, build_swap_model, CavityOps, DickeBlock, OptomechParams, Sign,
};
use machclock::quantum::{sigma_minus, sigma_plus, sigma_x, sigma_z, thermal_qubit};
use machclock::trajectories::{
    ensemble_run, simulate_diffusive, simulate_jump, simulate_telegraph, simulate_z_sde,
    DiffusiveChannel, EnsembleOptions, JumpScheme, Observable, SeedSpec,
};
use machclock::{DensityMatrix, HilbertSpace, Result};

fn driven_qubit() -> LindbladModel {
    LindbladModel::new(HilbertSpace::qubit())
        .with_hamiltonian(sigma_x().scale_real(0.8))
        .unwrap()
        .with_dissipator("down", 0.5, sigma_minus())
        .unwrap()
        .with_dissipator("up", 0.2, sigma_plus())
        .unwrap()
}

#[test]
fn diffusive_without_channels_matches_evolve() {
    let model = driven_qubit();
    let rho0 = thermal_qubit(0.7).unwrap();
    let grid = TimeGrid::new(2.0, 1e-3).unwrap().with_stride(100);
    let obs = [Observable::new("x", sigma_x()), Observable::new("z", sigma_z())];
    let r = simulate_diffusive(&model, &[], &rho0, &grid, SeedSpec::new(1, 0), &obs).unwrap();
    let ev = evolve(&model, &rho0, &grid).unwrap();
    for o in &obs {
        let exact = ev.expectation(&o.op).unwrap();
        for (a, b) in r.observable(&o.name).unwrap().iter().zip(&exact) {
            assert!((a - b).abs() <= 1e-6);
        }
    }
}

#[test]
fn eigenstate_gives_constant_trajectory() {
    let q = HilbertSpace::qubit();
    let model = LindbladModel::new(q.clone());
    let ch = DiffusiveChannel::sigma_z("z", sigma_z(), 0.3).unwrap();
    let rho0 = DensityMatrix::basis_state(&q, 0).unwrap();
    let grid = TimeGrid::new(1.0, 1e-3).unwrap();
    let obs = [Observable::new("z", sigma_z())];
    let r = simulate_diffusive(&model, std::slice::from_ref(&ch), &rho0, &grid, SeedSpec::new(2, 0), &obs).unwrap();
    assert!(r.observable("z").unwrap().iter().all(|z| (z - 1.0).abs() < 1e-14));
    let rec = r.record("z").unwrap();
    for (dy, dw) in rec.increments.iter().zip(&rec.wiener) {
        assert!((dy - grid.dt - ch.record_noise_scale * dw).abs() < 1e-14);
    }
}

#[test]
fn conditional_mean_is_a_martingale() {
    let q = HilbertSpace::qubit();
    let model = LindbladModel::new(q.clone());
    let ch = DiffusiveChannel::sigma_z("z", sigma_z(), 0.5).unwrap();
    let rho0 = thermal_qubit(0.8).unwrap();
    let z0 = rho0.expect(&sigma_z()).unwrap();
    let grid = TimeGrid::new(1.0, 1e-3).unwrap().with_stride(100);
    let obs = [Observable::new("z", sigma_z())];
    let job = |seed| simulate_diffusive(&model, std::slice::from_ref(&ch), &rho0, &grid, seed, &obs);
    let ens = ensemble_run(&job, EnsembleOptions::new(400, 7)).unwrap();
    let s = ens.observable("z").unwrap();
    for (m, se) in s.mean.iter().zip(&s.std_err).skip(1) {
        assert!((m - z0).abs() <= 3.0 * se + 1e-12, "{m} vs {z0} ± {se}");
    }
}

#[test]
fn diffusive_and_jump_ensembles_match_evolve() {
    let model = driven_qubit();
    let ch = DiffusiveChannel::sigma_z("z", sigma_z(), 0.2).unwrap();
    let full = machclock::trajectories::unconditional_model(&model, std::slice::from_ref(&ch)).unwrap();
    let rho0 = DensityMatrix::basis_state(&HilbertSpace::qubit(), 1).unwrap();
    let grid = TimeGrid::new(2.0, 1e-3).unwrap().with_stride(250);
    let obs = [Observable::new("x", sigma_x()), Observable::new("z", sigma_z())];
    let exact_diff = evolve(&full, &rho0, &grid).unwrap();
    let exact_jump = evolve(&model, &rho0, &grid).unwrap();

    let diff = |seed| simulate_diffusive(&model, std::slice::from_ref(&ch), &rho0, &grid, seed, &obs);
    let jump = |seed| simulate_jump(&model, &rho0, &grid, seed, &obs, JumpScheme::Bernoulli);
    let ed = ensemble_run(&diff, EnsembleOptions::new(300, 11)).unwrap();
    let ej = ensemble_run(&jump, EnsembleOptions::new(600, 12)).unwrap();
    for (ens, exact) in [(&ed, &exact_diff), (&ej, &exact_jump)] {
        let mut misses = 0;
        let mut total = 0;
        for o in &obs {
            let e = exact.expectation(&o.op).unwrap();
            let s = ens.observable(&o.name).unwrap();
            for k in 1..e.len() {
                total += 1;
                if (s.mean[k] - e[k]).abs() > 3.0 * s.std_err[k] {
                    misses += 1;
                }
            }
        }
        // pointwise 3σ bands: allow the odd excursion among correlated points
        assert!(misses <= 1, "{misses} of {total} outside 3 standard errors");
    }
}

#[test]
fn vacuum_never_jumps() {
    let p = OptomechParams::new(0.5, 1.0, 0.0);
    let m = build_optomech_adiabatic(&p, Sign::Plus, (3, 3)).unwrap();
    let rho0 = DensityMatrix::basis_state(m.space(), 0).unwrap();
    let grid = TimeGrid::new(100.0, 1e-2).unwrap();
    for scheme in [JumpScheme::Gillespie, JumpScheme::Bernoulli] {
        let r = simulate_jump(&m, &rho0, &grid, SeedSpec::new(4, 0), &[], scheme).unwrap();
        assert!(r.jumps.is_empty());
    }
}

#[test]
fn single_photon_jump_time_is_exponential() {
    // |1,0⟩ with n̄ = 0: one n12 jump at rate Γ
    let p = OptomechParams::new(0.5, 1.0, 0.0);
    let gam = p.gamma_eff();
    let m = build_optomech_adiabatic(&p, Sign::Plus, (2, 2)).unwrap();
    let rho0 = DensityMatrix::basis_state(m.space(), m.space().flatten(&[1, 0])).unwrap();
    let grid = TimeGrid::new(60.0, 1e-2).unwrap().with_stride(6000);
    let n = 10_000;
    let mut times = Vec::with_capacity(n);
    for i in 0..n {
        let r = simulate_jump(&m, &rho0, &grid, SeedSpec::new(5, i as u64), &[], JumpScheme::Gillespie).unwrap();
        assert!(r.jumps.len() <= 1);
        if let Some(j) = r.jumps.first() {
            assert_eq!(m.dissipators()[j.channel].label, "n12");
            times.push(j.time);
        }
    }
    // e^{−60} of runs are censored: none in practice
    assert_eq!(times.len(), n);
    let mean = times.iter().sum::<f64>() / n as f64;
    let se = (1.0 / gam) / (n as f64).sqrt();
    assert!((mean - 1.0 / gam).abs() < 3.0 * se, "{mean} vs {}", 1.0 / gam);
}

#[test]
fn photon_number_conserved_on_every_trajectory() {
    let p = OptomechParams::new(0.5, 1.0, 1.0);
    let m = build_optomech_adiabatic(&p, Sign::Plus, (4, 4)).unwrap();
    let ops = CavityOps::new(m.space()).unwrap();
    let obs = [Observable::new("N", ops.total_number())];
    let grid = TimeGrid::new(5.0, 5e-4).unwrap().with_stride(200);
    let rho0 = DensityMatrix::basis_state(m.space(), m.space().flatten(&[2, 1])).unwrap();
    for scheme in [JumpScheme::Gillespie, JumpScheme::Bernoulli] {
        for i in 0..20 {
            let r = simulate_jump(&m, &rho0, &grid, SeedSpec::new(6, i), &obs, scheme).unwrap();
            assert!(r.observable("N").unwrap().iter().all(|v| (v - 3.0).abs() < 1e-12));
        }
    }
}

#[test]
fn dicke_jumps_stay_in_the_irrep() {
    let block = DickeBlock::new(4, 1.0, 0.1).unwrap();
    let model = block.lindblad_model().unwrap();
    let spin = block.spin().unwrap();
    let rho0 = DensityMatrix::basis_state(model.space(), 0).unwrap();
    let grid = TimeGrid::new(3.0, 1e-3).unwrap().with_stride(100);
    let obs = [Observable::new("J2", spin.casimir())];
    let r = simulate_jump(&model, &rho0, &grid, SeedSpec::new(8, 0), &obs, JumpScheme::Bernoulli).unwrap();
    let j = block.j();
    assert!(r.observable("J2").unwrap().iter().all(|v| (v - j * (j + 1.0)).abs() < 1e-9));
}

#[test]
fn mean_current_tracks_number_difference() {
    // ī = E[dN12 − dN21]/dt equals ½ d⟨n2 − n1⟩/dt of the master equation
    let p = OptomechParams::new(0.5, 1.0, 1.0);
    let m = build_optomech_adiabatic(&p, Sign::Plus, (4, 4)).unwrap();
    let ops = CavityOps::new(m.space()).unwrap();
    let rho0 = DensityMatrix::basis_state(m.space(), m.space().flatten(&[2, 0])).unwrap();
    let grid = TimeGrid::new(2.0, 1e-3).unwrap().with_stride(2000);
    let job = |seed| simulate_jump(&m, &rho0, &grid, seed, &[], JumpScheme::Gillespie);
    let n = 4000;
    let ens = ensemble_run(&job, EnsembleOptions::new(n, 9).keep(n)).unwrap();
    let net: Vec<f64> = ens
        .trajectories
        .iter()
        .map(|t| *t.counts("n12").unwrap().last().unwrap() as f64 - *t.counts("n21").unwrap().last().unwrap() as f64)
        .collect();
    let mean = net.iter().sum::<f64>() / n as f64;
    let var = net.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    let diff = &ops.n2 - &ops.n1;
    let ev = evolve(&m, &rho0, &grid).unwrap().expectation(&diff).unwrap();
    let expect = 0.5 * (ev[1] - ev[0]);
    assert!((mean - expect).abs() < 3.0 * (var / n as f64).sqrt(), "{mean} vs {expect}");
}

#[test]
fn telegraph_dwell_times_pass_ks_test() {
    let (up, down) = (1.0, 2.0);
    let r = simulate_telegraph(up, down, Some(-1), 4000.0, SeedSpec::new(10, 0)).unwrap();
    for (value, rate) in [(1i8, down), (-1i8, up)] {
        let mut d = r.dwell_times(value);
        d.sort_by(f64::total_cmp);
        let n = d.len() as f64;
        let ks = d
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let f = 1.0 - (-rate * x).exp();
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max);
        let p = kolmogorov_p(ks * n.sqrt());
        assert!(p > 0.01, "value {value}: D = {ks}, p = {p}");
    }
}

fn kolmogorov_p(lambda: f64) -> f64 {
    let s: f64 = (1..=100)
        .map(|k| {
            let k = k as f64;
            (-1f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp()
        })
        .sum();
    (2.0 * s).clamp(0.0, 1.0)
}

#[test]
fn telegraph_symmetric_rates_balance() {
    let r = simulate_telegraph(3.0, 3.0, Some(1), 5000.0, SeedSpec::new(12, 0)).unwrap();
    let occ = 2.0 * r.occupancy_plus() - 1.0;
    // correlation time 1/6: ~ 5000*6 independent flips
    assert!(occ.abs() < 3.0 / (5000.0f64 * 3.0).sqrt(), "{occ}");
}

#[test]
fn swap_ensemble_mean_decays() {
    let grid = TimeGrid::new(1.0, 1e-3).unwrap().with_stride(100);
    let z0 = (0.5, -0.1);
    let job = |seed| simulate_z_sde(z0, 1.0, 0.01, &grid, seed);
    let ens = ensemble_run(&job, EnsembleOptions::new(2000, 13)).unwrap();
    let z1 = ens.observable("z1").unwrap();
    let z2 = ens.observable("z2").unwrap();
    for (k, t) in ens.times.iter().enumerate().skip(1) {
        let mean = z1.mean[k] - z2.mean[k];
        let se = (z1.std_err[k].powi(2) + z2.std_err[k].powi(2)).sqrt();
        let exact = 0.6 * (-2.0 * t).exp();
        // z1 and z2 noises are independent, so the SEs add in quadrature
        assert!((mean - exact).abs() < 3.0 * se + 1e-3, "{t}: {mean} vs {exact}");
    }
}

#[test]
fn swap_measurement_is_neutral_for_populations() {
    let swap = build_swap_model(1.0, Some(0.5)).unwrap();
    let full = machclock::trajectories::unconditional_model(&swap.model, &swap.channels).unwrap();
    let rho0 = thermal_qubit(0.4).unwrap().kron(&thermal_qubit(1.3).unwrap()).unwrap();
    let grid = TimeGrid::new(2.0, 1e-3).unwrap().with_stride(100);
    let a = evolve(&swap.model, &rho0, &grid).unwrap();
    let b = evolve(&full, &rho0, &grid).unwrap();
    for op in &swap.z_ops {
        let (x, y) = (a.expectation(op).unwrap(), b.expectation(op).unwrap());
        assert!(x.iter().zip(&y).all(|(p, q)| (p - q).abs() < 1e-10));
    }
}

#[test]
fn ensemble_is_reproducible() -> Result<()> {
    let grid = TimeGrid::new(0.5, 1e-3)?.with_stride(50);
    let job = |seed| simulate_z_sde((0.2, -0.2), 1.0, 0.05, &grid, seed);
    let a = ensemble_run(&job, EnsembleOptions::new(40, 99).workers(1))?;
    let b = ensemble_run(&job, EnsembleOptions::new(40, 99).workers(2))?;
    assert_eq!(a.observables, b.observables);
    Ok(())
}
