use serde::{Deserialize, Serialize};

use crate::dynamics::LindbladModel;
use crate::error::{Error, Result};
use crate::quantum::{annihilation, thermal_tail_mass, HilbertSpace, Operator};
use crate::tolerances::TAIL_MASS_LIMIT;

/// Parameters of the two-cavity optomechanical system and its number probe.
///
/// `probe_e0`, `probe_omega` and `probe_delta` describe the driven probe
/// qubit before elimination; they are carried as metadata only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptomechParams {
    pub g: f64,
    pub gamma_m: f64,
    pub nbar: f64,
    pub kappa_probe: f64,
    pub gamma_q: f64,
    pub probe_e0: f64,
    pub probe_omega: f64,
    pub probe_delta: f64,
}

impl OptomechParams {
    pub fn new(g: f64, gamma_m: f64, nbar: f64) -> Self {
        Self {
            g,
            gamma_m,
            nbar,
            kappa_probe: 0.0,
            gamma_q: 0.0,
            probe_e0: 0.0,
            probe_omega: 0.0,
            probe_delta: 0.0,
        }
    }

    /// Rejects negative or non-finite values; returns advisory warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        for (name, v) in [
            ("g", self.g),
            ("gamma_m", self.gamma_m),
            ("nbar", self.nbar),
            ("kappa_probe", self.kappa_probe),
            ("gamma_q", self.gamma_q),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} = {v}")));
            }
        }
        let mut warnings = Vec::new();
        if !self.adiabatic_regime() {
            warnings.push(format!(
                "gamma_m*nbar = {} is below 10 g = {}; adiabatic elimination is not justified",
                self.gamma_m * self.nbar,
                10.0 * self.g
            ));
        }
        Ok(warnings)
    }

    /// `γ n̄ ≥ 10 g`.
    pub fn adiabatic_regime(&self) -> bool {
        self.gamma_m * self.nbar >= 10.0 * self.g
    }

    /// Effective cavity exchange rate `Γ = 4g²/γ`.
    pub fn gamma_eff(&self) -> f64 {
        gamma_from_coupling(self.g, self.gamma_m)
    }

    /// Number decoherence rate `Λ = 4κ²/γ_q`.
    pub fn lambda(&self) -> f64 {
        lambda_from_probe(self.kappa_probe, self.gamma_q)
    }
}

pub fn gamma_from_coupling(g: f64, gamma_m: f64) -> f64 {
    4.0 * g * g / gamma_m
}

pub fn lambda_from_probe(kappa: f64, gamma_q: f64) -> f64 {
    4.0 * kappa * kappa / gamma_q
}

/// Rate ratio `n̄/(n̄+1)`, the Boltzmann factor of the mechanical bath.
pub fn gibbs_factor(nbar: f64) -> f64 {
    nbar / (nbar + 1.0)
}

/// Direction of the Raman exchange.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    /// Photon moves 2 → 1 by absorbing a phonon.
    Plus,
    /// Photon moves 2 → 1 by emitting a phonon; cavity labels exchanged.
    Minus,
}

/// Mode operators on a cavity pair, optionally with a mechanical mode.
#[derive(Debug, Clone)]
pub struct CavityOps {
    pub a1: Operator,
    pub a2: Operator,
    pub n1: Operator,
    pub n2: Operator,
    pub b: Option<Operator>,
}

impl CavityOps {
    pub fn new(space: &HilbertSpace) -> Result<Self> {
        let dims = space.dims();
        if dims.len() < 2 || dims.len() > 3 {
            return Err(Error::InvalidDimension(format!(
                "expected two cavities and an optional mechanical mode, got {dims:?}"
            )));
        }
        let a1 = annihilation(dims[0])?.embed(space, 0)?;
        let a2 = annihilation(dims[1])?.embed(space, 1)?;
        let b = match dims.get(2) {
            Some(&d) => Some(annihilation(d)?.embed(space, 2)?),
            None => None,
        };
        Ok(Self {
            n1: &a1.adjoint() * &a1,
            n2: &a2.adjoint() * &a2,
            a1,
            a2,
            b,
        })
    }

    /// `a1 a2†`: one photon from cavity 1 to cavity 2.
    pub fn hop_12(&self) -> Operator {
        &self.a1 * &self.a2.adjoint()
    }

    /// `a1† a2`: one photon from cavity 2 to cavity 1.
    pub fn hop_21(&self) -> Operator {
        &self.a1.adjoint() * &self.a2
    }

    pub fn total_number(&self) -> Operator {
        &self.n1 + &self.n2
    }
}

fn check_cutoff(name: &str, c: usize) -> Result<()> {
    if c < 2 {
        return Err(Error::InvalidDimension(format!("{name} cutoff {c} needs at least 2 levels")));
    }
    Ok(())
}

/// Cavity-only model after eliminating the mechanics. Dissipators are
/// labelled `n12` (photon 1 → 2) and `n21` (photon 2 → 1).
///
/// `Plus`: `Γ(n̄+1)D[a1 a2†] + Γn̄D[a1† a2]`; `Minus` exchanges the rates.
pub fn build_optomech_adiabatic(
    params: &OptomechParams,
    sign: Sign,
    cutoffs: (usize, usize),
) -> Result<LindbladModel> {
    params.validate()?;
    check_cutoff("cavity 1", cutoffs.0)?;
    check_cutoff("cavity 2", cutoffs.1)?;
    let space = HilbertSpace::new(vec![cutoffs.0, cutoffs.1])?;
    let ops = CavityOps::new(&space)?;
    let gam = params.gamma_eff();
    let (r12, r21) = match sign {
        Sign::Plus => (gam * (params.nbar + 1.0), gam * params.nbar),
        Sign::Minus => (gam * params.nbar, gam * (params.nbar + 1.0)),
    };
    LindbladModel::new(space)
        .with_dissipator("n12", r12, ops.hop_12())?
        .with_dissipator("n21", r21, ops.hop_21())
}

/// Cavities plus damped mechanics with `H = g(b a1†a2 + b† a1 a2†)` and
/// mechanical dissipators `γ(n̄+1)D[b] + γn̄D[b†]`; cavity decay is zero.
pub fn build_full_optomech(
    params: &OptomechParams,
    cutoffs: (usize, usize, usize),
) -> Result<LindbladModel> {
    params.validate()?;
    check_cutoff("cavity 1", cutoffs.0)?;
    check_cutoff("cavity 2", cutoffs.1)?;
    check_cutoff("mechanical", cutoffs.2)?;
    let tail = thermal_tail_mass(params.nbar, cutoffs.2);
    if tail >= TAIL_MASS_LIMIT {
        return Err(Error::CutoffTooSmall {
            cutoff: cutoffs.2,
            tail,
            limit: TAIL_MASS_LIMIT,
        });
    }
    let space = HilbertSpace::new(vec![cutoffs.0, cutoffs.1, cutoffs.2])?;
    let ops = CavityOps::new(&space)?;
    let b = ops.b.clone().expect("three subsystems");
    let term = &b * &ops.hop_21();
    let h = (&term + &term.adjoint()).scale_real(params.g);
    LindbladModel::new(space)
        .with_hamiltonian(h)?
        .with_dissipator("mech_down", params.gamma_m * (params.nbar + 1.0), b.clone())?
        .with_dissipator("mech_up", params.gamma_m * params.nbar, b.adjoint())
}

/// Smallest number of Fock levels whose thermal tail is below the limit.
pub fn thermal_cutoff(nbar: f64) -> usize {
    (1..).find(|&c| thermal_tail_mass(nbar, c) < TAIL_MASS_LIMIT).expect("finite")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{max_abs_diff, thermal_mode};

    #[test]
    fn derived_rates() {
        let p = OptomechParams::new(1.0, 100.0, 1.0);
        assert!((p.gamma_eff() - 0.04).abs() < 1e-15);
        assert!((lambda_from_probe(1.0, 100.0) - 0.04).abs() < 1e-15);
        assert!((gibbs_factor(1.0) - 0.5).abs() < 1e-15);
        assert!((gibbs_factor(1.0).ln() + 2f64.ln()).abs() < 1e-15);
        assert!(p.adiabatic_regime());
        assert!(p.validate().unwrap().is_empty());
        let slow = OptomechParams::new(1.0, 5.0, 1.0);
        assert!(!slow.adiabatic_regime());
        assert_eq!(slow.validate().unwrap().len(), 1);
        assert!(OptomechParams::new(-1.0, 1.0, 1.0).validate().is_err());
    }

    #[test]
    fn adiabatic_labels_and_rates() {
        let p = OptomechParams::new(1.0, 100.0, 1.0);
        let plus = build_optomech_adiabatic(&p, Sign::Plus, (3, 3)).unwrap();
        let minus = build_optomech_adiabatic(&p, Sign::Minus, (3, 3)).unwrap();
        assert!((plus.dissipator("n12").unwrap().rate - 0.08).abs() < 1e-15);
        assert!((plus.dissipator("n21").unwrap().rate - 0.04).abs() < 1e-15);
        assert_eq!(minus.dissipator("n12").unwrap().rate, plus.dissipator("n21").unwrap().rate);
        let r = plus.dissipator("n21").unwrap().rate / plus.dissipator("n12").unwrap().rate;
        assert!((r - 0.5).abs() < 1e-15);
        assert!(build_optomech_adiabatic(&p, Sign::Plus, (1, 3)).is_err());
    }

    #[test]
    fn number_difference_rate_at_t0() {
        let (g, gm, nbar) = (0.5, 40.0, 1.3);
        let p = OptomechParams::new(g, gm, nbar);
        let gam = p.gamma_eff();
        let (c1, c2) = (25, 18);
        let model = build_optomech_adiabatic(&p, Sign::Plus, (c1, c2)).unwrap();
        let rho = thermal_mode(0.6, c1).unwrap().kron(&thermal_mode(0.3, c2).unwrap()).unwrap();
        let ops = CavityOps::new(model.space()).unwrap();
        let diff = &ops.n2 - &ops.n1;
        let drho = model.apply(&rho).unwrap();
        let num = (diff.matrix() * drho.matrix()).trace().re;
        let n1 = rho.expect(&ops.n1).unwrap();
        let n2 = rho.expect(&ops.n2).unwrap();
        let n12 = rho.expect(&(&ops.n1 * &ops.n2)).unwrap();
        let expect = 2.0 * gam * n12 + 2.0 * gam * (nbar + 1.0) * n1 - 2.0 * gam * nbar * n2;
        // truncation of the top cavity levels contributes below 1e-9 here
        assert!((num - expect).abs() < 1e-9, "{num} vs {expect}");
    }

    #[test]
    fn full_model_conserves_photon_number() {
        let p = OptomechParams::new(1.0, 40.0, 0.5);
        let cm = thermal_cutoff(0.5);
        assert_eq!(cm, 13);
        let m = build_full_optomech(&p, (3, 3, cm)).unwrap();
        let ops = CavityOps::new(m.space()).unwrap();
        let comm = m.hamiltonian().commutator(&ops.total_number());
        assert!(comm.matrix().iter().all(|z| z.norm() < 1e-12));
        assert!(build_full_optomech(&p, (3, 3, 6)).is_err());
        let h = m.hamiltonian();
        assert!(max_abs_diff(h.matrix(), &h.matrix().adjoint()) < 1e-15);
    }
}
