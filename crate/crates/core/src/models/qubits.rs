use crate::dynamics::LindbladModel;
use crate::error::{Error, Result};
use crate::quantum::{
    max_abs_diff, sigma_minus, sigma_plus, sigma_z, swap_operator, DensityMatrix, HilbertSpace,
    Operator,
};
use crate::trajectories::DiffusiveChannel;

fn check_rate(name: &str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {value}")))
    }
}

/// Qubit coupled to a thermal bath: `γ(n̄+1)D[σ-] + γn̄D[σ+]`, `H = 0`.
pub fn build_two_level_thermal(gamma: f64, nbar: f64) -> Result<LindbladModel> {
    check_rate("gamma", gamma)?;
    check_rate("nbar", nbar)?;
    LindbladModel::new(HilbertSpace::qubit())
        .with_dissipator("down", gamma * (nbar + 1.0), sigma_minus())?
        .with_dissipator("up", gamma * nbar, sigma_plus())
}

/// Two-qubit swap model with optional σz measurement channels.
#[derive(Debug, Clone)]
pub struct SwapModel {
    pub model: LindbladModel,
    pub swap: Operator,
    /// `σz ⊗ 1` and `1 ⊗ σz`, always available for diagnostics.
    pub z_ops: [Operator; 2],
    /// Channels `z1`, `z2` when a measurement strength was given.
    pub channels: Vec<DiffusiveChannel>,
}

/// `dρ/dt = γ(SρS − ρ)` realised as `γ D[S]`, optionally with continuous
/// measurement of both σz at strength `Γ`.
pub fn build_swap_model(gamma: f64, measurement: Option<f64>) -> Result<SwapModel> {
    check_rate("gamma", gamma)?;
    let swap = swap_operator(2)?;
    let id = Operator::identity(swap.space());
    let defect = max_abs_diff((&swap * &swap).matrix(), id.matrix());
    if defect > 1e-15 {
        return Err(Error::InvalidState(format!("swap does not square to one ({defect:e})")));
    }
    let space = swap.space().clone();
    let z_ops = [sigma_z().embed(&space, 0)?, sigma_z().embed(&space, 1)?];
    let model = LindbladModel::new(space).with_dissipator("swap", gamma, swap.clone())?;
    let channels = match measurement {
        None => Vec::new(),
        Some(g) => {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::InvalidParameter(format!("measurement strength {g}")));
            }
            vec![
                DiffusiveChannel::sigma_z("z1", z_ops[0].clone(), g)?,
                DiffusiveChannel::sigma_z("z2", z_ops[1].clone(), g)?,
            ]
        }
    };
    Ok(SwapModel {
        model,
        swap,
        z_ops,
        channels,
    })
}

/// Long-time state `(ρ0 + Sρ0S)/2` of the swap model.
pub fn swap_stationary(rho0: &DensityMatrix) -> Result<DensityMatrix> {
    let s = swap_operator(2)?;
    if rho0.space() != s.space() {
        return Err(Error::SpaceMismatch("swap model acts on two qubits".into()));
    }
    let m = (rho0.matrix() + s.matrix() * rho0.matrix() * s.matrix()) * crate::quantum::c(0.5);
    DensityMatrix::new(rho0.space().clone(), m)
}

/// Exact solution `e^{-γt}[cosh(γt)ρ0 + sinh(γt)Sρ0S]` of the swap model.
pub fn swap_solution(rho0: &DensityMatrix, gamma: f64, t: f64) -> Result<DensityMatrix> {
    let s = swap_operator(2)?;
    if rho0.space() != s.space() {
        return Err(Error::SpaceMismatch("swap model acts on two qubits".into()));
    }
    let gt = gamma * t;
    // e^{-x}cosh x and e^{-x}sinh x without overflow
    let a = 0.5 * (1.0 + (-2.0 * gt).exp());
    let b = 0.5 * (1.0 - (-2.0 * gt).exp());
    let m = rho0.matrix() * crate::quantum::c(a)
        + s.matrix() * rho0.matrix() * s.matrix() * crate::quantum::c(b);
    DensityMatrix::new(rho0.space().clone(), m)
}

/// Output polarisation of a full swap mix: `tanh(β_out ε/2)` is the mean of
/// the input values.
pub fn swap_output_tanh(tanh1: f64, tanh2: f64) -> f64 {
    0.5 * (tanh1 + tanh2)
}

/// Temperature (`k_B = 1`) of a qubit with gap `eps` and `⟨σz⟩ = z < 0`.
pub fn qubit_temperature(z: f64, eps: f64) -> Result<f64> {
    if !(z < 0.0 && z > -1.0) {
        return Err(Error::InvalidState(format!("z = {z} has no positive temperature")));
    }
    Ok(eps / (2.0 * (-z).atanh()))
}

/// High-temperature cooling law `dT₁/dt = −γ(T₁/T₂)(T₁ − T₂)`.
pub fn newton_cooling_rate(gamma: f64, t1: f64, t2: f64) -> f64 {
    -gamma * (t1 / t2) * (t1 - t2)
}
