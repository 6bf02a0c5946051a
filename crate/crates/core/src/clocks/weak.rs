use serde::Serialize;

use super::{ClockEstimate, Convention};
use crate::error::{Error, Result};

fn spread(z1_0: f64, z2_0: f64) -> Result<f64> {
    let d = z1_0 - z2_0;
    if d == 0.0 || !d.is_finite() {
        return Err(Error::InvalidState(format!("degenerate initial condition z1 = z2 = {z1_0}")));
    }
    Ok(d)
}

/// `S(t) = (z₁(t) − z₂(t)) / (z₁(0) − z₂(0))`.
pub fn s_statistic(z1: f64, z2: f64, z1_0: f64, z2_0: f64) -> Result<f64> {
    Ok((z1 - z2) / spread(z1_0, z2_0)?)
}

/// `μ = [(1 − z₁(0)²)² + (1 − z₂(0)²)²] / (z₁(0) − z₂(0))²`.
pub fn mu_coefficient(z1_0: f64, z2_0: f64) -> Result<f64> {
    let d = spread(z1_0, z2_0)?;
    let a = 1.0 - z1_0 * z1_0;
    let b = 1.0 - z2_0 * z2_0;
    Ok((a * a + b * b) / (d * d))
}

/// High-temperature `μ = 2[(ε/2)(1/T₂ − 1/T₁)]⁻²`, from `β₁ε` and `β₂ε`.
pub fn mu_high_t(beta1_eps: f64, beta2_eps: f64) -> Result<f64> {
    let x = 0.5 * (beta2_eps - beta1_eps);
    if x == 0.0 {
        return Err(Error::InvalidState("equal temperatures".into()));
    }
    Ok(2.0 / (x * x))
}

/// Short-time standard deviation of `S`: `2√(μΓt)`.
pub fn delta_s(gamma_meas: f64, t: f64, mu: f64) -> Result<f64> {
    if !(gamma_meas >= 0.0 && t >= 0.0 && mu >= 0.0) {
        return Err(Error::InvalidParameter(format!("Gamma = {gamma_meas}, t = {t}, mu = {mu}")));
    }
    Ok(2.0 * (mu * gamma_meas * t).sqrt())
}

/// `ΔS` expressed through a divergence `D`: `√(8Γt)/D`.
pub fn delta_s_from_divergence(gamma_meas: f64, t: f64, d: f64) -> f64 {
    (8.0 * gamma_meas * t).sqrt() / d
}

/// Kullback–Leibler divergence `Σ p₁ ln(p₁/p₂)` of two distributions.
pub fn kl_divergence(p1: &[f64], p2: &[f64]) -> Result<f64> {
    if p1.len() != p2.len() || p1.is_empty() {
        return Err(Error::InvalidParameter("distributions differ in length".into()));
    }
    for p in [p1, p2] {
        let sum: f64 = p.iter().sum();
        if p.iter().any(|x| !(*x >= 0.0)) || (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("{p:?} is not a distribution")));
        }
    }
    if p2.contains(&0.0) {
        return Err(Error::InvalidParameter("second distribution has a zero entry".into()));
    }
    let d: f64 = p1
        .iter()
        .zip(p2)
        .filter(|(a, _)| **a > 0.0)
        .map(|(a, b)| a * (a / b).ln())
        .sum();
    Ok(d.max(0.0))
}

/// Thermal qubit populations `(p_g, p_e)` at `βε`.
pub fn thermal_populations(beta_eps: f64) -> [f64; 2] {
    let pe = 1.0 / (1.0 + beta_eps.exp());
    [1.0 - pe, pe]
}

/// High-temperature divergence as printed: `(ε/2k_B)(1/T₂ − 1/T₁) = (β₂ε − β₁ε)/2`.
pub fn kl_high_t(beta1_eps: f64, beta2_eps: f64) -> f64 {
    0.5 * (beta2_eps - beta1_eps)
}

/// Elapsed time from an observed `S`.
///
/// `Derived` inverts the mean law `S̄ = 1 − 2γt`: `(1 − S)/(2γ)`.
/// `Printed` uses `(1 − S)/γ`. `sigma_t` is `ΔS` divided by the same factor
/// and is omitted when `delta_s` is `None`.
pub fn t_from_s(s: f64, gamma: f64, delta_s: Option<f64>, convention: Convention) -> Result<ClockEstimate> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!("gamma = {gamma}")));
    }
    let (factor, id) = match convention {
        Convention::Derived => (2.0 * gamma, "t-from-s-derived"),
        Convention::Printed => (gamma, "t-from-s-printed"),
    };
    let mut inputs = vec![("s", s), ("gamma", gamma)];
    if let Some(ds) = delta_s {
        inputs.push(("delta_s", ds));
    }
    Ok(ClockEstimate::new(id, Some((1.0 - s) / factor), delta_s.map(|d| d / factor), &inputs))
}

/// Outcome of comparing the clock signal `2γt` with the noise `ΔS(t)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeReport {
    pub gamma_meas: f64,
    pub gamma: f64,
    pub divergence: f64,
    pub times: Vec<f64>,
    pub signal: Vec<f64>,
    pub noise: Vec<f64>,
    /// Signal above noise at every grid time.
    pub good_clock: bool,
    /// Smallest `D` for which the signal beats the noise on the whole grid.
    pub threshold_divergence: f64,
    /// `√(2Γ/γ) ≫ D` read as `√(2Γ/γ) > 10 D`.
    pub printed_inequality: bool,
    /// `D > 10 √(2Γ/γ)`.
    pub reversed_inequality: bool,
    pub printed_matches: bool,
    pub reversed_matches: bool,
}

/// Scan `t_grid` with `ΔS(t) = √(8Γt)/D` and report which reading of the
/// regime condition agrees with the direct comparison.
pub fn regime_check(gamma_meas: f64, gamma: f64, d: f64, t_grid: &[f64]) -> Result<RegimeReport> {
    for (name, v) in [("Gamma", gamma_meas), ("gamma", gamma)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter(format!("{name} = {v}")));
        }
    }
    if !(d >= 0.0) || t_grid.is_empty() || t_grid.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::InvalidParameter("need D >= 0 and a non-empty positive time grid".into()));
    }
    let signal: Vec<f64> = t_grid.iter().map(|t| 2.0 * gamma * t).collect();
    let noise: Vec<f64> = t_grid.iter().map(|t| delta_s_from_divergence(gamma_meas, *t, d)).collect();
    let good_clock = signal.iter().zip(&noise).all(|(s, n)| s > n);
    // 2γt > √(8Γt)/D  ⇔  D > √(8Γt)/(2γt), hardest at the earliest time
    let threshold_divergence = t_grid
        .iter()
        .map(|t| (8.0 * gamma_meas * t).sqrt() / (2.0 * gamma * t))
        .fold(0.0, f64::max);
    let scale = (2.0 * gamma_meas / gamma).sqrt();
    let printed_inequality = scale > 10.0 * d;
    let reversed_inequality = d > 10.0 * scale;
    Ok(RegimeReport {
        gamma_meas,
        gamma,
        divergence: d,
        times: t_grid.to_vec(),
        signal,
        noise,
        good_clock,
        threshold_divergence,
        printed_inequality,
        reversed_inequality,
        printed_matches: printed_inequality == good_clock,
        reversed_matches: reversed_inequality == good_clock,
    })
}
