use super::{ClockEstimate, Convention};
use crate::error::{Error, Result};
use crate::trajectories::TelegraphRecord;

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::InvalidParameter(format!("{name} = {v} must be positive")));
    }
    Ok(())
}

/// Poisson-count clock: `t = N/γ` with standard error `√N/γ`.
pub fn radiocarbon_estimate(count: u64, gamma: f64) -> Result<ClockEstimate> {
    positive("gamma", gamma)?;
    let n = count as f64;
    Ok(ClockEstimate::new(
        "radiocarbon",
        Some(n / gamma),
        Some(n.sqrt() / gamma),
        &[("count", n), ("gamma", gamma)],
    ))
}

/// Predicted relative error `1/√(γt)` of the count clock.
pub fn radiocarbon_relative_error(gamma_t: f64) -> f64 {
    1.0 / gamma_t.sqrt()
}

/// Mean waiting time `1/(γn̄)` before the first upward transition.
///
/// A single exponential dwell has standard deviation equal to its mean.
/// `n̄ = 0` gives the undefined sentinel since no upward jump ever happens.
pub fn dwell_time_estimate(gamma: f64, nbar: f64) -> Result<ClockEstimate> {
    positive("gamma", gamma)?;
    if !(nbar >= 0.0 && nbar.is_finite()) {
        return Err(Error::InvalidParameter(format!("nbar = {nbar}")));
    }
    let t = (nbar > 0.0).then(|| 1.0 / (gamma * nbar));
    Ok(ClockEstimate::new("dwell-time", t, t, &[("gamma", gamma), ("nbar", nbar)]))
}

/// Probability that no upward transition has happened by `t`: `e^{−γn̄t}`.
pub fn dwell_survival(gamma: f64, nbar: f64, t: f64) -> f64 {
    (-gamma * nbar * t).exp()
}

/// High-temperature dwell time `ε/(γ k_B T)` in units with `k_B = 1`.
pub fn dwell_time_high_t(eps: f64, gamma: f64, temperature: f64) -> Result<f64> {
    positive("gamma", gamma)?;
    positive("temperature", temperature)?;
    Ok(eps / (gamma * temperature))
}

/// Converse estimate `T = ε/(γ k_B t)` with `k_B = 1`.
pub fn temperature_estimate(t: f64, eps: f64, gamma: f64) -> Result<f64> {
    positive("t", t)?;
    positive("gamma", gamma)?;
    Ok(eps / (gamma * t))
}

/// First-order error of the temperature estimate given an error `dt` in `t`.
///
/// Since `T t` is fixed, `δT/T = −δt/t`: the two relative errors sum to zero.
pub fn temperature_error(t: f64, dt: f64, eps: f64, gamma: f64) -> Result<(f64, f64)> {
    let temp = temperature_estimate(t, eps, gamma)?;
    Ok((temp, -temp * dt / t))
}

/// Maximum-likelihood mean dwell from completed exponential stays.
///
/// `censored` is the time already spent in an unfinished stay. The rate MLE
/// is `n / (Σ dwells + censored)`; its inverse is reported with error
/// `mean/√n`. No completed stay gives the undefined sentinel.
pub fn dwell_time_mle(dwells: &[f64], censored: f64) -> Result<ClockEstimate> {
    if dwells.iter().any(|d| !(*d >= 0.0 && d.is_finite())) || !(censored >= 0.0) {
        return Err(Error::InvalidParameter("dwell times must be non-negative".into()));
    }
    let n = dwells.len() as f64;
    let exposure = dwells.iter().sum::<f64>() + censored;
    let (t, s) = if dwells.is_empty() {
        (None, None)
    } else {
        let mean = exposure / n;
        (Some(mean), Some(mean / n.sqrt()))
    };
    Ok(ClockEstimate::new("dwell-time-mle", t, s, &[("dwells", n), ("exposure", exposure)]))
}

/// Dwell-time MLE for the stays at `value` of a telegraph record.
pub fn dwell_time_from_record(record: &TelegraphRecord, value: i8) -> Result<ClockEstimate> {
    let dwells = record.dwell_times(value);
    let censored = record.exposure(value) - dwells.iter().sum::<f64>();
    dwell_time_mle(&dwells, censored.max(0.0))
}

/// Elapsed time from the number of never-swapped pairs.
///
/// `Derived`: the survival law `N_t = N_0 e^{−γt}` inverted, `ln(N_0/N_t)/γ`.
/// `Printed`: `ln(1 − N_0/N_t)/γ` as printed, which has no real value for
/// `N_t ≤ N_0` and returns the undefined sentinel.
/// The error is the Poisson law `t/√(γt)`.
pub fn ensemble_swap_estimate(n0: u64, nt: u64, gamma: f64, convention: Convention) -> Result<ClockEstimate> {
    positive("gamma", gamma)?;
    if nt == 0 || nt > n0 {
        return Err(Error::InvalidParameter(format!("need 0 < Nt <= N0, got Nt = {nt}, N0 = {n0}")));
    }
    let ratio = n0 as f64 / nt as f64;
    let t = match convention {
        Convention::Derived => Some(ratio.ln() / gamma),
        Convention::Printed => {
            let arg = 1.0 - ratio;
            (arg > 0.0).then(|| arg.ln() / gamma)
        }
    };
    let sigma = t.map(|t| if t > 0.0 { t / (gamma * t).sqrt() } else { 0.0 });
    let id = match convention {
        Convention::Derived => "ensemble-swap-derived",
        Convention::Printed => "ensemble-swap-printed",
    };
    Ok(ClockEstimate::new(id, t, sigma, &[("n0", n0 as f64), ("nt", nt as f64), ("gamma", gamma)]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectories::{simulate_telegraph, SeedSpec};

    #[test]
    fn radiocarbon_examples() {
        let e = radiocarbon_estimate(0, 1.0).unwrap();
        assert_eq!(e.t_est, Some(0.0));
        let e = radiocarbon_estimate(100, 2.0).unwrap();
        assert_eq!(e.t_est, Some(50.0));
        assert!((e.relative_error().unwrap() - 0.1).abs() < 1e-15);
        assert!((radiocarbon_relative_error(100.0) - 0.1).abs() < 1e-15);
        assert!(radiocarbon_estimate(1, 0.0).is_err());
    }

    #[test]
    fn dwell_and_temperature_duality() {
        let e = dwell_time_estimate(1.0, 2.0).unwrap();
        assert_eq!(e.t_est, Some(0.5));
        assert!(!dwell_time_estimate(1.0, 0.0).unwrap().is_defined());
        let t = dwell_time_high_t(0.3, 2.0, 5.0).unwrap();
        let temp = temperature_estimate(t, 0.3, 2.0).unwrap();
        assert!((temp - 5.0).abs() < 1e-14);
        assert!((t * temp - 0.3 / 2.0).abs() < 1e-15);
        let (temp, dtemp) = temperature_error(t, 0.01 * t, 0.3, 2.0).unwrap();
        assert!((0.01 + dtemp / temp).abs() < 1e-15);
    }

    #[test]
    fn dwell_mle_recovers_rate() {
        // stays at −1 end at rate γn̄ = 2
        let r = simulate_telegraph(2.0, 3.0, Some(-1), 8000.0, SeedSpec::new(21, 0)).unwrap();
        let e = dwell_time_from_record(&r, -1).unwrap();
        let (t, s) = (e.t_est.unwrap(), e.sigma_t.unwrap());
        assert!(r.dwell_times(-1).len() > 5000);
        assert!((t - 0.5).abs() < 3.0 * s, "{t} ± {s}");
        assert!(!dwell_time_mle(&[], 1.0).unwrap().is_defined());
    }

    #[test]
    fn swap_estimate_conventions() {
        let e = ensemble_swap_estimate(1000, 1000, 1.0, Convention::Derived).unwrap();
        assert_eq!(e.t_est, Some(0.0));
        assert_eq!(e.sigma_t, Some(0.0));
        let nt = (1000.0 / std::f64::consts::E).round() as u64;
        let e = ensemble_swap_estimate(1000, nt, 1.0, Convention::Derived).unwrap();
        assert!((e.t_est.unwrap() - 1.0).abs() < 1e-3);
        let p = ensemble_swap_estimate(1000, nt, 1.0, Convention::Printed).unwrap();
        assert!(!p.is_defined());
        assert!(ensemble_swap_estimate(10, 11, 1.0, Convention::Derived).is_err());
        assert!(ensemble_swap_estimate(10, 0, 1.0, Convention::Derived).is_err());
    }
}
